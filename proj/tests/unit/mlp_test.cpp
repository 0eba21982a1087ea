#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "fleet/adam.hpp"
#include "fleet/error.hpp"
#include "fleet/mlp.hpp"
#include "fleet/weights.hpp"
#include "oracles.hpp"

namespace fleet {
namespace {

TEST(Mlp, ZeroWeightsEmitOutputBias) {
  Mlp net({3, 4, 2});
  net.bias(1)(0) = 0.5;
  net.bias(1)(1) = -2.0;
  net.bias(0).setConstant(7.0);  // hidden bias only reaches a zero output weight
  EXPECT_EQ(net.forward(std::vector<double>{1.0, 2.0, 3.0}), (std::vector<double>{0.5, -2.0}));
}

TEST(Mlp, UnitChainIsTanh) {
  Mlp net({1, 1, 1});
  net.weight(0)(0, 0) = 1.0;
  net.weight(1)(0, 0) = 1.0;
  for (double x : {-2.0, -0.3, 0.0, 0.9}) {
    EXPECT_DOUBLE_EQ(net.forward(std::vector<double>{x})[0], std::tanh(x));
  }
}

TEST(Mlp, ForwardMatchesScalarReference) {
  Rng rng(2);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<std::size_t> sizes{5, 7, 6, 3};
    const Mlp net = Mlp::uniform(sizes, rng, 0.5);
    std::vector<double> x(5);
    for (auto& v : x) v = normal(rng);
    const auto got = net.forward(x);
    const auto want = testing::mlp_forward_reference(sizes, net.parameters(), true, x);
    for (std::size_t o = 0; o < 3; ++o) EXPECT_NEAR(got[o], want[o], 1e-12);
  }
}

TEST(Mlp, BatchForwardMatchesPerSample) {
  Rng rng(3);
  const Mlp net = Mlp::uniform({4, 8, 2}, rng);
  Eigen::MatrixXd batch = Eigen::MatrixXd::Random(4, 6);
  const Eigen::MatrixXd out = net.forward(batch);
  for (Eigen::Index b = 0; b < 6; ++b) {
    const auto single = net.forward(std::vector<double>(batch.col(b).data(), batch.col(b).data() + 4));
    EXPECT_NEAR(out(0, b), single[0], 1e-14);
    EXPECT_NEAR(out(1, b), single[1], 1e-14);
  }
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
  Rng rng(5);
  std::uniform_int_distribution<std::size_t> width(1, 6);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::size_t> sizes{width(rng), width(rng), width(rng), width(rng)};
    const Mlp net = Mlp::uniform(sizes, rng, 1.0);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(sizes.front()), 3);
    const Eigen::MatrixXd c = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(sizes.back()), 3);
    EXPECT_LT(testing::finite_difference_check(net, x, c).max_rel_error, 1e-4);
  }
}

TEST(Mlp, ZeroOutputGradientGivesZeroGradient) {
  Rng rng(6);
  const Mlp net = Mlp::uniform({3, 5, 2}, rng);
  Mlp::Cache cache;
  net.forward(Eigen::MatrixXd::Random(3, 4), &cache);
  std::vector<double> grad(net.parameter_count(), 1.0);
  std::fill(grad.begin(), grad.end(), 0.0);
  net.backward(cache, Eigen::MatrixXd::Zero(2, 4), grad);
  for (double g : grad) EXPECT_EQ(g, 0.0);
}

TEST(Mlp, LinearNetGradientIsOuterProduct) {
  Rng rng(7);
  const Mlp net = Mlp::uniform({3, 2}, rng, 1.0, Activation::kIdentity);
  Eigen::MatrixXd x(3, 1);
  x << 0.5, -1.0, 2.0;
  Eigen::MatrixXd g(2, 1);
  g << 3.0, -0.25;
  Mlp::Cache cache;
  net.forward(x, &cache);
  std::vector<double> grad(net.parameter_count(), 0.0);
  net.backward(cache, g, grad);
  for (int o = 0; o < 2; ++o) {
    for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(grad[static_cast<std::size_t>(o * 3 + i)], g(o, 0) * x(i, 0));
    EXPECT_DOUBLE_EQ(grad[static_cast<std::size_t>(6 + o)], g(o, 0));
  }
}

TEST(Mlp, StaleCacheIsRejected) {
  Rng rng(8);
  Mlp net = Mlp::uniform({2, 2}, rng);
  Mlp::Cache cache;
  net.forward(Eigen::MatrixXd::Ones(2, 1), &cache);
  net.mutable_parameters()[0] += 1.0;
  std::vector<double> grad(net.parameter_count(), 0.0);
  EXPECT_THROW(net.backward(cache, Eigen::MatrixXd::Ones(2, 1), grad), Error);
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  std::vector<double> p{1.0, 1.0, 1.0};
  const std::vector<double> g{0.3, -5.0, 1e-3};
  Adam opt(3, {0.01});
  ASSERT_TRUE(opt.step(p, g));
  EXPECT_NEAR(p[0], 1.0 - 0.01, 1e-9);
  EXPECT_NEAR(p[1], 1.0 + 0.01, 1e-9);
  EXPECT_NEAR(p[2], 1.0 - 0.01, 1e-7);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  std::vector<double> p{0.25, -4.0};
  Adam opt(2);
  for (int s = 0; s < 50; ++s) opt.step(p, std::vector<double>{0.0, 0.0});
  EXPECT_EQ(p, (std::vector<double>{0.25, -4.0}));
}

TEST(Adam, ConstantGradientStepApproachesLearningRate) {
  std::vector<double> p{0.0};
  Adam opt(1, {0.001});
  double last = 0.0;
  for (int s = 0; s < 5000; ++s) {
    const double before = p[0];
    opt.step(p, std::vector<double>{2.0});
    last = before - p[0];
  }
  EXPECT_NEAR(last, 0.001, 1e-9);
}

TEST(Adam, NonFiniteGradientIsSkipped) {
  std::vector<double> p{1.0, 2.0};
  Adam opt(2);
  EXPECT_FALSE(opt.step(p, std::vector<double>{1.0, std::nan("")}));
  EXPECT_EQ(p, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(opt.steps(), 0u);
}

TEST(Weights, RoundTripIsBitwise) {
  Rng rng(10);
  const Mlp net = Mlp::uniform({5, 9, 9, 5}, rng, 0.01);
  std::stringstream buf;
  write_weights(buf, net);
  const Mlp back = read_weights(buf);
  EXPECT_EQ(back.layer_sizes(), net.layer_sizes());
  const std::vector<double> x{0.1, -0.2, 0.3, 0.0, 1.0};
  EXPECT_EQ(back.forward(x), net.forward(x));
  EXPECT_TRUE(std::equal(back.parameters().begin(), back.parameters().end(), net.parameters().begin()));
}

TEST(Weights, TruncatedFileFails) {
  Rng rng(11);
  std::stringstream buf;
  write_weights(buf, Mlp::uniform({3, 4, 3}, rng));
  const std::string bytes = buf.str();
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, bytes.size() - 1}) {
    std::stringstream in(bytes.substr(0, cut));
    EXPECT_THROW(read_weights(in), Error) << "cut at " << cut;
  }
}

TEST(Weights, VersionMismatchFails) {
  Rng rng(12);
  std::stringstream buf;
  write_weights(buf, Mlp::uniform({2, 2}, rng));
  std::string bytes = buf.str();
  bytes[4] = static_cast<char>(kWeightsVersion + 1);
  std::stringstream in(bytes);
  try {
    read_weights(in);
    FAIL() << "expected a version error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos) << e.what();
  }
  std::stringstream bad_magic("XXXX");
  EXPECT_THROW(read_weights(bad_magic), Error);
}

TEST(Weights, MissingFileIsIoError) {
  try {
    load_weights("/nonexistent/policy.weights");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

}  // namespace
}  // namespace fleet
