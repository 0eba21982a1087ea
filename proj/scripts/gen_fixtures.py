#!/usr/bin/env python3
"""Regenerates the bundled scenario fixtures under data/.

fixture20: the 20-zone Midtown Manhattan network. Distances are the published
zone-centroid distance table. Arrival rates follow a gravity model: origin mass
is the zone's weekday 8-9am pickup count, destination mass favours business
zones (the morning-rush asymmetry), scaled so the network receives 46377
passengers in expectation over a 10 h episode.

desk5: a 5-zone sub-network (48, 161, 170, 236, 237) with the fixture20 rates
restricted to those zones and rescaled for a 50-vehicle fleet.
"""
import math
import os

LABELS = [48, 68, 100, 107, 140, 141, 142, 143, 161, 162,
          170, 186, 229, 234, 236, 237, 238, 239, 262, 263]

DIST = [
    [0.00, 0.74, 0.18, 0.63, 2.43, 2.09, 0.61, 0.30, 0.84, 1.21, 0.83, 0.32, 1.71, 0.42, 2.29, 1.68, 1.29, 0.88, 3.01, 2.70],
    [0.74, 0.00, 0.78, 1.12, 3.14, 2.81, 1.36, 1.00, 1.55, 1.91, 1.48, 0.52, 2.41, 0.67, 3.03, 2.40, 2.03, 1.62, 3.73, 3.43],
    [0.18, 0.78, 0.00, 0.46, 2.36, 2.03, 0.63, 0.44, 0.77, 1.14, 0.72, 0.27, 1.63, 0.28, 2.25, 1.63, 1.31, 0.91, 2.95, 2.65],
    [0.63, 1.12, 0.46, 0.00, 2.10, 1.78, 0.72, 0.79, 0.60, 0.89, 0.44, 0.62, 1.36, 0.45, 2.05, 1.41, 1.29, 0.97, 2.70, 2.42],
    [2.43, 3.14, 2.36, 2.10, 0.00, 0.34, 1.86, 2.28, 1.59, 1.23, 1.68, 2.62, 0.74, 2.51, 0.33, 0.76, 1.36, 1.69, 0.60, 0.36],
    [2.09, 2.81, 2.03, 1.78, 0.34, 0.00, 1.52, 1.94, 1.26, 0.90, 1.35, 2.29, 0.43, 2.19, 0.31, 0.42, 1.04, 1.35, 0.92, 0.64],
    [0.61, 1.36, 0.63, 0.72, 1.86, 1.52, 0.00, 0.42, 0.40, 0.71, 0.54, 0.89, 1.18, 0.88, 1.70, 1.10, 0.68, 0.28, 2.42, 2.11],
    [0.30, 1.00, 0.44, 0.79, 2.28, 1.94, 0.42, 0.00, 0.77, 1.12, 0.83, 0.62, 1.60, 0.71, 2.12, 1.53, 1.05, 0.64, 2.84, 2.53],
    [0.84, 1.55, 0.77, 0.60, 1.59, 1.26, 0.40, 0.77, 0.00, 0.37, 0.20, 1.03, 0.87, 0.94, 1.49, 0.86, 0.72, 0.50, 2.18, 1.89],
    [1.21, 1.91, 1.14, 0.89, 1.23, 0.90, 0.71, 1.12, 0.37, 0.00, 0.46, 1.40, 0.50, 1.29, 1.15, 0.52, 0.67, 0.68, 1.82, 1.53],
    [0.83, 1.48, 0.72, 0.44, 1.68, 1.35, 0.54, 0.83, 0.20, 0.46, 0.00, 0.96, 0.94, 0.84, 1.61, 0.97, 0.92, 0.69, 2.27, 1.99],
    [0.32, 0.52, 0.27, 0.62, 2.62, 2.29, 0.89, 0.62, 1.03, 1.40, 0.96, 0.00, 1.89, 0.21, 2.52, 1.89, 1.57, 1.17, 3.22, 2.92],
    [1.71, 2.41, 1.63, 1.36, 0.74, 0.43, 1.18, 1.60, 0.87, 0.50, 0.94, 1.89, 0.00, 1.78, 0.72, 0.23, 0.86, 1.07, 1.34, 1.06],
    [0.42, 0.67, 0.28, 0.45, 2.51, 2.19, 0.88, 0.71, 0.94, 1.29, 0.84, 0.21, 1.78, 0.00, 2.43, 1.80, 1.55, 1.17, 3.11, 2.82],
    [2.29, 3.03, 2.25, 2.05, 0.33, 0.31, 1.70, 2.12, 1.49, 1.15, 1.61, 2.52, 0.72, 2.43, 0.00, 0.64, 1.13, 1.50, 0.73, 0.42],
    [1.68, 2.40, 1.63, 1.41, 0.76, 0.42, 1.10, 1.53, 0.86, 0.52, 0.97, 1.89, 0.23, 1.80, 0.64, 0.00, 0.68, 0.94, 1.33, 1.03],
    [1.29, 2.03, 1.31, 1.29, 1.36, 1.04, 0.68, 1.05, 0.72, 0.67, 0.92, 1.57, 0.86, 1.55, 1.13, 0.68, 0.00, 0.41, 1.86, 1.54],
    [0.88, 1.62, 0.91, 0.97, 1.69, 1.35, 0.28, 0.64, 0.50, 0.68, 0.69, 1.17, 1.07, 1.17, 1.50, 0.94, 0.41, 0.00, 2.22, 1.91],
    [3.01, 3.73, 2.95, 2.70, 0.60, 0.92, 2.42, 2.84, 2.18, 1.82, 2.27, 3.22, 1.34, 3.11, 0.73, 1.33, 1.86, 2.22, 0.00, 0.32],
    [2.70, 3.43, 2.65, 2.42, 0.36, 0.64, 2.11, 2.53, 1.89, 1.53, 1.99, 2.92, 1.06, 2.82, 0.42, 1.03, 1.54, 1.91, 0.32, 0.00],
]

# Weekday 8-9am pickups, first three weeks of December 2019.
PICKUPS = {236: 13243, 237: 11026, 186: 7296, 170: 7182, 141: 6762, 162: 6534,
           140: 6350, 238: 6090, 142: 5669, 229: 5576, 239: 5426, 48: 5221,
           161: 5173, 107: 5126, 263: 4775, 262: 4467, 234: 4166, 68: 3960,
           100: 3856, 143: 3737}

BUSINESS = {48, 68, 100, 107, 161, 162, 170, 186, 229, 234}

EPISODE_SECONDS = 36000
TARGET_ARRIVALS = 46377
SPEED_MPH = 10.0
DECAY_MILES = 2.0


def gravity_rates():
    n = len(LABELS)
    raw = [[0.0] * n for _ in range(n)]
    for i, li in enumerate(LABELS):
        for j, lj in enumerate(LABELS):
            if i == j:
                continue
            attract = 3.0 if lj in BUSINESS else 1.0
            raw[i][j] = PICKUPS[li] * attract * math.exp(-DIST[i][j] / DECAY_MILES)
    total = sum(map(sum, raw))
    scale = TARGET_ARRIVALS / EPISODE_SECONDS / total
    return [[r * scale for r in row] for row in raw]


def write_matrix(path, labels, rows, fmt):
    with open(path, "w") as f:
        f.write("station," + ",".join(str(l) for l in labels) + "\n")
        for label, row in zip(labels, rows):
            f.write(str(label) + "," + ",".join(fmt(x) for x in row) + "\n")


def interarrival(rate):
    return "inf" if rate == 0.0 else repr(1.0 / rate)


def busy_vehicles(rates, dist):
    n = len(rates)
    return sum(rates[i][j] * dist[i][j] / SPEED_MPH * 3600
               for i in range(n) for j in range(n))


def main():
    root = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")
    rates = gravity_rates()

    out20 = os.path.join(root, "fixture20")
    os.makedirs(out20, exist_ok=True)
    write_matrix(os.path.join(out20, "distance.csv"), LABELS, DIST, lambda x: "%.2f" % x)
    write_matrix(os.path.join(out20, "interarrival.csv"), LABELS, rates, interarrival)
    print("fixture20: total rate %.6f /s, occupied-busy vehicles %.1f"
          % (sum(map(sum, rates)), busy_vehicles(rates, DIST)))

    desk_labels = [48, 161, 170, 236, 237]
    idx = [LABELS.index(l) for l in desk_labels]
    sub_rates = [[rates[i][j] for j in idx] for i in idx]
    sub_dist = [[DIST[i][j] for j in idx] for i in idx]
    # Rescale so occupied trips keep roughly 40% of a 50-vehicle fleet busy.
    scale = 0.4 * 50 / busy_vehicles(sub_rates, sub_dist)
    sub_rates = [[r * scale for r in row] for row in sub_rates]
    out5 = os.path.join(root, "desk5")
    os.makedirs(out5, exist_ok=True)
    write_matrix(os.path.join(out5, "distance.csv"), desk_labels, sub_dist, lambda x: "%.2f" % x)
    write_matrix(os.path.join(out5, "interarrival.csv"), desk_labels, sub_rates, interarrival)
    outflow = [sum(row) for row in sub_rates]
    inflow = [sum(sub_rates[i][j] for i in range(5)) for j in range(5)]
    print("desk5: total rate %.6f /s, busy %.1f, net outflow %s"
          % (sum(outflow), busy_vehicles(sub_rates, sub_dist),
             ["%.4f" % (o - i) for o, i in zip(outflow, inflow)]))


if __name__ == "__main__":
    main()
