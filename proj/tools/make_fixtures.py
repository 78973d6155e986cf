#!/usr/bin/env python3
"""Regenerates configs/fixtures: random action-set families and the vertices
of their weighted Minkowski average, found with scipy's ConvexHull on the
full sum enumeration."""

import itertools
import pathlib
import sys

import numpy as np
from scipy.spatial import ConvexHull

OUT = pathlib.Path(__file__).resolve().parent.parent / "configs" / "fixtures"


def fmt(x):
    return "%.17g" % x


def write_points(f, pts, weight=1.0):
    f.write("points %s %d %d\n" % (fmt(weight), len(pts), len(pts[0])))
    for p in pts:
        f.write(" ".join(fmt(v) for v in p) + "\n")


def average_vertices(sets, weights):
    sums = []
    for choice in itertools.product(*sets):
        sums.append(sum(w * np.asarray(a) for w, a in zip(weights, choice)))
    sums = np.array(sums)
    hull = ConvexHull(sums)
    return sums[sorted(set(hull.vertices))]


def main():
    rng = np.random.default_rng(20240611)
    specs = [("square_pair", 2, 2), ("triangles", 2, 3), ("cube3", 3, 3), ("mixed4", 4, 3)]
    OUT.mkdir(parents=True, exist_ok=True)
    for name, d, nsets in specs:
        sets = []
        for _ in range(nsets):
            k = rng.integers(d + 1, d + 4)
            sets.append(rng.random((k, d)).round(6).tolist())
        weights = rng.random(nsets) + 0.2
        weights = (weights / weights.sum()).tolist()
        verts = average_vertices(sets, weights)
        with open(OUT / (name + ".sets"), "w") as f:
            f.write("# %s: %d sets in dimension %d\n" % (name, nsets, d))
            for s, w in zip(sets, weights):
                write_points(f, s, w)
        with open(OUT / (name + ".vertices"), "w") as f:
            f.write("# vertices of the weighted average of %s.sets\n" % name)
            write_points(f, verts.tolist())
    return 0


if __name__ == "__main__":
    sys.exit(main())
