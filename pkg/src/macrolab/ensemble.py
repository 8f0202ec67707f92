"""Frozen estimate ensemble and its one-time calibration.

Protocol
--------
* Every ensemble member runs on the unit ball at refinement level 1 with an
  8^3 velocity grid, eps = 1 and (s, k) = (0, 0), up to t = 0.2 with eight
  equally spaced snapshot intervals.
* Member ``seed`` uses preset ``PRESETS[seed % 3]`` and forcing
  ``FORCINGS[seed % 3]`` so that the ensemble covers all initial-data and
  forcing presets.
* ``calibrate()`` runs the calibration seeds 1000-1009, takes the largest
  L2 ratio, L6 ratio and |G| / ||f||^2 seen at any snapshot, and multiplies
  them by ``SAFETY``.  The results were frozen below once and are never
  recomputed by the checks; the acceptance ensemble uses seeds 0-19, disjoint
  from the calibration seeds.
"""
from __future__ import annotations

from . import estimatelab as el
from .kinetics import VelocityGrid
from .mesh import gen_mesh

CONFIG = {"shape": "ball", "refine": 1, "grid": 8, "eps": 1.0, "s": 0, "k": 0,
          "t_end": 0.2, "n_snapshots": 8}
CALIBRATION_SEEDS = tuple(range(1000, 1010))
ACCEPTANCE_SEEDS = tuple(range(20))
SAFETY = 2.0

# frozen output of calibrate() (see module docstring); do not edit by hand
RATIO_CAP_L2 = 13.638051923175135
RATIO_CAP_L6 = 1.3264930308889136e-05
G_CONSTANT = 1.0824504123031071


def member(seed: int, refine: int | None = None) -> dict:
    """Run one ensemble member and return its ratios and the worst G ratio."""
    mesh = gen_mesh(CONFIG["shape"], CONFIG["refine"] if refine is None else refine)
    grid = VelocityGrid(CONFIG["grid"])
    preset = el.PRESETS[seed % 3]
    forcing = el.FORCINGS[seed % 3]
    run = el.simulate(mesh, grid, 0, seed=seed, preset=preset, forcing=forcing,
                      eps=CONFIG["eps"], s=CONFIG["s"], k=CONFIG["k"],
                      t_end=CONFIG["t_end"], n_snapshots=CONFIG["n_snapshots"])
    l2 = el.evaluate_l2_estimate(run.snapshots, run.forcing)
    l6 = el.evaluate_l6_estimate(run.snapshots, run.forcing)
    g_ratio = max(abs(g.G) / g.f_norm2 for g in l2.g_samples)
    return {"seed": seed, "preset": preset, "forcing": forcing, "ratio_l2": l2.ratio,
            "ratio_l6": l6.ratio, "g_ratio": g_ratio}


def calibrate(seeds=CALIBRATION_SEEDS) -> dict:
    rows = [member(s) for s in seeds]
    return {"RATIO_CAP_L2": SAFETY * max(r["ratio_l2"] for r in rows),
            "RATIO_CAP_L6": SAFETY * max(r["ratio_l6"] for r in rows),
            "G_CONSTANT": SAFETY * max(r["g_ratio"] for r in rows),
            "rows": rows}


def check(rows) -> dict:
    """Compare ensemble rows against the frozen caps."""
    if RATIO_CAP_L2 is None:
        raise RuntimeError("calibration constants have not been frozen")
    bad = [r["seed"] for r in rows
           if not (r["ratio_l2"] <= RATIO_CAP_L2 and r["ratio_l6"] <= RATIO_CAP_L6
                   and r["g_ratio"] <= G_CONSTANT)]
    finite = all(abs(r["ratio_l2"]) < float("inf") and abs(r["ratio_l6"]) < float("inf") for r in rows)
    return {"passed": finite and not bad, "exceeding": bad, "finite": finite}
