"""The nine acceptance criteria, each at its stated tolerance and time budget.

Every test records a one-line PASS/FAIL summary (printed in the pytest
terminal summary and on stdout with ``-s``) before asserting.
"""
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from macrolab import adnverify, ensemble
from macrolab import ellipticfem as fe
from macrolab import estimatelab as el
from macrolab import kinetics as kin
from macrolab.cli import main
from macrolab.mesh import gen_mesh

SPHEROID = ("spheroid", 1.0, 1.5)
TRIAXIAL = ("ellipsoid", 1.0, 1.3, 1.7)


def record(n, name, ok, detail):
    key = f"{n} {name}"
    ACCEPTANCE[key] = (bool(ok), detail)
    print(f"ACCEPTANCE {key}: {'PASS' if ok else 'FAIL'} | {detail}")
    assert ok, detail


def test_1_adn_pipeline():
    t = time.perf_counter()
    rep = adnverify.run_pipeline()
    dt = time.perf_counter() - t
    names = {s.name: s.passed for s in rep.steps}
    ok = (rep.passed and rep.final_matches_closed_form and names.get("D=det(l)", False)
          and rep.final_factored == "384*l**8*n3*(t - I*l)**3" and dt < 60)
    record(1, "ADN pipeline", ok,
           f"{len(rep.steps)} steps, all pass={rep.passed}, det(M)={rep.final_factored}, {dt:.1f}s")


def test_2_mutation_robustness(tmp_path):
    muts = adnverify.default_mutations()
    codes = []
    for m in muts:
        codes.append(main(["verify-adn", "--mutate", ":".join(map(str, m)),
                           "--out", str(tmp_path / "m.json")]))
    ok = len(muts) == 10 and all(c == 1 for c in codes)
    record(2, "mutation robustness", ok, f"exit codes {codes}")


def test_3_moment_suite():
    t = time.perf_counter()
    table = kin.moment_suite(kin.default_grid(), tol=1e-12)
    dt = time.perf_counter() - t
    required = ["fact:|v_i|^4", "fact:|v_i|^2", "fact:|v_i|^2|v_j|^2", "basis_chi:orthonormal",
                "B_ij_property:P(A_ij)=0", "P(v_i^3 sqrt(mu))=3chi_i", "test_b:two-form agreement"]
    ok = all(r in table for r in required) and all(v["pass"] for v in table.values()) and dt < 10
    worst = max(v["error"] for v in table.values())
    record(3, "moment suite", ok, f"{len(table)} identities, worst error {worst:.1e}, {dt:.2f}s")


def test_4_transport_identities():
    grid = kin.default_grid()
    rng = np.random.default_rng(4)
    pts = rng.uniform(-0.6, 0.6, size=(3, 3))
    worst = 0.0
    for trial in range(50):
        deg = int(rng.integers(0, 5))
        kind = ("psi_a", "psi_b", "psi_c")[trial % 3]
        phi = [kin.Poly3.random(rng, deg) for _ in range(3)] if kind == "psi_b" else kin.Poly3.random(rng, deg)
        worst = max(worst, kin.transport_identity_check(kind, phi, grid, pts))
    # flat face x1 = const with slip-compatible gradient: d_2 phi^1 = -d_1 phi^2, d_3 phi^1 = -d_1 phi^3
    n = np.array([[1.0, 0.0, 0.0]])
    g = rng.normal(size=(1, 3, 3))
    g[0, 0, 1], g[0, 0, 2] = -g[0, 1, 0], -g[0, 2, 0]
    v = grid.nodes
    even = ((1 + v[:, 1] + 0.5 * v[:, 2] ** 2 + 0.3 * v[:, 0] ** 2) * grid.sqrt_mu)[None]
    odd = ((v[:, 0] * (1 + v[:, 1] ** 2)) * grid.sqrt_mu)[None]
    flat = kin.boundary_vanish_check(g, n, even, grid)["defect"]
    neg = kin.boundary_vanish_check(g, n, odd, grid)["defect"]
    ok = worst <= 1e-10 and flat <= 1e-10 and neg > 1e-6
    record(4, "transport identities", ok,
           f"50 phi worst defect {worst:.1e}; flat face {flat:.1e}; odd control {neg:.2e}")


def test_5_elliptic_suite():
    t = time.perf_counter()
    m2 = gen_mesh("ball", 2)
    basis2 = fe.rigid_basis(m2)
    zero = fe.solve_sym_poisson(m2, np.zeros((m2.nv, 3)), basis2)
    zero_ok = bool(np.all(zero.values == 0))
    sph = gen_mesh(SPHEROID, 1)
    try:
        fe.solve_sym_poisson(sph, fe.rigid_basis(sph).fields[0])
        raises = False
    except fe.IncompatibleSourceError:
        raises = True
    sols, gaps = [], []
    for lv in (2, 3, 4):
        m = gen_mesh("ball", lv)
        b = fe.rigid_basis(m)
        h = fe.compatibility_project(fe.VectorFieldFE.from_function(m, fe.smooth_source), b)
        u = fe.solve_sym_poisson(m, h, b)
        gaps.append(fe.energy_identity(u, h)["relative_gap"])
        sols.append(u)
    order = fe.self_convergence(sols)["order"]
    k3 = fe.korn_constant(gen_mesh("ball", 3))
    k4 = fe.korn_constant(gen_mesh("ball", 4))
    spread = abs(k3 - k4) / k4
    dt = time.perf_counter() - t
    ok = (zero_ok and raises and max(gaps) <= 1e-8 and order >= 0.8 and k3 > 0 and k4 > 0
          and spread <= 0.10 and dt < 600)
    record(5, "elliptic suite", ok,
           f"h=0 ok={zero_ok}, raises={raises}, energy gap {max(gaps):.1e}, order {order:.3f}, "
           f"Korn {k3:.5f}/{k4:.5f} ({100 * spread:.1f}%), {dt:.0f}s")


def test_6_rigid_modes():
    dims, resid = {}, []
    for name, shape, expect in (("ball", "ball", 3), ("spheroid", SPHEROID, 1), ("triaxial", TRIAXIAL, 0)):
        b = fe.rigid_basis(gen_mesh(shape, 2))
        dims[name] = b.dim
        r = np.sort(b.residuals)
        resid.append(bool(np.all(r[:expect] < fe.RIGID_THRESHOLD) and np.all(r[expect:] >= fe.RIGID_THRESHOLD)))
    ok = dims == {"ball": 3, "spheroid": 1, "triaxial": 0} and all(resid)
    record(6, "rigid-mode classification", ok, f"dims {dims}, thresholds respected={all(resid)}")


def test_7_simulator_conservation():
    study = el.drift_refinement_study(gen_mesh(SPHEROID, 1), grids=(8, 12, 16), steps=10)
    rows = study["rows"]
    mass = max(r["drift"]["mass"] for r in rows)
    e = [r["drift"]["energy"] for r in rows]
    a = [r["drift"]["angular_momentum_1"] for r in rows]
    ok = mass < 1e-12 and e[0] > e[1] > e[2] and a[0] > a[1] > a[2]
    record(7, "simulator conservation", ok,
           f"mass drift {mass:.1e}; energy {', '.join(f'{x:.2e}' for x in e)}; "
           f"angular {', '.join(f'{x:.2e}' for x in a)} (8^3, 12^3, 16^3)")


def test_8_estimate_harness():
    t = time.perf_counter()
    rows = [ensemble.member(s) for s in ensemble.ACCEPTANCE_SEEDS]
    verdict = ensemble.check(rows)
    dt = time.perf_counter() - t
    ok = len(rows) == 20 and verdict["passed"] and dt < 1800
    record(8, "estimate harness", ok,
           f"max L2 {max(r['ratio_l2'] for r in rows):.3f} (cap {ensemble.RATIO_CAP_L2:.3f}), "
           f"max L6 {max(r['ratio_l6'] for r in rows):.2e} (cap {ensemble.RATIO_CAP_L6:.2e}), "
           f"max |G|/|f|^2 {max(r['g_ratio'] for r in rows):.3f} (C {ensemble.G_CONSTANT:.3f}), "
           f"exceeding {verdict['exceeding']}, {dt:.0f}s")


def test_9_sigma_coefficients():
    grid = kin.default_grid()
    S = kin.sigma_coeffs(grid).matrices
    sym = float(np.max(np.abs(S - np.transpose(S, (0, 2, 1)))))
    mineig = float(np.min(np.linalg.eigvalsh(S)))
    rng = np.random.default_rng(9)
    rel = 0.0
    for v in rng.normal(scale=1.5, size=(20, 3)):
        oracle = kin.sigma_trace_oracle(v)
        rel = max(rel, abs(np.trace(kin.sigma_at(v)) - oracle) / oracle)
    ok = sym <= 1e-14 and mineig >= -1e-12 and rel <= 1e-6
    record(9, "sigma coefficients", ok,
           f"{grid.size} nodes, asymmetry {sym:.1e}, min eigenvalue {mineig:.2e}, trace rel err {rel:.1e}")
