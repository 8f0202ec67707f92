import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macrolab import kinetics as kin


@pytest.fixture(scope="module")
def grid():
    return kin.default_grid(16)


def normal_moment(k: int) -> int:
    """E[X^k] for a standard normal: (k-1)!! for even k, 0 for odd k."""
    if k % 2:
        return 0
    return math.prod(range(1, k, 2))


# ---------------------------------------------------------------- grid and moments

def test_grid_moments_against_double_factorial_oracle(grid):
    v = grid.nodes
    for a in range(0, 5):
        for b in range(0, 5 - a):
            for c in range(0, 9 - a - b):
                expected = normal_moment(a) * normal_moment(b) * normal_moment(c)
                value = grid.gauss_moment(v[:, 0] ** a * v[:, 1] ** b * v[:, 2] ** c)
                assert abs(value - expected) <= 1e-12 * max(1, expected), (a, b, c)


def test_fact_values(grid):
    v = grid.nodes
    assert abs(grid.gauss_moment(np.ones(grid.size)) - 1) < 1e-13
    assert abs(grid.gauss_moment(v[:, 0] ** 4) - 3) < 1e-12
    assert abs(grid.gauss_moment(v[:, 1] ** 2 * v[:, 2] ** 2) - 1) < 1e-12


def test_chi_examples(grid):
    G = grid.chi.T @ (grid.chi * grid.weights[:, None])
    assert np.max(np.abs(G - np.eye(5))) < 1e-12
    chi = kin.chi_basis(np.array([1.0, 1.0, 1.0]))
    assert abs(chi[4]) < 1e-15
    assert abs(grid.inner(grid.chi[:, 0], grid.chi[:, 0]) - 1) < 1e-12


def test_projection_examples(grid):
    m, Pf = kin.project_P(grid.chi[:, 0], grid)
    assert abs(m.a - 1) < 1e-12 and np.allclose(m.b, 0, atol=1e-12) and abs(m.c) < 1e-12
    A, B = kin.burnett(grid.nodes)
    assert np.max(np.abs(kin.project_P(A[:, 0, 0], grid)[1])) < 1e-12
    for i in range(3):
        Pf = kin.project_P(grid.nodes[:, i] ** 3 * grid.sqrt_mu, grid)[1]
        assert np.max(np.abs(Pf - 3 * grid.chi[:, 1 + i])) < 1e-12


def test_project_rejects_nonfinite(grid):
    f = np.zeros(grid.size)
    f[3] = np.nan
    with pytest.raises(ValueError):
        kin.project_P(f, grid)


def test_burnett_examples(grid):
    A, B = kin.burnett(grid.nodes)
    assert np.max(np.abs(np.trace(A, axis1=1, axis2=2))) < 1e-14
    for i in range(3):
        assert abs(grid.inner(B[:, i], grid.chi[:, 1 + i])) < 1e-12
    assert abs(grid.inner(A[:, 0, 1], grid.nodes[:, 0] * grid.nodes[:, 1] * grid.sqrt_mu) - 1) < 1e-12


def test_moment_suite_passes(grid):
    table = kin.moment_suite(grid)
    failed = [k for k, v in table.items() if not v["pass"]]
    assert not failed
    assert table["fact:|v_i|^4"]["value"] == pytest.approx(3.0, abs=1e-12)


# ---------------------------------------------------------------- properties

coef_arrays = st.lists(st.floats(-3, 3, allow_nan=False), min_size=20, max_size=20)


def random_f(grid, coeffs):
    rng = np.random.default_rng(abs(hash(tuple(coeffs))) % (2 ** 32))
    base = rng.normal(size=grid.size) * grid.sqrt_mu
    poly = sum(c * grid.nodes[:, i % 3] ** (i % 4) for i, c in enumerate(coeffs))
    return base + poly * grid.sqrt_mu


@given(coef_arrays)
@settings(max_examples=25, deadline=None)
def test_projection_idempotent_and_orthogonal(coeffs):
    grid = kin.default_grid(16)
    f = random_f(grid, coeffs)
    P1 = kin.project_P(f, grid)[1]
    P2 = kin.project_P(P1, grid)[1]
    scale = 1 + np.max(np.abs(f))
    assert np.max(np.abs(P2 - P1)) <= 1e-12 * scale
    assert np.max(np.abs(kin.moments(f - P1, grid))) <= 1e-12 * scale


@given(coef_arrays)
@settings(max_examples=25, deadline=None)
def test_bgk_structure(coeffs):
    grid = kin.default_grid(16)
    f = random_f(grid, coeffs)
    Lf = kin.bgk_apply(f, grid)
    scale = 1 + grid.inner(f, f)
    assert grid.inner(Lf, f) >= -1e-12 * scale
    assert np.max(np.abs(kin.moments(Lf, grid))) <= 1e-12 * scale
    # null space
    assert np.max(np.abs(kin.bgk_apply(grid.chi.T, grid))) < 1e-12


vectors = st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=3).map(np.array)


@given(vectors, vectors)
def test_reflection_involution(v, n):
    if np.linalg.norm(n) < 1e-3:
        n = np.array([0.0, 0.0, 1.0])
    n = n / np.linalg.norm(n)
    r = kin.specular_reflect(v, n)
    assert np.isclose(np.linalg.norm(r), np.linalg.norm(v), rtol=1e-13, atol=1e-12)
    assert np.isclose(r @ n, -(v @ n), atol=1e-11)
    assert np.allclose(kin.specular_reflect(r, n), v, atol=1e-11)


def test_reflection_examples():
    assert np.allclose(kin.specular_reflect([1.0, 2.0, 3.0], [1.0, 0.0, 0.0]), [-1, 2, 3])
    assert np.allclose(kin.specular_reflect([0.0, 2.0, 3.0], [1.0, 0.0, 0.0]), [0, 2, 3])
    with pytest.raises(ValueError):
        kin.specular_reflect([1.0, 0, 0], [2.0, 0, 0])


def test_bgk_examples(grid):
    A, _ = kin.burnett(grid.nodes)
    a11 = A[:, 0, 0]
    assert np.max(np.abs(kin.bgk_apply(a11, grid) - kin.nu(grid.nodes) * a11)) < 1e-12


def test_plain_nu_times_micro_is_not_microscopic(grid):
    # nu (I - P) f has a macroscopic component for general f, so the
    # symmetrised form (I - P) nu (I - P) is needed for P L = 0
    f = (grid.speed2 - 3.0) ** 2 * grid.sqrt_mu
    plain = kin.nu(grid.nodes) * kin.micro(f, grid)
    assert np.max(np.abs(kin.moments(plain, grid))) > 1e-2
    assert np.max(np.abs(kin.moments(kin.bgk_apply(f, grid), grid))) < 1e-12


def test_implicit_bgk_solves_system(grid):
    rng = np.random.default_rng(3)
    f = rng.normal(size=(4, grid.size)) * grid.sqrt_mu
    for kappa in (0.0, 0.3, 50.0):
        x = kin.ImplicitBGK(grid, kappa).solve(f)
        resid = x + kappa * kin.bgk_apply(x, grid) - f
        assert np.max(np.abs(resid)) < 1e-10 * (1 + kappa)
        # macroscopic part untouched
        assert np.allclose(kin.moments(x, grid), kin.moments(f, grid), atol=1e-12)


# ---------------------------------------------------------------- test functions

def test_test_function_examples(grid):
    tf = kin.build_test_function("psi_b", np.zeros((2, 3, 3)), grid)
    assert np.all(tf.values() == 0)
    g = np.array([[1.0, -2.0, 0.5]])
    tf = kin.build_test_function("psi_a", g, grid)
    _, B = kin.burnett(grid.nodes)
    expected = g @ (math.sqrt(10) * B - 5 * grid.chi[:, 1:4]).T
    assert np.max(np.abs(tf.values() - expected)) < 1e-12
    with pytest.raises(ValueError):
        kin.build_test_function("psi_b", None, grid)
    with pytest.raises(ValueError):
        kin.build_test_function("psi_q", g, grid)


def test_psi_b_two_forms_agree(grid):
    grad = np.random.default_rng(11).normal(size=(10, 3, 3))
    tf = kin.build_test_function("psi_b", grad, grid)
    assert np.max(np.abs(tf.values() - tf.values_expanded())) < 1e-12


def test_transport_identity_linear_phi_is_zero(grid):
    lin = kin.Poly3({(1, 0, 0): 2.0, (0, 0, 1): -1.0, (0, 0, 0): 3.0})
    assert kin.transport_identity_check("psi_a", lin, grid, [[0.1, 0.2, 0.3]]) == 0.0


def test_transport_identity_x1_squared(grid):
    phi = [kin.Poly3({(2, 0, 0): 1.0}), kin.Poly3(), kin.Poly3()]
    assert kin.transport_identity_check("psi_b", phi, grid, [[0.3, -0.2, 0.5]]) <= 1e-10


def test_transport_identities_random(grid):
    rng = np.random.default_rng(2024)
    pts = rng.uniform(-0.6, 0.6, size=(3, 3))
    worst = 0.0
    for trial in range(30):
        deg = int(rng.integers(2, 5))
        kind = ("psi_a", "psi_b", "psi_c")[trial % 3]
        if kind == "psi_b":
            phi = [kin.Poly3.random(rng, deg) for _ in range(3)]
        else:
            phi = kin.Poly3.random(rng, deg)
        worst = max(worst, kin.transport_identity_check(kind, phi, grid, pts))
    assert worst <= 1e-10


def _flat_face_data(grid, rng, parity):
    n = np.array([1.0, 0.0, 0.0])
    g = rng.normal(size=(3, 3))
    g[0, 1] = -g[1, 0]  # d_2 phi^1 = -d_1 phi^2
    g[0, 2] = -g[2, 0]  # d_3 phi^1 = -d_1 phi^3
    v = grid.nodes
    p = 1 + v[:, 1] + 0.5 * v[:, 2] ** 2 + 0.3 * v[:, 0] ** 2
    if parity == "odd":
        p = p * v[:, 0]
    return g[None], n[None], (p * grid.sqrt_mu)[None]


def test_boundary_vanish_flat_face(grid):
    rng = np.random.default_rng(5)
    g, n, f = _flat_face_data(grid, rng, "even")
    out = kin.boundary_vanish_check(g, n, f, grid)
    assert out["traction_residual"] < 1e-14
    assert out["defect"] <= 1e-10


def test_boundary_vanish_negative_control(grid):
    rng = np.random.default_rng(5)
    g, n, f = _flat_face_data(grid, rng, "odd")
    assert kin.boundary_vanish_check(g, n, f, grid)["defect"] > 1e-3


def test_boundary_vanish_zero_gradient(grid):
    f = grid.sqrt_mu[None]
    out = kin.boundary_vanish_check(np.zeros((1, 3, 3)), np.array([[0.0, 0.6, 0.8]]), f, grid)
    assert out["defect"] == 0.0


# ---------------------------------------------------------------- sigma

def test_sigma_isotropic_at_origin():
    s = kin.sigma_at(np.zeros(3))
    assert np.allclose(s, s[0, 0] * np.eye(3), atol=1e-15)


def test_sigma_symmetric_psd_on_grid():
    grid = kin.default_grid(8)
    sig = kin.sigma_coeffs(grid)
    S = sig.matrices
    assert np.max(np.abs(S - np.transpose(S, (0, 2, 1)))) < 1e-15
    assert np.min(np.linalg.eigvalsh(S)) >= -1e-12
    assert np.all(np.einsum("ki,kij,kj->k", grid.nodes, S, grid.nodes) >= -1e-12)


def test_sigma_trace_identity_random_velocities():
    rng = np.random.default_rng(7)
    for v in rng.normal(scale=1.5, size=(20, 3)):
        s = kin.sigma_at(v)
        oracle = kin.sigma_trace_oracle(v)
        assert abs(np.trace(s) - oracle) <= 1e-6 * oracle
        assert np.min(np.linalg.eigvalsh(s)) >= -1e-12


def test_sigma_norm_examples():
    grid = kin.default_grid(8)
    sig = kin.sigma_coeffs(grid)
    assert kin.sigma_norm(np.zeros(grid.size), grid, sig) == 0.0
    val = kin.sigma_norm(grid.chi[:, 0], grid, sig)
    assert np.isfinite(val) and val > 0


def test_sigma_lower_bound_calibrated():
    grid = kin.default_grid(8)
    sig = kin.sigma_coeffs(grid)

    def ratio(seed):
        rng = np.random.default_rng(seed)
        poly = sum(rng.normal() * grid.nodes[:, i % 3] ** (i % 3) for i in range(6))
        f = kin.micro(poly * grid.sqrt_mu, grid)
        return math.sqrt(kin.mu_quarter_norm2(f, grid) / kin.sigma_norm(f, grid, sig))

    cap = 1.5 * max(ratio(s) for s in range(100, 105))  # calibration run
    assert all(ratio(s) <= cap for s in range(20))


def test_velocity_gradient_exact_for_hermite_functions(grid):
    v = grid.nodes
    f = (1 + v[:, 0] * v[:, 1] ** 2) * grid.sqrt_mu
    d = kin.velocity_gradient(f, grid)
    exact0 = (v[:, 1] ** 2 - 0.5 * v[:, 0] * (1 + v[:, 0] * v[:, 1] ** 2)) * grid.sqrt_mu
    assert np.max(np.abs(d[:, 0] - exact0)) < 1e-9
