import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macrolab import ellipticfem as fe
from macrolab.mesh import gen_mesh, random_rotation

BALL = "ball"
SPHEROID = ("spheroid", 1.0, 1.5)
TRIAXIAL = ("ellipsoid", 1.0, 1.3, 1.7)


@pytest.fixture(scope="module")
def spheroid():
    m = gen_mesh(SPHEROID, 1)
    return m, fe.rigid_basis(m)


@pytest.fixture(scope="module")
def ball2():
    m = gen_mesh(BALL, 2)
    return m, fe.rigid_basis(m)


# ---------------------------------------------------------------- rigid modes

@pytest.mark.parametrize("shape,dim", [(BALL, 3), (SPHEROID, 1), (TRIAXIAL, 0)])
def test_rigid_dimension(shape, dim):
    m = gen_mesh(shape, 1)
    basis = fe.rigid_basis(m)
    assert basis.dim == dim
    assert basis.axisymmetric == (dim > 0)
    r = np.sort(basis.residuals)
    assert np.all(r[:dim] < 1e-10)
    assert np.all(r[dim:] > 1e-3)


def test_spheroid_mode_is_axial_rotation(spheroid):
    m, basis = spheroid
    e3x = np.stack([-m.vertices[:, 1], m.vertices[:, 0], 0 * m.vertices[:, 0]], axis=1)
    R = basis.fields[0].values
    c = np.sum(R * e3x) / np.sum(e3x * e3x)
    assert np.allclose(R, c * e3x, atol=1e-12)


def test_rigid_basis_orthonormal():
    m = gen_mesh(BALL, 1)
    basis = fe.rigid_basis(m)
    G = np.array([[fe._inner(a, b) for b in basis.fields] for a in basis.fields])
    assert np.allclose(G, np.eye(3), atol=1e-12)
    for A in basis.matrices:
        assert np.allclose(A, -A.T)


# ---------------------------------------------------------------- compatibility

def test_compatibility_examples(spheroid):
    m, basis = spheroid
    R1 = basis.fields[0]
    assert np.allclose(fe.compatibility_project(R1, basis).values, 0, atol=1e-13)
    e3 = fe.VectorFieldFE(m, np.tile([0.0, 0.0, 1.0], (m.nv, 1)))  # orthogonal to e3 x x
    assert np.allclose(fe.compatibility_project(e3, basis).values, e3.values, atol=1e-14)


def test_compatibility_random_spheroid(spheroid):
    m, basis = spheroid
    h = fe.VectorFieldFE(m, np.random.default_rng(1).normal(size=(m.nv, 3)))
    hh = fe.compatibility_project(h, basis)
    assert abs(fe.rigid_components(hh, basis)[0]) < 1e-12 * h.l2_norm()


@given(st.integers(0, 10_000), st.sampled_from(["vertex", "cell"]))
@settings(max_examples=20, deadline=None)
def test_compatibility_idempotent(seed, location):
    m = gen_mesh(BALL, 0)
    basis = fe.rigid_basis(m)
    n = m.nv if location == "vertex" else m.nt
    h = fe.VectorFieldFE(m, np.random.default_rng(seed).normal(size=(n, 3)), location)
    once = fe.compatibility_project(h, basis)
    twice = fe.compatibility_project(once, basis)
    assert np.allclose(once.values, twice.values, atol=1e-12)
    assert np.all(np.abs(fe.rigid_components(once, basis)) < 1e-12 * (1 + h.l2_norm()))


# ---------------------------------------------------------------- sym Poisson

def test_zero_source_gives_zero(ball2):
    m, basis = ball2
    u = fe.solve_sym_poisson(m, np.zeros((m.nv, 3)), basis)
    assert np.all(u.values == 0)


def test_incompatible_source_raises(spheroid):
    m, basis = spheroid
    with pytest.raises(fe.IncompatibleSourceError):
        fe.solve_sym_poisson(m, basis.fields[0], basis)


def test_solution_properties(ball2):
    m, basis = ball2
    h = fe.compatibility_project(fe.VectorFieldFE.from_function(m, fe.smooth_source), basis)
    u = fe.solve_sym_poisson(m, h, basis)
    ident = fe.energy_identity(u, h)
    assert ident["relative_gap"] < 1e-8
    assert np.max(np.abs(fe.antisym_mean(u))) < 1e-10
    rep = fe.residual_report(u, h, basis)
    assert rep["slip_max"] < 1e-10
    assert rep["interior_residual_relative"] < 1e-8
    again = fe.solve_sym_poisson(m, h, basis)
    assert np.max(np.abs(again.values - u.values)) < 1e-8 * np.max(np.abs(u.values))


def test_triaxial_and_cell_sources():
    m = gen_mesh(TRIAXIAL, 1)
    basis = fe.rigid_basis(m)
    h = fe.VectorFieldFE(m, fe.smooth_source(m.centroids), "cell")
    u = fe.solve_sym_poisson(m, h, basis)
    assert fe.energy_identity(u, h)["relative_gap"] < 1e-8


def test_manufactured_ball_solution_converges():
    # u = x (1 - |x|^2) has h = 10 x, zero antisymmetric gradient and
    # satisfies both boundary conditions on the unit sphere
    errs, traction = [], []
    for lv in (1, 2, 3):
        m = gen_mesh(BALL, lv)
        basis = fe.rigid_basis(m)
        h = fe.VectorFieldFE.from_function(m, lambda x: 10 * x)
        u = fe.solve_sym_poisson(m, h, basis)
        exact = m.vertices * (1 - np.sum(m.vertices ** 2, axis=1))[:, None]
        errs.append(fe.h1_norm(fe.VectorFieldFE(m, u.values - exact)))
        traction.append(fe.residual_report(u, h, basis)["traction_residual"])
    assert errs[0] > errs[1] > errs[2]
    assert np.log2(errs[1] / errs[2]) > 0.8
    assert traction[2] < traction[1]


# ---------------------------------------------------------------- Neumann Poisson

def test_neumann_constant_source():
    m = gen_mesh(BALL, 1)
    phi = fe.solve_neumann_poisson(m, np.full(m.nv, 3.0))
    assert np.max(np.abs(phi.values)) < 1e-14


def test_neumann_manufactured():
    # phi* = r^4/4 - r^2/2 has zero radial derivative at r = 1 and -lap phi* = 3 - 5 r^2
    errs = []
    for lv in (1, 2, 3):
        m = gen_mesh(BALL, lv)
        r2 = np.sum(m.vertices ** 2, axis=1)
        phi = fe.solve_neumann_poisson(m, 3 - 5 * r2)
        assert abs(phi.mean()) < 1e-12
        exact = fe.ScalarFieldFE(m, r2 ** 2 / 4 - r2 / 2)
        exact = fe.ScalarFieldFE(m, exact.values - exact.mean())
        errs.append(fe.h1_norm(fe.ScalarFieldFE(m, phi.values - exact.values)))
    assert errs[0] > errs[1] > errs[2]
    assert np.log2(errs[1] / errs[2]) > 0.8


def test_neumann_self_convergence():
    sols = []
    for lv in (1, 2, 3):
        m = gen_mesh(TRIAXIAL, lv)
        x = m.vertices
        sols.append(fe.solve_neumann_poisson(m, np.sin(2 * x[:, 0]) + x[:, 1] * x[:, 2]))
    assert fe.self_convergence(sols)["order"] > 0.8


# ---------------------------------------------------------------- Korn / Poincare

def test_korn_positive_and_minimal(ball2):
    m, basis = ball2
    K = fe.korn_constant(m, basis)
    assert K > 0
    for seed in range(5):
        u = fe.random_admissible(m, basis, seed)
        assert fe.korn_rayleigh(u) >= K * (1 - 1e-12)


def test_korn_dense_and_iterative_agree(ball2):
    m, basis = ball2
    a = fe.korn_constant(m, basis, method="dense")
    b = fe.korn_constant(m, basis, method="lobpcg")
    assert abs(a - b) < 1e-8 * a


@pytest.mark.parametrize("shape", [BALL, SPHEROID, TRIAXIAL])
def test_korn_rotation_invariant(shape):
    m = gen_mesh(shape, 1)
    r = m.rotated(random_rotation(17))
    a = fe.korn_constant(m, method="dense")
    b = fe.korn_constant(r, method="dense")
    assert abs(a - b) < 1e-10 * a


@pytest.mark.parametrize("shape", [BALL, SPHEROID, TRIAXIAL])
def test_poincare_ratio_stable(shape):
    ratios = {lv: fe.poincare_ratio(gen_mesh(shape, lv)) for lv in (1, 2, 3)}
    assert all(r <= 2 * ratios[2] for r in ratios.values())


def test_transfer_reproduces_linear_fields():
    coarse, fine = gen_mesh(TRIAXIAL, 1), gen_mesh(TRIAXIAL, 2)
    A = np.array([[1.0, 2.0, 0.0], [0.0, -1.0, 3.0], [0.5, 0.0, 1.0]])
    u = fe.VectorFieldFE(coarse, coarse.vertices @ A.T)
    v = fe.transfer(u, fine)
    assert np.allclose(v.values, fine.vertices @ A.T, atol=1e-12)
