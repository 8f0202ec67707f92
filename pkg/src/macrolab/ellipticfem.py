"""P1 finite elements for the symmetric Poisson system with slip boundary data.

The vector problem is

    -div(sym grad u) = h  in the domain,   u.n = 0  and tangential traction
    (sym grad u) n - ((sym grad u) : n (x) n) n = 0  on the boundary,

posed over the slip space with the projected antisymmetric mean of grad u set
to zero.  The slip condition is imposed strongly by rotating boundary-vertex
unknowns into a local tangent frame; the traction condition is natural.
Rigid rotations tangent to the boundary are detected numerically and removed
with a rank-k penalty that is exact for compatible sources.

Also provided: scalar Neumann Poisson solves, the compatibility projection of
sources, discrete Korn and Poincare constants, residual reports and
mesh-to-mesh transfer for self-convergence studies.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.spatial import cKDTree

from .mesh import Mesh, gen_mesh

try:  # algebraic multigrid preconditioning; Jacobi is used otherwise
    import pyamg
except ImportError:  # pragma: no cover
    pyamg = None

RIGID_THRESHOLD = 1e-6
COMPAT_TOL = 1e-8
DENSE_LIMIT = 4000


class SolverError(RuntimeError):
    """Iterative solver did not reach the requested tolerance."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(f"{message} (relative residual {residual:.3e})")
        self.residual = residual


class EigenSolverError(SolverError):
    pass


class IncompatibleSourceError(ValueError):
    """The source has a component along a rigid mode of the domain."""


# ------------------------------------------------------------------ fields

@dataclass(frozen=True, eq=False)
class VectorFieldFE:
    """Vector field on a mesh, one 3-vector per vertex (or per tet)."""

    mesh: Mesh
    values: np.ndarray
    location: str = "vertex"
    slip_constrained: bool = False

    def __post_init__(self):
        n = self.mesh.nv if self.location == "vertex" else self.mesh.nt
        v = np.asarray(self.values, dtype=float)
        if v.shape != (n, 3):
            raise ValueError(f"expected shape {(n, 3)}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field has non-finite entries")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, mesh: Mesh, fn: Callable[[np.ndarray], np.ndarray]):
        return cls(mesh, np.asarray(fn(mesh.vertices), dtype=float))

    def l2_norm(self) -> float:
        return float(np.sqrt(max(_inner(self, self), 0.0)))


@dataclass(frozen=True, eq=False)
class ScalarFieldFE:
    """Scalar field on a mesh, one value per vertex (or per tet)."""

    mesh: Mesh
    values: np.ndarray
    location: str = "vertex"
    mean_zero: bool = False

    def __post_init__(self):
        n = self.mesh.nv if self.location == "vertex" else self.mesh.nt
        v = np.asarray(self.values, dtype=float)
        if v.shape != (n,):
            raise ValueError(f"expected shape {(n,)}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field has non-finite entries")
        object.__setattr__(self, "values", v)

    def mean(self) -> float:
        s = _system(self.mesh)
        if self.location == "vertex":
            return float(s.lumped_ones @ self.values / self.mesh.volume)
        return float(self.mesh.tet_volumes @ self.values / self.mesh.volume)


@dataclass(frozen=True)
class RigidModeBasis:
    """L2-orthonormal rigid rotations R_i(x) = M_i x tangent to the boundary."""

    dim: int
    fields: tuple
    matrices: tuple
    residuals: tuple  # boundary normal residual / L2 norm for all candidates

    @property
    def axisymmetric(self) -> bool:
        return self.dim >= 1


# ------------------------------------------------------------------ assembly

def _skew(w) -> np.ndarray:
    x, y, z = w
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


SKEW = tuple(_skew(e) for e in np.eye(3))  # SKEW[k] @ x = e_k x x


def _tangent_frames(normals: np.ndarray):
    n = normals / np.linalg.norm(normals, axis=1, keepdims=True)
    pick = np.argmin(np.abs(n), axis=1)
    e = np.eye(3)[pick]
    t1 = np.cross(n, e)
    t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
    t2 = np.cross(n, t1)
    return n, t1, t2


class _System:
    """Assembled matrices for one mesh (immutable once built)."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        nv, nt = mesh.nv, mesh.nt
        vol = mesh.tet_volumes
        G = mesh.barycentric_gradients
        tets = mesh.tets
        GG = np.einsum("tak,tbk->tab", G, G)
        # scalar stiffness and mass
        rows = np.repeat(tets, 4, axis=1).ravel()
        cols = np.tile(tets, (1, 4)).ravel()
        ks = (vol[:, None, None] * GG).ravel()
        ms = (vol[:, None, None] * (np.ones((4, 4)) + np.eye(4)) / 20.0).ravel()
        self.Ks = sp.csr_matrix((ks, (rows, cols)), shape=(nv, nv))
        self.Ms = sp.csr_matrix((ms, (rows, cols)), shape=(nv, nv))
        self.lumped_ones = np.asarray(self.Ms.sum(axis=1)).ravel()
        # vector matrices with dof 3*a + i
        d = np.arange(3)
        vrow = (3 * tets[:, :, None, None, None] + d[None, None, :, None, None])
        vcol = (3 * tets[:, None, None, :, None] + d[None, None, None, None, :])
        vrow = np.broadcast_to(vrow, (nt, 4, 3, 4, 3)).ravel()
        vcol = np.broadcast_to(vcol, (nt, 4, 3, 4, 3)).ravel()
        eye3 = np.eye(3)
        # (sym grad phi_a e_i) : (sym grad phi_b e_j) = (d_ij ga.gb + ga_j gb_i) / 2
        sym = 0.5 * (GG[:, :, None, :, None] * eye3[None, None, :, None, :]
                     + np.einsum("taj,tbi->taibj", G, G))
        sym *= vol[:, None, None, None, None]
        n3 = 3 * nv
        self.Ksym = sp.csr_matrix((sym.ravel(), (vrow, vcol)), shape=(n3, n3))
        self.Kgrad = sp.kron(self.Ks, sp.identity(3), format="csr")
        self.M = sp.kron(self.Ms, sp.identity(3), format="csr")
        self.H = (self.Kgrad + self.M).tocsr()
        # antisymmetric mean: C[k] . u = < int grad^a u , SKEW[k] >_F
        C = np.zeros((3, n3))
        for k in range(3):
            A = SKEW[k]
            # <grad^a u, A>_F = sum_ij A_ij * 1/2 (d_j u_i - d_i u_j) = sum_ij A_ij d_j u_i
            w = np.einsum("ij,taj->tai", A, G) * vol[:, None, None]
            np.add.at(C[k], (3 * tets[:, :, None] + d).ravel(), w.ravel())
        self.C = C
        # slip transform
        bv = mesh.boundary_vertices
        n, t1, t2 = _tangent_frames(mesh.vertex_normals)
        self.bnormals = n
        is_b = np.zeros(nv, bool)
        is_b[bv] = True
        ndof = np.where(is_b, 2, 3)
        start = np.concatenate([[0], np.cumsum(ndof)[:-1]])
        self.nr = int(ndof.sum())
        r, c, v = [], [], []
        inner = np.flatnonzero(~is_b)
        for i in range(3):
            r.append(3 * inner + i)
            c.append(start[inner] + i)
            v.append(np.ones(len(inner)))
        for j, t in enumerate((t1, t2)):
            for i in range(3):
                r.append(3 * bv + i)
                c.append(start[bv] + j)
                v.append(t[:, i])
        self.T = sp.csr_matrix((np.concatenate(v), (np.concatenate(r), np.concatenate(c))),
                               shape=(n3, self.nr))
        self.Tt = self.T.T.tocsr()
        self.Kr = (self.Tt @ self.Ksym @ self.T).tocsr()
        self.Hr = (self.Tt @ self.H @ self.T).tocsr()
        self.Mr = (self.Tt @ self.M @ self.T).tocsr()
        self.Kgr = (self.Tt @ self.Kgrad @ self.T).tocsr()
        self.Cr = self.C @ self.T
        self._amg = {}

    def preconditioner(self, key: str):
        if key not in self._amg:
            mat = {"H": self.Hr, "Ks": (self.Ks + self.Ms).tocsr()}[key]
            if pyamg is not None:
                ml = pyamg.smoothed_aggregation_solver(mat, max_coarse=500)
                self._amg[key] = ml.aspreconditioner(cycle="V")
            else:  # pragma: no cover
                dinv = 1.0 / mat.diagonal()
                self._amg[key] = spla.LinearOperator(mat.shape, lambda x: dinv * x)
        return self._amg[key]


@lru_cache(maxsize=8)
def _system(mesh: Mesh) -> _System:
    return _System(mesh)


def assemble(mesh: Mesh) -> _System:
    """Return the cached assembled system for a mesh."""
    return _system(mesh)


# ------------------------------------------------------------------ helpers

def _inner(a, b) -> float:
    """L2 inner product of two fields on the same mesh."""
    mesh = a.mesh
    if a.location == "vertex" and b.location == "vertex":
        s = _system(mesh)
        va, vb = np.atleast_2d(a.values.T).T, np.atleast_2d(b.values.T).T
        if va.ndim == 2 and va.shape[1] == 3:
            return float(np.sum(va * (s.Ms @ vb)))
        return float(va.ravel() @ (s.Ms @ vb.ravel()))
    va = _at_cells(a)
    vb = _at_cells(b)
    w = mesh.tet_volumes
    if va.ndim == 2:
        return float(np.einsum("t,ti,ti->", w, va, vb))
    return float(w @ (va * vb))


def _at_cells(f) -> np.ndarray:
    if f.location == "cell":
        return f.values
    return f.values[f.mesh.tets].mean(axis=1)


def _load(h) -> np.ndarray:
    """Load vector int h.phi_a e_i for vertex or cellwise sources."""
    mesh = h.mesh
    s = _system(mesh)
    if h.location == "vertex":
        return (s.Ms @ h.values).ravel()
    F = np.zeros((mesh.nv, 3))
    w = (mesh.tet_volumes / 4.0)[:, None] * h.values
    for a in range(4):
        np.add.at(F, mesh.tets[:, a], w)
    return F.ravel()


def _cg(A, b, M=None, tol=1e-10, maxiter=5000, what="solver"):
    nb = np.linalg.norm(b)
    if nb == 0:
        return np.zeros_like(b)
    x, info = spla.cg(A, b, rtol=tol, atol=0.0, M=M, maxiter=maxiter)
    res = np.linalg.norm(b - A @ x) / nb
    if info != 0 or not np.isfinite(res) or res > 10 * tol:
        raise SolverError(f"{what} did not converge", res)
    return x


# ------------------------------------------------------------------ rigid modes

def _face_quadrature(mesh: Mesh):
    bary = np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]])
    p = mesh.vertices[mesh.boundary_faces]
    pts = np.einsum("qk,fkd->fqd", bary, p)
    if mesh.axes is not None:
        nrm = mesh.surface_normal(pts)
    else:
        nrm = np.broadcast_to(mesh.boundary_normals[:, None, :], pts.shape)
    w = np.repeat(mesh.face_areas[:, None] / 3.0, 3, axis=1)
    return pts, nrm, w


def rigid_basis(mesh: Mesh, threshold: float = RIGID_THRESHOLD) -> RigidModeBasis:
    """Detect the rotations M x (M antisymmetric) tangent to the boundary.

    Minimizes the boundary normal-component energy int (Mx.n)^2 relative to
    the L2 energy int |Mx|^2 over the three-dimensional space of rotations;
    eigenvectors whose residual ratio falls below ``threshold`` form the
    basis, which is returned L2-orthonormal.
    """
    s = _system(mesh)
    pts, nrm, w = _face_quadrature(mesh)
    rn = np.stack([np.einsum("fqi,fqi->fq", pts @ A.T, nrm) for A in SKEW])
    GE = np.einsum("pfq,rfq,fq->pr", rn, rn, w)
    cand = [mesh.vertices @ A.T for A in SKEW]
    GL = np.array([[np.sum(a * (s.Ms @ b)) for b in cand] for a in cand])
    lam, vec = sla.eigh(GE, GL)
    ratios = np.sqrt(np.clip(lam, 0.0, None))
    keep = np.flatnonzero(ratios < threshold)
    fields, mats = [], []
    if len(keep) == 3:
        vec = np.linalg.inv(np.linalg.cholesky(GL)).T  # canonical L2-orthonormal axes
    for j in keep:
        Mj = sum(vec[k, j] * SKEW[k] for k in range(3))
        mats.append(Mj)
        fields.append(VectorFieldFE(mesh, mesh.vertices @ Mj.T, slip_constrained=True))
    return RigidModeBasis(len(keep), tuple(fields), tuple(mats), tuple(float(r) for r in ratios))


def compatibility_project(h, basis: RigidModeBasis):
    """Return h - sum_i c_i R_i with int R_j . result = 0 for every mode.

    For an L2-orthonormal basis and vertex fields this is the familiar
    h - sum_i (B_i / M_i) R_i with B_i = int R_i . h and M_i = int |R_i|^2.
    """
    if basis.dim == 0:
        return h
    mesh = h.mesh
    if h.location == "vertex":
        R = [r.values for r in basis.fields]
    else:
        R = [mesh.centroids @ Mi.T for Mi in basis.matrices]
    Rf = [VectorFieldFE(mesh, r, h.location) for r in R]
    B = np.array([_inner(r, h) for r in Rf])
    Gm = np.array([[_inner(a, b) for b in Rf] for a in Rf])
    c = np.linalg.solve(Gm, B)
    vals = h.values - sum(ci * r for ci, r in zip(c, R))
    return VectorFieldFE(mesh, vals, h.location)


def rigid_components(h, basis: RigidModeBasis) -> np.ndarray:
    """B_i = int R_i . h for each basis mode."""
    mesh = h.mesh
    out = []
    for r, Mi in zip(basis.fields, basis.matrices):
        rf = r if h.location == "vertex" else VectorFieldFE(mesh, mesh.centroids @ Mi.T, "cell")
        out.append(_inner(rf, h))
    return np.array(out)


def _constraint_rows(s: _System, basis: RigidModeBasis) -> np.ndarray:
    """Rows of <int grad^a u, M_i>_F in reduced coordinates."""
    if basis.dim == 0:
        return np.zeros((0, s.nr))
    rows = []
    for Mi in basis.matrices:
        coef = [np.sum(Mi * A) / 2.0 for A in SKEW]  # SKEW is Frobenius-orthogonal, |A|^2 = 2
        rows.append(sum(c * s.Cr[k] for k, c in enumerate(coef)))
    return np.array(rows)


def _reduced_rigid(s: _System, basis: RigidModeBasis) -> np.ndarray:
    if basis.dim == 0:
        return np.zeros((s.nr, 0))
    full = np.stack([f.values.ravel() for f in basis.fields], axis=1)
    return s.Tt @ full  # exact: rigid fields are tangent at boundary vertices


def project_to_X0(u: np.ndarray, s: _System, basis: RigidModeBasis) -> np.ndarray:
    """Remove rigid components so the projected antisymmetric mean vanishes.

    ``u`` is in reduced (slip) coordinates.  Subtracting rigid fields does
    not change the symmetric-gradient energy.
    """
    if basis.dim == 0:
        return u
    Cr = _constraint_rows(s, basis)
    Rr = _reduced_rigid(s, basis)
    alpha = np.linalg.solve(Cr @ Rr, Cr @ u)
    return u - Rr @ alpha


def _penalised_operator(s: _System, basis: RigidModeBasis):
    Cr = _constraint_rows(s, basis)
    if basis.dim == 0:
        return s.Kr, Cr
    Rr = _reduced_rigid(s, basis)
    rho = 1.0 / np.max(np.sum((Cr @ Rr) ** 2, axis=0))
    K = s.Kr

    def mv(x):
        return K @ x + rho * (Cr.T @ (Cr @ x))

    return spla.LinearOperator(K.shape, matvec=mv, dtype=float), Cr


# ------------------------------------------------------------------ solvers

@dataclass
class SymPoissonSolution:
    u: VectorFieldFE
    h_hat: VectorFieldFE
    basis: RigidModeBasis
    reduced: np.ndarray
    iterations: int = 0


def solve_sym_poisson(mesh: Mesh, h, basis: Optional[RigidModeBasis] = None,
                      tol: float = 1e-10, return_details: bool = False):
    """Solve -div(sym grad u) = h with slip and traction-free conditions.

    ``h`` is a VectorFieldFE (vertex or cell valued) or an (nv, 3) array.  On
    axisymmetric domains h must already be compatibility-projected; otherwise
    an IncompatibleSourceError is raised.  The result lies in the discrete X0.
    """
    if not isinstance(h, VectorFieldFE):
        h = VectorFieldFE(mesh, h)
    if basis is None:
        basis = rigid_basis(mesh)
    s = _system(mesh)
    if basis.dim:
        B = rigid_components(h, basis)
        scale = max(h.l2_norm(), 1e-300)
        if np.any(np.abs(B) > COMPAT_TOL * scale):
            raise IncompatibleSourceError(
                f"source has rigid components {B.tolist()}; apply compatibility_project first")
    F = s.Tt @ _load(h)
    A, _ = _penalised_operator(s, basis)
    ur = _cg(A, F, M=s.preconditioner("H"), tol=tol, what="symmetric Poisson CG")
    ur = project_to_X0(ur, s, basis)
    u = VectorFieldFE(mesh, (s.T @ ur).reshape(-1, 3), slip_constrained=True)
    if return_details:
        return SymPoissonSolution(u, h, basis, ur)
    return u


def solve_neumann_poisson(mesh: Mesh, h, tol: float = 1e-10) -> ScalarFieldFE:
    """Mean-zero solution of -Laplace(phi) = h - mean(h), d phi/dn = 0."""
    if not isinstance(h, ScalarFieldFE):
        h = ScalarFieldFE(mesh, h)
    s = _system(mesh)
    if h.location == "vertex":
        F = s.Ms @ h.values
    else:
        F = np.zeros(mesh.nv)
        for a in range(4):
            np.add.at(F, mesh.tets[:, a], mesh.tet_volumes / 4.0 * h.values)
    m1 = s.lumped_ones
    F = F - m1 * (F.sum() / mesh.volume)
    rho = 1.0 / (m1 @ m1)
    K = s.Ks
    A = spla.LinearOperator(K.shape, matvec=lambda x: K @ x + rho * m1 * (m1 @ x), dtype=float)
    phi = _cg(A, F, M=s.preconditioner("Ks"), tol=tol, what="Neumann Poisson CG")
    phi = phi - (m1 @ phi) / mesh.volume
    return ScalarFieldFE(mesh, phi, mean_zero=True)


# ------------------------------------------------------------------ gradients

def cell_gradient(u) -> np.ndarray:
    """Piecewise-constant gradient: (nt, 3, 3) for vectors, (nt, 3) for scalars."""
    G = u.mesh.barycentric_gradients
    vals = u.values[u.mesh.tets]
    if vals.ndim == 3:
        return np.einsum("tai,taj->tij", vals, G)
    return np.einsum("ta,taj->tj", vals, G)


def sym_gradient(u: VectorFieldFE) -> np.ndarray:
    g = cell_gradient(u)
    return 0.5 * (g + np.transpose(g, (0, 2, 1)))


def antisym_mean(u: VectorFieldFE) -> np.ndarray:
    """int grad^a u dx as a 3x3 antisymmetric matrix."""
    g = cell_gradient(u)
    a = 0.5 * (g - np.transpose(g, (0, 2, 1)))
    return np.einsum("t,tij->ij", u.mesh.tet_volumes, a)


def h1_norm(u) -> float:
    s = _system(u.mesh)
    v = u.values.ravel()
    if u.values.ndim == 2:
        return float(np.sqrt(v @ (s.H @ v)))
    return float(np.sqrt(v @ ((s.Ks + s.Ms) @ v)))


def sym_energy(u: VectorFieldFE) -> float:
    """int |sym grad u|^2."""
    e = sym_gradient(u)
    return float(np.einsum("t,tij,tij->", u.mesh.tet_volumes, e, e))


def energy_identity(u: VectorFieldFE, h_hat) -> dict:
    """Compare int |sym grad u|^2 against int h_hat . u."""
    lhs = sym_energy(u)
    rhs = float(_load(h_hat) @ u.values.ravel())
    rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    return {"sym_energy": lhs, "work": rhs, "relative_gap": rel}


# ------------------------------------------------------------------ eigenproblems

def _smallest_constrained(A, B, Cr, precond, nr, seed=0, tol=1e-6, dense=None,
                          solve_B=None, return_vector=False):
    """Smallest eigenpair of A x = lam B x on {x : Cr x = 0}."""
    if dense is None:
        dense = nr <= DENSE_LIMIT
    if dense:
        Ad, Bd = A.toarray(), B.toarray()
        Z = sla.null_space(Cr) if Cr.shape[0] else np.eye(nr)
        lam, vec = sla.eigh(Z.T @ Ad @ Z, Z.T @ Bd @ Z, subset_by_index=[0, 0])
        return (float(lam[0]), Z @ vec[:, 0]) if return_vector else float(lam[0])
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((nr, 4))
    Y = None
    if Cr.shape[0]:
        Y = np.stack([solve_B(c) for c in Cr], axis=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        lam, vec = spla.lobpcg(A, X, B=B, M=precond, Y=Y, tol=tol, maxiter=300, largest=False)
    j = int(np.argmin(lam))
    x = vec[:, j]
    # coarse sanity guard; the Rayleigh quotient error is quadratic in this residual
    res = np.linalg.norm(A @ x - lam[j] * (B @ x)) / max(abs(lam[j]) * np.linalg.norm(B @ x), 1e-300)
    if not np.isfinite(lam[j]) or res > 1e-2:
        raise EigenSolverError("LOBPCG did not converge", float(res))
    return (float(lam[j]), vec[:, j]) if return_vector else float(lam[j])


def korn_constant(mesh: Mesh, basis: Optional[RigidModeBasis] = None, method: str = "auto",
                  tol: float = 1e-6, return_vector: bool = False):
    """Smallest ratio int|sym grad u|^2 / |u|_{H1}^2 over the discrete X0.

    ``method`` is ``"dense"`` (exact generalized eigensolver on a null-space
    basis), ``"lobpcg"`` (block preconditioned inverse iteration with the
    constraints enforced in the H1 inner product) or ``"auto"``.
    """
    if basis is None:
        basis = rigid_basis(mesh)
    s = _system(mesh)
    Cr = _constraint_rows(s, basis)
    dense = None if method == "auto" else method == "dense"
    pre = s.preconditioner("H")

    def solve_B(c):
        return _cg(s.Hr, c, M=pre, tol=1e-12, what="H1 solve")

    out = _smallest_constrained(s.Kr, s.Hr, Cr, pre, s.nr, tol=tol, dense=dense,
                                solve_B=solve_B, return_vector=return_vector)
    if return_vector:
        lam, vr = out
        u = VectorFieldFE(mesh, (s.T @ vr).reshape(-1, 3), slip_constrained=True)
        return lam, u
    if not out > 0:
        raise EigenSolverError("non-positive Korn constant", out)
    return out


def korn_rayleigh(u: VectorFieldFE) -> float:
    """Rayleigh quotient int|sym grad u|^2 / |u|_{H1}^2."""
    return sym_energy(u) / h1_norm(u) ** 2


def random_admissible(mesh: Mesh, basis: RigidModeBasis, seed: int = 0) -> VectorFieldFE:
    """A random nodal field in the discrete X0."""
    s = _system(mesh)
    ur = np.random.default_rng(seed).standard_normal(s.nr)
    ur = project_to_X0(ur, s, basis)
    return VectorFieldFE(mesh, (s.T @ ur).reshape(-1, 3), slip_constrained=True)


def poincare_ratio(mesh: Mesh, method: str = "auto", tol: float = 1e-6) -> float:
    """max |u|_{L2} / |grad u|_{L2} over slip-constrained nodal fields."""
    s = _system(mesh)
    dense = None if method == "auto" else method == "dense"
    lam = _smallest_constrained(s.Kgr, s.Mr, np.zeros((0, s.nr)), s.preconditioner("H"),
                                s.nr, tol=tol, dense=dense)
    return float(1.0 / np.sqrt(lam))


# ------------------------------------------------------------------ diagnostics

def residual_report(u: VectorFieldFE, h, basis: Optional[RigidModeBasis] = None) -> dict:
    """Interior, slip and tangential-traction residuals of a discrete solution."""
    mesh = u.mesh
    if not isinstance(h, VectorFieldFE):
        h = VectorFieldFE(mesh, h)
    if basis is None:
        basis = rigid_basis(mesh)
    s = _system(mesh)
    h_hat = compatibility_project(h, basis)
    F = s.Tt @ _load(h_hat)
    ur = s.Tt @ u.values.ravel()  # T has orthonormal columns on its range
    r = s.Kr @ ur - F
    pre = s.preconditioner("H")
    dual_r = float(np.sqrt(max(r @ _cg(s.Hr, r, M=pre, tol=1e-10, what="dual norm"), 0.0)))
    dual_f = float(np.sqrt(max(F @ _cg(s.Hr, F, M=pre, tol=1e-10, what="dual norm"), 0.0)))
    bv = mesh.boundary_vertices
    slip = float(np.max(np.abs(np.einsum("ij,ij->i", u.values[bv], s.bnormals)))) if len(bv) else 0.0
    # tangential traction on boundary faces, averaged to vertices with face weights
    e = sym_gradient(u)[mesh.boundary_parent]
    n = mesh.boundary_normals
    t = np.einsum("fij,fj->fi", e, n)
    t_tan = t - np.einsum("fi,fi->f", t, n)[:, None] * n
    acc = np.zeros((mesh.nv, 3))
    wsum = np.zeros(mesh.nv)
    for k in range(3):
        np.add.at(acc, mesh.boundary_faces[:, k], mesh.face_areas[:, None] * t_tan)
        np.add.at(wsum, mesh.boundary_faces[:, k], mesh.face_areas)
    tv = acc[bv] / wsum[bv, None]
    tv -= np.einsum("ij,ij->i", tv, s.bnormals)[:, None] * s.bnormals
    traction = float(np.sqrt(np.sum(wsum[bv] / 3.0 * np.sum(tv ** 2, axis=1))))
    return {
        "interior_residual": dual_r,
        "interior_residual_relative": dual_r / max(dual_f, 1e-300),
        "slip_max": slip,
        "traction_residual": traction,
    }


# ------------------------------------------------------------------ mesh transfer

def locate(mesh: Mesh, points: np.ndarray, k: int = 12):
    """Containing (or nearest) tet and barycentric coordinates for each point."""
    tree = cKDTree(mesh.centroids)
    k = min(k, mesh.nt)
    _, cand = tree.query(points, k=k)
    cand = np.atleast_2d(cand)
    p0 = mesh.vertices[mesh.tets[cand, 0]]
    G = mesh.barycentric_gradients[cand]  # (np, k, 4, 3)
    lam = np.einsum("pkaj,pkj->pka", G, points[:, None, :] - p0)
    lam[..., 0] += 1.0
    best = np.argmax(lam.min(axis=2), axis=1)
    idx = np.arange(len(points))
    return cand[idx, best], lam[idx, best]


def transfer(u, target: Mesh):
    """Interpolate a nodal field onto the vertices of another mesh.

    Points outside the source mesh (between an inscribed polyhedron and the
    curved surface) are handled by linear extrapolation from the nearest tet.
    """
    tet, lam = locate(u.mesh, target.vertices)
    vals = u.values[u.mesh.tets[tet]]
    if vals.ndim == 3:
        out = np.einsum("pa,pai->pi", lam, vals)
        return VectorFieldFE(target, out)
    return ScalarFieldFE(target, np.einsum("pa,pa->p", lam, vals))


def self_convergence(solutions) -> dict:
    """H1 self-convergence order from three nested-level solutions."""
    u1, u2, u3 = solutions
    fine = u3.mesh
    a, b = transfer(u1, fine), transfer(u2, fine)
    cls = VectorFieldFE if u3.values.ndim == 2 else ScalarFieldFE
    e12 = h1_norm(cls(fine, a.values - b.values))
    e23 = h1_norm(cls(fine, b.values - u3.values))
    return {"diff_coarse": e12, "diff_fine": e23, "order": float(np.log2(e12 / e23))}


def smooth_source(x: np.ndarray) -> np.ndarray:
    """Smooth non-polynomial vector source used in convergence studies."""
    return np.stack([np.sin(2 * x[:, 1]) + x[:, 2] ** 2,
                     np.cos(x[:, 0] * x[:, 2]) + x[:, 0],
                     np.exp(0.5 * x[:, 0]) - x[:, 1] * x[:, 2]], axis=1)


def sym_poisson_study(shape="ball", levels=(2, 3, 4), source=smooth_source) -> dict:
    """Solve on several levels and measure H1 self-convergence."""
    sols = []
    for lv in levels:
        mesh = gen_mesh(shape, lv)
        basis = rigid_basis(mesh)
        h = compatibility_project(VectorFieldFE.from_function(mesh, source), basis)
        sols.append(solve_sym_poisson(mesh, h, basis))
    return self_convergence(sols[-3:])
