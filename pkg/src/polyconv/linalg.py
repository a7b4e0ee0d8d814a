"""Dense linear-algebra primitives used by every other module.

Everything here operates on small dense real matrices (systems of dimension
a few dozen at most).  Rank decisions are made through SVD with a relative
cutoff; eigenvalue multiplicity questions are answered through the nested
kernel test rather than by trusting eigenvalue clustering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import InputError, NumericalError

__all__ = [
    "Tolerances",
    "Subspace",
    "Spectrum",
    "as_matrix",
    "rank_and_kernel",
    "kernel",
    "subspace_intersection",
    "subspace_contains",
    "subspace_equal",
    "orthogonal_complement",
    "spectrum",
    "is_semisimple_at",
    "matrix_exponential",
    "lozinski_measure_1",
    "induced_norm_1",
]


@dataclass(frozen=True)
class Tolerances:
    """Numerical knobs shared across the package.

    rank_rel: relative singular-value cutoff for rank decisions.
    psd_margin: definiteness margin delta for strict LMI variables.
    residual_tol: acceptance slack for <= 0 constraint residuals and
        algebraic identity checks.
    sim_tol: convergence/Cauchy threshold for simulated trajectories.
    """

    rank_rel: float = 1e-10
    psd_margin: float = 1e-8
    residual_tol: float = 1e-7
    sim_tol: float = 1e-8


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class Subspace:
    """Subspace of R^n given by an orthonormal basis (n x d, d may be 0)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2:
            raise InputError("subspace basis must be a 2-d array")
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.basis @ (self.basis.T @ x)

    def distance(self, x: np.ndarray) -> float:
        """Euclidean distance from x to the subspace."""
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x)))


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues with algebraic multiplicity plus clustered summaries.

    eigenvalues: all n eigenvalues (complex, sorted by (real, imag)).
    clusters: list of (center, algebraic multiplicity, geometric
        multiplicity) for eigenvalues grouped at radius 1e-6 * (1 + ||A||).
    """

    eigenvalues: np.ndarray
    clusters: tuple = field(default_factory=tuple)

    def geometric_multiplicity(self, value: complex) -> int:
        """Geometric multiplicity of the cluster nearest to value."""
        best = None
        for center, _alg, geo in self.clusters:
            d = abs(center - value)
            if best is None or d < best[0]:
                best = (d, geo)
        return 0 if best is None else best[1]


def as_matrix(a, square: bool = True, name: str = "matrix") -> np.ndarray:
    """Validate and convert input to a float ndarray."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise InputError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise InputError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError(f"{name} contains non-finite entries")
    return m


def _svd_cutoff(s: np.ndarray, shape, rank_rel: float, scale: float) -> float:
    smax = s[0] if s.size else 0.0
    return rank_rel * max(smax, scale) * max(shape)


def rank_and_kernel(a, tol: Tolerances = DEFAULT_TOL, scale: float = 0.0):
    """Numerical rank and an orthonormal kernel basis via SVD.

    scale, when positive, guards the cutoff for matrices that are small
    because of cancellation (e.g. A - I with A near I): singular values
    below rank_rel * max(sigma_max, scale) * max(shape) count as zero.
    Returns (rank, Subspace).
    """
    m = as_matrix(a, square=False)
    if m.shape[1] == 0:
        return 0, Subspace(np.zeros((0, 0)))
    try:
        u, s, vt = np.linalg.svd(m)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"SVD failed: {e}") from None
    cutoff = _svd_cutoff(s, m.shape, tol.rank_rel, scale)
    rank = int(np.sum(s > cutoff))
    basis = vt[rank:].T.copy()
    return rank, Subspace(basis)


def kernel(a, tol: Tolerances = DEFAULT_TOL, scale: float = 0.0) -> Subspace:
    return rank_and_kernel(a, tol, scale)[1]


def subspace_intersection(spaces, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """Intersection of subspaces of a common ambient space.

    Computed as the kernel of the stacked projector complements: x is in
    every S_i iff (I - B_i B_i^T) x = 0 for all i.
    """
    spaces = list(spaces)
    if not spaces:
        raise InputError("need at least one subspace")
    n = spaces[0].ambient_dim
    for s in spaces:
        if s.ambient_dim != n:
            raise InputError("subspaces live in different ambient dimensions")
    rows = [np.eye(n) - s.basis @ s.basis.T for s in spaces]
    stacked = np.vstack(rows)
    # projector stack has O(1) scale; guard keeps the cutoff meaningful
    return kernel(stacked, tol, scale=1.0)


def subspace_contains(outer: Subspace, inner: Subspace,
                      tol: Tolerances = DEFAULT_TOL) -> bool:
    """True if inner is contained in outer (at tolerance)."""
    if inner.dim == 0:
        return True
    if inner.ambient_dim != outer.ambient_dim:
        raise InputError("ambient dimension mismatch")
    resid = inner.basis - outer.basis @ (outer.basis.T @ inner.basis)
    return float(np.linalg.norm(resid, 2)) <= 1e3 * tol.rank_rel * max(
        1.0, inner.ambient_dim)


def subspace_equal(a: Subspace, b: Subspace,
                   tol: Tolerances = DEFAULT_TOL) -> bool:
    return (a.dim == b.dim and subspace_contains(a, b, tol)
            and subspace_contains(b, a, tol))


def orthogonal_complement(s: Subspace, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the orthogonal complement within R^n."""
    n = s.ambient_dim
    if s.dim == 0:
        return Subspace(np.eye(n))
    if s.dim == n:
        return Subspace(np.zeros((n, 0)))
    # complement = kernel of B^T; B has orthonormal columns so sigma ~ 1
    return kernel(s.basis.T, tol, scale=1.0)


def _sorted_eigs(vals: np.ndarray) -> np.ndarray:
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]


def spectrum(a, tol: Tolerances = DEFAULT_TOL) -> Spectrum:
    """Eigenvalues plus clustered algebraic/geometric multiplicities."""
    m = as_matrix(a)
    n = m.shape[0]
    if n == 0:
        return Spectrum(np.zeros(0, dtype=complex), ())
    try:
        vals = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"eigenvalue computation failed: {e}") from None
    if not np.all(np.isfinite(vals)):
        raise NumericalError("non-finite eigenvalues")
    vals = _sorted_eigs(vals)
    radius = 1e-6 * (1.0 + np.linalg.norm(m, 2))
    used = np.zeros(n, dtype=bool)
    clusters = []
    for i in range(n):
        if used[i]:
            continue
        mask = ~used & (np.abs(vals - vals[i]) <= radius)
        used |= mask
        center = complex(vals[mask].mean())
        alg = int(mask.sum())
        if abs(center.imag) <= radius:
            shifted = m - center.real * np.eye(n)
        else:
            shifted = (m.astype(complex) - center * np.eye(n))
        geo = _kernel_dim_general(shifted, tol, scale=1.0 + np.linalg.norm(m, 2))
        clusters.append((center, alg, geo))
    return Spectrum(vals, tuple(clusters))


def _kernel_dim_general(m, tol: Tolerances, scale: float) -> int:
    s = np.linalg.svd(m, compute_uv=False)
    cutoff = _svd_cutoff(s, m.shape, tol.rank_rel, scale)
    return int(np.sum(s <= cutoff))


def is_semisimple_at(a, lam0: float, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Nested kernel test: dim ker(A - lam0 I) == dim ker((A - lam0 I)^2).

    Vacuously true when lam0 is not an eigenvalue (both kernels trivial).
    The cutoff is guarded by the scale of A so that e.g. A = I at lam0 = 1
    resolves exactly even though A - I vanishes.
    """
    m = as_matrix(a)
    n = m.shape[0]
    shifted = m - float(lam0) * np.eye(n)
    scale1 = 1.0 + np.linalg.norm(m, 2) + abs(float(lam0))
    d1 = _kernel_dim_general(shifted, tol, scale1)
    if d1 == 0:
        return True
    d2 = _kernel_dim_general(shifted @ shifted, tol, scale1 * scale1)
    return d1 == d2


def matrix_exponential(a) -> np.ndarray:
    """exp(A) by scaling-and-squaring Pade (scipy)."""
    m = as_matrix(a)
    if m.shape[0] == 0:
        return np.zeros((0, 0))
    e = scipy.linalg.expm(m)
    if not np.all(np.isfinite(e)):
        raise NumericalError("matrix exponential overflowed")
    return e


def lozinski_measure_1(a) -> float:
    """Logarithmic norm induced by the 1-norm:
    max_j (a_jj + sum_{i != j} |a_ij|)."""
    m = as_matrix(a)
    if m.shape[0] == 0:
        return 0.0
    col = np.abs(m).sum(axis=0) - np.abs(np.diag(m)) + np.diag(m)
    return float(col.max())


def induced_norm_1(a) -> float:
    """Matrix norm induced by the vector 1-norm (max column sum)."""
    m = as_matrix(a, square=False)
    if m.size == 0:
        return 0.0
    return float(np.abs(m).sum(axis=0).max())
