"""Feasibility kernels: a projection-based semidefinite feasibility solver
and a phase-1 simplex for simplex-membership linear programs.

The SDP problems solved here are small (a handful of symmetric variable
blocks, dimensions in the tens) and homogeneous, so Douglas-Rachford
splitting between an affine lift and a product of shifted PSD cones is
adequate and keeps the trust base tiny.  (Plain alternating projections
degrade to sublinear rates when the solution touches a cone face, which
rank-pinned certificates do routinely.)  "Feasible" is only reported after
verify_lmi independently re-checks the candidate; the solver itself is not
part of the trust base.

Constraint representation: each Constraint encodes

    C(vars) = C0 + sum_t coeff_t * sym(L_t^T X_{v_t} R_t)  <=  0

with sym(M) = (M + M^T)/2.  Examples: A^T P A       -> Term(P, 1, A, A)
                                      A^T P + P A   -> Term(P, 2, A, I)
                                      (A-I)^T Q (A-I) -> Term(Q, 1, A-I, A-I)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, InputError, NumericalError
from .linalg import DEFAULT_TOL, Tolerances, as_matrix

__all__ = [
    "FEASIBLE",
    "INFEASIBLE",
    "MAX_ITERATIONS",
    "VarBlock",
    "Term",
    "Constraint",
    "LmiProblem",
    "FeasibilityResult",
    "evaluate_constraint",
    "sdp_feasible",
    "verify_lmi",
    "lp_simplex_membership",
]

FEASIBLE = "Feasible"
INFEASIBLE = "Infeasible-at-tolerance"
MAX_ITERATIONS = "MaxIterations"

# cap keeping the dense projection solver honest about its size envelope
MAX_SCALAR_UNKNOWNS = 4000

# strict definiteness must exceed the residual acceptance level by this
# factor (both relative to certificate scale), separating strictly feasible
# problems from ones that are only feasible in closure
STRICT_SEP = 10.0

# constraint residuals must also be small relative to the weakest strict
# eigenvalue among the variables (floored near machine noise): a candidate
# that parks floor-level mass on a direction the constraint genuinely
# rejects shows a violation proportional to that mass, which a threshold
# relative to the overall certificate scale alone would wave through
REL_SLACK = 1e-3
NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class VarBlock:
    """Symmetric matrix unknown.  strict=True means X >= delta*I is required
    (definiteness margin delta = Tolerances.psd_margin); otherwise X >= 0."""

    name: str
    dim: int
    strict: bool = True


@dataclass(frozen=True)
class Term:
    var: str
    coeff: float
    left: np.ndarray
    right: np.ndarray


@dataclass(frozen=True)
class Constraint:
    """C0 + sum_t coeff * sym(L^T X R) + sum_u coeff * tr(X) * I <= 0.

    trace_terms entries are (var_name, coeff) pairs; they keep relative
    strictness margins (e.g. + gamma*tr(P)/n * I) inside the homogeneous
    problem class, which the solver normalizes by a trace constraint.
    """

    name: str
    dim: int
    constant: np.ndarray
    terms: tuple
    trace_terms: tuple = ()


@dataclass
class LmiProblem:
    variables: list
    constraints: list
    tol: Tolerances = DEFAULT_TOL

    def variable(self, name: str) -> VarBlock:
        for v in self.variables:
            if v.name == name:
                return v
        raise InputError(f"unknown variable {name!r}")


@dataclass
class FeasibilityResult:
    status: str
    values: dict
    constraint_residuals: dict
    var_min_eigs: dict
    iterations: int
    diagnostics: str = ""

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


def _sym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def _svec_dim(n: int) -> int:
    return n * (n + 1) // 2


_SQRT2 = np.sqrt(2.0)
_SVEC_IDX: dict = {}


def _svec_idx(n: int):
    """Cached (rows, cols, weights) for row-major upper-triangle order."""
    cached = _SVEC_IDX.get(n)
    if cached is None:
        iu, ju = np.triu_indices(n)
        w = np.where(iu == ju, 1.0, _SQRT2)
        cached = _SVEC_IDX[n] = (iu, ju, w)
    return cached


def _svec(m: np.ndarray) -> np.ndarray:
    """Isometric vectorization of a symmetric matrix (off-diag * sqrt2)."""
    iu, ju, w = _svec_idx(m.shape[0])
    return m[iu, ju] * w


def _smat(v: np.ndarray, n: int) -> np.ndarray:
    iu, ju, w = _svec_idx(n)
    vals = v / w
    m = np.zeros((n, n))
    m[iu, ju] = vals
    m[ju, iu] = vals
    return m


def _svec_basis(n: int):
    """Orthonormal symmetric basis matrices E_k with svec(E_k) = e_k."""
    d = _svec_dim(n)
    out = []
    for k in range(d):
        e = np.zeros(d)
        e[k] = 1.0
        out.append(_smat(e, n))
    return out


def evaluate_constraint(con: Constraint, values: dict) -> np.ndarray:
    """Instantiate C(vars) for given variable values."""
    acc = np.array(con.constant, dtype=float, copy=True)
    for t in con.terms:
        x = values[t.var]
        acc += t.coeff * _sym(t.left.T @ x @ t.right)
    for vn, cf in con.trace_terms:
        acc += cf * float(np.trace(np.asarray(values[vn]))) * np.eye(con.dim)
    return _sym(acc)


def _check_problem(problem: LmiProblem):
    names = set()
    for v in problem.variables:
        if v.name in names:
            raise InputError(f"duplicate variable {v.name!r}")
        names.add(v.name)
        if v.dim < 0:
            raise InputError("negative variable dimension")
    total = sum(_svec_dim(v.dim) for v in problem.variables)
    total += sum(_svec_dim(c.dim) for c in problem.constraints)
    if total > MAX_SCALAR_UNKNOWNS:
        raise CapabilityError(
            f"problem has {total} scalar unknowns, cap is {MAX_SCALAR_UNKNOWNS}")
    for c in problem.constraints:
        cc = as_matrix(c.constant, name=f"constant of {c.name}")
        if cc.shape != (c.dim, c.dim):
            raise InputError(f"constraint {c.name!r} constant has wrong shape")
        for t in c.terms:
            v = problem.variable(t.var)
            lt = as_matrix(t.left, square=False, name="term.left")
            rt = as_matrix(t.right, square=False, name="term.right")
            if lt.shape != (v.dim, c.dim) or rt.shape != (v.dim, c.dim):
                raise InputError(
                    f"term shapes in {c.name!r} do not match (need "
                    f"{v.dim}x{c.dim})")
        for vn, _cf in c.trace_terms:
            problem.variable(vn)


def _svec_index(i: int, j: int, d: int) -> int:
    """Index of entry (i, j), i <= j, in the svec ordering for dim d."""
    return i * d - i * (i - 1) // 2 + (j - i)


def _assemble(problem: LmiProblem):
    """Build the affine system G z = b over z = [svec(vars); svec(slacks)].

    For each constraint: sum_t M_t svec(X) + svec(S_c) = -svec(C0_c),
    i.e. S_c = -C(vars), so S_c >= 0 encodes C(vars) <= 0.
    """
    var_offset = {}
    off = 0
    for v in problem.variables:
        var_offset[v.name] = off
        off += _svec_dim(v.dim)
    nvar = off
    con_offset = {}
    con_rows = []
    for c in problem.constraints:
        con_offset[c.name] = off
        off += _svec_dim(c.dim)
    ntot = off

    rows = sum(_svec_dim(c.dim) for c in problem.constraints)
    g = np.zeros((rows, ntot))
    b = np.zeros(rows)
    r0 = 0
    basis_cache = {}
    for c in problem.constraints:
        rdim = _svec_dim(c.dim)
        con_rows.append((c, r0))
        b[r0:r0 + rdim] = -_svec(_sym(np.asarray(c.constant, dtype=float)))
        for t in c.terms:
            v = problem.variable(t.var)
            if v.dim not in basis_cache:
                basis_cache[v.dim] = _svec_basis(v.dim)
            col0 = var_offset[t.var]
            for k, ek in enumerate(basis_cache[v.dim]):
                img = t.coeff * _sym(t.left.T @ ek @ t.right)
                g[r0:r0 + rdim, col0 + k] += _svec(img)
        svec_eye = _svec(np.eye(c.dim))
        for vn, cf in c.trace_terms:
            v = problem.variable(vn)
            col0 = var_offset[vn]
            for i in range(v.dim):
                g[r0:r0 + rdim, col0 + _svec_index(i, i, v.dim)] += cf * svec_eye
        s0 = con_offset[c.name]
        g[r0:r0 + rdim, s0:s0 + rdim] = np.eye(rdim)
        r0 += rdim
    return g, b, var_offset, con_offset, con_rows, nvar, ntot


def _facial_reduction(g, b, nvar, con_rows, con_offset, ntot):
    """Detect slack diagonal entries that the affine map forces to a
    constant.  A diagonal forced to 0 pins its whole row/column inside the
    PSD cone, so selector equalities for the off-diagonals are appended
    and the forced coordinates are reported so the cone projection can work
    on the corresponding face of the PSD cone directly (a face reached only
    tangentially stalls alternating projections).  A diagonal forced to a
    negative constant makes the problem structurally infeasible.

    Returns (extra_rows, extra_rhs, infeasible_message_or_None,
    forced_by_constraint).
    """
    extra = []
    seen = set()
    forced_map = {}
    for c, r0 in con_rows:
        d = c.dim
        rows = slice(r0, r0 + _svec_dim(d))
        # zero-detection is relative to this constraint's own coefficient
        # magnitude; a single heavily weighted constraint must not raise
        # the cutoff for its unweighted neighbours
        scale = 1.0 + (np.abs(g[rows, :nvar]).max() if nvar and d else 0.0)
        scale += np.abs(b[rows]).max() if d else 0.0
        ztol = 1e-11 * scale
        forced = []
        for i in range(d):
            r = r0 + _svec_index(i, i, d)
            row_zero = nvar == 0 or np.abs(g[r, :nvar]).max() <= ztol
            if not row_zero:
                continue
            if b[r] < -ztol:
                return [], [], (
                    f"constraint {c.name!r} diagonal {i} is fixed at "
                    f"{b[r]:.3e} < 0"), {}
            if abs(b[r]) <= ztol:
                forced.append(i)
        if forced:
            forced_map[c.name] = tuple(forced)
        s0 = con_offset[c.name]
        for i in forced:
            for j in range(d):
                if j == i:
                    continue
                lo, hi = min(i, j), max(i, j)
                key = (c.name, lo, hi)
                if key in seen:
                    continue
                seen.add(key)
                r = r0 + _svec_index(lo, hi, d)
                if nvar and np.abs(g[r, :nvar]).max() > ztol:
                    row = np.zeros(ntot)
                    row[s0 + _svec_index(lo, hi, d)] = 1.0
                    extra.append(row)
                elif abs(b[r]) > ztol:
                    return [], [], (
                        f"constraint {c.name!r} entry ({lo},{hi}) is fixed "
                        f"at {b[r]:.3e} but its diagonal is 0"), {}
    rhs = [0.0] * len(extra)
    return extra, rhs, None, forced_map


def _extract(problem, z, var_offset):
    values = {}
    for v in problem.variables:
        o = var_offset[v.name]
        values[v.name] = _smat(z[o:o + _svec_dim(v.dim)], v.dim)
    return values


def _clamp_psd(m: np.ndarray, floor: float) -> np.ndarray:
    w, u = np.linalg.eigh(m)
    if w[0] >= floor:
        return m
    w = np.maximum(w, floor)
    return (u * w) @ u.T


def sdp_feasible(problem: LmiProblem, max_iter: int = 20000,
                 check_every: int = 10) -> FeasibilityResult:
    """Douglas-Rachford feasibility search.

    Returns Feasible only when the independent verify_lmi check passes on
    the candidate.  A stalled violation measure reports
    Infeasible-at-tolerance (no certificate of infeasibility is produced);
    steady improvement that runs out of budget reports MaxIterations.
    """
    _check_problem(problem)
    tol = problem.tol
    delta = tol.psd_margin
    g, b, var_offset, con_offset, con_rows, nvar, ntot = _assemble(problem)

    if ntot == 0:
        return FeasibilityResult(FEASIBLE, {}, {}, {}, 0)

    extra, extra_rhs, reason, forced_map = _facial_reduction(
        g, b, nvar, con_rows, con_offset, ntot)
    if reason is not None:
        values = {v.name: np.zeros((v.dim, v.dim)) for v in problem.variables}
        return FeasibilityResult(INFEASIBLE, values, {}, {}, 0,
                                 diagnostics=reason)
    if extra:
        g = np.vstack([g, np.array(extra)])
        b = np.concatenate([b, np.array(extra_rhs)])

    # homogeneous problems (all our LMIs) get a trace normalization so the
    # iterate can neither collapse to the delta floor (which masks genuine
    # infeasibility) nor need to travel to a faraway scale
    homogeneous = all(
        (np.abs(np.asarray(c.constant)).max() if c.dim else 0.0) == 0.0
        for c in problem.constraints)
    strict_dims = sum(v.dim for v in problem.variables if v.strict)
    pinned = homogeneous and strict_dims > 0
    trace_total = float(sum(v.dim for v in problem.variables))
    if pinned:
        row = np.zeros(ntot)
        for v in problem.variables:
            o = var_offset[v.name]
            for i in range(v.dim):
                row[o + _svec_index(i, i, v.dim)] = 1.0
        g = np.vstack([g, row[None, :]])
        b = np.concatenate([b, [trace_total]])

    # the trace pin bounds every variable norm by trace_total, so a fixed
    # strict floor above STRICT_SEP * residual_tol * scale keeps the cone a
    # fixed set while still separating strictness from closure feasibility
    if pinned:
        strict_floor = max(delta, STRICT_SEP * tol.residual_tol * trace_total)
    else:
        strict_floor = delta

    # row equilibration: damped LMI forms carry 1/eps coefficient weights,
    # so raw rows can differ by four-plus orders of magnitude and defeat both
    # the pseudoinverse cutoff and the consistency test below; rescaling rows
    # of [g | b] leaves the affine set (hence its projector) unchanged
    if g.shape[0]:
        row_scale = np.maximum(np.abs(g).max(axis=1), 1e-30)
        g = g / row_scale[:, None]
        b = b / row_scale

    if g.shape[0] == 0:
        def proj_affine(z):
            return z
    else:
        # pinv-based affine projector tolerates redundant selector rows
        try:
            gpinv = np.linalg.pinv(g, rcond=1e-12)
        except np.linalg.LinAlgError:
            raise NumericalError(
                "affine projector factorization failed") from None
        zstar = gpinv @ b
        if np.linalg.norm(g @ zstar - b) > 1e-8 * (1.0 + np.linalg.norm(b)):
            values = {v.name: np.zeros((v.dim, v.dim))
                      for v in problem.variables}
            return FeasibilityResult(
                INFEASIBLE, values, {}, {}, 0,
                diagnostics="affine constraint system is inconsistent")

        def proj_affine(z):
            return z - gpinv @ (g @ z - b)

    # cone floors: strict vars target twice the accepted floor internally;
    # sound for jointly homogeneous problems (scale any exact solution up).
    # Slack blocks with forced-zero diagonals live on the matching face of
    # the PSD cone, so they are projected onto that face (zero the forced
    # rows and columns, eigen-project the rest): the full-cone projection
    # keeps rotating the pinned coordinates back in and crawls.
    floors = []
    face_blocks = []
    for v in problem.variables:
        floors.append((var_offset[v.name], v.dim,
                       2.0 * strict_floor if v.strict else 0.0))
    for c in problem.constraints:
        forced = forced_map.get(c.name)
        if forced:
            keep = np.array([i for i in range(c.dim) if i not in forced],
                            dtype=int)
            face_blocks.append((con_offset[c.name], c.dim, keep))
        else:
            floors.append((con_offset[c.name], c.dim, 0.0))

    # group equal-dimension blocks so the eigendecompositions batch
    groups = []
    by_dim = {}
    for off, dim, floor in floors:
        if dim == 0:
            continue
        by_dim.setdefault(dim, []).append((off, floor))
    for dim, entries in by_dim.items():
        d = _svec_dim(dim)
        offs = np.array([e[0] for e in entries])
        idx = offs[:, None] + np.arange(d)[None, :]
        fl = np.array([e[1] for e in entries])
        iu, ju, wgt = _svec_idx(dim)
        groups.append((dim, idx, fl, iu, ju, wgt))

    def proj_cone(z):
        out = z.copy()
        for dim, idx, fl, iu, ju, wgt in groups:
            vs = z[idx] / wgt
            mats = np.zeros((idx.shape[0], dim, dim))
            mats[:, iu, ju] = vs
            mats[:, ju, iu] = vs
            w, u = np.linalg.eigh(mats)
            w = np.maximum(w, fl[:, None])
            mats = (u * w[:, None, :]) @ u.transpose(0, 2, 1)
            out[idx] = mats[:, iu, ju] * wgt
        return out

    def violation(values):
        # residual thresholds are relative to the candidate scale: the
        # problems are (jointly) homogeneous, so absolute thresholds would
        # let a delta-sized candidate fake-certify an infeasible LMI
        worst = 0.0
        resids = {}
        mins = {}
        scale = _candidate_scale(values)
        for v in problem.variables:
            if v.dim == 0:
                mins[v.name] = np.inf
                continue
            me = float(np.linalg.eigvalsh(values[v.name])[0])
            mins[v.name] = me
            need = strict_floor if v.strict else -tol.residual_tol * scale
            worst = max(worst, need - me)
        accept = _residual_accept(problem, mins, scale, tol)
        for c in problem.constraints:
            m = evaluate_constraint(c, values)
            r = float(np.linalg.eigvalsh(m)[-1]) if c.dim else 0.0
            resids[c.name] = r
            worst = max(worst, r - accept)
        return worst, resids, mins, scale

    def run(start_scale, budget):
        x = np.zeros(ntot)
        for v in problem.variables:
            o = var_offset[v.name]
            x[o:o + _svec_dim(v.dim)] = _svec(start_scale * np.eye(v.dim))
        z = proj_affine(x)
        history = []
        it = 0
        while it < budget:
            z = proj_affine(x)
            y = proj_cone(2.0 * z - x)
            x = x + y - z
            it += 1
            if it % check_every:
                continue
            if not np.all(np.isfinite(x)):
                raise NumericalError("feasibility iterate diverged")
            values = _extract(problem, z, var_offset)
            worst, resids, mins, scale = violation(values)
            if worst <= 0.0:
                result = FeasibilityResult(FEASIBLE, values, resids, mins, it)
                report = verify_lmi(problem, values)
                if report["pass"]:
                    return result, it
                # should not happen: internal acceptance is stricter
                result.status = MAX_ITERATIONS
                result.diagnostics = "verify_lmi rejected candidate"
                return result, it
            rel = worst / max(scale, 1e-300)
            history.append(rel)
            # track the scale-relative violation: the absolute one shrinks
            # with a drifting iterate and masks plateaus.  Blatant
            # violations plateau fast; near-threshold ones get the patient
            # window before the run is declared stalled
            fired = False
            if len(history) > 30 and rel > 1e-2:
                prev = history[-31]
                fired = prev - rel <= 1e-3 * max(prev, 1e-300)
            if not fired and len(history) > 120:
                prev = history[-121]
                fired = prev - rel <= 1e-4 * max(prev, 1e-300)
            if not fired and it >= 4000:
                # still orders of magnitude above tolerance after a long
                # budget: the slow O(1/k) crawl of an infeasible instance
                fired = rel > 1e3 * tol.residual_tol
            if fired:
                return FeasibilityResult(
                    INFEASIBLE, values, resids, mins, it,
                    diagnostics=f"stalled with violation {worst:.3e}"), it
        values = _extract(problem, z, var_offset)
        worst, resids, mins, _ = violation(values)
        return FeasibilityResult(
            MAX_ITERATIONS, values, resids, mins, it,
            diagnostics=f"budget exhausted with violation {worst:.3e}"), it

    # margin'd problems (nonzero constant terms) may need certificates far
    # from the unit-scale start; retry from larger starts before concluding
    ladder = [1.0] if homogeneous else [1.0, 16.0, 256.0, 4096.0]
    spent = 0
    last = None
    for s in ladder:
        result, used = run(s, max_iter - spent)
        spent += used
        result.iterations = spent
        last = result
        if result.status != INFEASIBLE or spent >= max_iter:
            return result
    return last


def _candidate_scale(values: dict) -> float:
    """Certificate scale for relative residual thresholds: the largest
    variable spectral norm (1.0 when there are no sized variables)."""
    s = 0.0
    any_sized = False
    for x in values.values():
        x = np.asarray(x, dtype=float)
        if x.size == 0:
            continue
        any_sized = True
        s = max(s, float(np.linalg.norm(x, 2)))
    return s if any_sized else 1.0


def _residual_accept(problem: LmiProblem, mins: dict, scale: float,
                     tol: Tolerances) -> float:
    """Constraint residual acceptance level for a candidate: relative to the
    certificate scale, and additionally to the weakest strict eigenvalue
    (see REL_SLACK), floored near machine noise."""
    accept = tol.residual_tol * scale
    weakest = min((mins[v.name] for v in problem.variables
                   if v.strict and v.dim > 0), default=None)
    if weakest is not None:
        accept = min(accept,
                     max(REL_SLACK * weakest, NOISE_FLOOR * scale))
    return accept


def verify_lmi(problem: LmiProblem, values: dict,
               tol: Tolerances | None = None) -> dict:
    """Independent certificate check: symmetry, definiteness margins, and
    constraint residuals, using eigenvalue computations only.

    Residuals are accepted at residual_tol relative to the certificate
    scale (largest variable norm); the problems are homogeneous, so an
    absolute threshold would accept arbitrarily shrunken non-certificates.
    They must also be small relative to the weakest strict eigenvalue
    (REL_SLACK): a candidate hiding floor-level mass on a genuinely
    rejected direction produces a violation proportional to that mass, so
    scaling the threshold the same way rejects it at any mass level.
    Strict definiteness must clear the residual acceptance level by the
    separation factor (STRICT_SEP * residual_tol relative to scale, never
    below delta): without that, a problem whose closure is feasible but
    whose strict form is not (a variable forced to the floor) would pass.
    The margins absorb BLAS jitter via the (1 - 1e-9) factor.
    """
    tol = tol or problem.tol
    delta = tol.psd_margin
    report = {"pass": True, "constraint_max_eigs": {}, "var_min_eigs": {},
              "symmetry_residuals": {}, "scale": 0.0}

    def fail():
        report["pass"] = False

    for v in problem.variables:
        if v.name not in values:
            raise InputError(f"missing value for variable {v.name!r}")
        x = as_matrix(values[v.name], name=v.name)
        if x.shape != (v.dim, v.dim):
            raise InputError(f"value for {v.name!r} has wrong shape")
        sym_resid = float(np.linalg.norm(x - x.T)) / (1.0 + np.linalg.norm(x))
        report["symmetry_residuals"][v.name] = sym_resid
        if sym_resid > 1e-9:
            fail()
    scale = _candidate_scale({v.name: values[v.name] for v in problem.variables})
    report["scale"] = scale
    for v in problem.variables:
        if v.dim == 0:
            report["var_min_eigs"][v.name] = np.inf
            continue
        me = float(np.linalg.eigvalsh(_sym(np.asarray(values[v.name],
                                                      dtype=float)))[0])
        report["var_min_eigs"][v.name] = me
        if v.strict:
            need = max(delta, STRICT_SEP * tol.residual_tol * scale)
            need *= 1.0 - 1e-9
        else:
            need = -tol.residual_tol * scale
        if me < need:
            fail()
    accept = _residual_accept(problem, report["var_min_eigs"], scale, tol)
    for c in problem.constraints:
        m = evaluate_constraint(c, values)
        r = float(np.linalg.eigvalsh(m)[-1]) if c.dim else 0.0
        report["constraint_max_eigs"][c.name] = r
        if r > accept * (1.0 + 1e-9):
            fail()
    return report


def lp_simplex_membership(m, tol: Tolerances = DEFAULT_TOL):
    """Find w in the unit simplex with M w = 0, or None.

    Phase-1 simplex with Bland's rule on: minimize sum(a) subject to
    [M; 1^T] w + a = [0; 1], w >= 0, a >= 0.  M is normalized by its
    largest column norm first (the solution set is scale-invariant), and a
    candidate is accepted only if ||M w|| <= residual_tol afterwards.
    """
    m = as_matrix(m, square=False, name="membership matrix")
    nrow, ncol = m.shape
    if ncol == 0:
        return None
    scale = float(np.abs(m).max())
    mn = m / scale if scale > 0 else m
    rows = nrow + 1
    cols = ncol + rows
    # tableau rows: [A | I | rhs], objective = sum of artificials
    a = np.zeros((rows, cols + 1))
    a[:nrow, :ncol] = mn
    a[nrow, :ncol] = 1.0
    a[:, ncol:ncol + rows] = np.eye(rows)
    a[nrow, cols] = 1.0
    basis = list(range(ncol, ncol + rows))

    piv_tol = 1e-11
    max_pivots = 200 * (cols + 1)
    for _ in range(max_pivots):
        # reduced costs for objective sum(artificials): c_j - z_j where
        # z_j = sum over basic artificial rows of a[i, j]
        art_rows = [i for i, bv in enumerate(basis) if bv >= ncol]
        red = np.zeros(cols)
        for j in range(cols):
            zj = sum(a[i, j] for i in art_rows)
            cj = 1.0 if j >= ncol else 0.0
            red[j] = cj - zj
        entering = -1
        for j in range(cols):
            if j in basis:
                continue
            if red[j] < -1e-9:
                entering = j  # Bland: smallest eligible index
                break
        if entering < 0:
            break
        ratios = []
        for i in range(rows):
            if a[i, entering] > piv_tol:
                ratios.append((a[i, cols] / a[i, entering], basis[i], i))
        if not ratios:
            raise NumericalError("phase-1 LP unbounded (should not happen)")
        best = min(ratios, key=lambda t: (t[0], t[1]))
        r = best[2]
        # pivot
        a[r] /= a[r, entering]
        for i in range(rows):
            if i != r and abs(a[i, entering]) > 0:
                a[i] -= a[i, entering] * a[r]
        basis[r] = entering
    else:
        raise NumericalError("simplex pivot cap exceeded")

    objective = sum(a[i, cols] for i, bv in enumerate(basis) if bv >= ncol)
    if objective > 1e-9:
        return None
    w = np.zeros(ncol)
    for i, bv in enumerate(basis):
        if bv < ncol:
            w[bv] = a[i, cols]
    w = np.maximum(w, 0.0)
    s = w.sum()
    if s <= 0:
        return None
    w /= s
    if float(np.linalg.norm(m @ w)) > tol.residual_tol * (1.0 + scale):
        return None
    return w
