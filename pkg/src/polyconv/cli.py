"""Command-line front end: family JSON I/O, analysis reports, and
solver-independent report verification.

numpy and the analysis modules are imported inside functions so that
--threads can cap the BLAS thread pools before numpy first loads.

Exit codes: 0 = command completed (Unknown verdicts included), 1 = input
error (bad arguments, malformed files, failed verification), 2 = numerical
failure.  Errors are written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import InputError, NumericalError

__all__ = ["main", "report_to_dict", "verify_report"]

_THREAD_ENV = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
               "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS")

# where each verdict method keeps its evidence inside the report, and the
# only status the method can legitimately carry
_EVIDENCE_REF = {
    "vertex": "vertex_verdicts",
    "kernel-mismatch": "ksp",
    "decomposition-cqlf": "certificates/strong",
    "strong-lmi": "certificates/strong",
    "implied-by-strong": "certificates/strong",
    "weak-lmi": "certificates/weak",
    "ksp-weak-upgrade": "certificates/weak",
    "periodic-orbit": "witness",
    "implied-by-weak": "witness",
}
_METHOD_STATUS = {
    "vertex": "Disproven",
    "kernel-mismatch": "Disproven",
    "decomposition-cqlf": "Proven",
    "strong-lmi": "Proven",
    "implied-by-strong": "Proven",
    "weak-lmi": "Proven",
    "ksp-weak-upgrade": "Proven",
    "periodic-orbit": "Disproven",
    "implied-by-weak": "Disproven",
    "exhausted": "Unknown",
    "vertex-band": "Unknown",
}


def _version() -> str:
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:
        return "0.1.0"


# ------------------------------------------------------------ JSON helpers

def _reject_constant(token):
    raise InputError(f"non-finite number {token!r} in JSON input")


def _parse_json(text: str, what: str):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {what}: {exc}") from None


def _read_json(path: str, what: str):
    if path == "-":
        return _parse_json(sys.stdin.read(), what)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {what}: {exc}") from None
    return _parse_json(text, what)


def _read_json_arg(value: str, what: str):
    """Inline JSON (starts with '[' or '{') or a file path."""
    if value.lstrip()[:1] in ("[", "{"):
        return _parse_json(value, what)
    return _read_json(value, what)


def _load_family(path: str):
    from .family import family_from_dict
    return family_from_dict(_read_json(path, "family file"))


def _emit(doc, out: str | None) -> None:
    text = json.dumps(doc, indent=2, allow_nan=False)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _jsonable(obj):
    import numpy as np
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _tolerances_from(value: float | None):
    from .linalg import DEFAULT_TOL, Tolerances
    if value is None:
        return DEFAULT_TOL
    if value <= 0:
        raise InputError(f"tolerance must be positive, got {value}")
    return Tolerances(residual_tol=value)


def _tol_doc(tol) -> dict:
    return {"rank_rel": tol.rank_rel, "psd_margin": tol.psd_margin,
            "residual_tol": tol.residual_tol, "sim_tol": tol.sim_tol}


# ------------------------------------------------------- report emission

def _verdict_doc(verdict) -> dict:
    return {"status": verdict.status, "method": verdict.method,
            "details": _jsonable(verdict.details),
            "evidence": _EVIDENCE_REF.get(verdict.method)}


def _finite_or_none(value):
    import math
    value = float(value)
    return value if math.isfinite(value) else None


def _lmi_checks_doc(problem, values, tol) -> dict:
    from .feasibility import verify_lmi
    check = verify_lmi(problem, values, tol)
    # zero-size blocks report infinite margins; record those as null
    return {"var_min_eigs": {k: _finite_or_none(v)
                             for k, v in check["var_min_eigs"].items()},
            "constraint_max_eigs": {k: _finite_or_none(v)
                                    for k, v in
                                    check["constraint_max_eigs"].items()},
            "scale": check["scale"]}


def _strong_certificate_doc(cert, tol) -> dict:
    from .inclusion import CQLF_GAMMA
    dec = cert.decomposition
    doc = {
        "t": dec.t.tolist(),
        "kernel_dim": dec.m,
        "blocks": [b.tolist() for b in dec.a_as],
        "couplings": [b.tolist() for b in dec.a_r],
        "decomposition_residual": dec.residual,
    }
    if cert.cqlf is not None:
        doc["kind"] = "decomposition-cqlf"
        doc["gamma"] = CQLF_GAMMA
        doc["p"] = _jsonable(cert.cqlf.result.values["P"])
        doc["checks"] = _lmi_checks_doc(cert.cqlf.problem,
                                        cert.cqlf.result.values, tol)
    else:
        doc["kind"] = "strong-lmi"
        doc["p1"] = _jsonable(cert.lmi.result.values["P1"])
        doc["q"] = _jsonable(cert.lmi.result.values["Q"])
        doc["checks"] = _lmi_checks_doc(cert.lmi.problem,
                                        cert.lmi.result.values, tol)
    return doc


def _weak_certificate_doc(cert, tol) -> dict:
    return {"kind": "weak-lmi",
            "p": cert.p.tolist(),
            "parameter": cert.parameter,
            "checks": _lmi_checks_doc(cert.problem, cert.result.values, tol)}


def _rate_margins(mode: str, blocks, p, beta: float) -> list:
    import numpy as np
    out = []
    for b in blocks:
        if mode == "ct":
            m = b.T @ p + p @ b + 2.0 * beta * p
        else:
            m = b.T @ p @ b - np.exp(-2.0 * beta) * p
        out.append(float(np.linalg.eigvalsh(0.5 * (m + m.T))[-1]))
    return out


def _rate_doc(rate, cert) -> dict:
    import numpy as np
    p = np.asarray(cert.cqlf.result.values["P"], dtype=float)
    margins = _rate_margins(rate.mode, cert.decomposition.a_as, p, rate.beta)
    return {"beta": rate.beta, "c0": rate.c0, "c1": rate.c1,
            "mode": rate.mode, "checks": {"block_margins": margins}}


def report_to_dict(report, seed: int | None = None, tol=None) -> dict:
    """Flatten an AnalysisReport into the JSON report document.

    Every Proven/Disproven verdict points at an evidence section, and each
    LMI certificate records the definiteness and constraint margins it was
    accepted with, so verify_report can re-derive and compare them.
    """
    from .linalg import DEFAULT_TOL
    tol = tol or DEFAULT_TOL
    fam = report.family
    doc = {
        "version": _version(),
        "mode": fam.mode,
        "n": fam.n,
        "m_count": fam.m_count,
        "seed": seed,
        "tolerances": _tol_doc(tol),
        "verdicts": {"strong": _verdict_doc(report.strong),
                     "weak": _verdict_doc(report.weak)},
        "kernel": {"basis": report.kernel.basis.tolist(),
                   "dim": report.kernel.dim},
        "ksp": {"holds": report.ksp.holds,
                "kernel_dims": list(report.ksp.kernel_dims),
                "common_dim": report.ksp.common_dim},
        "vertex_verdicts": [
            {"status": v.status, "method": v.method,
             "details": _jsonable(v.details)}
            for v in report.vertex_verdicts],
        "certificates": {},
        "witness": _jsonable(report.witness),
        "rate": None,
        "diagnostics": _jsonable(report.diagnostics),
    }
    if report.strong_certificate is not None:
        doc["certificates"]["strong"] = _strong_certificate_doc(
            report.strong_certificate, tol)
    if report.weak_certificate is not None:
        doc["certificates"]["weak"] = _weak_certificate_doc(
            report.weak_certificate, tol)
    if report.rate is not None:
        doc["rate"] = _rate_doc(report.rate, report.strong_certificate)
    return doc


# ---------------------------------------------------- report verification

class _Checks:
    def __init__(self):
        self.items = []

    def add(self, name: str, ok: bool, detail: str = "") -> bool:
        self.items.append({"name": name, "pass": bool(ok),
                           "detail": "" if ok else detail})
        return bool(ok)

    def passed(self, name: str) -> bool:
        hits = [c for c in self.items if c["name"] == name]
        return bool(hits) and all(c["pass"] for c in hits)

    @property
    def ok(self) -> bool:
        return all(c["pass"] for c in self.items)


def _close(a, b, slack: float) -> bool:
    import numpy as np
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 and b.size == 0:
        return True
    if a.shape != b.shape:
        return False
    return bool(np.all(np.abs(a - b) <= slack))


def _eigs_match(recorded, computed, slack: float) -> bool:
    """Greedy multiset match of recorded eigenvalues (plain reals or
    [re, im] pairs) against recomputed ones."""
    import numpy as np
    try:
        rec = [complex(p[0], p[1]) if isinstance(p, (list, tuple))
               else complex(p) for p in recorded]
    except (TypeError, IndexError, ValueError):
        return False
    if len(rec) != computed.size:
        return False
    used = np.zeros(computed.size, dtype=bool)
    for z in rec:
        d = np.abs(computed - z)
        d[used] = np.inf
        j = int(np.argmin(d)) if d.size else -1
        if j < 0 or d[j] > slack:
            return False
        used[j] = True
    return True


def _verify_kernel(doc, family, tol, checks) -> None:
    import numpy as np
    from .inclusion import common_fixed_kernel
    from .linalg import Subspace, subspace_equal
    name = "kernel"
    try:
        basis = np.asarray(doc["kernel"]["basis"], dtype=float)
        dim = doc["kernel"]["dim"]
    except (KeyError, TypeError, ValueError):
        checks.add(name, False, "missing or malformed kernel section")
        return
    n = family.n
    if basis.ndim != 2 or basis.shape[0] != n or basis.shape[1] != dim:
        checks.add(name, False, "kernel basis shape mismatch")
        return
    if basis.shape[1]:
        gram = basis.T @ basis - np.eye(basis.shape[1])
        if not checks.add(name, float(np.abs(gram).max()) <= 1e-7,
                          "kernel basis not orthonormal"):
            return
    scale = 1.0 + max(float(np.linalg.norm(a, 2)) for a in family.matrices)
    eye = np.eye(n)
    for i, a in enumerate(family.matrices):
        shifted = a - eye if family.mode == "dt" else a
        resid = float(np.linalg.norm(shifted @ basis)) if basis.size else 0.0
        if not checks.add(name, resid <= tol.residual_tol * scale,
                          f"kernel not fixed by vertex {i + 1}"):
            return
    common = common_fixed_kernel(family, tol)
    checks.add(name, common.dim == dim
               and subspace_equal(Subspace(basis), common, tol),
               "recorded kernel differs from the recomputed one")


def _verify_ksp(doc, family, tol, checks) -> None:
    from .inclusion import ksp_check
    name = "ksp"
    sec = doc.get("ksp")
    if not isinstance(sec, dict):
        checks.add(name, False, "missing ksp section")
        return
    rec = ksp_check(family, tol)
    ok = (sec.get("holds") == rec.holds
          and list(sec.get("kernel_dims", [])) == list(rec.kernel_dims)
          and sec.get("common_dim") == rec.common_dim)
    checks.add(name, ok, "kernel sharing facts do not recompute")


def _verify_vertices(doc, family, tol, checks) -> None:
    import numpy as np
    from .linalg import kernel
    from .lti import DISPROVEN, EXACT_BAND, UNKNOWN_BAND
    name = "vertex_verdicts"
    recs = doc.get("vertex_verdicts")
    if not isinstance(recs, list) or len(recs) != family.m_count:
        checks.add(name, False, "vertex verdict count mismatch")
        return
    for i, rec in enumerate(recs):
        label = f"{name}[{i}]"
        a = family.matrices[i]
        n = family.n
        det = rec.get("details", {})
        eigs = np.linalg.eigvals(a)
        scale = 1.0 + float(np.linalg.norm(a, 2))
        if not checks.add(label,
                          _eigs_match(det.get("eigenvalues", []), eigs,
                                      1e-6 * scale),
                          "recorded eigenvalues do not recompute"):
            continue
        lam0 = det.get("critical_value")
        if lam0 is None or lam0 != (1.0 if family.mode == "dt" else 0.0):
            checks.add(label, False, "wrong critical value")
            continue
        kscale = scale + abs(lam0)
        shifted = a - lam0 * np.eye(n)
        g = kernel(shifted, tol, scale=kscale).dim
        g2 = kernel(shifted @ shifted, tol, scale=kscale * kscale).dim
        if not checks.add(label, det.get("kernel_dim") == g
                          and det.get("nested_kernel_dim") == g2,
                          "kernel dimensions do not recompute"):
            continue
        if rec.get("status") != DISPROVEN:
            continue
        # the disproof claims must re-derive, not merely re-read
        order = np.argsort(np.abs(eigs - lam0))
        rest = eigs[order[g:]]
        excess = (np.abs(rest) - 1.0 if family.mode == "dt"
                  else rest.real)
        method = rec.get("method")
        if method == "spectral-defective":
            checks.add(label, g >= 1 and g2 > g
                       and det.get("defect") == g2 - g,
                       "recorded defect does not recompute")
        elif method == "spectral-unstable":
            worst = float(excess.max()) if excess.size else 0.0
            checks.add(label,
                       _close(det.get("worst_excess", np.nan), worst,
                              tol.residual_tol * kscale)
                       and worst >= UNKNOWN_BAND,
                       "recorded instability does not recompute")
        elif method == "spectral-critical":
            near = bool(np.any(np.abs(excess) <= EXACT_BAND * kscale))
            checks.add(label, near,
                       "no machine-critical eigenvalue recomputes")
        else:
            checks.add(label, False, f"unknown disproof method {method!r}")


def _rebuilt_decomposition(family, t, m):
    from .inclusion import FamilyDecomposition
    from .linalg import Subspace
    r = family.n - m
    return FamilyDecomposition(family.mode, t, m, Subspace(t[:, r:]),
                               Subspace(t[:, :r]), (), (), 0.0)


def _margin_matches(recorded, computed, slack: float) -> bool:
    import math
    computed = float(computed)
    if not math.isfinite(computed):
        return recorded is None
    return (isinstance(recorded, (int, float))
            and abs(recorded - computed) <= slack)


def _check_lmi(name, problem, values, recorded_checks, tol, checks) -> None:
    """verify_lmi must pass and reproduce the recorded margins."""
    from .feasibility import verify_lmi
    try:
        check = verify_lmi(problem, values, tol)
    except InputError as exc:
        checks.add(name, False, f"certificate rejected: {exc}")
        return
    if not checks.add(name, check["pass"], "certificate infeasible"):
        return
    slack = tol.residual_tol * (1.0 + check["scale"])
    rec_cons = recorded_checks.get("constraint_max_eigs", {})
    rec_vars = recorded_checks.get("var_min_eigs", {})
    ok = set(rec_cons) == set(check["constraint_max_eigs"]) and all(
        _margin_matches(rec_cons[k], v, slack)
        for k, v in check["constraint_max_eigs"].items())
    ok = ok and set(rec_vars) == set(check["var_min_eigs"]) and all(
        _margin_matches(rec_vars[k], v, slack)
        for k, v in check["var_min_eigs"].items())
    ok = ok and _margin_matches(recorded_checks.get("scale"),
                                check["scale"], slack)
    checks.add(name, ok, "recorded margins do not recompute")


def _verify_strong_certificate(doc, family, tol, checks) -> None:
    import numpy as np
    from .feasibility import Constraint, LmiProblem, Term, VarBlock
    from .inclusion import CQLF_GAMMA, _strong_lmi_problem
    name = "certificates/strong"
    sec = doc["certificates"]["strong"]
    n = family.n
    try:
        t = np.asarray(sec["t"], dtype=float)
        m = int(sec["kernel_dim"])
        blocks = [np.asarray(b, dtype=float) for b in sec["blocks"]]
        couplings = [np.asarray(b, dtype=float) for b in sec["couplings"]]
        kind = sec["kind"]
    except (KeyError, TypeError, ValueError):
        checks.add(name, False, "malformed strong certificate")
        return
    r = n - m
    if t.shape != (n, n) or not 0 <= m <= n or sec["kernel_dim"] != m:
        checks.add(name, False, "decomposition shape mismatch")
        return
    if not checks.add(name, float(np.abs(t.T @ t - np.eye(n)).max()) <= 1e-7,
                      "T is not orthonormal"):
        return
    wc, wk = t[:, :r], t[:, r:]
    scale = 1.0 + max(float(np.linalg.norm(a, 2)) for a in family.matrices)
    slack = tol.residual_tol * scale
    eye = np.eye(n)
    target = np.eye(m) if family.mode == "dt" else np.zeros((m, m))
    resid = 0.0
    for i, a in enumerate(family.matrices):
        shifted = a - eye if family.mode == "dt" else a
        if not checks.add(name,
                          float(np.linalg.norm(shifted @ wk)) <= slack
                          if wk.size else True,
                          f"kernel block not fixed by vertex {i + 1}"):
            return
        if len(blocks) != family.m_count or len(couplings) != family.m_count:
            checks.add(name, False, "per-vertex block count mismatch")
            return
        if not checks.add(name,
                          _close(blocks[i], wc.T @ a @ wc, slack)
                          and _close(couplings[i], wk.T @ a @ wc, slack),
                          f"vertex {i + 1} blocks do not recompute"):
            return
        upper = wc.T @ a @ wk
        corner = wk.T @ a @ wk
        if upper.size:
            resid = max(resid, float(np.linalg.norm(upper, 2)))
        if corner.size:
            resid = max(resid, float(np.linalg.norm(corner - target, 2)))
    if not checks.add(name,
                      _close(sec.get("decomposition_residual", np.nan),
                             resid, slack),
                      "decomposition residual does not recompute"):
        return
    # the kernel block must be the full common kernel, not a slice of it
    from .inclusion import common_fixed_kernel
    common = common_fixed_kernel(family, tol)
    if not checks.add(name, common.dim == m,
                      "kernel block dimension is not the common kernel's"):
        return
    if kind == "decomposition-cqlf":
        p = np.asarray(sec.get("p", []), dtype=float)
        if not checks.add(name, sec.get("gamma") == CQLF_GAMMA,
                          "unexpected definiteness offset"):
            return
        if r == 0:
            if not checks.add(name, p.size == 0, "P block should be empty"):
                return
            prob = LmiProblem([VarBlock("P", 0, strict=True)], [], tol)
            _check_lmi(name, prob, {"P": np.zeros((0, 0))},
                       sec.get("checks", {}), tol, checks)
            return
        if p.shape != (r, r):
            checks.add(name, False, "P block shape mismatch")
            return
        eye_r = np.eye(r)
        cons = []
        for i, b in enumerate(blocks):
            if family.mode == "dt":
                terms = (Term("P", 1.0, b, b), Term("P", -1.0, eye_r, eye_r))
            else:
                terms = (Term("P", 2.0, b, eye_r),)
            cons.append(Constraint(f"vertex{i + 1}", r, np.zeros((r, r)),
                                   terms,
                                   trace_terms=(("P", CQLF_GAMMA / r),)))
        prob = LmiProblem([VarBlock("P", r, strict=True)], cons, tol)
        _check_lmi(name, prob, {"P": p}, sec.get("checks", {}), tol, checks)
    elif kind == "strong-lmi":
        p1 = np.asarray(sec.get("p1", []), dtype=float)
        q = np.asarray(sec.get("q", []), dtype=float)
        if p1.shape != (r, r) or q.shape != (n, n):
            checks.add(name, False, "P1/Q shape mismatch")
            return
        prob = _strong_lmi_problem(family, _rebuilt_decomposition(
            family, t, m), tol)
        _check_lmi(name, prob, {"P1": p1, "Q": q}, sec.get("checks", {}),
                   tol, checks)
    else:
        checks.add(name, False, f"unknown strong certificate kind {kind!r}")


def _verify_weak_certificate(doc, family, tol, checks) -> None:
    import numpy as np
    from .inclusion import _weak_problem
    name = "certificates/weak"
    sec = doc["certificates"]["weak"]
    try:
        p = np.asarray(sec["p"], dtype=float)
        parameter = float(sec["parameter"])
    except (KeyError, TypeError, ValueError):
        checks.add(name, False, "malformed weak certificate")
        return
    if p.shape != (family.n, family.n):
        checks.add(name, False, "P shape mismatch")
        return
    # the margin can sit at exactly zero independent of the damping, so an
    # edited parameter may still recompute; pin it to the search grid
    from .lti import EPS_GRID, ETA_GRID
    grid = ETA_GRID if family.mode == "dt" else EPS_GRID
    if not checks.add(name, parameter in grid,
                      "parameter is not on the search grid"):
        return
    prob = _weak_problem(family, parameter, tol)
    _check_lmi(name, prob, {"P": p}, sec.get("checks", {}), tol, checks)


def _verify_rate(doc, family, tol, checks) -> None:
    import numpy as np
    name = "rate"
    sec = doc["rate"]
    strong = (doc.get("certificates") or {}).get("strong")
    if (not isinstance(strong, dict)
            or strong.get("kind") != "decomposition-cqlf"):
        checks.add(name, False,
                   "rate needs the common-Lyapunov strong certificate")
        return
    try:
        beta = float(sec["beta"])
        c0 = float(sec["c0"])
        c1 = float(sec["c1"])
        p = np.asarray(strong["p"], dtype=float)
        blocks = [np.asarray(b, dtype=float) for b in strong["blocks"]]
        couplings = [np.asarray(b, dtype=float)
                     for b in strong["couplings"]]
    except (KeyError, TypeError, ValueError):
        checks.add(name, False, "malformed rate section")
        return
    if not checks.add(name, beta > 0 and sec.get("mode") == family.mode,
                      "rate parameters out of range"):
        return
    pscale = 1.0 + float(np.linalg.norm(p, 2)) if p.size else 1.0
    margins = _rate_margins(family.mode, blocks, p, beta)
    rec = sec.get("checks", {}).get("block_margins", [])
    if not checks.add(name,
                      _close(rec, margins, tol.residual_tol * pscale)
                      and all(v <= tol.residual_tol * pscale
                              for v in margins),
                      "decay margins do not recompute"):
        return
    eigp = np.linalg.eigvalsh(0.5 * (p + p.T)) if p.size else np.array([1.0])
    c0_rec = float(np.sqrt(eigp[-1] / eigp[0])) if eigp[0] > 0 else np.inf
    c1_rec = max((float(np.linalg.norm(c, 2)) for c in couplings if c.size),
                 default=0.0)
    checks.add(name, abs(c0 - c0_rec) <= 1e-6 * (1.0 + c0_rec)
               and abs(c1 - c1_rec) <= 1e-6 * (1.0 + c1_rec),
               "transient constants do not recompute")


def _verify_witness_section(doc, family, checks) -> None:
    import numpy as np
    from .sim import (WITNESS_PERIODS, WITNESS_RECURRENCE,
                      WITNESS_SEPARATION, _period_map_and_states,
                      verify_witness)
    name = "witness"
    ev = doc["witness"]
    if not isinstance(ev, dict):
        checks.add(name, False, "witness must be an object")
        return
    cycle = ev.get("cycle")
    dwell = ev.get("dwell")
    structural = (
        isinstance(cycle, list) and len(cycle) >= 1
        and all(isinstance(v, int) and not isinstance(v, bool)
                and 0 <= v < family.m_count for v in cycle)
        and isinstance(dwell, (int, float)) and dwell > 0
        and (family.mode == "ct" or float(dwell).is_integer())
        and ev.get("mode") == family.mode
        and ev.get("periods_checked") == WITNESS_PERIODS)
    if not checks.add(name, structural, "malformed witness fields"):
        return
    try:
        y0 = np.asarray(ev["start_state"], dtype=float)
    except (KeyError, TypeError, ValueError):
        checks.add(name, False, "malformed start state")
        return
    if not checks.add(name, y0.shape == (family.n,),
                      "start state has the wrong dimension"):
        return
    # the recorded numbers must be the re-derived ones, not just plausible
    prop, stages = _period_map_and_states(family, tuple(cycle), float(dwell))
    sep = max(float(np.linalg.norm(s @ y0 - y0)) for s in stages)
    y = y0
    rec = 0.0
    for _ in range(WITNESS_PERIODS):
        y = prop @ y
        rec = max(rec, float(np.linalg.norm(y - y0)))
    period = len(cycle) * float(dwell)
    consistent = (
        _margin_matches(ev.get("recurrence"), rec, 1e-9 * (1.0 + rec))
        and _margin_matches(ev.get("separation"), sep, 1e-9 * (1.0 + sep))
        and _margin_matches(ev.get("period_length"), period,
                            1e-9 * (1.0 + period))
        and rec <= WITNESS_RECURRENCE and sep >= WITNESS_SEPARATION)
    if not checks.add(name, consistent,
                      "recorded orbit numbers do not recompute"):
        return
    try:
        ok = verify_witness(family, ev)
    except InputError as exc:
        checks.add(name, False, f"malformed witness: {exc}")
        return
    checks.add(name, ok, "periodic orbit fails re-simulation")


def _verify_linkage(doc, checks) -> None:
    """Each decided verdict must cite an evidence section that checked out."""
    name = "evidence-linkage"
    ksp_holds = isinstance(doc.get("ksp"), dict) and doc["ksp"].get("holds")
    for side in ("strong", "weak"):
        v = (doc.get("verdicts") or {}).get(side)
        if not isinstance(v, dict):
            checks.add(name, False, f"missing {side} verdict")
            continue
        method = v.get("method")
        status = v.get("status")
        expected = _METHOD_STATUS.get(method)
        if expected is None:
            checks.add(name, False, f"unknown method {method!r}")
            continue
        if not checks.add(name, status == expected,
                          f"{side}: status {status!r} does not follow from "
                          f"method {method!r}"):
            continue
        if status == "Unknown":
            continue
        ref = v.get("evidence")
        if ref != _EVIDENCE_REF.get(method):
            checks.add(name, False, f"{side}: wrong evidence reference")
            continue
        if ref == "vertex_verdicts":
            vertex = v.get("details", {}).get("vertex")
            recs = doc.get("vertex_verdicts", [])
            cited_ok = (isinstance(vertex, int)
                        and 1 <= vertex <= len(recs)
                        and recs[vertex - 1].get("status") == "Disproven"
                        and checks.passed(f"vertex_verdicts[{vertex - 1}]"))
            checks.add(name, cited_ok, f"{side}: cited vertex not disproven")
        elif ref == "ksp":
            checks.add(name, checks.passed("ksp") and not ksp_holds,
                       f"{side}: kernel mismatch not established")
        elif ref == "certificates/strong":
            kind = ((doc.get("certificates") or {}).get("strong") or
                    {}).get("kind")
            want = method if method != "implied-by-strong" else kind
            checks.add(name, checks.passed("certificates/strong")
                       and kind == want,
                       f"{side}: strong certificate missing or failed")
        elif ref == "certificates/weak":
            ok = checks.passed("certificates/weak")
            if method == "ksp-weak-upgrade":
                ok = ok and checks.passed("ksp") and bool(ksp_holds)
            checks.add(name, ok,
                       f"{side}: weak certificate missing or failed")
        elif ref == "witness":
            checks.add(name, checks.passed("witness"),
                       f"{side}: witness missing or failed")


def verify_report(doc, family, tol=None):
    """Re-check every piece of recorded evidence without the solver.

    Kernels and spectra are recomputed with svd/eig, each recorded LMI
    certificate's constraints are rebuilt and re-checked with verify_lmi,
    and a recorded periodic orbit is re-simulated.  Every recorded number
    is also compared against its recomputation, so a report edited after
    the fact fails even when the edited value would itself be feasible.
    Returns (verified, checks).
    """
    from .linalg import Tolerances
    if not isinstance(doc, dict):
        raise InputError("report must be a JSON object")
    checks = _Checks()
    if tol is None:
        tdoc = doc.get("tolerances")
        tol = Tolerances(**tdoc) if isinstance(tdoc, dict) else Tolerances()
    checks.add("mode", doc.get("mode") == family.mode
               and doc.get("n") == family.n
               and doc.get("m_count") == family.m_count,
               "family does not match the report header")
    _verify_kernel(doc, family, tol, checks)
    _verify_ksp(doc, family, tol, checks)
    _verify_vertices(doc, family, tol, checks)
    certs = doc.get("certificates") or {}
    if "strong" in certs:
        _verify_strong_certificate(doc, family, tol, checks)
    if "weak" in certs:
        _verify_weak_certificate(doc, family, tol, checks)
    if doc.get("witness") is not None:
        _verify_witness_section(doc, family, checks)
    if doc.get("rate") is not None:
        _verify_rate(doc, family, tol, checks)
    _verify_linkage(doc, checks)
    return checks.ok, checks.items


# ------------------------------------------------------------ subcommands

def _cmd_analyze(args) -> int:
    from .inclusion import analyze
    from .sim import WitnessConfig
    family = _load_family(args.family)
    tol = _tolerances_from(args.tol)
    report = analyze(family, tol,
                     witness_config=WitnessConfig(seed=args.seed))
    _emit(report_to_dict(report, seed=args.seed, tol=tol), args.out)
    return 0


def _cmd_certify(args) -> int:
    from .inclusion import (cqlf_stability, ksp_check, strong_decompose,
                            strong_lmi, verify_polyhedral_strong, weak_lmi)
    family = _load_family(args.family)
    tol = _tolerances_from(args.tol)
    doc = {"method": args.method, "status": "Unknown", "certificate": None}
    if args.method == "polyhedral":
        if args.candidate is None:
            raise InputError("--method polyhedral needs --candidate X.json")
        x = _read_json_arg(args.candidate, "candidate file")
        rep = verify_polyhedral_strong(family, x, tol)
        doc["status"] = "Proven" if rep["pass"] else "Unknown"
        doc["certificate"] = _jsonable(rep)
    elif args.method == "weak-lmi":
        cert = weak_lmi(family, parameter=args.parameter, tol=tol)
        if cert is not None:
            doc["status"] = "Proven"
            doc["certificate"] = _weak_certificate_doc(cert, tol)
    else:
        if not ksp_check(family, tol).holds:
            doc["reason"] = ("per-vertex fixed spaces differ from the "
                            "common one; no strong certificate can exist")
            _emit(doc, args.out)
            return 0
        from .inclusion import StrongCertificate
        dec = strong_decompose(family, tol)
        if args.method == "cqlf":
            out = cqlf_stability(dec.a_as, family.mode, tol)
            if out.feasible:
                cert = StrongCertificate(family.mode, dec.kernel, dec,
                                         cqlf=out)
                doc["status"] = "Proven"
                doc["certificate"] = _strong_certificate_doc(cert, tol)
        else:
            out = strong_lmi(family, tol)
            if out.feasible:
                cert = StrongCertificate(family.mode, dec.kernel, dec,
                                         lmi=out)
                doc["status"] = "Proven"
                doc["certificate"] = _strong_certificate_doc(cert, tol)
    _emit(doc, args.out)
    return 0


def _signal_from_doc(doc):
    from .examples import spike_schedule_signal
    from .sim import SwitchingSignal
    if not isinstance(doc, dict) or "kind" not in doc:
        raise InputError("signal spec must be a JSON object with 'kind'")
    kind = doc["kind"]
    known = ("constant", "vertex-cycle", "iid-random", "explicit",
             "spike-schedule")
    extra = set(doc) - {"kind", "weights", "sequence", "dwell", "seed",
                        "sampling", "segments", "h_max"}
    if extra:
        raise InputError(f"unknown signal fields: {sorted(extra)}")
    if kind == "constant":
        return SwitchingSignal.constant(doc.get("weights", ()))
    if kind == "vertex-cycle":
        return SwitchingSignal.vertex_cycle(doc.get("sequence", ()),
                                            doc.get("dwell", 1))
    if kind == "iid-random":
        if "seed" not in doc:
            raise InputError("iid-random signal needs a 'seed'")
        return SwitchingSignal.iid_random(
            int(doc["seed"]), doc.get("sampling", "vertex"),
            doc.get("dwell", 1.0))
    if kind == "explicit":
        return SwitchingSignal.explicit(
            [(seg[0], seg[1]) for seg in doc.get("segments", ())])
    if kind == "spike-schedule":
        return spike_schedule_signal(int(doc.get("h_max", 40)))
    raise InputError(f"unknown signal kind {kind!r}; one of {known}")


def _parse_vector(text: str, what: str) -> list:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"{what} must be comma-separated reals, "
                         f"got {text!r}") from None


def _cmd_simulate(args) -> int:
    import numpy as np
    from .sim import (residual_diagnostics, simulate_ct, simulate_dt,
                      trajectory_to_csv)
    family = _load_family(args.family)
    tol = _tolerances_from(args.tol)
    signal = _signal_from_doc(_read_json_arg(args.signal, "signal spec"))
    x0 = _parse_vector(args.x0, "--x0")
    if family.mode == "dt":
        steps = int(round(args.horizon))
        if abs(args.horizon - steps) > 1e-9:
            raise InputError("DT horizon must be an integer step count")
        traj = simulate_dt(family, signal, x0, steps, tol)
    else:
        sample_dt = args.sample_dt or args.horizon / 1000.0
        traj = simulate_ct(family, signal, x0, args.horizon, sample_dt, tol)
    doc = {
        "mode": family.mode,
        "samples": int(traj.times.shape[0]),
        "t_final": float(traj.times[-1]),
        "final_state": traj.states[-1].tolist(),
        "converged": traj.converged,
        "limit": None if traj.limit is None else traj.limit.tolist(),
        "residual": None,
    }
    if traj.limit is not None:
        diag = residual_diagnostics(family, traj)
        res = {"pointwise_final": float(diag["pointwise"][-1])}
        if family.mode == "ct":
            res.update({
                "running_average_final": float(diag["running_average"][-1]),
                "averaged_weight": diag["averaged_weight"].tolist(),
                "witness_residual": diag["witness_residual"],
            })
        doc["residual"] = res
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            trajectory_to_csv(traj, fh)
        doc["csv"] = args.csv
    _emit(doc, args.out)
    return 0


def _cmd_weak_kernel(args) -> int:
    from .lasalle import weak_kernel_membership, weak_kernel_triviality_scan
    family = _load_family(args.family)
    tol = _tolerances_from(args.tol)
    if (args.x is None) == (args.scan is None):
        raise InputError("weak-kernel needs exactly one of --x or --scan")
    if args.x is not None:
        res = weak_kernel_membership(family, _parse_vector(args.x, "--x"),
                                     tol)
        doc = {"x": res.x.tolist(), "feasible": res.feasible,
               "weights": None if res.w is None else res.w.tolist(),
               "residual": res.residual}
    else:
        scan = weak_kernel_triviality_scan(family, samples=args.scan,
                                           seed=args.seed, tol=tol)
        witness = None
        if scan.witness is not None:
            witness = {"x": scan.witness.x.tolist(),
                       "weights": scan.witness.w.tolist(),
                       "residual": scan.witness.residual}
        doc = {"likely_trivial": scan.likely_trivial,
               "checked": scan.checked, "witness": witness}
    _emit(doc, args.out)
    return 0


def _cmd_lasalle(args) -> int:
    from .lasalle import lasalle_set_quadratic
    family = _load_family(args.family)
    tol = _tolerances_from(args.tol)
    p = _read_json_arg(args.p, "P matrix")
    las = lasalle_set_quadratic(family, p, tol)
    _emit({"provenance": las.provenance,
           "subspaces": [{"basis": s.basis.tolist(), "dim": s.dim}
                         for s in las.subspaces]}, args.out)
    return 0


def _cmd_dual(args) -> int:
    from .family import family_to_dict
    from .inclusion import dual_family
    _emit(family_to_dict(dual_family(_load_family(args.family))), args.out)
    return 0


def _cmd_rate(args) -> int:
    from .inclusion import analyze
    family = _load_family(args.family)
    tol = _tolerances_from(args.tol)
    report = analyze(family, tol, search_witness=False)
    if report.rate is None:
        raise InputError(
            "no rate available: strong convergence was not established "
            f"through the common-Lyapunov route (strong verdict: "
            f"{report.strong.status}, {report.strong.method})")
    _emit(_rate_doc(report.rate, report.strong_certificate), args.out)
    return 0


def _cmd_examples(args) -> int:
    from .examples import catalogue, catalogue_names
    from .family import family_to_dict
    if args.name is None:
        listing = []
        for name in catalogue_names():
            e = catalogue(name)
            listing.append({
                "name": e.name, "mode": e.family.mode, "n": e.family.n,
                "m_count": e.family.m_count,
                "expected_strong": e.expected_strong,
                "expected_weak": e.expected_weak,
                "description": e.description,
                "parameters": _jsonable(e.parameters),
            })
        _emit({"examples": listing}, args.out)
        return 0
    _emit(family_to_dict(catalogue(args.name).family), args.out)
    return 0


def _cmd_verify(args) -> int:
    doc = _read_json(args.report, "report file")
    family = _load_family(args.family)
    verified, checks = verify_report(doc, family)
    _emit({"verified": verified, "checks": checks}, args.out)
    if not verified:
        failed = sorted({c["name"] for c in checks if not c["pass"]})
        raise InputError("report verification failed: " + ", ".join(failed))
    return 0


# ------------------------------------------------------------- entry point

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _add_common(sp, tol_help: str = "override the certificate acceptance "
                "tolerance (residual_tol)") -> None:
    sp.add_argument("--tol", type=float, default=None, help=tol_help)
    sp.add_argument("--out", default=None,
                    help="write the JSON result here instead of stdout")


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polyconv",
                description="Convergence analysis of switched linear "
                            "systems over matrix polytopes")
    p.add_argument("--threads", type=int, default=None,
                   help="cap the BLAS thread pools (set at process start; "
                        "default: machine parallelism)")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("analyze", help="full strong/weak verdict report")
    sp.add_argument("family", help="family JSON file, or - for stdin")
    sp.add_argument("--seed", type=int, default=0,
                    help="seed for the witness search battery")
    _add_common(sp)
    sp.set_defaults(func=_cmd_analyze)

    sp = sub.add_parser("certify", help="run one certificate search")
    sp.add_argument("family")
    sp.add_argument("--method", required=True,
                    choices=("strong-lmi", "weak-lmi", "cqlf", "polyhedral"))
    sp.add_argument("--candidate", default=None,
                    help="candidate X matrix (JSON file or inline) for "
                         "--method polyhedral")
    sp.add_argument("--parameter", type=float, default=None,
                    help="fix the weak-lmi grid parameter")
    _add_common(sp)
    sp.set_defaults(func=_cmd_certify)

    sp = sub.add_parser("simulate", help="integrate one switching signal")
    sp.add_argument("family")
    sp.add_argument("--signal", required=True,
                    help="signal spec (JSON file or inline object)")
    sp.add_argument("--x0", required=True, help="initial state, e.g. 1,0")
    sp.add_argument("--horizon", type=float, required=True,
                    help="steps (dt) or final time (ct)")
    sp.add_argument("--sample-dt", type=float, default=None,
                    help="ct sampling interval (default horizon/1000)")
    sp.add_argument("--csv", default=None,
                    help="write t,x1..xn,w1..wM samples to this file")
    _add_common(sp)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("weak-kernel",
                        help="weak kernel membership or triviality scan")
    sp.add_argument("family")
    sp.add_argument("--x", default=None, help="state to test, e.g. 1,0")
    sp.add_argument("--scan", type=int, default=None,
                    help="sample count for the triviality scan")
    sp.add_argument("--seed", type=int, default=0)
    _add_common(sp)
    sp.set_defaults(func=_cmd_weak_kernel)

    sp = sub.add_parser("lasalle",
                        help="invariance candidate set from a wQLF")
    sp.add_argument("family")
    sp.add_argument("--P", dest="p", required=True,
                    help="P matrix (JSON file or inline)")
    _add_common(sp)
    sp.set_defaults(func=_cmd_lasalle)

    sp = sub.add_parser("dual", help="emit the transposed family")
    sp.add_argument("family")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_dual)

    sp = sub.add_parser("rate", help="exponential envelope of the "
                                     "off-kernel state")
    sp.add_argument("family")
    _add_common(sp)
    sp.set_defaults(func=_cmd_rate)

    sp = sub.add_parser("examples",
                        help="catalogue listing or one named family")
    sp.add_argument("name", nargs="?", default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_examples)

    sp = sub.add_parser("verify",
                        help="re-check a report's evidence without the "
                             "solver")
    sp.add_argument("report", help="report JSON file, or - for stdin")
    sp.add_argument("family", help="family JSON file")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_verify)
    return p


def _cap_threads(n: int) -> None:
    import os
    if n < 1:
        raise InputError(f"--threads must be at least 1, got {n}")
    for key in _THREAD_ENV:
        os.environ[key] = str(n)


def _error_json(kind: str, exc: Exception) -> None:
    sys.stderr.write(json.dumps(
        {"error": {"type": kind, "message": str(exc)}}) + "\n")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads is not None:
            _cap_threads(args.threads)
        return args.func(args)
    except InputError as exc:
        _error_json("input", exc)
        return 1
    except NumericalError as exc:
        _error_json("numerical", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
