"""Parametric generators for the application families and a catalogue of
named counterexamples.

Each catalogue entry packages a family with its expected strong and weak
verdicts; these are the golden targets the analyzer must reproduce.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .family import MatrixFamily
from .lti import DISPROVEN, PROVEN
from .sim import SwitchingSignal

__all__ = [
    "ExampleSpec",
    "opinion_family",
    "persistent_input_augment",
    "opinion_social_family",
    "kolmogorov_family",
    "plant_tuning_family",
    "spike_schedule_signal",
    "catalogue",
    "catalogue_names",
]


@dataclass
class ExampleSpec:
    name: str
    family: MatrixFamily
    expected_strong: str
    expected_weak: str
    description: str
    parameters: dict = field(default_factory=dict)


def _as_square(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"{name} must be a square matrix, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} must be finite")
    return a


def opinion_family(laplacian, mode: str = "ct") -> MatrixFamily:
    """Vertices -e_i e_i' L of the susceptibility-scaled consensus flow.

    Every vertex kernel contains the all-ones direction, so the family
    always has a common fixed line; for more than two nodes the per-vertex
    kernels are hyperplanes, hence strictly larger than the intersection.
    """
    if mode != "ct":
        raise InputError("opinion_family is defined for mode 'ct' only")
    lap = _as_square(laplacian, "Laplacian")
    n = lap.shape[0]
    scale = 1.0 + float(np.abs(lap).max())
    off = lap - np.diag(np.diag(lap))
    if np.any(off > 1e-12 * scale):
        raise InputError("Laplacian off-diagonal entries must be <= 0")
    if np.any(np.abs(lap.sum(axis=1)) > 1e-12 * scale * n):
        raise InputError("Laplacian rows must sum to zero")
    mats = []
    for i in range(n):
        m = np.zeros((n, n))
        m[i, :] = -lap[i, :]
        mats.append(m)
    return MatrixFamily("ct", tuple(mats),
                        tuple(f"node{i + 1}" for i in range(n)),
                        {"application": "opinion",
                         "common_kernel_contains": "ones"})


def persistent_input_augment(family: MatrixFamily, b,
                             mode: str | None = None) -> MatrixFamily:
    """Append the constant scalar input as a state: CT gets a zero last
    row, DT a unit last diagonal, so x' = A(w)x + b*u becomes linear."""
    if mode is not None and mode != family.mode:
        raise InputError(f"mode {mode!r} does not match family mode "
                         f"{family.mode!r}")
    n = family.n
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.shape != (n,):
        raise InputError(f"input column must have length {n}, got {b.shape}")
    if not np.all(np.isfinite(b)):
        raise InputError("input column must be finite")
    corner = 1.0 if family.mode == "dt" else 0.0
    mats = []
    for a in family.matrices:
        ext = np.zeros((n + 1, n + 1))
        ext[:n, :n] = a
        ext[:n, n] = b
        ext[n, n] = corner
        mats.append(ext)
    return MatrixFamily(family.mode, tuple(mats), family.labels,
                        {"augmented_input": True})


def opinion_social_family(delta, graphs, lam: float, q) -> MatrixFamily:
    """Augmented two-opinion network family [[-Delta + lam G_i, q], [0, 0]].

    Each graph matrix averages neighbor opinions, so its rows sum to zero.
    In the unbiased case q = beta * Delta * 1 every vertex then shares the
    kernel span([beta * 1; 1]); the flag and beta are recorded in metadata
    and the kernel itself is left to the numeric analysis.
    """
    delta = np.asarray(delta, dtype=float)
    if delta.ndim == 2:
        if np.any(delta != np.diag(np.diag(delta))):
            raise InputError("Delta must be diagonal")
        delta = np.diag(delta)
    delta = delta.reshape(-1)
    n = delta.size
    if np.any(~np.isfinite(delta)) or np.any(delta <= 0):
        raise InputError("Delta must have strictly positive diagonal")
    if not np.isfinite(lam) or lam <= 0:
        raise InputError(f"influence intensity must be positive, got {lam}")
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape != (n,):
        raise InputError(f"bias vector must have length {n}")
    gs = []
    for idx, g in enumerate(graphs):
        g = _as_square(g, f"graph matrix {idx + 1}")
        if g.shape != (n, n):
            raise InputError(f"graph matrix {idx + 1} must be {n} x {n}")
        gscale = 1.0 + float(np.abs(g).max())
        if np.any(np.abs(g.sum(axis=1)) > 1e-12 * gscale * n):
            raise InputError(
                f"graph matrix {idx + 1} rows must sum to zero")
        off = g - np.diag(np.diag(g))
        if np.any(off < -1e-12 * gscale):
            raise InputError(
                f"graph matrix {idx + 1} off-diagonal must be >= 0")
        gs.append(g)
    if not gs:
        raise InputError("need at least one graph matrix")
    betas = q / delta
    unbiased = bool(np.all(np.abs(betas - betas[0]) <= 1e-12 * (
        1.0 + np.abs(betas[0]))))
    mats = []
    for g in gs:
        ext = np.zeros((n + 1, n + 1))
        ext[:n, :n] = -np.diag(delta) + lam * g
        ext[:n, n] = q
        mats.append(ext)
    meta = {"application": "opinion-social", "unbiased": unbiased,
            "beta_bar": float(betas[0]) if unbiased else None}
    return MatrixFamily("ct", tuple(mats), None, meta)


def kolmogorov_family(stochasticity: str, matrices) -> MatrixFamily:
    """CT family of Metzler generators, row case A_i 1 = 0 (consensus in
    the infinity norm) or column case 1'A_i = 0 (mass preserved in the
    1-norm)."""
    if stochasticity not in ("row", "column"):
        raise InputError("stochasticity must be 'row' or 'column'")
    mats = []
    for idx, a in enumerate(matrices):
        a = _as_square(a, f"rate matrix {idx + 1}")
        scale = 1.0 + float(np.abs(a).max())
        off = a - np.diag(np.diag(a))
        if np.any(off < -1e-12 * scale):
            raise InputError(
                f"rate matrix {idx + 1} must be Metzler "
                "(nonnegative off-diagonal)")
        sums = a.sum(axis=1) if stochasticity == "row" else a.sum(axis=0)
        if np.any(np.abs(sums) > 1e-12 * scale * a.shape[0]):
            raise InputError(
                f"rate matrix {idx + 1} violates {stochasticity}-sum zero")
        mats.append(a)
    if not mats:
        raise InputError("need at least one rate matrix")
    expect = ("consensus on span(1)" if stochasticity == "row"
              else "kernel sharing may fail")
    return MatrixFamily("ct", tuple(mats), None,
                        {"application": "kolmogorov",
                         "stochasticity": stochasticity,
                         "expectation": expect})


def plant_tuning_family(a_range, b_range, k: float) -> MatrixFamily:
    """Integral plant tuning family -k [[a, -a], [-a, a+b]] at the four
    range corners; b = 0 vertices are singular on the line y1 = y2."""
    a_min, a_max = (float(v) for v in a_range)
    b_min, b_max = (float(v) for v in b_range)
    if not (np.isfinite(a_min) and np.isfinite(a_max)
            and 0 < a_min <= a_max):
        raise InputError("need 0 < a_min <= a_max")
    if not (np.isfinite(b_min) and np.isfinite(b_max)
            and 0 <= b_min <= b_max):
        raise InputError("need 0 <= b_min <= b_max")
    if not np.isfinite(k) or k <= 0:
        raise InputError(f"gain k must be positive, got {k}")
    mats = []
    labels = []
    for a in (a_min, a_max):
        for b in (b_min, b_max):
            mats.append(-k * np.array([[a, -a], [-a, a + b]]))
            labels.append(f"a={a:g},b={b:g}")
    meta = {"application": "plant-tuning"}
    if b_min == 0.0:
        meta["weak_limit_set"] = "y1=y2"
    return MatrixFamily("ct", tuple(mats), tuple(labels), meta)


def spike_schedule_signal(h_max: int = 40) -> SwitchingSignal:
    """Rest-then-spike schedule on {rest, decay}: during [h, h + d_h] the
    decay vertex is active with d_h = ln(2) 2^-(h+1), rest otherwise.

    Total decay time sums to ln 2 (truncated at h_max, tail below 1e-12
    for the default), so from x0 = 1 the state tends to 1/2 while the
    pointwise residual keeps spiking forever.
    """
    if h_max < 1:
        raise InputError("h_max must be at least 1")
    segments = []
    for h in range(h_max + 1):
        d = np.log(2.0) * 2.0 ** (-(h + 1))
        segments.append((d, (0.0, 1.0)))
        segments.append((1.0 - d, (1.0, 0.0)))
    return SwitchingSignal.explicit(segments)


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def _catalogue_entries() -> dict:
    half_one = MatrixFamily("dt", ([[0.5]], [[1.0]]))
    pm_one = MatrixFamily("dt", ([[-1.0]], [[1.0]]))
    spike = MatrixFamily("ct", ([[0.0]], [[-1.0]]),
                         ("rest", "decay"))
    colstoch = MatrixFamily("ct", ([[-1.0, 2.0], [1.0, -2.0]],
                                   [[-2.0, 1.0], [2.0, -1.0]]))
    diagk = MatrixFamily("ct", ([[-1.0, 0.0], [0.0, 0.0]],
                                [[0.0, 0.0], [0.0, -1.0]]))
    dt_dual = MatrixFamily("dt", ([[0.5, 1.0], [0.0, 1.0]],
                                  [[0.5, 2.0], [0.0, 1.0]]))
    a11 = MatrixFamily("dt", ([[0.5, 0.0], [1.0, 1.0]],
                              [[0.75, 0.0], [1.0, 1.0]]))
    path = opinion_family([[1.0, -1.0], [-1.0, 1.0]])
    return {
        "scalar-half-one": ExampleSpec(
            "scalar-half-one", half_one, DISPROVEN, PROVEN,
            "Scalar pair {1/2, 1}: every trajectory converges, but the "
            "limit depends on the signal and the kernels differ."),
        "pm-one-dt": ExampleSpec(
            "pm-one-dt", pm_one, DISPROVEN, DISPROVEN,
            "Scalar pair {-1, 1}: V = x^2 never increases yet alternating "
            "signs oscillate forever.",
            {"witness_cycle": (0,), "witness_dwell": 2}),
        "rotation-dt": ExampleSpec(
            "rotation-dt", MatrixFamily("dt", (_rotation(np.pi / 4),)),
            DISPROVEN, DISPROVEN,
            "Single rotation by pi/4: marginally stable, never settles."),
        "rotation-ct": ExampleSpec(
            "rotation-ct", MatrixFamily("ct", ([[0.0, 1.0], [-1.0, 0.0]],)),
            DISPROVEN, DISPROVEN,
            "Harmonic oscillator: imaginary spectrum keeps circling."),
        "spike-schedule": ExampleSpec(
            "spike-schedule", spike, DISPROVEN, PROVEN,
            "Rest/decay pair driven by shrinking spikes: the state "
            "converges to x0/2, outside the common kernel; the pointwise "
            "residual never dies, only its running average does.",
            {"h_max": 40, "limit_fraction": 0.5}),
        "column-stochastic-ct": ExampleSpec(
            "column-stochastic-ct", colstoch, DISPROVEN, DISPROVEN,
            "Column-stochastic generators: mass is conserved but the "
            "kernels differ and a dwell-1/2 alternation recurs.",
            {"witness_cycle": (0, 1), "witness_dwell": 0.5}),
        "diag-kernels": ExampleSpec(
            "diag-kernels", diagk, DISPROVEN, PROVEN,
            "Axis-decay pair: limits exist but land on either axis, so "
            "only the weak notion holds."),
        "dt-duality": ExampleSpec(
            "dt-duality", dt_dual, DISPROVEN, DISPROVEN,
            "Triangular pair whose transpose family converges strongly "
            "while the primal oscillates on a 2-cycle.",
            {"two_cycle_x1": (8.0 / 3.0, 10.0 / 3.0)}),
        "ct-duality": ExampleSpec(
            "ct-duality", colstoch, DISPROVEN, DISPROVEN,
            "CT counterpart of the duality gap: the transposed family is "
            "strongly convergent, the primal is not.",
            {"witness_cycle": (0, 1), "witness_dwell": 0.5}),
        "a11-switching": ExampleSpec(
            "a11-switching", a11, PROVEN, PROVEN,
            "Switching only the (1,1) contraction: common kernel e2, "
            "common Lyapunov block, strongly convergent.",
            {"limit_from_e1": (0.0, 2.4)}),
        "path-consensus": ExampleSpec(
            "path-consensus", path, PROVEN, PROVEN,
            "Two-node opinion consensus: agreement line is the shared "
            "kernel and the disagreement contracts at unit rate.",
            {"rate_beta": 1.0}),
    }


def catalogue_names() -> tuple:
    return tuple(sorted(_catalogue_entries()))


def catalogue(name: str) -> ExampleSpec:
    entries = _catalogue_entries()
    if name not in entries:
        known = ", ".join(sorted(entries))
        raise InputError(f"unknown example {name!r}; available: {known}")
    return entries[name]
