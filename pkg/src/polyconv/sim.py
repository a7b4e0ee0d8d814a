"""Trajectory generation for matrix families under switching signals.

DT trajectories follow the exact recursion x(k+1) = A(w(k)) x(k).  CT
signals are piecewise constant, so propagation is exact: one matrix
exponential per segment, and every sample inside a segment is computed
from the segment's start state (sampling density therefore never changes
the sampled values).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .family import MatrixFamily, simplex_weights
from .linalg import DEFAULT_TOL, Tolerances, kernel, matrix_exponential

__all__ = [
    "SwitchingSignal",
    "Trajectory",
    "WitnessConfig",
    "simulate_dt",
    "simulate_ct",
    "detect_limit",
    "residual_diagnostics",
    "find_nonconvergence_witness",
    "verify_witness",
    "trajectory_to_csv",
]

# periodic-orbit witness thresholds (on orbits normalized to unit start
# state): recurrence far below separation keeps false witnesses out at
# double precision
WITNESS_RECURRENCE = 1e-10
WITNESS_SEPARATION = 1e-3
WITNESS_PERIODS = 10


@dataclass(frozen=True)
class SwitchingSignal:
    """One of: constant(w), vertex_cycle(sequence, dwell),
    iid_random(seed, sampling, dwell), explicit(segments)."""

    kind: str
    weights: tuple | None = None
    sequence: tuple | None = None
    dwell: float | None = None
    seed: int | None = None
    sampling: str | None = None
    segments: tuple | None = None

    @staticmethod
    def constant(w) -> "SwitchingSignal":
        w = np.asarray(w, dtype=float).reshape(-1)
        return SwitchingSignal("constant", weights=tuple(float(v) for v in w))

    @staticmethod
    def vertex_cycle(sequence, dwell=1) -> "SwitchingSignal":
        seq = tuple(int(v) for v in sequence)
        if not seq:
            raise InputError("vertex cycle needs at least one index")
        if any(v < 0 for v in seq):
            raise InputError("vertex indices must be nonnegative")
        if dwell <= 0:
            raise InputError("dwell must be positive")
        return SwitchingSignal("vertex-cycle", sequence=seq,
                               dwell=float(dwell))

    @staticmethod
    def iid_random(seed: int, sampling: str = "vertex",
                   dwell: float = 1.0) -> "SwitchingSignal":
        if sampling not in ("vertex", "dirichlet"):
            raise InputError("sampling must be 'vertex' or 'dirichlet'")
        if dwell <= 0:
            raise InputError("dwell must be positive")
        return SwitchingSignal("iid-random", seed=int(seed),
                               sampling=sampling, dwell=float(dwell))

    @staticmethod
    def explicit(segments) -> "SwitchingSignal":
        segs = []
        for dur, w in segments:
            if not np.isfinite(dur) or dur <= 0:
                raise InputError("segment durations must be positive")
            w = np.asarray(w, dtype=float).reshape(-1)
            segs.append((float(dur), tuple(float(v) for v in w)))
        if not segs:
            raise InputError("explicit signal needs at least one segment")
        return SwitchingSignal("explicit", segments=tuple(segs))

    # -- realizations ----------------------------------------------------

    def weights_dt(self, m_count: int, k_steps: int) -> np.ndarray:
        """The weight vector applied at each of k_steps DT steps."""
        out = np.zeros((k_steps, m_count))
        if self.kind == "constant":
            out[:] = simplex_weights(self.weights, m_count)
        elif self.kind == "vertex-cycle":
            dwell = self.dwell
            if abs(dwell - round(dwell)) > 1e-12 or dwell < 1:
                raise InputError("DT dwell must be a positive integer")
            dwell = int(round(dwell))
            for v in self.sequence:
                if v >= m_count:
                    raise InputError(f"vertex index {v} out of range")
            period = [v for v in self.sequence for _ in range(dwell)]
            for k in range(k_steps):
                out[k, period[k % len(period)]] = 1.0
        elif self.kind == "iid-random":
            rng = np.random.default_rng(self.seed)
            if self.sampling == "vertex":
                out[np.arange(k_steps), rng.integers(0, m_count, k_steps)] = 1.0
            else:
                out[:] = rng.dirichlet(np.ones(m_count), size=k_steps)
        elif self.kind == "explicit":
            k = 0
            for dur, w in self.segments:
                if abs(dur - round(dur)) > 1e-12:
                    raise InputError(
                        "DT explicit segment durations must be integers")
                w = simplex_weights(w, m_count)
                for _ in range(int(round(dur))):
                    if k >= k_steps:
                        return out
                    out[k] = w
                    k += 1
            if k < k_steps:
                out[k:] = out[k - 1] if k else simplex_weights(
                    self.segments[-1][1], m_count)
        else:
            raise InputError(f"unknown signal kind {self.kind!r}")
        return out

    def segments_ct(self, m_count: int, t_end: float) -> list:
        """(duration, w) segments covering [0, t_end], last one truncated."""
        segs = []
        if self.kind == "constant":
            segs.append((t_end, simplex_weights(self.weights, m_count)))
            return segs
        if self.kind == "vertex-cycle":
            for v in self.sequence:
                if v >= m_count:
                    raise InputError(f"vertex index {v} out of range")
            t = 0.0
            for v in itertools.cycle(self.sequence):
                if t >= t_end:
                    break
                dur = min(self.dwell, t_end - t)
                w = np.zeros(m_count)
                w[v] = 1.0
                segs.append((dur, w))
                t += dur
            return segs
        if self.kind == "iid-random":
            rng = np.random.default_rng(self.seed)
            t = 0.0
            while t < t_end:
                dur = min(self.dwell, t_end - t)
                if self.sampling == "vertex":
                    w = np.zeros(m_count)
                    w[rng.integers(0, m_count)] = 1.0
                else:
                    w = rng.dirichlet(np.ones(m_count))
                segs.append((dur, w))
                t += dur
            return segs
        if self.kind == "explicit":
            t = 0.0
            for dur, w in self.segments:
                if t >= t_end:
                    break
                dur = min(dur, t_end - t)
                segs.append((dur, simplex_weights(w, m_count)))
                t += dur
            if t < t_end - 1e-12:
                # hold the final weight for the remaining horizon
                segs.append((t_end - t, simplex_weights(
                    self.segments[-1][1], m_count)))
            return segs
        raise InputError(f"unknown signal kind {self.kind!r}")


@dataclass
class Trajectory:
    mode: str
    times: np.ndarray
    states: np.ndarray
    weights: np.ndarray
    signal: SwitchingSignal
    limit: np.ndarray | None = None
    converged: bool = False
    diagnostics: dict = field(default_factory=dict)


def _validate_x0(family: MatrixFamily, x0) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape[0] != family.n:
        raise InputError(
            f"x0 has {x0.shape[0]} entries, family dimension is {family.n}")
    if not np.all(np.isfinite(x0)):
        raise InputError("x0 must be finite")
    return x0


def simulate_dt(family: MatrixFamily, signal: SwitchingSignal, x0,
                k_steps: int, tol: Tolerances = DEFAULT_TOL) -> Trajectory:
    if family.mode != "dt":
        raise InputError("simulate_dt needs a DT family")
    if k_steps < 1:
        raise InputError("k_steps must be at least 1")
    x0 = _validate_x0(family, x0)
    w = signal.weights_dt(family.m_count, k_steps)
    states = np.empty((k_steps + 1, family.n))
    states[0] = x0
    mats = family.matrices
    for k in range(k_steps):
        a = mats[0] * w[k, 0]
        for i in range(1, len(mats)):
            if w[k, i]:
                a = a + mats[i] * w[k, i]
        states[k + 1] = a @ states[k]
    # one weight row per sample: the weight applied on the step starting
    # there; the final sample repeats the last applied weight
    weights = np.vstack([w, w[-1:]])
    traj = Trajectory("dt", np.arange(k_steps + 1, dtype=float), states,
                      weights, signal)
    _attach_limit(traj, tol)
    return traj


def simulate_ct(family: MatrixFamily, signal: SwitchingSignal, x0,
                t_end: float, sample_dt: float,
                tol: Tolerances = DEFAULT_TOL) -> Trajectory:
    if family.mode != "ct":
        raise InputError("simulate_ct needs a CT family")
    if t_end <= 0:
        raise InputError("t_end must be positive")
    if sample_dt <= 0 or sample_dt > t_end:
        raise InputError("sample_dt must be in (0, t_end]")
    x0 = _validate_x0(family, x0)
    segs = signal.segments_ct(family.m_count, t_end)
    n_grid = int(np.floor(t_end / sample_dt + 1e-9))
    times = np.arange(n_grid + 1) * sample_dt
    if times[-1] < t_end - 1e-12 * max(1.0, t_end):
        times = np.append(times, t_end)
    states = np.empty((times.shape[0], family.n))
    weights = np.empty((times.shape[0], family.m_count))
    x_seg = x0
    t_seg = 0.0
    j = 0
    for idx, (dur, w) in enumerate(segs):
        a = family.a_of(w)
        t_next = t_seg + dur
        last = idx == len(segs) - 1
        # samples inside [t_seg, t_next), plus the final time on the last
        # segment; each computed from the segment start, so refining the
        # grid never changes values at shared sample times
        while j < times.shape[0] and (
                times[j] < t_next - 1e-12 * max(1.0, t_next)
                or (last and j < times.shape[0])):
            states[j] = matrix_exponential(a * (times[j] - t_seg)) @ x_seg
            weights[j] = w
            j += 1
        x_seg = matrix_exponential(a * dur) @ x_seg
        t_seg = t_next
    traj = Trajectory("ct", times, states, weights, signal)
    _attach_limit(traj, tol)
    return traj


def detect_limit(traj: Trajectory, window: int | None = None,
                 tol: float | None = None):
    """Cauchy tail test: if every state in the trailing window stays within
    tol of the final state, that final state is the detected limit."""
    count = traj.states.shape[0]
    if window is None:
        window = max(10, count // 10)
    if count <= window:
        raise InputError("trajectory shorter than the detection window")
    final = traj.states[-1]
    if tol is None:
        tol = DEFAULT_TOL.sim_tol * (1.0 + float(np.linalg.norm(final)))
    dev = np.linalg.norm(traj.states[-window:] - final, axis=1).max()
    return final.copy() if dev <= tol else None


def _attach_limit(traj: Trajectory, tol: Tolerances) -> None:
    count = traj.states.shape[0]
    window = max(10, count // 10)
    if count > window:
        limit = detect_limit(traj, window)
        if limit is not None:
            traj.limit = limit
            traj.converged = True


def residual_diagnostics(family: MatrixFamily, traj: Trajectory) -> dict:
    """Fixed-point residual series for a trajectory with a detected limit.

    DT: series ||(A(w(k)) - I) xbar|| per step (tends to 0 along convergent
    trajectories).  CT: pointwise ||A(w(t)) xbar|| per sample and per
    segment, the exact running average ||(1/T) int_0^T A(w(t)) xbar dt||,
    and the averaged weight wbar(T), whose A(wbar) xbar residual is the
    constant-weight witness the averaging argument produces.
    """
    if traj.limit is None:
        raise InputError("residual diagnostics need a detected limit")
    xbar = traj.limit
    if traj.mode == "dt":
        pointwise = np.array([
            np.linalg.norm(family.a_of(w) @ xbar - xbar)
            for w in traj.weights[:-1]])
        return {"pointwise": pointwise}
    segs = traj.signal.segments_ct(family.m_count, float(traj.times[-1]))
    images = [family.a_of(w) @ xbar for _, w in segs]
    seg_pointwise = np.array([np.linalg.norm(v) for v in images])
    # exact accumulation of int A(w(t)) xbar dt and int w(t) dt
    running = np.zeros(traj.times.shape[0])
    acc = np.zeros_like(xbar)
    acc_w = np.zeros(family.m_count)
    t_seg = 0.0
    j = 0
    eps = 1e-12 * max(1.0, float(traj.times[-1]))
    for idx, (dur, w) in enumerate(segs):
        t_next = t_seg + dur
        last = idx == len(segs) - 1
        while j < traj.times.shape[0] and (
                traj.times[j] < t_next - eps or last):
            t = traj.times[j]
            part = acc + images[idx] * (t - t_seg)
            running[j] = np.linalg.norm(part) / t if t > 0 else 0.0
            j += 1
        acc += images[idx] * dur
        acc_w += np.asarray(w) * dur
        t_seg = t_next
    pointwise = np.array([
        np.linalg.norm(family.a_of(w) @ xbar) for w in traj.weights])
    wbar = acc_w / t_seg
    return {
        "pointwise": pointwise,
        "segment_pointwise": seg_pointwise,
        "running_average": running,
        "averaged_weight": wbar,
        "witness_residual": float(np.linalg.norm(family.a_of(wbar) @ xbar)),
    }


# --------------------------------------------------------- witness search

@dataclass(frozen=True)
class WitnessConfig:
    period_max: int = 4
    dwells_dt: tuple = (1, 2, 3)
    dwells_ct: tuple = (0.5, 1.0, 2.0)
    settle_periods: int = 200
    seed: int = 0


def _cycle_candidates(m_count: int, period_max: int):
    """Vertex cycles up to rotation (repetition of shorter cycles kept:
    oscillation periods can exceed the cycle length)."""
    seen = set()
    for p in range(1, period_max + 1):
        for seq in itertools.product(range(m_count), repeat=p):
            rotations = {seq[i:] + seq[:i] for i in range(p)}
            key = min(rotations)
            if (p, key) in seen:
                continue
            seen.add((p, key))
            yield key


def _period_map_and_states(family: MatrixFamily, cycle, dwell):
    """The one-period propagator and the within-period propagators from the
    period start (a few interior points per segment in CT)."""
    n = family.n
    prop = np.eye(n)
    stages = [np.eye(n)]
    if family.mode == "dt":
        for v in cycle:
            a = family.matrices[v]
            for _ in range(int(dwell)):
                prop = a @ prop
                stages.append(prop.copy())
    else:
        for v in cycle:
            e_full = matrix_exponential(family.matrices[v] * dwell)
            for frac in (0.25, 0.5, 0.75):
                stages.append(matrix_exponential(
                    family.matrices[v] * (dwell * frac)) @ prop)
            prop = e_full @ prop
            stages.append(prop.copy())
    return prop, stages


def _check_orbit(prop, stages, y0):
    """Validate a candidate periodic orbit through y0 (unit norm): exact
    recurrence over WITNESS_PERIODS periods and genuine within-period
    separation."""
    sep = max(float(np.linalg.norm(s @ y0 - y0)) for s in stages)
    if sep < WITNESS_SEPARATION:
        return None
    y = y0
    rec = 0.0
    for _ in range(WITNESS_PERIODS):
        y = prop @ y
        rec = max(rec, float(np.linalg.norm(y - y0)))
        if rec > WITNESS_RECURRENCE:
            return None
    return {"recurrence": rec, "separation": sep,
            "periods_checked": WITNESS_PERIODS}


def find_nonconvergence_witness(family: MatrixFamily,
                                config: WitnessConfig = WitnessConfig()):
    """Search vertex-cycle signals for a periodic (non-constant) orbit.

    A trajectory that keeps returning to a state it measurably leaves can
    not converge, so a verified orbit disproves weak convergence.  Returns
    (signal, evidence) or None.  Candidate periodic points come from
    settling the period map from a small start battery and, when the
    settled point vanishes, from the period map's fixed space.
    """
    rng = np.random.default_rng(config.seed)
    n = family.n
    starts = [np.ones(n)] + [e for e in np.eye(n)] + [
        rng.standard_normal(n) for _ in range(3)]
    dwells = config.dwells_dt if family.mode == "dt" else config.dwells_ct
    for cycle in _cycle_candidates(family.m_count, config.period_max):
        for dwell in dwells:
            prop, stages = _period_map_and_states(family, cycle, dwell)
            candidates = []
            for x0 in starts:
                y = x0
                for _ in range(config.settle_periods):
                    y = prop @ y
                    norm = np.linalg.norm(y)
                    if not np.isfinite(norm) or norm > 1e12:
                        break
                    if norm < 1e-9:
                        break
                else:
                    if np.linalg.norm(prop @ y - y) <= 1e-11 * max(
                            1.0, np.linalg.norm(y)) and \
                            np.linalg.norm(y) > 1e-6:
                        candidates.append(y / np.linalg.norm(y))
            # exact fixed vectors of the period map are period states even
            # when the map has other neutral modes that prevent settling
            fixed = kernel(prop - np.eye(n))
            candidates.extend(fixed.basis.T)
            for y0 in candidates:
                ev = _check_orbit(prop, stages, y0)
                if ev is None:
                    continue
                signal = SwitchingSignal.vertex_cycle(cycle, dwell)
                ev.update({
                    "mode": family.mode,
                    "cycle": list(cycle),
                    "dwell": float(dwell),
                    "start_state": y0.tolist(),
                    "period_length": len(cycle) * float(dwell),
                })
                return signal, ev
    return None


def verify_witness(family: MatrixFamily, evidence: dict) -> bool:
    """Re-simulate a recorded periodic orbit and re-check its recurrence
    and separation inequalities from scratch."""
    try:
        cycle = [int(v) for v in evidence["cycle"]]
        dwell = float(evidence["dwell"])
        y0 = np.asarray(evidence["start_state"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed witness evidence: {exc}") from None
    if y0.shape != (family.n,):
        return False
    signal = SwitchingSignal.vertex_cycle(cycle, dwell)
    period = len(cycle) * dwell
    if family.mode == "dt":
        traj = simulate_dt(family, signal, y0,
                           int(round(period)) * WITNESS_PERIODS)
        period_idx = int(round(period))
    else:
        samples_per_period = 8 * len(cycle)
        dt = period / samples_per_period
        traj = simulate_ct(family, signal, y0, period * WITNESS_PERIODS, dt)
        period_idx = samples_per_period
    rec = 0.0
    for p in range(1, WITNESS_PERIODS + 1):
        rec = max(rec, float(np.linalg.norm(
            traj.states[p * period_idx] - y0)))
    sep = float(np.linalg.norm(traj.states[:period_idx + 1] - y0,
                               axis=1).max())
    return rec <= WITNESS_RECURRENCE and sep >= WITNESS_SEPARATION


# ----------------------------------------------------------------- export

def trajectory_to_csv(traj: Trajectory, fh) -> None:
    """Write `t,x1..xn,w1..wM` rows with 17 significant digits."""
    n = traj.states.shape[1]
    m = traj.weights.shape[1]
    header = ",".join(["t"] + [f"x{i + 1}" for i in range(n)]
                      + [f"w{i + 1}" for i in range(m)])
    fh.write(header + "\n")
    for t, x, w in zip(traj.times, traj.states, traj.weights):
        row = [t] + list(x) + list(w)
        fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
