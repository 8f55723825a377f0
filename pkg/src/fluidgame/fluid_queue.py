"""Deterministic fluid queue driven by a piecewise-linear arrival curve.

The queue opens at time 0 and then serves at constant rate ``mu`` whenever it
holds mass.  Everything here is exact on piecewise-linear inputs: the running
supremum in the queue-length formula only changes slope where the
netput ``mu*s - A(s)`` overtakes its past maximum, and those crossing times
are solved for directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .profile import Curve, CurveError, Support, curve_sum

SNAP = 1e-12


def _check_rate(mu: float) -> float:
    mu = float(mu)
    if not mu > 0.0:
        raise ValueError(f"service rate must be positive, got {mu}")
    return mu


def _check_arrivals(a: Curve) -> None:
    if a.right_slope != 0.0:
        raise CurveError("arrival curve must have finite total mass")


def _running_max_curve(a: Curve, mu: float) -> Curve:
    """``M(t) = sup_{s in [0,t]} max(mu*s - A(s), 0)`` as a continuous curve."""
    pts = a.breakpoints
    pts = np.union1d(pts[pts >= 0.0], [0.0])
    d_right = mu * pts - a(pts)
    d_left = mu * pts - a.eval_left(pts)
    d_left[0] = d_right[0]  # the supremum starts at s = 0

    # running max of every value seen up to and including each knot
    seen = np.maximum(d_left, d_right)
    m_at = np.maximum.accumulate(np.maximum(seen, 0.0))

    m0 = m_at[:-1]
    start, end = d_right[:-1], d_left[1:]
    # where the netput overtakes its past max inside a piece, M starts rising
    cross = (end > m0) & (start < m0)
    frac = (m0[cross] - start[cross]) / (end[cross] - start[cross])
    cross_t = pts[:-1][cross] + frac * np.diff(pts)[cross]
    times = np.concatenate([[0.0], pts[1:], cross_t])
    vals = np.concatenate([[0.0], np.maximum(m0, end), m0[cross]])
    # after the last breakpoint A is flat, so the netput rises at slope mu
    m_last, d_last = m_at[-1], d_right[-1]
    s = pts[-1] + (m_last - d_last) / mu
    if s > pts[-1]:
        times = np.append(times, s)
        vals = np.append(vals, m_last)
    return Curve(times, vals, right_slope=mu)


def queue_length(a: Curve, mu: float) -> Curve:
    """Queue length ``Q(t) = A(t) - mu*t^+ + M(t)``; exact and non-negative."""
    mu = _check_rate(mu)
    _check_arrivals(a)
    a = a.monotone_cleaned()
    m = _running_max_curve(a, mu)
    q = curve_sum(curve_sum(a, Curve.positive_part().scale(-mu)), m)
    scale = max(1.0, abs(a.v[-1]))
    vals = np.where(q.v < SNAP * scale, 0.0, q.v)
    return Curve(q.t, vals, right_slope=0.0)


def departure_map(a: Curve, mu: float) -> Curve:
    """Right-continuous departure map ``tau(t) = Q(t)/mu + max(t, 0)``."""
    mu = _check_rate(mu)
    q = queue_length(a, mu)
    return curve_sum(q.scale(1.0 / mu), Curve.positive_part())


def _engaged_from_q(q: Curve) -> Support:
    t, v = q.t, q.v
    spans: list[list[float]] = []
    for i in range(t.size - 1):
        if t[i + 1] == t[i]:
            # a jump up to a positive level starts an engaged stretch here
            if v[i + 1] > 0.0 and not (spans and spans[-1][1] >= t[i]):
                spans.append([float(t[i]), float(t[i])])
            continue
        if v[i] > 0.0 or v[i + 1] > 0.0:
            a, b = float(t[i]), float(t[i + 1])
            if spans and a <= spans[-1][1]:
                spans[-1][1] = max(spans[-1][1], b)
            else:
                spans.append([a, b])
    return Support(tuple((a, b) for a, b in spans))


def engaged_set(a: Curve, mu: float) -> Support:
    """Closure of ``{s : Q(s) > 0}`` as closed intervals."""
    return _engaged_from_q(queue_length(a, mu))


@dataclass(frozen=True, eq=False)
class QueueTrace:
    """Queue length, waiting time and departure map of one fluid queue."""

    arrivals: Curve
    mu: float
    q: Curve
    tau: Curve

    @cached_property
    def engaged(self) -> Support:
        return _engaged_from_q(self.q)

    def wait(self, t):
        """Expected wait of mass arriving at ``t`` (midpoint rule at jumps)."""
        tt = np.asarray(t, dtype=float)
        w = (self.q(tt) + self.q.eval_left(tt)) / (2.0 * self.mu) + np.maximum(0.0, -tt)
        return float(w) if np.ndim(w) == 0 else w

    def depart(self, t):
        tt = np.asarray(t, dtype=float)
        out = self.wait(tt) + tt
        return float(out) if np.ndim(out) == 0 else out

    def busy_time(self, t: float) -> float:
        """Lebesgue measure of engaged time in ``[0, t]``."""
        total = 0.0
        for lo, hi in self.engaged:
            lo, hi = max(lo, 0.0), min(hi, t)
            if hi > lo:
                total += hi - lo
        return total


def trace_queue(a: Curve, mu: float) -> QueueTrace:
    mu = _check_rate(mu)
    q = queue_length(a, mu)
    tau = curve_sum(q.scale(1.0 / mu), Curve.positive_part())
    return QueueTrace(arrivals=a, mu=mu, q=q, tau=tau)


def waiting_time(a: Curve, mu: float, t):
    """``W(t) = (Q(t+) + Q(t-)) / (2 mu) + max(0, -t)``."""
    return trace_queue(a, mu).wait(t)


def simulate_discrete(a: Curve, mu: float, t0: float, t1: float, dt: float = 1e-4):
    """Plain time-stepped queue: returns grid times and queue lengths.

    Arrivals in each step are added first, then up to ``mu*dt`` (prorated for
    the step straddling time 0) is served.  Kept deliberately naive so it can
    act as an independent check on :func:`queue_length`.
    """
    mu = _check_rate(mu)
    if t0 >= 0:
        raise ValueError("simulation must start before the queue opens")
    n = int(round((t1 - t0) / dt))
    grid = t0 + dt * np.arange(n + 1)
    cum = a(grid)
    q = np.empty(n + 1)
    level = q[0] = cum[0]
    for k in range(n):
        level += cum[k + 1] - cum[k]
        lo, hi = grid[k], grid[k + 1]
        open_len = hi - max(lo, 0.0) if hi > 0.0 else 0.0
        level -= min(level, mu * min(open_len, dt))
        q[k + 1] = level
    return grid, q
