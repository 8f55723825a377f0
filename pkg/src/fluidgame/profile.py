"""Exact algebra on right-continuous piecewise-linear functions of time.

A :class:`Curve` is stored as a list of knots ``(t_k, v_k)`` sorted by time.
Between two knots with distinct times the curve is linear.  A jump at time
``s`` is stored as two consecutive knots with the same time: the first holds
the left limit, the second the (right-continuous) value.  Before the first
knot the curve is constant; after the last knot it is linear with slope
``right_slope``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TIME_TOL = 1e-12
VALUE_TOL = 1e-13


class CurveError(ValueError):
    pass


def _normalize(ts, vs, tol=TIME_TOL):
    """Sort knots, merge times closer than ``tol`` and collapse fake jumps."""
    ts = np.asarray(ts, dtype=float)
    vs = np.asarray(vs, dtype=float)
    if ts.shape != vs.shape or ts.ndim != 1:
        raise CurveError("knot times and values must be 1-d arrays of equal length")
    if ts.size == 0:
        return np.zeros(1), np.zeros(1)
    if not (np.all(np.isfinite(ts)) and np.all(np.isfinite(vs))):
        raise CurveError("knots must be finite")
    order = np.argsort(ts, kind="stable")
    ts, vs = ts[order], vs[order]

    new_group = np.empty(ts.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = np.diff(ts) > tol
    first = np.nonzero(new_group)[0]
    last = np.append(first[1:] - 1, ts.size - 1)
    t0 = ts[first]
    vl, vr = vs[first], vs[last]
    # jumps smaller than rounding noise are not jumps
    scale = max(1.0, float(np.max(np.abs(vs))))
    same = np.abs(vr - vl) <= VALUE_TOL * scale
    vl = np.where(same, vr, vl)
    reps = np.where(same, 1, 2)
    out_t = np.repeat(t0, reps)
    out_v = np.repeat(vr, reps)
    jump_pos = np.cumsum(reps) - reps  # index of the first knot of each group
    out_v[jump_pos] = vl
    return out_t, out_v


@dataclass(frozen=True, eq=False)
class Curve:
    """Immutable piecewise-linear, right-continuous function of time."""

    t: np.ndarray
    v: np.ndarray
    right_slope: float = 0.0

    def __init__(self, times: Iterable[float], values: Iterable[float], right_slope: float = 0.0):
        if not isinstance(times, np.ndarray):
            times = list(times)
        if not isinstance(values, np.ndarray):
            values = list(values)
        ts, vs = _normalize(times, values)
        ts.setflags(write=False)
        vs.setflags(write=False)
        object.__setattr__(self, "t", ts)
        object.__setattr__(self, "v", vs)
        object.__setattr__(self, "right_slope", float(right_slope))

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls) -> "Curve":
        return cls([0.0], [0.0])

    @classmethod
    def identity(cls) -> "Curve":
        return cls([0.0], [0.0], right_slope=1.0)

    @classmethod
    def positive_part(cls) -> "Curve":
        """The curve ``t -> max(t, 0)``."""
        return cls([0.0], [0.0], right_slope=1.0)

    @classmethod
    def constant(cls, value: float) -> "Curve":
        return cls([0.0], [value])

    @classmethod
    def from_rates(cls, pieces: Sequence[tuple[float, float, float]], start: float = 0.0) -> "Curve":
        """Cumulative curve of a piecewise-constant rate.

        ``pieces`` is a list of ``(t0, t1, rate)`` with non-overlapping
        intervals; zero-length and zero-rate pieces are ignored.
        """
        pieces = [(float(a), float(b), float(r)) for a, b, r in pieces if b - a > TIME_TOL and r != 0.0]
        if not pieces:
            return cls.constant(start)
        pieces.sort()
        for (a0, b0, _), (a1, _, _) in zip(pieces, pieces[1:]):
            if a1 < b0 - TIME_TOL:
                raise CurveError(f"rate pieces overlap: [{a0}, {b0}] and [{a1}, ...]")
        ts, vs = [], []
        acc = start
        for a, b, r in pieces:
            if ts and abs(ts[-1] - a) <= TIME_TOL:
                ts.pop()
                vs.pop()
            ts.append(a)
            vs.append(acc)
            acc += r * (b - a)
            ts.append(b)
            vs.append(acc)
        return cls(ts, vs)

    @classmethod
    def from_steps(cls, times: Sequence[float], masses: Sequence[float]) -> "Curve":
        """Pure-jump cumulative curve with ``masses[k]`` placed at ``times[k]``."""
        times = np.asarray(times, dtype=float)
        masses = np.asarray(masses, dtype=float)
        keep = masses != 0.0
        times, masses = times[keep], masses[keep]
        if times.size == 0:
            return cls.zero()
        order = np.argsort(times, kind="stable")
        times, masses = times[order], masses[order]
        cum = np.cumsum(masses)
        ts = np.repeat(times, 2)
        vs = np.empty_like(ts)
        vs[0::2] = cum - masses
        vs[1::2] = cum
        return cls(ts, vs)

    @classmethod
    def _from_one_sided(cls, times, left, right, right_slope) -> "Curve":
        times = np.asarray(times, dtype=float)
        left = np.asarray(left, dtype=float)
        right = np.asarray(right, dtype=float)
        ts = np.repeat(times, 2)
        vs = np.empty_like(ts)
        vs[0::2] = left
        vs[1::2] = right
        return cls(ts, vs, right_slope)

    # -- evaluation -------------------------------------------------------

    def _interp(self, x, idx):
        t, v = self.t, self.v
        n = t.size
        out = np.empty_like(x)
        lo = idx < 0
        hi = idx >= n - 1
        mid = ~(lo | hi)
        out[lo] = v[0]
        out[hi] = v[-1] + self.right_slope * (x[hi] - t[-1])
        if np.any(mid):
            i = idx[mid]
            t0, t1 = t[i], t[i + 1]
            v0, v1 = v[i], v[i + 1]
            out[mid] = v0 + (v1 - v0) * (x[mid] - t0) / (t1 - t0)
        return out

    def __call__(self, x):
        """Right-continuous value ``c(x)``."""
        xa = np.asarray(x, dtype=float)
        scalar = xa.ndim == 0
        xa = np.atleast_1d(xa)
        idx = np.searchsorted(self.t, xa, side="right") - 1
        out = self._interp(xa, idx)
        return float(out[0]) if scalar else out

    def eval(self, x):
        return self(x)

    def eval_left(self, x):
        """Left limit ``c(x-)``."""
        xa = np.asarray(x, dtype=float)
        scalar = xa.ndim == 0
        xa = np.atleast_1d(xa)
        idx = np.searchsorted(self.t, xa, side="left") - 1
        out = self._interp(xa, idx)
        return float(out[0]) if scalar else out

    # -- structure --------------------------------------------------------

    @property
    def breakpoints(self) -> np.ndarray:
        return np.unique(self.t)

    @property
    def left_tail(self) -> float:
        return float(self.v[0])

    @property
    def terminal_value(self) -> float:
        if self.right_slope != 0.0:
            raise CurveError("curve has unbounded growth")
        return float(self.v[-1])

    @property
    def total_increase(self) -> float:
        return self.terminal_value - self.left_tail

    def jumps(self) -> list[tuple[float, float, float]]:
        """``(t, v_left, v_right)`` for every jump."""
        same = np.nonzero(self.t[1:] == self.t[:-1])[0]
        return [(float(self.t[i]), float(self.v[i]), float(self.v[i + 1])) for i in same]

    def is_continuous(self) -> bool:
        return not np.any(self.t[1:] == self.t[:-1])

    def is_monotone(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.v) >= -tol)) and self.right_slope >= 0.0

    def monotone_cleaned(self) -> "Curve":
        """Running-max copy; raises unless violations are rounding noise."""
        scale = max(1.0, float(np.max(np.abs(self.v))))
        if not self.is_monotone(VALUE_TOL * scale * 10):
            raise CurveError("curve is not non-decreasing")
        if self.is_monotone():
            return self
        return Curve(self.t, np.maximum.accumulate(self.v), self.right_slope)

    def slopes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Linear pieces as arrays ``(start, end, slope)`` between distinct knots."""
        t, v = self.t, self.v
        dt = t[1:] - t[:-1]
        keep = dt > 0
        a, b = t[:-1][keep], t[1:][keep]
        s = (v[1:][keep] - v[:-1][keep]) / dt[keep]
        return a, b, s

    def _one_sided(self, times):
        return self.eval_left(times), self(times)

    # -- algebra ----------------------------------------------------------

    def __add__(self, other: "Curve") -> "Curve":
        return curve_sum(self, other)

    def __neg__(self) -> "Curve":
        return self.scale(-1.0)

    def __sub__(self, other: "Curve") -> "Curve":
        return curve_sum(self, other.scale(-1.0))

    def scale(self, k: float) -> "Curve":
        return Curve(self.t, np.asarray(self.v) * k, self.right_slope * k)

    def shift_time(self, d: float) -> "Curve":
        """``t -> c(t - d)``."""
        return Curve(np.asarray(self.t) + d, self.v, self.right_slope)

    def to_json(self):
        """Knot list; jumps are single ``{t, v_left, v_right}`` records."""
        recs = []
        t, v = self.t, self.v
        i = 0
        while i < t.size:
            if i + 1 < t.size and t[i + 1] == t[i]:
                recs.append({"t": float(t[i]), "v_left": float(v[i]), "v_right": float(v[i + 1])})
                i += 2
            else:
                recs.append({"t": float(t[i]), "v": float(v[i])})
                i += 1
        if self.right_slope != 0.0:
            return {"knots": recs, "right_slope": self.right_slope}
        return recs

    @classmethod
    def from_json(cls, data) -> "Curve":
        slope = 0.0
        if isinstance(data, dict):
            slope = float(data.get("right_slope", 0.0))
            data = data.get("knots")
        if not isinstance(data, list) or not data:
            raise CurveError("curve JSON must be a non-empty list of knots")
        ts, vs = [], []
        for rec in data:
            if not isinstance(rec, dict) or "t" not in rec:
                raise CurveError(f"malformed knot record: {rec!r}")
            if "v" in rec:
                ts.append(rec["t"])
                vs.append(rec["v"])
            elif "v_left" in rec and "v_right" in rec:
                ts.extend((rec["t"], rec["t"]))
                vs.extend((rec["v_left"], rec["v_right"]))
            else:
                raise CurveError(f"knot record needs 'v' or 'v_left'/'v_right': {rec!r}")
        try:
            return cls(ts, vs, slope)
        except (TypeError, ValueError) as exc:
            raise CurveError(str(exc)) from exc

    def __repr__(self) -> str:
        return f"Curve(t={self.t.tolist()}, v={self.v.tolist()}, right_slope={self.right_slope})"


def curve_sum(a: Curve, b: Curve) -> Curve:
    """Pointwise sum on the merged breakpoint set."""
    times = np.union1d(a.breakpoints, b.breakpoints)
    al, ar = a._one_sided(times)
    bl, br = b._one_sided(times)
    return Curve._from_one_sided(times, al + bl, ar + br, a.right_slope + b.right_slope)


def sum_curves(curves: Iterable[Curve]) -> Curve:
    curves = list(curves)
    if not curves:
        return Curve.zero()
    times = np.unique(np.concatenate([c.breakpoints for c in curves]))
    left = np.zeros_like(times)
    right = np.zeros_like(times)
    slope = 0.0
    for c in curves:
        cl, cr = c._one_sided(times)
        left += cl
        right += cr
        slope += c.right_slope
    return Curve._from_one_sided(times, left, right, slope)


def generalized_inverse(c: Curve, below: float | None = None) -> Curve:
    """Right-continuous inverse ``g(x) = sup{s : c(s) <= x}``.

    The graph of ``g`` is the reflection of the completed graph of ``c``:
    flat stretches of ``c`` become jumps of ``g`` and jumps become flats.
    For ``x`` below the left tail of ``c`` the set is empty; the result is
    clamped there to ``below`` (default: the first breakpoint of ``c``).
    When ``c`` ends flat, ``g`` is only meaningful below the terminal value
    and is continued flat beyond it.
    """
    try:
        c = c.monotone_cleaned()
    except CurveError:
        raise CurveError("generalized inverse needs a non-decreasing curve") from None
    if c.right_slope == 0.0 and c.v[-1] == c.v[0]:
        raise CurveError("curve is constant everywhere; inverse is unbounded")
    t, v = c.t, c.v
    # a run of knots sharing one value is a flat: keep its first and last knot
    n = t.size
    keep = np.ones(n, dtype=bool)
    if n > 2:
        same_prev = v[1:-1] == v[:-2]
        same_next = v[1:-1] == v[2:]
        keep[1:-1] = ~(same_prev & same_next)
    xs, ys = v[keep], t[keep]
    if below is not None and below < t[0]:
        xs = np.concatenate([[v[0]], xs])
        ys = np.concatenate([[below], ys])
    slope = 1.0 / c.right_slope if c.right_slope > 0 else 0.0
    return Curve(xs, ys, slope)


def _snap_to(x: np.ndarray, knots: np.ndarray) -> np.ndarray:
    k = np.clip(np.searchsorted(knots, x), 1, knots.size - 1) if knots.size > 1 else np.zeros(x.shape, int)
    cand = np.stack([knots[k - 1], knots[k]]) if knots.size > 1 else knots[k][None]
    near = cand[np.argmin(np.abs(cand - x), axis=0), np.arange(x.size)]
    tol = 1e-12 * np.maximum(1.0, np.abs(x))
    return np.where(np.abs(near - x) <= tol, near, x)


def compose(outer: Curve, inner: Curve) -> Curve:
    """Exact composition ``outer(inner(t))`` for non-decreasing ``inner``."""
    try:
        inner = inner.monotone_cleaned()
    except CurveError:
        raise CurveError("inner curve of a composition must be non-decreasing") from None
    a, b, s = inner.slopes()
    # preimages of outer's knots inside increasing pieces of inner
    extra = []
    ob = outer.breakpoints
    inc = s > 0
    if np.any(inc):
        a_i, s_i = a[inc], s[inc]
        lo = inner(a_i)
        hi = inner.eval_left(b[inc])
        k0 = np.searchsorted(ob, lo, side="right")
        k1 = np.searchsorted(ob, hi, side="left")
        counts = np.maximum(k1 - k0, 0)
        if counts.sum():
            piece = np.repeat(np.arange(counts.size), counts)
            within = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
            knot = ob[k0[piece] + within]
            extra.append(a_i[piece] + (knot - lo[piece]) / s_i[piece])
    if inner.right_slope > 0:
        last_t = inner.t[-1]
        last_v = inner.v[-1]
        ahead = ob[ob > last_v]
        if ahead.size:
            extra.append(last_t + (ahead - last_v) / inner.right_slope)
    times = np.unique(np.concatenate([inner.breakpoints, *extra])) if extra else inner.breakpoints

    il, ir = inner._one_sided(times)
    # preimage times land on outer's knots only up to rounding; snap them so
    # jumps of outer are not lost
    il, ir = _snap_to(il, ob), _snap_to(ir, ob)
    right = outer(ir)
    # left limit: approaching along an increasing piece hits outer's left limit
    prev_idx = np.searchsorted(inner.t, times, side="left") - 1
    rising = np.zeros(times.shape, dtype=bool)
    has_prev = prev_idx >= 0
    rising[has_prev] = il[has_prev] > inner.v[prev_idx[has_prev]]
    left = np.where(rising, outer.eval_left(il), outer(il))
    tail = 0.0
    if inner.right_slope > 0 and ir[-1] >= ob[-1]:
        tail = outer.right_slope * inner.right_slope
    return Curve._from_one_sided(times, left, right, tail)


@dataclass(frozen=True)
class Support:
    """Ordered disjoint closed intervals carrying all increase of a curve."""

    intervals: tuple[tuple[float, float], ...]

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    @property
    def lo(self) -> float:
        return self.intervals[0][0]

    @property
    def hi(self) -> float:
        return self.intervals[-1][1]

    @property
    def measure(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    def contains(self, x, tol: float = 0.0):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (x >= a - tol) & (x <= b + tol)
        return out

    def intersection_measure(self, other: "Support") -> float:
        total = 0.0
        for a, b in self.intervals:
            for c, d in other.intervals:
                total += max(0.0, min(b, d) - max(a, c))
        return total

    def to_json(self):
        return [[a, b] for a, b in self.intervals]


def support(c: Curve, tol: float = TIME_TOL) -> Support:
    """Smallest closed set carrying all increase of ``c``."""
    if c.right_slope != 0.0:
        raise CurveError("support needs a curve with finite total increase")
    spans: list[list[float]] = []
    t, v = c.t, c.v
    # rises at rounding level (e.g. from compositions) carry no mass
    floor = VALUE_TOL * max(1.0, float(np.max(np.abs(v))))
    for i in range(t.size - 1):
        if v[i + 1] - v[i] > floor:
            a, b = float(t[i]), float(t[i + 1])
            if spans and a - spans[-1][1] <= tol:
                spans[-1][1] = max(spans[-1][1], b)
            else:
                spans.append([a, b])
    return Support(tuple((a, b) for a, b in spans))


def curve_measure(c: Curve, s: Support) -> float:
    """Increase of ``c`` over the closed set ``s`` (jumps at endpoints included)."""
    total = 0.0
    for a, b in s.intervals:
        total += c(b) - c.eval_left(a)
    return float(total)


def sup_distance(a: Curve, b: Curve, extra_times: Sequence[float] = ()) -> float:
    """Sup-norm of ``a - b``; exact for piecewise-linear curves with equal tails."""
    times = np.union1d(a.breakpoints, b.breakpoints)
    if len(extra_times):
        times = np.union1d(times, np.asarray(extra_times, dtype=float))
    d_right = np.abs(a(times) - b(times))
    d_left = np.abs(a.eval_left(times) - b.eval_left(times))
    return float(max(d_right.max(), d_left.max()))


@dataclass(frozen=True, eq=False)
class JointProfile:
    """Cumulative arrival curves of the two classes."""

    f1: Curve
    f2: Curve

    def curve(self, i: int) -> Curve:
        return self.f1 if i == 1 else self.f2

    @property
    def masses(self) -> tuple[float, float]:
        return self.f1.total_increase, self.f2.total_increase

    def supports(self, tol: float = TIME_TOL) -> tuple[Support, Support]:
        return support(self.f1, tol), support(self.f2, tol)

    def to_json(self):
        return {"f1": self.f1.to_json(), "f2": self.f2.to_json()}

    @classmethod
    def from_json(cls, data) -> "JointProfile":
        if not isinstance(data, dict) or "f1" not in data or "f2" not in data:
            raise CurveError("joint profile needs 'f1' and 'f2'")
        return cls(Curve.from_json(data["f1"]), Curve.from_json(data["f2"]))
