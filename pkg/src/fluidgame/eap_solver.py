"""Closed-form equilibrium arrival profiles for every parameter regime.

Each regime maps to a builder that returns support boundaries and the
piecewise-constant arrival rates of both classes.  Several regimes share a
builder; equal-preference regimes reuse the unequal-preference builders with
``gamma1 == gamma2``.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from enum import Enum

import numpy as np

from .fluid_queue import trace_queue
from .network import GameParams, Topology
from .profile import Curve, JointProfile, generalized_inverse

SPLIT_TOL = 1e-9


class RegimeTag(str, Enum):
    SQ = "SQ"
    HDS_REDUCE = "HDS-Reduce"
    HDS_1 = "HDS-1"
    HDS_2A = "HDS-2a"
    HDS_2B = "HDS-2b"
    HDS_3A = "HDS-3a"
    HDS_3B = "HDS-3b"
    HDS_EQ_1 = "HDS-EQ-1"
    HDS_EQ_2 = "HDS-EQ-2"
    HAS_I_1A = "HAS-I-1a"
    HAS_I_1B = "HAS-I-1b"
    HAS_I_2A = "HAS-I-2a"
    HAS_I_2B = "HAS-I-2b"
    HAS_II_1A = "HAS-II-1a"
    HAS_II_1B = "HAS-II-1b"
    HAS_II_2A = "HAS-II-2a"
    HAS_II_2B = "HAS-II-2b"
    HAS_II_2C = "HAS-II-2c"
    HAS_II_3A = "HAS-II-3a"
    HAS_II_3B = "HAS-II-3b"
    HAS_II_3C = "HAS-II-3c"
    HAS_EQ_I_1 = "HAS-EQ-I-1"
    HAS_EQ_I_2 = "HAS-EQ-I-2"
    HAS_EQ_II_1 = "HAS-EQ-II-1"
    HAS_EQ_II_2 = "HAS-EQ-II-2"
    HAS_EQ_II_3 = "HAS-EQ-II-3"

    @property
    def is_convex(self) -> bool:
        return self in (RegimeTag.HDS_EQ_2, RegimeTag.HAS_EQ_I_2, RegimeTag.HAS_EQ_II_3)


@dataclass(frozen=True)
class SupportBoundaries:
    """Support endpoints; ``split`` is the internal class-1 rate switch time."""

    t1a: float
    t1f: float
    t2a: float
    t2f: float
    ta: float | None = None
    tf: float | None = None
    t_empty: float | None = None
    split: float | None = None

    def to_json(self):
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class ConvexSetDescriptor:
    """Linear constraints describing a set of equilibrium profiles.

    On ``[ta, main_start]`` class 1 is absent and class 2 arrives at
    ``pre_rate2``.  On ``[main_start, tf]`` the joint rate equals ``r_total``
    and the rate of ``capped_class`` stays in ``[0, r_cap]``.
    """

    ta: float
    tf: float
    main_start: float
    pre_rate2: float
    r_total: float
    capped_class: int
    r_cap: float
    lambda1: float
    lambda2: float

    @property
    def main_masses(self) -> tuple[float, float]:
        pre = self.pre_rate2 * (self.main_start - self.ta)
        return self.lambda1, self.lambda2 - pre

    def to_json(self):
        d = asdict(self)
        d["window"] = [self.ta, self.tf]
        return d

    def contains(self, jp: JointProfile, tol: float = 1e-9) -> bool:
        """Check every constraint on the pieces of ``jp``."""
        ok = abs(jp.f1.total_increase - self.lambda1) <= tol
        ok &= abs(jp.f2.total_increase - self.lambda2) <= tol
        for f in (jp.f1, jp.f2):
            # no mass outside the window
            ok &= abs(f(self.ta) - f.left_tail) <= tol
            ok &= abs(f.terminal_value - f(self.tf)) <= tol
        ts = np.unique(np.concatenate([jp.f1.breakpoints, jp.f2.breakpoints,
                                       [self.ta, self.main_start, self.tf]]))
        ts = ts[(ts >= self.ta - tol) & (ts <= self.tf + tol)]
        a, b = ts[:-1], ts[1:]
        keep = b - a > 1e-12
        a, b = a[keep], b[keep]
        r1 = (jp.f1.eval_left(b) - jp.f1(a)) / (b - a)
        r2 = (jp.f2.eval_left(b) - jp.f2(a)) / (b - a)
        pre = b <= self.main_start + 1e-12
        ok &= bool(np.all(np.abs(r1[pre]) <= tol))
        ok &= bool(np.all(np.abs(r2[pre] - self.pre_rate2) <= tol))
        main = ~pre
        ok &= bool(np.all(np.abs(r1[main] + r2[main] - self.r_total) <= tol))
        capped = r1 if self.capped_class == 1 else r2
        ok &= bool(np.all(capped[main] >= -tol)) and bool(np.all(capped[main] <= self.r_cap + tol))
        ok &= bool(np.all(r1 >= -tol)) and bool(np.all(r2 >= -tol))
        return bool(ok)


@dataclass(frozen=True, eq=False)
class EapSolution:
    tag: RegimeTag
    boundaries: SupportBoundaries
    params: GameParams
    profile: JointProfile | None = None
    convex_set: ConvexSetDescriptor | None = None
    extremes: tuple[JointProfile, JointProfile] | None = None

    def profiles(self) -> list[JointProfile]:
        """The unique profile, or the two named extreme profiles."""
        if self.profile is not None:
            return [self.profile]
        return list(self.extremes or ())

    def to_json(self):
        out = {
            "tag": self.tag.value,
            "params": self.params.to_dict(),
            "boundaries": self.boundaries.to_json(),
            "profiles": self.profile.to_json() if self.profile is not None else None,
        }
        if self.convex_set is not None:
            out["convex_set"] = self.convex_set.to_json()
            out["extremes"] = [e.to_json() for e in self.extremes]
        return out


# ---------------------------------------------------------------------------
# builders: each returns (boundaries, class-1 pieces, class-2 pieces)

def _joint(p1, p2) -> JointProfile:
    return JointProfile(Curve.from_rates(p1), Curve.from_rates(p2))


def _single_queue(mu, g1, g2, L1, L2):
    if g1 == g2:
        tot = L1 + L2
        ta, tf = -(1 / g1 - 1) * tot / mu, tot / mu
        r = mu * g1 / tot if tot > 0 else 0.0
        b = SupportBoundaries(ta, tf, ta, tf, ta=ta, tf=tf)
        return b, [(ta, tf, r * L1)], [(ta, tf, r * L2)]
    swap = g1 > g2
    if swap:
        g1, g2, L1, L2 = g2, g1, L2, L1
    # class "1" now has the smaller preference and arrives first
    t2f = (L1 + L2) / mu
    t2a = L1 / mu - (1 / g2 - 1) * L2 / mu
    t1a = -(1 / g1 - 1) * L1 / mu - (1 / g2 - 1) * L2 / mu
    first = [(t1a, t2a, mu * g1)]
    second = [(t2a, t2f, mu * g2)]
    if swap:
        b = SupportBoundaries(t2a, t2f, t1a, t2a, ta=t1a, tf=t2f)
        return b, second, first
    return SupportBoundaries(t1a, t2a, t2a, t2f, ta=t1a, tf=t2f), first, second


def _hds_1(m1, m2, g1, g2, L1, L2):
    t1a = -(1 / g1 - 1) * L1 / m1 - (1 / g2 - 1) * L2 / m2
    t1f = L1 / m1 - (1 / g2 - 1) * L2 / m2
    t2f = L1 / m1 + L2 / m2
    b = SupportBoundaries(t1a, t1f, t1f, t2f)
    return b, [(t1a, t1f, m1 * g1)], [(t1f, t2f, m2 * g2)]


def _hds_2a(m1, m2, g1, g2, L1, L2):
    k = L1 + (1 - g2) / (1 - g1) * L2
    t1a = -(1 - g1) / (m1 * g1) * k
    t1f = k / m1
    t2a = (L1 - (m1 - m2 * g2) / (m2 * g2) * (1 - g2) / (1 - g1) * L2) / m1
    t2f = (L1 + (m1 * (g2 - g1) + m2 * g2 * (1 - g2)) / (m2 * g2 * (1 - g1)) * L2) / m1
    b = SupportBoundaries(t1a, t1f, t2a, t2f)
    p1 = [(t1a, t2a, m1 * g1), (t2a, t1f, m1 * g1 - m2 * g2)]
    return b, p1, [(t2a, t2f, m2 * g2)]


def _hds_2b(m1, m2, g1, g2, L1, L2):
    t1a = (1 - g2) / (m1 - m2 * g2) * (L2 - (1 - g1) * m1 / ((1 - g2) * (m1 * g1 - m2 * g2)) * L1)
    t1f = (L1 + (1 - g2) * L2) / (m1 - m2 * g2)
    t2a = -(1 - g2) / g2 * L2 / m2
    t2f = L2 / m2
    b = SupportBoundaries(t1a, t1f, t2a, t2f)
    return b, [(t1a, t1f, m1 * g1 - m2 * g2)], [(t2a, t2f, m2 * g2)]


def _hds_3a(m1, m2, g1, g2, L1, L2):
    t1a = (g1 - g2) / g1 * L2 / (m1 * g1 - m2 * g2) - (1 - g1) / g1 * (L1 + L2) / m1
    t1f = (L1 + L2) / m1
    t2a = -(1 - g1) / g1 * L1 / m1 - (g1 / g2 + (1 - g1) * m2 / m1 - 1) * L2 / (m2 * g1)
    t2f = -(1 - g1) / g1 * L1 / m1 + (1 - (1 - g1) * m2 / m1) * L2 / (m2 * g1)
    b = SupportBoundaries(t1a, t1f, t2a, t2f)
    p1 = [(t1a, t2f, m1 * g1 - m2 * g2), (t2f, t1f, m1 * g1)]
    return b, p1, [(t2a, t2f, m2 * g2)]


def _has_i_a(m1, m2, g1, g2, L1, L2):
    t1a = -(1 - g1) / g1 * L1 / m1 + (1 - g2) / g1 * L2 / (m2 - m1)
    t1f = L1 / m1
    t2a = -(1 - g2) / g2 * L2 / (m2 - m1)
    t2f = L2 / (m2 - m1)
    split = t1a + g2 / g1 * (t2f - max(t1a, 0.0))
    b = SupportBoundaries(t1a, t1f, t2a, t2f, split=split)
    p1 = [(t1a, split, m1 * g1 / g2), (split, t1f, m1 * g1)]
    p2 = [(t2a, 0.0, m2 * g2), (0.0, t2f, m2 * g2 - m1)]
    return b, p1, p2


def _has_i_1b(m1, m2, g1, g2, L1, L2):
    t1a = (L2 - (1 - g1) / (1 - g2) * (m2 - m1) / m1 * L1) / m2
    t1f = (L2 + ((g1 - g2) * m2 + (1 - g1) * m1) / ((1 - g2) * m1) * L1) / m2
    t2a = -((1 - g1) * L1 + (1 - g2) * L2) / (m2 * g2)
    t2f = (L2 + (1 - g1) / (1 - g2) * L1) / m2
    split = t1a + g2 / g1 * (t2f - max(t1a, 0.0))
    b = SupportBoundaries(t1a, t1f, t2a, t2f, split=split)
    p1 = [(t1a, split, m1 * g1 / g2), (split, t1f, m1 * g1)]
    p2 = [(t2a, t1a, m2 * g2), (t1a, t2f, m2 * g2 - m1)]
    return b, p1, p2


def _has_i_2b(m1, m2, g1, g2, L1, L2):
    t1a = -(g2 / g1 - 1) * L1 / m1
    t1f = L1 / m1
    t2a = -(1 - g2) / g2 * (L1 + L2) / m2
    t2f = (L1 + L2) / m2
    b = SupportBoundaries(t1a, t1f, t2a, t2f)
    p1 = [(t1a, t1f, m1 * g1 / g2)]
    p2 = [(t2a, 0.0, m2 * g2), (0.0, t1f, m2 * g2 - m1), (t1f, t2f, m2 * g2)]
    return b, p1, p2


def _has_ii_split(b: SupportBoundaries, m1, m2, g1) -> float:
    return b.t1a + m1 / (m2 * g1) * (b.t_empty - max(b.t1a, 0.0))


def _has_ii_1a(m1, m2, g1, g2, L1, L2):
    t1a = L2 / (m2 * g1) - (1 / g1 - 1) * L1 / m1
    b = SupportBoundaries(t1a, L1 / m1, -L2 / (m2 * g2), 0.0, t_empty=L2 / (m2 - m1))
    split = _has_ii_split(b, m1, m2, g1)
    b = SupportBoundaries(**{**asdict(b), "split": split})
    p1 = [(b.t1a, split, m2 * g1), (split, b.t1f, m1 * g1)]
    return b, p1, [(b.t2a, b.t2f, m2 * g2)]


def _has_ii_1b(m1, m2, g1, g2, L1, L2):
    t1a = (L2 - (1 - g1) * m2 / m1 * L1) / m2
    t1f = g1 * L1 / m1 + L2 / m2
    t = L2 / m2 + (1 - g1) * L1 / (m2 - m1)
    t2a = -(1 / g2 - 1) * L2 / m2 - (1 - g1) * L1 / m1
    b = SupportBoundaries(t1a, t1f, t2a, t1a, t_empty=t)
    split = _has_ii_split(b, m1, m2, g1)
    b = SupportBoundaries(**{**asdict(b), "split": split})
    p1 = [(t1a, split, m2 * g1), (split, t1f, m1 * g1)]
    return b, p1, [(t2a, t1a, m2 * g2)]


def _has_ii_2b(m1, m2, g1, g2, L1, L2):
    t1a = (L2 - (1 / g1 - 1) * L1) / m2
    t1f = (L1 + L2) / m2
    b = SupportBoundaries(t1a, t1f, -L2 / (m2 * g2), 0.0, t_empty=t1f)
    return b, [(t1a, t1f, m2 * g1)], [(b.t2a, 0.0, m2 * g2)]


def _has_ii_2c(m1, m2, g1, g2, L1, L2):
    t1a = (L2 - (1 / g1 - 1) * L1) / m2
    t1f = (L1 + L2) / m2
    t2a = -(1 / g1 - 1) * L1 / m2 - (1 / g2 - 1) * L2 / m2
    b = SupportBoundaries(t1a, t1f, t2a, t1a, t_empty=t1f)
    return b, [(t1a, t1f, m2 * g1)], [(t2a, t1a, m2 * g2)]


def _has_ii_3c(m1, m2, g1, g2, L1, L2):
    t1a = -(1 / g1 - 1 / g2) * L1 / m2
    t1f = L1 / (m2 * g2)
    t2f = (L1 + L2) / m2
    t2a = -(1 - g2) / g2 * (L1 + L2) / m2
    b = SupportBoundaries(t1a, t1f, t2a, t2f, t_empty=t2f)
    p2 = [(t2a, 0.0, m2 * g2), (t1f, t2f, m2 * g2)]
    return b, [(t1a, t1f, m2 * g1)], p2


_HDS_BUILDERS = {
    RegimeTag.HDS_1: _hds_1,
    RegimeTag.HDS_2A: _hds_2a,
    RegimeTag.HDS_2B: _hds_2b,
    RegimeTag.HDS_3A: _hds_3a,
    RegimeTag.HDS_3B: _hds_2b,
    RegimeTag.HDS_EQ_1: _hds_2b,
}

_HAS_BUILDERS = {
    RegimeTag.HAS_I_1A: _has_i_a,
    RegimeTag.HAS_I_2A: _has_i_a,
    RegimeTag.HAS_I_1B: _has_i_1b,
    RegimeTag.HAS_I_2B: _has_i_2b,
    RegimeTag.HAS_II_1A: _has_ii_1a,
    RegimeTag.HAS_II_2A: _has_ii_1a,
    RegimeTag.HAS_II_3A: _has_ii_1a,
    RegimeTag.HAS_II_1B: _has_ii_1b,
    RegimeTag.HAS_II_2B: _has_ii_2b,
    RegimeTag.HAS_II_3B: _has_ii_2b,
    RegimeTag.HAS_II_2C: _has_ii_2c,
    RegimeTag.HAS_II_3C: _has_ii_3c,
    RegimeTag.HAS_EQ_I_1: _has_i_a,
    RegimeTag.HAS_EQ_II_1: _has_ii_1a,
    RegimeTag.HAS_EQ_II_2: _has_ii_2b,
}

# the two named extreme members of each convex set
_CONVEX_EXTREMES = {
    RegimeTag.HDS_EQ_2: (_hds_2a, _hds_3a),
    RegimeTag.HAS_EQ_I_2: (_has_i_1b, _has_i_2b),
    RegimeTag.HAS_EQ_II_3: (_has_ii_2c, _has_ii_3c),
}


# ---------------------------------------------------------------------------
# classification

def classify_hds(p: GameParams) -> RegimeTag:
    m1, m2, g1, g2, L1, L2 = p.mu1, p.mu2, p.gamma1, p.gamma2, p.lambda1, p.lambda2
    if m1 <= m2:
        return RegimeTag.HDS_REDUCE
    if g1 == g2:
        return RegimeTag.HDS_EQ_1 if L1 < (m1 / m2 - 1) * L2 else RegimeTag.HDS_EQ_2
    if g1 <= m2 / m1 * g2:
        return RegimeTag.HDS_1
    if g1 < g2:
        c = (1 - g2) / (1 - g1) * (m1 * g1 / (m2 * g2) - 1)
        return RegimeTag.HDS_2A if L1 >= c * L2 else RegimeTag.HDS_2B
    return RegimeTag.HDS_3A if L1 >= (m1 / m2 - 1) * L2 else RegimeTag.HDS_3B


def classify_has(p: GameParams) -> RegimeTag:
    m1, m2, g1, g2, L1, L2 = p.mu1, p.mu2, p.gamma1, p.gamma2, p.lambda1, p.lambda2
    if g1 == g2:
        g = g1
        if m1 < m2 * g:
            return RegimeTag.HAS_EQ_I_1 if L1 > m1 / (m2 - m1) * L2 else RegimeTag.HAS_EQ_I_2
        if (m2 / m1 - 1) * L1 > L2:
            return RegimeTag.HAS_EQ_II_1
        if (1 / g - 1) * L1 >= L2:
            return RegimeTag.HAS_EQ_II_2
        return RegimeTag.HAS_EQ_II_3
    if m1 < m2 * g2:
        if g1 > g2:
            thr = (1 - g2) / (1 - g1) * m1 / (m2 - m1) * L2
            return RegimeTag.HAS_I_1A if L1 >= thr else RegimeTag.HAS_I_1B
        return RegimeTag.HAS_I_2A if L1 >= m1 / (m2 - m1) * L2 else RegimeTag.HAS_I_2B
    if m2 * g1 > m1:
        thr = m1 / ((1 - g1) * m2) * L2
        return RegimeTag.HAS_II_1A if L1 >= thr else RegimeTag.HAS_II_1B
    if g1 > g2:
        if (m2 / m1 - 1) * L1 > L2:
            return RegimeTag.HAS_II_2A
        return RegimeTag.HAS_II_2B if (1 / g1 - 1) * L1 >= L2 else RegimeTag.HAS_II_2C
    if (m2 / m1 - 1) * L1 > L2:
        return RegimeTag.HAS_II_3A
    return RegimeTag.HAS_II_3B if (1 / g2 - 1) * L1 >= L2 else RegimeTag.HAS_II_3C


# ---------------------------------------------------------------------------
# solvers

def _args(p: GameParams):
    return p.mu1, p.mu2, p.gamma1, p.gamma2, p.lambda1, p.lambda2


def _finish(tag, p, built) -> EapSolution:
    b, p1, p2 = built
    return EapSolution(tag, b, p, profile=_joint(p1, p2))


def _solve_sq(p: GameParams, mu: float, tag=RegimeTag.SQ) -> EapSolution:
    return _finish(tag, p, _single_queue(mu, p.gamma1, p.gamma2, p.lambda1, p.lambda2))


def solve_single_queue(p: GameParams) -> EapSolution:
    """Single shared queue (``mu1``); Tandem uses ``min(mu1, mu2)``."""
    mu = min(p.mu1, p.mu2) if p.topology is Topology.TANDEM else p.mu1
    return _solve_sq(p, mu)


def _solve_parallel(p: GameParams) -> EapSolution:
    b1, p1, _ = _single_queue(p.mu1, p.gamma1, p.gamma1, p.lambda1, 0.0)
    b2, _, p2 = _single_queue(p.mu2, p.gamma2, p.gamma2, 0.0, p.lambda2)
    b = SupportBoundaries(b1.ta, b1.tf, b2.ta, b2.tf)
    return EapSolution(RegimeTag.SQ, b, p, profile=_joint(p1, p2))


def _convex(tag, p: GameParams) -> EapSolution:
    m1, m2, g, _, L1, L2 = _args(p)
    tot = L1 + L2
    if tag is RegimeTag.HDS_EQ_2:
        ta, tf = -(1 / g - 1) * tot / m1, tot / m1
        d = ConvexSetDescriptor(ta, tf, ta, 0.0, m1 * g, 2, m2 * g, L1, L2)
        b = SupportBoundaries(ta, tf, ta, tf, ta=ta, tf=tf)
    else:
        ta, tf = -(1 / g - 1) * tot / m2, tot / m2
        cap = m1 if tag is RegimeTag.HAS_EQ_I_2 else m2 * g
        d = ConvexSetDescriptor(ta, tf, 0.0, m2 * g, m2 * g, 1, cap, L1, L2)
        b = SupportBoundaries(0.0, tf, ta, tf, ta=ta, tf=tf)
    ext = tuple(_joint(*build(*_args(p))[1:]) for build in _CONVEX_EXTREMES[tag])
    return EapSolution(tag, b, p, convex_set=d, extremes=ext)


def _check_split(sol: EapSolution, p: GameParams) -> None:
    """Compare the closed-form rate switch with the engine's departure map."""
    b = sol.boundaries
    if b.split is None:
        return
    target = b.t_empty if b.t_empty is not None else b.t2f
    q1 = trace_queue(sol.profile.f1, p.mu1)
    inv = generalized_inverse(q1.tau, below=float(q1.tau.t[0]) - 1.0)
    got = float(inv(target))
    if abs(got - b.split) > SPLIT_TOL * max(1.0, abs(b.split)):
        raise AssertionError(f"split point mismatch: closed form {b.split}, engine {got}")


def solve_hds(p: GameParams) -> EapSolution:
    if p.topology is not Topology.HDS:
        raise ValueError("topology mismatch")
    if p.lambda2 == 0.0:
        return _solve_sq(p, p.mu1)
    if p.lambda1 == 0.0:
        return _solve_sq(p, min(p.mu1, p.mu2))
    tag = classify_hds(p)
    if tag is RegimeTag.HDS_REDUCE:
        return _solve_sq(p, p.mu1, tag)
    if tag.is_convex:
        return _convex(tag, p)
    b, p1, p2 = _HDS_BUILDERS[tag](*_args(p))
    if tag is RegimeTag.HDS_EQ_1:
        b = SupportBoundaries(b.t1a, b.t1f, b.t2a, b.t2f, ta=b.t2a, tf=b.t2f)
    return _finish(tag, p, (b, p1, p2))


def solve_has(p: GameParams) -> EapSolution:
    if p.topology is not Topology.HAS:
        raise ValueError("topology mismatch")
    if p.lambda1 == 0.0:
        return _solve_sq(p, p.mu2)
    if p.lambda2 == 0.0:
        return _solve_sq(p, min(p.mu1, p.mu2))
    tag = classify_has(p)
    if tag.is_convex:
        return _convex(tag, p)
    sol = _finish(tag, p, _HAS_BUILDERS[tag](*_args(p)))
    _check_split(sol, p)
    return sol


def solve(p: GameParams) -> EapSolution:
    """Equilibrium for any topology."""
    if p.topology in (Topology.SINGLE, Topology.TANDEM):
        return solve_single_queue(p)
    if p.topology is Topology.PARALLEL:
        return _solve_parallel(p)
    if p.topology is Topology.HDS:
        return solve_hds(p)
    return solve_has(p)


def hds_2a_2b_gap(p: GameParams) -> float:
    """Largest boundary difference between the 2a and 2b builders at ``p``.

    At the 2a/2b threshold both builders must describe the same profile.
    """
    b1 = _hds_2a(*_args(p))[0]
    b2 = _hds_2b(*_args(p))[0]
    return max(abs(b1.t1a - b2.t1a), abs(b1.t1f - b2.t1f), abs(b1.t2a - b2.t2a), abs(b1.t2f - b2.t2f))


# ---------------------------------------------------------------------------
# convex-set sampling

def sample_convex_eap(d: ConvexSetDescriptor, seed: int, pieces: int = 64) -> JointProfile:
    """Random member of the set: seeded grid, capped rates, water-filled masses."""
    rng = np.random.default_rng(seed)
    lo, hi = d.main_start, d.tf
    if not hi > lo:
        raise ValueError("descriptor has an empty main window")
    cuts = np.sort(rng.uniform(lo, hi, pieces - 1))
    edges = np.concatenate([[lo], cuts, [hi]])
    widths = np.diff(edges)
    cap = min(d.r_cap, d.r_total)
    m_main = d.main_masses
    target = m_main[d.capped_class - 1]
    if target < -1e-12 or target > cap * (hi - lo) + 1e-12:
        raise ValueError("infeasible convex-set descriptor")
    x = rng.uniform(0.0, cap, pieces)
    have = float(x @ widths)
    if have < target:
        room = float((cap - x) @ widths)
        x = x + (target - have) / room * (cap - x)
    elif have > 0:
        x = x * (target / have)
    other = d.r_total - x
    capped = [(a, b, r) for a, b, r in zip(edges[:-1], edges[1:], x)]
    rest = [(a, b, r) for a, b, r in zip(edges[:-1], edges[1:], other)]
    pre = [(d.ta, d.main_start, d.pre_rate2)] if d.main_start > d.ta else []
    if d.capped_class == 1:
        return _joint(capped, pre + rest)
    return _joint(rest, pre + capped)
