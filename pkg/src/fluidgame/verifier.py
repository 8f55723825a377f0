"""Equilibrium checks by direct cost evaluation, plus structural audits."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .eap_solver import EapSolution, RegimeTag
from .network import GameParams, NetworkTrace, Topology, compose_network
from .profile import Curve, Support, compose, generalized_inverse, support

GRID_POINTS = 1000
MASS_TOL = 1e-9


@dataclass
class VerificationReport:
    passed: bool = True
    iso_cost_deviation: list[float] = field(default_factory=lambda: [0.0, 0.0])
    deviation_gain: list[float] = field(default_factory=lambda: [0.0, 0.0])
    mass_error: list[float] = field(default_factory=lambda: [0.0, 0.0])
    equilibrium_cost: list[float | None] = field(default_factory=lambda: [None, None])
    invariants: list[tuple[str, bool, str]] = field(default_factory=list)
    social_cost: float = 0.0

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.invariants.append((name, bool(ok), detail))
        self.passed = self.passed and bool(ok)

    def failures(self) -> list[str]:
        return [n for n, ok, _ in self.invariants if not ok]

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "iso_cost_deviation": self.iso_cost_deviation,
            "deviation_gain": self.deviation_gain,
            "mass_error": self.mass_error,
            "equilibrium_cost": self.equilibrium_cost,
            "social_cost": self.social_cost,
            "invariants": [{"name": n, "passed": ok, "detail": d} for n, ok, d in self.invariants],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _window(supports: list[Support]) -> tuple[float, float]:
    live = [s for s in supports if len(s)]
    if not live:
        return -1.0, 1.0
    return min(s.lo for s in live), max(s.hi for s in live)


def evaluation_points(trace: NetworkTrace, grid: int = GRID_POINTS) -> np.ndarray:
    """Trace breakpoints, a uniform grid around the supports, and a late point."""
    s1, s2 = support(trace.f1), support(trace.f2)
    ta, tf = _window([s1, s2])
    span = tf - ta if tf > ta else 1.0
    p = trace.params
    total = trace.f1.total_increase + trace.f2.total_increase
    late = tf + total / min(p.mu1, p.mu2) + span
    pts = [trace.breakpoints(), np.linspace(ta - span, tf + span, grid), [late]]
    for s in (s1, s2):
        for a, b in s:
            pts.append([a, b])
    return np.unique(np.concatenate(pts))


def _stieltjes(trace: NetworkTrace, i: int) -> float:
    """Exact ``int C_i dF_i``: trapezoids on linear pieces plus jump terms."""
    f = trace.f1 if i == 1 else trace.f2
    if f.total_increase == 0.0:
        return 0.0
    g = trace.params.gamma(i)
    tau = trace.tau_class(i)
    ts = np.union1d(f.breakpoints, tau.breakpoints)
    ts = ts[(ts >= f.t[0]) & (ts <= f.t[-1])]
    total = 0.0
    if ts.size > 1:
        a, b = ts[:-1], ts[1:]
        dm = f.eval_left(b) - f(a)
        c_a = tau(a) - g * a
        c_b = tau.eval_left(b) - g * b
        total += float(np.sum(dm * 0.5 * (c_a + c_b)))
    for s, lo, hi in f.jumps():
        total += (hi - lo) * float(trace.cost(i, s))
    return total


def social_cost(f1: Curve, f2: Curve, p: GameParams, trace: NetworkTrace | None = None) -> float:
    trace = compose_network(f1, f2, p) if trace is None else trace
    return _stieltjes(trace, 1) + _stieltjes(trace, 2)


def check_equilibrium(f1: Curve, f2: Curve, p: GameParams, eps: float = 1e-9,
                      grid: int = GRID_POINTS) -> VerificationReport:
    """Decide whether ``(f1, f2)`` is an ``eps``-equilibrium of ``p``.

    On each class support the cost must vary by at most ``eps``, and no
    off-support time may undercut the highest support cost by more than
    ``eps``.
    """
    rep = VerificationReport()
    trace = compose_network(f1, f2, p)
    pts = evaluation_points(trace, grid)
    for i, f in ((1, f1), (2, f2)):
        k = i - 1
        rep.mass_error[k] = abs(f.total_increase - p.mass(i))
        rep.add(f"mass_{i}", rep.mass_error[k] <= max(eps, MASS_TOL), f"error {rep.mass_error[k]:.3e}")
        if f.total_increase == 0.0:
            continue
        s = support(f)
        cost = trace.cost(i, pts)
        on = s.contains(pts, tol=1e-12)
        c_on = cost[on]
        top = float(c_on.max())
        rep.iso_cost_deviation[k] = float(top - c_on.min())
        rep.equilibrium_cost[k] = float(np.median(c_on))
        off = cost[~on]
        rep.deviation_gain[k] = float(max(0.0, (top - off).max())) if off.size else 0.0
        rep.add(f"iso_cost_{i}", rep.iso_cost_deviation[k] <= eps, f"{rep.iso_cost_deviation[k]:.3e}")
        rep.add(f"no_profitable_deviation_{i}", rep.deviation_gain[k] <= eps, f"{rep.deviation_gain[k]:.3e}")
    for i in (1, 2):
        tau = trace.depart(i, pts)
        rep.add(f"fifo_{i}", bool(np.all(np.diff(tau) >= -1e-12)))
        floor = (1 - p.gamma(i)) * np.maximum(pts, 0.0)
        rep.add(f"cost_floor_{i}", bool(np.all(trace.cost(i, pts) >= floor - 1e-12)))
    rep.social_cost = social_cost(f1, f2, p, trace)
    return rep


# ---------------------------------------------------------------------------
# structural audits

def _rates_on(f: Curve, s: Support) -> np.ndarray:
    a, b, r = f.slopes()
    mid = 0.5 * (a + b)
    inside = s.contains(mid) & (b - a > 1e-12)
    return r[inside]


def _outflow_support(f: Curve, tau: Curve) -> Support:
    """Times at which mass from ``f`` leaves through departure map ``tau``."""
    if f.total_increase == 0.0:
        return Support(())
    inv = generalized_inverse(tau, below=float(tau.t[0]) - 1.0)
    return support(compose(f, inv))


def audit_structure(sol: EapSolution, p: GameParams, tol: float = 1e-9) -> VerificationReport:
    """Check the structural properties that solved profiles must have."""
    rep = VerificationReport()
    for n, jp in enumerate(sol.profiles()):
        for i in (1, 2):
            f = jp.curve(i)
            rep.add(f"mass_{i}[{n}]", abs(f.total_increase - p.mass(i)) <= tol)
            rep.add(f"nonnegative_rate_{i}[{n}]", f.is_monotone(tol))
    if sol.profile is None:
        for n, jp in enumerate(sol.extremes or ()):
            rep.add(f"extreme_in_convex_set[{n}]", sol.convex_set.contains(jp, tol))
        return rep

    jp = sol.profile
    s1, s2 = jp.supports()
    tr = compose_network(jp.f1, jp.f2, p)
    b = sol.boundaries
    m1, m2, g1, g2 = p.mu1, p.mu2, p.gamma1, p.gamma2
    unequal = g1 != g2 and p.lambda1 > 0 and p.lambda2 > 0
    rep.add("supports_are_intervals_1", len(s1) <= 1)
    if sol.tag is not RegimeTag.HAS_II_3C:
        rep.add("supports_are_intervals_2", len(s2) <= 1)

    if p.topology is Topology.HDS and unequal:
        overlap = s1.intersection_measure(s2)
        disjoint_expected = m1 <= m2 * max(1.0, g2 / g1)
        rep.add("hds_disjoint_iff_threshold", (overlap < 1e-12) == disjoint_expected,
                f"overlap {overlap:.3e}")
        if sol.tag is not RegimeTag.HDS_REDUCE:
            r2 = _rates_on(jp.f2, s2)
            rep.add("hds_rate_law_2", bool(np.all(np.abs(r2 - m2 * g2) <= tol)))
            r1 = _rates_on(jp.f1, s1)
            allowed = np.array([m1 * g1, m1 * g1 - m2 * g2])
            near = np.min(np.abs(r1[:, None] - allowed[None, :]), axis=1) if r1.size else r1
            rep.add("hds_rate_law_1", bool(np.all(near <= tol)))
            q2_end = float(tr.queues[1].q(tr.queues[0].tau(b.t2f)))
            rep.add("hds_queue2_idle_after_class2", q2_end < tol, f"{q2_end:.3e}")
            if m1 * g1 > m2 * g2:
                q1_end = float(tr.queues[0].q(b.t1f))
                rep.add("hds_queue1_idle_after_class1", q1_end < tol, f"{q1_end:.3e}")
        if sol.tag is RegimeTag.HDS_3A:
            rep.add("hds_3a_class1_starts_later", b.t1a > b.t2a)

    if p.topology is Topology.HAS and unequal:
        d1 = _outflow_support(jp.f1, tr.tau_class(1))
        d2 = _outflow_support(jp.f2, tr.tau_class(2))
        overlap = d1.intersection_measure(d2)
        rep.add("has_queue2_serves_disjointly_iff_threshold",
                (overlap < 1e-9) == (m1 >= m2 * g2), f"overlap {overlap:.3e}")
        if sol.tag is RegimeTag.HAS_II_3C:
            rep.add("has_3c_class2_two_intervals", len(s2) == 2)
    return rep
