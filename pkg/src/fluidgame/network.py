"""Two-queue fluid networks and the per-class costs they induce.

Queues are always evaluated in feed-forward order (queue 1, then queue 2), so
no fixed point is needed.  Each class follows a route through one or two
queues; its waiting time is accumulated along the route, with each queue
seeing the class at the time it leaves the previous one.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .fluid_queue import QueueTrace, trace_queue
from .profile import Curve, compose, curve_sum, generalized_inverse


class Topology(str, Enum):
    TANDEM = "TandemCommon"
    PARALLEL = "Parallel"
    HDS = "HDS"
    HAS = "HAS"
    SINGLE = "SingleQueue"


@dataclass(frozen=True)
class GameParams:
    """Masses, preferences and service rates of a two-class game."""

    topology: Topology
    mu1: float
    mu2: float
    lambda1: float
    lambda2: float
    gamma1: float
    gamma2: float

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))
        for name in ("mu1", "mu2", "lambda1", "lambda2", "gamma1", "gamma2"):
            val = float(getattr(self, name))
            if not np.isfinite(val):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        if self.mu1 <= 0 or self.mu2 <= 0:
            raise ValueError("service rates must be positive")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("class masses must be non-negative")
        for g in (self.gamma1, self.gamma2):
            if not 0.0 < g < 1.0:
                raise ValueError(f"preferences must lie in (0, 1), got {g}")

    @classmethod
    def from_raw(cls, topology, mu1, mu2, lambda1, lambda2, alpha, beta) -> "GameParams":
        """Build from raw waiting/lateness weights ``alpha_i``, ``beta_i``."""
        g = [a / (a + b) for a, b in zip(alpha, beta)]
        return cls(topology, mu1, mu2, lambda1, lambda2, g[0], g[1])

    @classmethod
    def from_dict(cls, d: dict) -> "GameParams":
        d = dict(d)
        if "alpha" in d or "beta" in d:
            return cls.from_raw(d["topology"], d["mu1"], d.get("mu2", d["mu1"]),
                                d["lambda1"], d["lambda2"], d["alpha"], d["beta"])
        return cls(d["topology"], d["mu1"], d.get("mu2", d["mu1"]), d["lambda1"],
                   d["lambda2"], d["gamma1"], d["gamma2"])

    def to_dict(self) -> dict:
        return {"topology": self.topology.value, "mu1": self.mu1, "mu2": self.mu2,
                "lambda1": self.lambda1, "lambda2": self.lambda2,
                "gamma1": self.gamma1, "gamma2": self.gamma2}

    def gamma(self, i: int) -> float:
        return self.gamma1 if i == 1 else self.gamma2

    def mass(self, i: int) -> float:
        return self.lambda1 if i == 1 else self.lambda2

    def with_(self, **kw) -> "GameParams":
        d = self.to_dict()
        d.update(kw)
        return GameParams(**d)


@dataclass(frozen=True, eq=False)
class NetworkTrace:
    """Queue traces plus the route of each class through them.

    ``routes[i-1]`` lists indices into ``queues`` visited by class ``i``.
    """

    params: GameParams
    f1: Curve
    f2: Curve
    queues: tuple[QueueTrace, ...]
    routes: tuple[tuple[int, ...], tuple[int, ...]]
    _tau_cache: dict = field(default_factory=dict, repr=False)

    def wait(self, i: int, t):
        """Total waiting time ``W^{(i)}(t)`` of class ``i`` through its route."""
        x = np.asarray(t, dtype=float)
        total = np.zeros_like(x)
        for j in self.routes[i - 1]:
            w = self.queues[j].wait(x)
            total = total + w
            x = x + w
        return float(total) if np.ndim(total) == 0 else total

    def depart(self, i: int, t):
        tt = np.asarray(t, dtype=float)
        out = self.wait(i, tt) + tt
        return float(out) if np.ndim(out) == 0 else out

    def cost(self, i: int, t):
        """``C_i(t) = gamma_i W^{(i)}(t) + (1 - gamma_i) tau^{(i)}(t)``."""
        tt = np.asarray(t, dtype=float)
        out = self.depart(i, tt) - self.params.gamma(i) * tt
        return float(out) if np.ndim(out) == 0 else out

    def tau_class(self, i: int) -> Curve:
        """Right-continuous network departure curve of class ``i``."""
        if i not in self._tau_cache:
            route = self.routes[i - 1]
            c = self.queues[route[0]].tau
            for j in route[1:]:
                c = compose(self.queues[j].tau, c)
            self._tau_cache[i] = c
        return self._tau_cache[i]

    def breakpoints(self) -> np.ndarray:
        parts = [self.f1.breakpoints, self.f2.breakpoints, [0.0]]
        parts += [q.q.breakpoints for q in self.queues]
        parts += [self.tau_class(1).breakpoints, self.tau_class(2).breakpoints]
        return np.unique(np.concatenate(parts))

    def queue_length(self, j: int, t):
        """``Q_j(t)``; ``j`` is 1 or 2, and is zero for absent queues."""
        if j - 1 < len(self.queues):
            return self.queues[j - 1].q(t)
        return np.zeros_like(np.asarray(t, dtype=float))

    def to_csv(self, rows: int = 1000, pad: float | None = None) -> str:
        """Trace table sampled at breakpoints plus a uniform grid."""
        bp = self.breakpoints()
        lo, hi = float(bp[0]), float(bp[-1])
        span = hi - lo if hi > lo else 1.0
        pad = 0.1 * span if pad is None else pad
        ts = np.union1d(bp, np.linspace(lo - pad, hi + pad, max(int(rows), 2)))
        cols = {
            "t": ts,
            "Q1": self.queue_length(1, ts),
            "Q2": self.queue_length(2, ts),
            "W1": self.wait(1, ts),
            "W2": self.wait(2, ts),
            "tau1": self.depart(1, ts),
            "tau2": self.depart(2, ts),
            "C1": self.cost(1, ts),
            "C2": self.cost(2, ts),
        }
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(cols))
        for k in range(ts.size):
            w.writerow([repr(float(cols[c][k])) for c in cols])
        return buf.getvalue()


def _require(p: GameParams, *topos: Topology) -> None:
    if p.topology not in topos:
        raise ValueError(f"topology mismatch: got {p.topology.value}")


def _pushed_through(f: Curve, q: QueueTrace) -> Curve:
    """Cumulative outflow ``F o tau^{-1}`` of a class leaving queue ``q``."""
    if f.total_increase == 0.0:
        return Curve.zero()
    tau = q.tau
    inv = generalized_inverse(tau, below=float(tau.t[0]) - 1.0)
    return compose(f, inv)


def compose_single(f1: Curve, f2: Curve, p: GameParams, mu: float | None = None) -> NetworkTrace:
    """Both classes share one queue of rate ``mu`` (default ``mu1``)."""
    q = trace_queue(curve_sum(f1, f2), p.mu1 if mu is None else mu)
    return NetworkTrace(p, f1, f2, (q,), ((0,), (0,)))


def compose_tandem(f1: Curve, f2: Curve, p: GameParams) -> NetworkTrace:
    _require(p, Topology.TANDEM)
    return compose_single(f1, f2, p, min(p.mu1, p.mu2))


def compose_parallel(f1: Curve, f2: Curve, p: GameParams) -> NetworkTrace:
    _require(p, Topology.PARALLEL)
    return NetworkTrace(p, f1, f2, (trace_queue(f1, p.mu1), trace_queue(f2, p.mu2)), ((0,), (1,)))


def compose_hds(f1: Curve, f2: Curve, p: GameParams) -> NetworkTrace:
    """Both classes enter queue 1; class 2 continues to queue 2."""
    _require(p, Topology.HDS)
    q1 = trace_queue(curve_sum(f1, f2), p.mu1)
    q2 = trace_queue(_pushed_through(f2, q1), p.mu2)
    return NetworkTrace(p, f1, f2, (q1, q2), ((0,), (0, 1)))


def compose_has(f1: Curve, f2: Curve, p: GameParams) -> NetworkTrace:
    """Class 1 enters queue 1 then queue 2; class 2 enters queue 2 directly."""
    _require(p, Topology.HAS)
    q1 = trace_queue(f1, p.mu1)
    q2 = trace_queue(curve_sum(_pushed_through(f1, q1), f2), p.mu2)
    return NetworkTrace(p, f1, f2, (q1, q2), ((0, 1), (1,)))


def compose_network(f1: Curve, f2: Curve, p: GameParams) -> NetworkTrace:
    """Dispatch on ``p.topology``."""
    return {
        Topology.SINGLE: compose_single,
        Topology.TANDEM: compose_tandem,
        Topology.PARALLEL: compose_parallel,
        Topology.HDS: compose_hds,
        Topology.HAS: compose_has,
    }[p.topology](f1, f2, p)


def class_cost(trace: NetworkTrace, i: int, t):
    if i not in (1, 2):
        raise ValueError("class index must be 1 or 2")
    return trace.cost(i, t)
