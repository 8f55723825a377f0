"""Independent numerical equilibrium finder.

Mass of each class lives on a time grid.  Each round, every class moves a
``1/(k+1)`` share of its mass onto its cheapest slots given the current joint
profile (fictitious play), spreading it over near-ties.  Costs come from the exact fluid engine applied to
the step curves of the discrete profile, so nothing here depends on the
closed-form solver.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .network import GameParams, compose_network
from .profile import Curve

TIE_TOL = 1e-12


@dataclass(frozen=True)
class OracleConfig:
    """Grid, iteration budget and best-response tie handling.

    Slots whose cost is within ``tie_scale * dt / sqrt(1 + k/100)`` of the
    cheapest one count as tied at round ``k``.  With ``tail_average`` the
    returned profile is the mean of the iterates over the second half of
    the run, which damps the cycling of plain fictitious play.
    """

    dt: float = 0.01
    window: tuple[float, float] | None = None
    max_iters: int = 3000
    stop_tol: float = 1e-4
    tie_scale: float = 3.0
    tail_average: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.window is not None and not self.window[1] > self.window[0]:
            raise ValueError("window must have positive length")

    def tie_width(self, k: int) -> float:
        return self.tie_scale * self.dt / np.sqrt(1.0 + k / 100.0)

    def to_json(self):
        return {"dt": self.dt, "window": self.window, "max_iters": self.max_iters,
                "stop_tol": self.stop_tol, "tie_scale": self.tie_scale,
                "tail_average": self.tail_average}


def default_window(p: GameParams) -> tuple[float, float]:
    """Interval that contains every equilibrium support for ``p``."""
    mu = min(p.mu1, p.mu2)
    g = min(p.gamma1, p.gamma2)
    tot = p.lambda1 + p.lambda2
    return -(1.0 / g) * tot / mu - 1.0, tot / mu + 1.0


@dataclass
class DiscreteProfile:
    """Point masses of both classes on a common time grid."""

    times: np.ndarray
    m1: np.ndarray
    m2: np.ndarray

    def masses(self, i: int) -> np.ndarray:
        return self.m1 if i == 1 else self.m2

    def curve(self, i: int) -> Curve:
        return Curve.from_steps(self.times, self.masses(i))

    def curves(self) -> tuple[Curve, Curve]:
        return self.curve(1), self.curve(2)

    def replace(self, i: int, m: np.ndarray) -> "DiscreteProfile":
        if i == 1:
            return DiscreteProfile(self.times, m, self.m2)
        return DiscreteProfile(self.times, self.m1, m)

    def to_json(self):
        return {"times": self.times.tolist(), "m1": self.m1.tolist(), "m2": self.m2.tolist()}

    @classmethod
    def uniform(cls, times: np.ndarray, lam1: float, lam2: float) -> "DiscreteProfile":
        n = times.size
        return cls(times, np.full(n, lam1 / n), np.full(n, lam2 / n))


def make_grid(window: tuple[float, float], dt: float) -> np.ndarray:
    """Grid of multiples of ``dt`` covering ``window``; includes 0 when inside."""
    k0 = int(np.floor(window[0] / dt))
    k1 = int(np.ceil(window[1] / dt))
    return dt * np.arange(k0, k1 + 1)


def best_response(current: DiscreteProfile, p: GameParams, i: int,
                  tie_tol: float = TIE_TOL) -> DiscreteProfile:
    """All of class ``i``'s mass on its cheapest slots, spread over ties.

    Slots whose cost is within ``tie_tol`` of the minimum count as tied.
    Returns ``current`` with class ``i`` replaced by the response.
    """
    mass = p.mass(i)
    n = current.times.size
    if mass == 0.0 or n == 1:
        return current.replace(i, np.full(n, mass / n) if n > 1 else np.array([mass]))
    f1, f2 = current.curves()
    cost = compose_network(f1, f2, p).cost(i, current.times)
    best = cost.min()
    tied = cost <= best + max(tie_tol, TIE_TOL * max(1.0, abs(best)))
    resp = np.where(tied, mass / np.count_nonzero(tied), 0.0)
    return current.replace(i, resp)


@dataclass
class OracleResult:
    profile: DiscreteProfile
    iters: int
    final_change: float
    converged: bool
    history: list[float] = field(default_factory=list)

    def diagnostics(self, reference: tuple[Curve, Curve] | None = None) -> dict:
        out = {"iters": self.iters, "final_change": self.final_change, "converged": self.converged}
        if reference is not None:
            out["distance_to_reference"] = [
                kolmogorov_distance(self.profile.curve(i), reference[i - 1], self.profile.times)
                for i in (1, 2)
            ]
        return out

    def dumps(self, reference=None) -> str:
        return json.dumps(self.diagnostics(reference), indent=2)


def _renormalize(m: np.ndarray, mass: float) -> np.ndarray:
    m = np.maximum(m, 0.0)
    s = m.sum()
    return m * (mass / s) if s > 0 else m


def solve_fixed_point(p: GameParams, cfg: OracleConfig = OracleConfig()) -> OracleResult:
    """Fictitious play ``x <- x + (BR(x) - x)/(k+1)``, classes updated in turn."""
    window = cfg.window if cfg.window is not None else default_window(p)
    times = make_grid(window, cfg.dt)
    x = DiscreteProfile.uniform(times, p.lambda1, p.lambda2)
    change = np.inf
    history: list[float] = []
    tail_from = cfg.max_iters // 2 + 1
    acc = np.zeros((2, times.size))
    n_acc = 0
    k = 0
    for k in range(1, cfg.max_iters + 1):
        change = 0.0
        for i in (1, 2):
            if p.mass(i) == 0.0:
                continue
            br = best_response(x, p, i, cfg.tie_width(k)).masses(i)
            old = x.masses(i)
            new = _renormalize(old + (br - old) / (k + 1), p.mass(i))
            change = max(change, float(np.max(np.abs(np.cumsum(new - old)))))
            x = x.replace(i, new)
        history.append(change)
        if k >= tail_from:
            acc[0] += x.m1
            acc[1] += x.m2
            n_acc += 1
        if change < cfg.stop_tol:
            break
    if cfg.tail_average and n_acc:
        x = DiscreteProfile(times, acc[0] / n_acc, acc[1] / n_acc)
    return OracleResult(x, k, float(change), bool(change < cfg.stop_tol), history)


def kolmogorov_distance(a: Curve, b: Curve, extra_times=(), tol: float = 1e-6) -> float:
    """``sup_t |a(t) - b(t)|`` over breakpoints and ``extra_times``, both sides."""
    if isinstance(a, DiscreteProfile) or isinstance(b, DiscreteProfile):
        raise TypeError("pass per-class curves, e.g. profile.curve(1)")
    ma, mb = a.total_increase, b.total_increase
    if abs(ma - mb) > tol * max(1.0, ma, mb):
        raise ValueError(f"mass mismatch: {ma} vs {mb}")
    ts = np.union1d(a.breakpoints, b.breakpoints)
    if len(extra_times):
        ts = np.union1d(ts, np.asarray(extra_times, dtype=float))
    right = np.abs(a(ts) - b(ts))
    left = np.abs(a.eval_left(ts) - b.eval_left(ts))
    return float(max(right.max(), left.max()))
