"""Acceptance suite: one PASS/FAIL line per criterion, printed to the terminal.

Run with ``pytest tests/test_acceptance.py -v -s`` (the lines are printed
even without ``-s``).  The oracle criterion takes several minutes.
"""

import time

import numpy as np
import pytest

from _sampling import UNIQUE_TAGS, random_params, sample_many
from fluidgame.eap_solver import RegimeTag, sample_convex_eap, solve
from fluidgame.fluid_queue import queue_length, simulate_discrete
from fluidgame.network import GameParams
from fluidgame.oracle import OracleConfig, kolmogorov_distance, solve_fixed_point
from fluidgame.profile import Curve, support
from fluidgame.verifier import audit_structure, check_equilibrium, social_cost


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}")
    return emit


def test_criterion_1_closed_form_validity(report):
    start = time.perf_counter()
    bad = []
    worst = 0.0
    for n, tag in enumerate(UNIQUE_TAGS):
        for p in sample_many(tag, 200, seed=1000 + n):
            sol = solve(p)
            rep = check_equilibrium(sol.profile.f1, sol.profile.f2, p, eps=1e-9)
            worst = max(worst, *rep.iso_cost_deviation, *rep.deviation_gain)
            if not rep.passed:
                bad.append((tag.value, p, rep.failures()))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 60.0
    report(1, ok, f"{len(UNIQUE_TAGS)} tags x 200 points, failures={len(bad)}, "
                  f"worst deviation={worst:.2e}, {elapsed:.1f}s")
    assert not bad, bad[:3]
    assert elapsed < 60.0


def test_criterion_2_worked_values(report):
    hds = solve(GameParams("HDS", 2, 1, 2, 1, 0.3, 0.8)).boundaries
    got_hds = np.array([hds.t1a, hds.t1f, hds.t2a, hds.t2f])
    want_hds = np.array([-31 / 12, 0.75, 0.75, 2.0])
    has_sol = solve(GameParams("HAS", 1, 2, 1, 2, 0.2, 0.5))
    has = has_sol.boundaries
    got_has = np.array([has.t1a, has.t2a, has.t1f, has.t_empty, has.t2f])
    want_has = np.array([-1.5, -1.5, 1.0, 1.5, 1.5])
    s2 = support(has_sol.profile.f2)
    err = max(np.max(np.abs(got_hds - want_hds)), np.max(np.abs(got_has - want_has)))
    ok = err <= 1e-12 and len(s2) == 2
    report(2, ok, f"max error={err:.1e}, HAS class-2 support={s2.intervals}")
    assert err <= 1e-12
    assert len(s2) == 2


ORACLE_CASES = [
    ("SQ", GameParams("SingleQueue", 1, 1, 1, 1, 0.5, 0.8)),
    ("HDS-1", GameParams("HDS", 2, 1, 2, 1, 0.3, 0.8)),
    ("HDS-2a", GameParams("HDS", 2, 1, 2, 1, 0.5, 0.6)),
    ("HAS-I-2b", GameParams("HAS", 0.5, 2, 0.5, 2, 0.3, 0.6)),
    ("HAS-II-3c", GameParams("HAS", 1, 2, 1, 2, 0.2, 0.5)),
]


@pytest.mark.slow
def test_criterion_3_oracle_agreement(report):
    cfg = OracleConfig(dt=0.01)
    lines, ok = [], True
    for name, p in ORACLE_CASES:
        ref = solve(p)
        assert ref.tag.value == name, (ref.tag, name)
        start = time.perf_counter()
        res = solve_fixed_point(p, cfg)
        elapsed = time.perf_counter() - start
        d = [kolmogorov_distance(res.profile.curve(i), ref.profile.curve(i), res.profile.times)
             for i in (1, 2)]
        case_ok = max(d) <= 0.05 and elapsed < 300.0
        ok = ok and case_ok
        lines.append(f"{name}: d=({d[0]:.3f},{d[1]:.3f}) {elapsed:.0f}s")
    report(3, ok, "; ".join(lines))
    assert ok, lines


def test_criterion_4_threshold_audits(report):
    rng = np.random.default_rng(2024)
    counts = {}
    for topo, key in (("HDS", "hds_disjoint_iff_threshold"),
                      ("HAS", "has_queue2_serves_disjointly_iff_threshold")):
        violations, checked, sides = 0, 0, set()
        while checked < 500:
            p = random_params(topo, rng)
            sol = solve(p)
            if sol.profile is None:
                continue
            rep = audit_structure(sol, p, tol=1e-9)
            hits = [ok for name, ok, _ in rep.invariants if name == key]
            if topo == "HDS":
                sides.add(p.mu1 <= p.mu2 * max(1.0, p.gamma2 / p.gamma1))
            else:
                sides.add(p.mu1 >= p.mu2 * p.gamma2)
            checked += 1
            violations += sum(not h for h in hits)
        counts[topo] = (violations, sides)
    ok = all(v == 0 and len(s) == 2 for v, s in counts.values())
    report(4, ok, f"HDS violations={counts['HDS'][0]}/500, HAS violations={counts['HAS'][0]}/500")
    assert ok, counts


def _convex_case(tag, n=100):
    params = sample_many(tag, 10, seed=77)
    worst_cost, failures = 0.0, 0
    for k in range(n):
        p = params[k % len(params)]
        sol = solve(p)
        jp = sample_convex_eap(sol.convex_set, seed=k)
        rep = check_equilibrium(jp.f1, jp.f2, p, eps=1e-9)
        failures += not rep.passed
        for e in sol.extremes:
            worst_cost = max(worst_cost, abs(rep.social_cost - social_cost(e.f1, e.f2, p)))
    return failures, worst_cost


def test_criterion_5_equal_preference_multiplicity(report):
    res = {t.value: _convex_case(t) for t in (RegimeTag.HDS_EQ_2, RegimeTag.HAS_EQ_II_3)}
    ok = all(f == 0 and c <= 1e-9 for f, c in res.values())
    report(5, ok, ", ".join(f"{k}: failures={f}/100 social-cost gap={c:.1e}" for k, (f, c) in res.items()))
    assert ok, res


def _threshold_points(kind, rng, n=30):
    out = []
    while len(out) < n:
        p = random_params("HDS" if kind.startswith("HDS") else "HAS", rng)
        m1, m2, g1, g2, L2 = p.mu1, p.mu2, p.gamma1, p.gamma2, p.lambda2
        if kind == "HDS 2a/2b":
            if not (m1 > m2 and m2 / m1 * g2 < g1 < g2):
                continue
            thr = (1 - g2) / (1 - g1) * (m1 * g1 / (m2 * g2) - 1) * L2
        elif kind == "HDS 3a/3b":
            if not (m1 > m2 and g1 > g2):
                continue
            thr = (m1 / m2 - 1) * L2
        else:
            if not (m1 >= m2 * g2 and m2 * g1 <= m1 and g1 > g2):
                continue
            thr = L2 / (1 / g1 - 1)
            if (m2 / m1 - 1) * thr > L2:
                continue
        out.append((p, thr))
    return out


def test_criterion_6_regime_continuity(report):
    rng = np.random.default_rng(66)
    details, ok = [], True
    for kind in ("HDS 2a/2b", "HDS 3a/3b", "HAS-II 2b/2c"):
        worst, tags = 0.0, set()
        for p, thr in _threshold_points(kind, rng):
            lo = solve(p.with_(lambda1=thr - 1e-8))
            hi = solve(p.with_(lambda1=thr + 1e-8))
            tags.add((lo.tag.value, hi.tag.value))
            for i in (1, 2):
                d = kolmogorov_distance(lo.profile.curve(i), hi.profile.curve(i))
                worst = max(worst, d)
        kind_ok = worst < 1e-6 and all(x != y for x, y in tags)
        ok = ok and kind_ok
        details.append(f"{kind}: max distance={worst:.1e}")
    report(6, ok, "; ".join(details))
    assert ok, details


def test_criterion_7_engine_fidelity(report):
    rng = np.random.default_rng(7)
    worst_ratio = 0.0
    for _ in range(50):
        n = rng.integers(1, 6)
        edges = np.sort(rng.uniform(-2.0, 3.0, 2 * n))
        a = Curve.from_rates([(edges[2 * k], edges[2 * k + 1], rng.uniform(0.0, 3.0)) for k in range(n)])
        mu = rng.uniform(0.3, 3.0)
        grid, qs = simulate_discrete(a, mu, -2.5, 3.0 + a.total_increase / mu + 1.0, dt=1e-4)
        err = np.max(np.abs(queue_length(a, mu)(grid) - qs))
        worst_ratio = max(worst_ratio, err / (2e-4 * mu))
    ok = worst_ratio <= 1.0
    report(7, ok, f"50 inputs, worst error / (2e-4*mu) = {worst_ratio:.3f}")
    assert ok
