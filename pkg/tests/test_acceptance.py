"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (also collected into the
pytest terminal summary). Run standalone with ``python tests/test_acceptance.py``.
"""
import csv
import json
import math
import time
from collections import deque

import numpy as np
import pytest

from lfpso.avoidance import SensorReading, TurnAction, avoidance_action
from lfpso.core import RngStream, trial_streams
from lfpso.experiments import Scenario, load_scenario, rank_sum_pvalue, run_experiment
from lfpso.engine import place_robots, run_trial
from lfpso.io import parse_config, serialize_config, write_outputs
from lfpso.levy import LevyParams, mantegna_sigma, sample_steps
from lfpso.repulsion import build_clusters, repulsion

pytestmark = pytest.mark.slow

REPORT: list[str] = []


def report(name: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    print(line)
    REPORT.append(line)
    assert ok, line


_cache: dict = {}


def experiment(name):
    if name not in _cache:
        t0 = time.perf_counter()
        summary = run_experiment(load_scenario(name), ["hybrid", "pso", "lf"])
        _cache[name] = (summary, time.perf_counter() - t0)
    return _cache[name]


def test_c1_random_start_bands():
    summary, elapsed = experiment("random-start")
    m = {a: s.mean for a, s in summary.algorithms.items()}
    bands = {"hybrid": (0.66, 0.87), "pso": (0.50, 0.72), "lf": (0.47, 0.69)}
    inside = {a: lo <= m[a] <= hi for a, (lo, hi) in bands.items()}
    ok = all(inside.values()) and elapsed < 60 and summary.algorithms["hybrid"].n_trials == 20
    detail = ", ".join(f"{a} {m[a]:.4f} in [{lo}, {hi}]{'' if inside[a] else ' NO'}"
                       for a, (lo, hi) in bands.items())
    report("C1 random-start coverage bands", ok, f"{detail}; runtime {elapsed:.1f} s (< 60)")


def test_c2_random_start_ordering():
    summary, _ = experiment("random-start")
    h, p, l = (summary.algorithms[a] for a in ("hybrid", "pso", "lf"))
    pval = rank_sum_pvalue(h.final_coverage, l.final_coverage)
    ok = h.mean > p.mean and h.mean > l.mean and pval < 0.05
    report("C2 random-start ordering", ok,
           f"hybrid {h.mean:.4f} > pso {p.mean:.4f}, > lf {l.mean:.4f}; hybrid vs lf p = {pval:.2e}")


def test_c3_corner_start():
    corner, _ = experiment("corner-start")
    rand, _ = experiment("random-start")
    h, p, l = (corner.algorithms[a].mean for a in ("hybrid", "pso", "lf"))
    drop = rand.algorithms["hybrid"].mean - h
    ok = 0.62 <= h <= 0.84 and h > p and h > l and drop < 0.10
    report("C3 corner-start", ok,
           f"hybrid {h:.4f} in [0.62, 0.84], pso {p:.4f}, lf {l:.4f}; drop from random {100 * drop:.2f} pp (< 10)")


def test_c4_mantegna_sampler():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 50

    def oracle(b):
        b = mpmath.mpf(b)
        num = mpmath.gamma(1 + b) * mpmath.sin(mpmath.pi * b / 2)
        den = mpmath.gamma((1 + b) / 2) * b * mpmath.power(2, (b - 1) / 2)
        return float(mpmath.power(num / den, 1 / b))

    err1 = abs(mantegna_sigma(1.0) - 1.0)
    errs = [abs(mantegna_sigma(b) - oracle(b)) for b in (0.5, 1.5)]
    x = np.sort(sample_steps(np.random.Generator(np.random.PCG64(2024)), LevyParams(beta=1.0), 1_000_000))
    k = len(x) // 100
    surv = 1.0 - (np.arange(len(x) - k, len(x)) + 0.5) / len(x)
    slope = -np.polyfit(np.log(x[-k:]), np.log(surv), 1)[0]
    ok = err1 <= 1e-12 and max(errs) <= 1e-12 and abs(slope - 1.0) <= 0.15
    report("C4 Mantegna sampler", ok,
           f"|sigma(1)-1| = {err1:.1e}, oracle errors {errs[0]:.1e}/{errs[1]:.1e}, tail slope {slope:.4f} (1 +- 0.15)")


def test_c5_truth_table():
    expected = {
        (False, True, False): {TurnAction.TURN_LEFT_90, TurnAction.TURN_RIGHT_90},
        (False, True, True): {TurnAction.TURN_LEFT_90},
        (True, True, False): {TurnAction.TURN_RIGHT_90},
        (True, True, True): {TurnAction.TURN_180},
        (True, False, False): {TurnAction.TURN_RIGHT_90},
        (False, False, True): {TurnAction.TURN_LEFT_90},
        (False, False, False): {TurnAction.NONE},
        (True, False, True): {TurnAction.NONE},
    }
    rng = RngStream(5)
    bad = [k for k, want in expected.items()
           if {avoidance_action(SensorReading(*k), rng) for _ in range(200)} != want]
    report("C5 avoidance truth table", not bad, f"{8 - len(bad)}/8 rows match (front-only row yields both turns)")


def _bfs(pos, r):
    n, seen, comps = len(pos), set(), []
    for s in range(n):
        if s in seen:
            continue
        seen.add(s)
        q, comp = deque([s]), []
        while q:
            i = q.popleft()
            comp.append(i)
            for j in range(n):
                if j not in seen and math.dist(pos[i], pos[j]) <= r:
                    seen.add(j)
                    q.append(j)
        comps.append(tuple(sorted(comp)))
    return sorted(comps)


def test_c6_repulsion_and_clusters():
    null = repulsion((0.0, 0.0), [])
    col = repulsion((0.0, 0.0), [(1.0, 0.0), (2.0, 0.0)])
    perp = repulsion((0.0, 0.0), [(1.0, 0.0), (0.0, 1.0)])
    r2 = math.sqrt(2)
    checks = [
        null.d_sum == 0.0 and null.p_gb == (0.0, 0.0),
        abs(col.d_sum - 1.5) <= 1e-9 and math.dist(col.p_gb, (-1.5, 0.0)) <= 1e-9,
        abs(perp.d_sum - 2.0) <= 1e-9 and abs(perp.r_theta - 5 * math.pi / 4) <= 1e-9
        and math.dist(perp.p_gb, (-r2, -r2)) <= 1e-9,
    ]
    g = np.random.default_rng(77)
    mismatches = 0
    for _ in range(1000):
        n = int(g.integers(1, 21))
        pos = [tuple(p) for p in g.uniform(0, 20, (n, 2))]
        if sorted(c.members for c in build_clusters(pos, 2.0)) != _bfs(pos, 2.0):
            mismatches += 1
    ok = all(checks) and mismatches == 0
    report("C6 repulsion examples and clusters", ok,
           f"{sum(checks)}/3 examples within 1e-9, {mismatches} BFS mismatches over 1000 configurations")


def test_c7_hybrid_invariants():
    s = load_scenario("random-start")
    p = s.params.replace(algorithm="hybrid")
    arena = s.arena_template
    h = p.robot_size / 2
    counts = dict.fromkeys(["determinism", "speed", "containment", "monotone", "social", "permutation"], 0)
    for seed in range(100):
        a = run_trial(p, arena, seed, trace=True)
        if run_trial(p, arena, seed).to_json() != a.to_json():
            counts["determinism"] += 1
        for path in a.paths:
            for u, v in zip(path, path[1:]):
                if math.dist(u, v) > p.v_max * p.dt + 1e-9:
                    counts["speed"] += 1
            for x, y in path:
                if not (h - 1e-9 <= x <= p.arena_width - h + 1e-9 and h - 1e-9 <= y <= p.arena_height - h + 1e-9):
                    counts["containment"] += 1
        c = a.coverage_series
        counts["monotone"] += sum(b < q for q, b in zip(c, c[1:]))
        for trs in a.traces:
            counts["social"] += sum(1 for tr in trs if tr.mode == "hybrid" and tr.cluster_size == 1
                                    and tr.social != (0.0, 0.0))
        # Same initial robots handed over in reverse order.
        robots = place_robots(p, arena.fresh(), trial_streams(seed, p.n_robots)[0])
        if run_trial(p, arena, seed, robots=robots[::-1]).to_json() != a.to_json():
            counts["permutation"] += 1
    ok = not any(counts.values())
    report("C7 hybrid invariants over 100 trials", ok,
           ", ".join(f"{k} violations {v}" for k, v in counts.items()))


def test_c8_complexity():
    def run(name):
        s = load_scenario(name)
        return run_experiment(s, ["hybrid"]).results["hybrid"], s

    (low, ls), (high, hs) = run("low-complexity"), run("high-complexity")
    cov_low = np.mean([r.final_coverage for r in low])
    cov_high = np.mean([r.final_coverage for r in high])
    col_low = np.mean([len(r.collisions) for r in low])
    col_high = np.mean([len(r.collisions) for r in high])
    bad_victims = bad_energy = 0
    for rs, s in ((low, ls), (high, hs)):
        p = s.params
        for r in rs:
            # Independent scan for the first detection of each victim.
            for v, (vx, vy) in enumerate(s.arena_template.victims):
                hits = [(t, i) for t in range(p.n_steps + 1) for i, path in enumerate(r.paths)
                        if math.hypot(path[t][0] - vx, path[t][1] - vy) <= p.victim_detect_range]
                found = [(e.t, e.robot) for e in r.victims_found if e.victim == v]
                if found != ([min(hits)] if hits else []):
                    bad_victims += 1
            for i, path in enumerate(r.paths):
                e = sum((p.energy_idle_power + p.energy_move_coeff * math.dist(u, w) / p.dt) * p.dt
                        for u, w in zip(path, path[1:]))
                if abs(e - r.energy_joules[i]) > 1e-6 * max(e, 1.0):
                    bad_energy += 1
    ok = cov_high < cov_low and col_high >= col_low and bad_victims == 0 and bad_energy == 0
    report("C8 high vs low complexity", ok,
           f"coverage {cov_high:.4f} < {cov_low:.4f}, collisions {col_high:.2f} >= {col_low:.2f}, "
           f"victim mismatches {bad_victims}, energy mismatches {bad_energy}")


def test_c9_io(tmp_path):
    problems = []
    for name in ("random-start", "corner-start", "low-complexity", "high-complexity"):
        s = load_scenario(name)
        text = serialize_config(s.params, s.arena_template)
        p2, a2 = parse_config(text)
        if p2 != s.params or serialize_config(p2, a2) != text:
            problems.append(f"round-trip {name}")
    s = load_scenario("low-complexity")
    scen = Scenario("io", s.params.replace(n_steps=50), s.arena_template, n_trials=3)
    summary = run_experiment(scen, ["hybrid", "pso", "lf"])
    write_outputs(summary, tmp_path)
    data = json.loads((tmp_path / "summary.json").read_text())
    for algo in ("hybrid", "pso", "lf"):
        cov = list(csv.DictReader(open(tmp_path / algo / "coverage.csv")))
        finals = {int(r["trial"]): float(r["coverage_fraction"]) for r in cov}
        for t in data["algorithms"][algo]["trials"]:
            if t["final_coverage"] != finals[t["trial"]]:
                problems.append(f"{algo} trial {t['trial']} coverage")
            rows = sum(1 for _ in open(tmp_path / algo / f"paths_{t['trial']}.csv")) - 1
            if rows != (scen.params.n_steps + 1) * scen.params.n_robots:
                problems.append(f"{algo} paths rows {rows}")
    report("C9 I/O", not problems, "round-trip, summary/CSV consistency, path row counts"
           + (f"; problems: {problems}" if problems else " all hold"))


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
