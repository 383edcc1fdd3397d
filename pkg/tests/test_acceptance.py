"""Acceptance criteria; each test records one PASS/FAIL line via ``criterion``."""
import cmath
import math
import time

import numpy as np
import pytest

from expoth.address import ExternalAddress, growth, parse_address, shift
from expoth.freegroup import Word
from expoth.lifting import run_batch
from expoth.rcurve import PunctureSet, curve_from_word, homotopy_word, perturb_homotopic
from expoth.spider import SolveOptions, contraction_profile, solve
from expoth.verify import auto_depth, real_axis_oracle, trace_ray, verify_parameter

pytestmark = pytest.mark.acceptance

ZEROS = ExternalAddress.zeros()
ORACLE_TS = (1.0, 1.5, 2.0, 3.0)
APERIODIC = ("|gen:thue_morse", "|gen:fibonacci", "|gen:rudin_shapiro", "|gen:squares",
             "|gen:digitsum3", "|gen:tribonacci", "1,2|gen:champernowne3")
E2E_TS = (1.5, 2.5)
TRACKED = (("0|zeros", 1.5), ("0,1,0,0,1|zeros", 1.5), ("|gen:thue_morse", 2.5),
           ("2|gen:digitsum3", 1.5))


@pytest.fixture(scope="module")
def oracle_runs():
    return {t: solve(ZEROS, t) for t in ORACLE_TS}


@pytest.fixture(scope="module")
def e2e_runs():
    return {(lit, t): solve(parse_address(lit), t) for lit in APERIODIC for t in E2E_TS}


@pytest.fixture(scope="module")
def tracked_runs():
    opts = SolveOptions(mode="tracked")
    return {(lit, t): solve(parse_address(lit), t, opts) for lit, t in TRACKED}


def test_oracle_equivalence(criterion, oracle_runs):
    worst, details = 0.0, []
    ok = True
    for t, res in oracle_runs.items():
        err = abs(res.kappa - real_axis_oracle(t))
        worst = max(worst, err)
        ok &= res.converged and res.iterations <= 500 and res.elapsed < 5.0 and err < 1e-8
        details.append(f"t={t}:{res.iterations}it/{res.elapsed:.2f}s")
    criterion("oracle_equivalence", ok, f"max|dk|={worst:.1e} " + " ".join(details))
    assert ok


def test_end_to_end(criterion, e2e_runs):
    worst, good = 0.0, set()
    for (lit, t), res in e2e_runs.items():
        addr = parse_address(lit)
        assert not addr.is_preperiodic()
        assert set(addr.entries(64)) <= {0, 1, 2}
        r = verify_parameter(res.kappa, addr, t, res.plan.N, min_seed=min(30.0, res.plan.T_cut))
        worst = max(worst, r)
        if res.converged and r < 1e-6:
            good.add(lit)
    complete = {lit for lit in good if all(e2e_runs[(lit, t)].converged for t in E2E_TS)}
    ok = len(complete) >= 5 and worst < 1e-6
    criterion("end_to_end", ok, f"{len(complete)} addresses x {len(E2E_TS)} potentials, max residual {worst:.1e}")
    assert ok


def test_contraction(criterion, oracle_runs, e2e_runs, tracked_runs):
    runs = list(oracle_runs.items()) + list(e2e_runs.items()) + list(tracked_runs.items())
    failures, worst_ratio, worst_rate = [], 0.0, 0.0
    for key, res in runs:
        if not res.converged or len(res.trace) < 3:
            continue
        prof = contraction_profile(res.trace)
        post = prof.ratios[prof.burn_in:]
        if post:
            worst_ratio = max(worst_ratio, max(post))
        worst_rate = max(worst_rate, prof.rate)
        if not (all(r < 1 for r in post) and prof.rate < 0.95):
            failures.append(f"{key}: max ratio {max(post):.4f} rate {prof.rate:.3f}")
    ok = not failures
    criterion("contraction", ok, f"max post-burn-in ratio {worst_ratio:.4f}, max rate {worst_rate:.3f}"
              + ("" if ok else "; " + "; ".join(failures)))
    assert ok, failures


def test_invariants(criterion, oracle_runs, e2e_runs, tracked_runs):
    runs = list(oracle_runs.values()) + list(e2e_runs.values()) + list(tracked_runs.values())
    checked = sum(len(r.reports) for r in runs)
    bad = sum(not rep.ok for r in runs for rep in r.reports)
    indet = sum(rep.cond3 is None for r in runs for rep in r.reports)
    ok = bad == 0 and checked > 0
    criterion("invariants", ok, f"{checked} iterates, {bad} failures, {indet} cond3 indeterminate")
    assert ok


def test_homotopy_word_invariance(criterion):
    rng = np.random.default_rng(2024)
    failures = 0
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        pts = []
        while len(pts) < n:
            z = complex(*rng.uniform(-10, 10, size=2))
            if all(abs(z - q) > 0.05 for q in pts):
                pts.append(z)
        V = PunctureSet(tuple(pts))
        s = int(rng.integers(n))
        w = Word(tuple((int(rng.integers(n)), int(rng.choice((-1, 1))))
                       for _ in range(int(rng.integers(0, 9)))))
        gamma = curve_from_word(V, s, w)
        moved = perturb_homotopic(gamma, V, int(rng.integers(1 << 31)), 40)
        if homotopy_word(V, moved) != homotopy_word(V, gamma):
            failures += 1
    criterion("homotopy_word_invariance", failures == 0, f"1000 cases, {failures} failures")
    assert failures == 0


def test_lift_bounds(criterion):
    t0 = time.perf_counter()
    counts = {}
    for fam in ("exp", "poly", "composition"):
        reports = run_batch(fam, 1000, seed=0)
        counts[fam] = sum(not r.ok for r in reports)
    elapsed = time.perf_counter() - t0
    ok = not any(counts.values()) and elapsed < 60
    criterion("lift_bounds", ok, " ".join(f"{k}:{v} violations" for k, v in counts.items())
              + f" in {elapsed:.1f}s")
    assert ok


def test_tracked_step_bound(criterion, tracked_runs):
    records = [r for res in tracked_runs.values() for r in res.word_records]
    bad = sum(not r.ok for r in records)
    longest = max((r.new_length for r in records), default=0)
    ok = bad == 0 and len(records) > 0 and all(res.converged for res in tracked_runs.values())
    criterion("tracked_step_bound", ok, f"{len(records)} leg steps, {bad} violations, longest word {longest}")
    assert ok


def test_ray_asymptotics(criterion):
    errs = {t: abs(trace_ray(0, ZEROS, t, 1) - complex(t, 2 * math.pi * ZEROS.entry(0)))
            for t in (30.0, 40.0, 50.0)}
    ok = all(e < math.exp(-t / 2) for t, e in errs.items())
    criterion("ray_asymptotics", ok, " ".join(f"t={t:g}:{e:.1e}" for t, e in errs.items()))
    assert ok


def test_shift_equivariance(criterion):
    addr = parse_address("|gen:thue_morse")
    worst = 0.0
    for kappa in (0j, 0.5 + 0.3j, -1 + 1j):
        for t in (1.5, 2.0, 3.0):
            d = auto_depth(t, 30)
            lhs = trace_ray(kappa, shift(addr, 1), growth(t), d - 1)
            rhs = cmath.exp(trace_ray(kappa, addr, t, d)) + kappa
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    ok = worst < 1e-8
    criterion("shift_equivariance", ok, f"3x3 grid, max rel error {worst:.1e}")
    assert ok
