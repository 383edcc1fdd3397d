"""Spider iteration: the sigma-map on truncated marked-orbit configurations.

A state holds p_0 .. p_{N-1}, the images of the first N marked points, and a
frozen seed t_N + 2 pi i s_N standing in for every deeper level.  One step
pulls the configuration back through e^z + kappa with kappa = p_0:

    q_n = Log(p_{n+1} - kappa) + 2 pi i s_n,    p_N := seed.

Fast mode uses the principal Log.  Tracked mode also carries the legs of the
spider as polylines, lifts them through the same map and records their
homotopy words, which certifies the branch choice.
"""
from __future__ import annotations

import cmath
import json
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable

from .address import (
    ExternalAddress,
    PotentialOrbit,
    check_exponentially_bounded,
    growth,
    estimate_ts,
    parse_address,
    potential_orbit,
)
from .freegroup import Word, parse_word
from .lifting import branch, lift_exp
from .rcurve import PunctureSet, RCurve, homotopy_word, straight_reference

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
LOG_TINY = math.log(1e-300)


class CollisionError(ArithmeticError):
    def __init__(self, msg: str = "marked point collided with asymptotic value"):
        super().__init__(msg)


@dataclass(frozen=True)
class TruncationPlan:
    N: int
    t: float
    T_cut: float
    orbit: PotentialOrbit
    log_rho: float        # log of rho = (t_{N+1} + t_N) / 2
    log_M: float          # log of M_rho = e^{2 t_N}
    A: float = 42.0

    @property
    def rho(self) -> float:
        return math.exp(self.log_rho) if self.log_rho < 709 else math.inf

    @property
    def t_N(self) -> float:
        return self.orbit.value(self.N)


def plan_truncation(addr: ExternalAddress, t: float, T_cut: float = 50.0, A: float = 42.0,
                    ts: float | None = None) -> TruncationPlan:
    if not (t > 0 and math.isfinite(t)):
        raise ValueError("potential must be positive and finite")
    if T_cut < 30:
        raise ValueError("T_cut must be >= 30")
    if ts is None:
        ts = estimate_ts(addr)
    if t <= ts:
        raise ValueError("potential below minimal potential t_s")
    N = 0
    tn = float(t)
    while tn < T_cut:
        N += 1
        tn = growth(tn)
    if math.isinf(tn):
        raise ValueError("truncation level not representable; lower T_cut")
    orbit = potential_orbit(t, N + 1)
    lt1 = orbit.log_value(N + 1)
    # log((t_{N+1} + t_N) / 2) without forming t_{N+1}
    log_rho = lt1 + math.log1p(math.exp(math.log(tn) - lt1)) - math.log(2.0)
    return TruncationPlan(N, float(t), float(T_cut), orbit, log_rho, 2.0 * tn, float(A))


@dataclass(frozen=True)
class SpiderState:
    addr: ExternalAddress
    t: float
    N: int
    points: tuple[complex, ...]
    frozen_seed: complex
    leg_words: tuple[Word, ...] | None = None
    legs: tuple[RCurve, ...] | None = None
    iter: int = 0

    @property
    def kappa(self) -> complex:
        return self.points[0] if self.N else self.frozen_seed

    @property
    def tracked(self) -> bool:
        return self.legs is not None


def initial_state(plan: TruncationPlan, addr: ExternalAddress, t: float,
                  tracked: bool = False) -> SpiderState:
    pts = tuple(complex(plan.orbit.value(n), TWO_PI * addr.entry(n)) for n in range(plan.N))
    seed = complex(plan.orbit.value(plan.N), TWO_PI * addr.entry(plan.N))
    legs = words = None
    if tracked:
        legs = tuple(straight_reference(PunctureSet(pts[:n + 1]), n) for n in range(plan.N))
        words = tuple(Word() for _ in range(plan.N))
    return SpiderState(addr, float(t), plan.N, pts, seed, words, legs, 0)


def _pullback(state: SpiderState, eps: float) -> list[complex]:
    kappa = state.points[0]
    targets = state.points[1:] + (state.frozen_seed,)
    out = []
    for n, p in enumerate(targets):
        d = p - kappa
        if abs(d) < eps:
            raise CollisionError()
        out.append(branch(cmath.log(d), state.addr.entry(n)))
    return out


def sigma_step(state: SpiderState, eps: float = 1e-12) -> SpiderState:
    """One fast-mode pullback (principal Log plus 2 pi i s_n)."""
    if state.N == 0:
        return replace(state, iter=state.iter + 1)
    q = _pullback(state, eps)
    return replace(state, points=tuple(q), iter=state.iter + 1)


@dataclass(frozen=True)
class WordBoundRecord:
    iter: int
    n: int
    new_length: int
    old_length: int
    bound: float

    @property
    def ok(self) -> bool:
        return self.new_length < self.bound


def sigma_step_tracked(state: SpiderState, eps: float = 1e-12, A: float = 42.0,
                       records: list | None = None) -> SpiderState:
    """Pullback that lifts every leg through e^z + kappa.

    New leg n is the lift of old leg n+1 into strip s_n; old leg N is the
    straight ray from the frozen seed.  The new point q_n is the start of the
    lifted leg.  Word-growth records are appended to ``records``.
    """
    if not state.tracked:
        raise ValueError("state carries no legs; use initial_state(..., tracked=True)")
    N = state.N
    if N == 0:
        return replace(state, iter=state.iter + 1)
    kappa = state.points[0]
    for p in state.points[1:] + (state.frozen_seed,):
        if abs(p - kappa) < eps:
            raise CollisionError()
    old_legs = state.legs + (RCurve(state.frozen_seed),)
    old_words = state.leg_words + (Word(),)
    new_legs = []
    for n in range(N):
        hazards = state.points[:n + 1]
        new_legs.append(lift_exp(old_legs[n + 1], kappa, state.addr.entry(n), hazards=hazards, eps=eps))
    q = tuple(leg.start for leg in new_legs)
    words = []
    for n in range(N):
        w = homotopy_word(PunctureSet(q[:n + 1]), new_legs[n])
        words.append(w)
        if records is not None:
            old = len(old_words[n + 1])
            records.append(WordBoundRecord(state.iter + 1, n, len(w), old, A * (n + 2) ** 4 * max(1, old)))
    return replace(state, points=q, legs=tuple(new_legs), leg_words=tuple(words), iter=state.iter + 1)


# -- invariant monitor ------------------------------------------------------

@dataclass(frozen=True)
class InvariantReport:
    cond1: bool
    cond2: bool
    cond3: bool | None    # None: bound below 1e-300 and two points coincide
    cond4: bool
    margins: dict
    words_tracked: bool

    @property
    def ok(self) -> bool:
        return self.cond1 and self.cond2 and self.cond3 is not False and self.cond4

    def flags(self) -> dict:
        return {"1": self.cond1, "2": self.cond2, "3": self.cond3, "4": self.cond4}


def invariant_report(state: SpiderState, plan: TruncationPlan) -> InvariantReport:
    """Conditions (1)-(4) of the invariant subset, compared in log space.

    The frozen seed counts as p_N.  Condition (2) concerns points beyond the
    truncation, which are frozen at their anchors, and holds trivially.
    """
    if plan.N != state.N:
        raise ValueError("plan does not match state")
    N = state.N
    pts = list(state.points) + [state.frozen_seed]

    def logabs(z: complex) -> float:
        a = abs(z)
        return math.log(a) if a > 0 else -math.inf

    m1 = min(plan.log_rho - logabs(p) for p in pts)
    cond1 = m1 > 0

    cond3: bool | None = True
    m3 = math.inf
    for l in range(N + 1):
        log_bound = -(N - l + 1) * plan.log_M
        for k in range(l):
            ld = logabs(pts[k] - pts[l])
            if log_bound < LOG_TINY:
                if ld == -math.inf and cond3 is not False:
                    cond3 = None
                margin = ld - LOG_TINY
            else:
                margin = ld - log_bound
                if margin <= 0:
                    cond3 = False
            m3 = min(m3, margin)

    m4 = math.inf
    cond4 = True
    words = state.leg_words or ()
    for n in range(N):
        L = len(words[n]) if n < len(words) else 0
        rhs = (N - n + 1) * math.log(plan.A) + 4 * (math.lgamma(N + 3) - math.lgamma(n + 2))
        lhs = math.log(L) if L else -math.inf
        m4 = min(m4, rhs - lhs)
        cond4 = cond4 and lhs < rhs
    return InvariantReport(cond1, True, cond3, cond4,
                           {"1": m1, "2": "frozen", "3": m3, "4": m4}, state.leg_words is not None)


# -- contraction profile ------------------------------------------------------

@dataclass(frozen=True)
class ContractionProfile:
    ratios: tuple[float, ...]
    rate: float
    burn_in: int
    converged_at_start: bool = False

    @property
    def contracting(self) -> bool:
        post = self.ratios[self.burn_in:]
        return self.converged_at_start or (all(r < 1 for r in post) and self.rate < 1)


def _steps(trace) -> list[float]:
    out = []
    for rec in trace:
        out.append(float(rec.step_sup if hasattr(rec, "step_sup") else rec))
    return out


def contraction_profile(trace, burn_in: int = 2) -> ContractionProfile:
    """Successive sup-step ratios and a geometric least-squares rate.

    ``trace`` is a sequence of trace records or bare step sizes.
    """
    steps = _steps(trace)
    if len(steps) < 3:
        raise ValueError("trace too short")
    if steps[0] == 0:
        return ContractionProfile((), 0.0, burn_in, True)
    ratios = []
    for a, b in zip(steps[:-1], steps[1:]):
        if a == 0:
            break
        ratios.append(b / a)
    tail = [s for s in steps[burn_in:] if s > 0]
    if len(tail) < 2:
        tail = [s for s in steps if s > 0]
    if len(tail) < 2:
        return ContractionProfile(tuple(ratios), 0.0, burn_in)
    import numpy as np

    y = np.log(np.asarray(tail))
    x = np.arange(len(y), dtype=float)
    slope = float(np.polyfit(x, y, 1)[0])
    return ContractionProfile(tuple(ratios), math.exp(slope), burn_in)


# -- solver -------------------------------------------------------------------

@dataclass
class SolveOptions:
    T_cut: float = 50.0
    tol: float = 1e-10
    max_iter: int = 500
    mode: str = "fast"
    A: float = 42.0
    monitor: bool = True
    collision_eps: float = 1e-12
    ts_depth: int = 12

    def __post_init__(self):
        if self.mode not in ("fast", "tracked"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    kappa: complex
    step_sup: float
    invariant_flags: dict | None = None

    def to_json(self) -> str:
        return json.dumps({
            "iter": self.iter,
            "kappa_re": self.kappa.real,
            "kappa_im": self.kappa.imag,
            "step_sup": self.step_sup,
            "invariant_flags": self.invariant_flags,
        })


@dataclass
class SolveResult:
    kappa: complex
    converged: bool
    iterations: int
    trace: list[TraceRecord]
    state: SpiderState
    plan: TruncationPlan
    warnings: list[str] = field(default_factory=list)
    reports: list[InvariantReport] = field(default_factory=list)
    word_records: list[WordBoundRecord] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def invariants_ok(self) -> bool:
        return all(r.ok for r in self.reports)

    @property
    def word_bound_violations(self) -> int:
        return sum(not r.ok for r in self.word_records)


def solve(addr: ExternalAddress, t: float, opts: SolveOptions | None = None,
          resume: SpiderState | None = None,
          on_step: Callable[[TraceRecord, SpiderState], None] | None = None) -> SolveResult:
    """Iterate the sigma-map from the identity seed until the sup step < tol.

    Non-convergence returns ``converged=False``; collisions propagate.
    """
    opts = opts or SolveOptions()
    t0 = time.perf_counter()
    warnings = []
    if addr.is_preperiodic():
        warnings.append("address is (pre-)periodic; convergence is not covered by the theory")
    ts = 0.0 if addr.is_bounded() else estimate_ts(addr, depth=opts.ts_depth)
    if not check_exponentially_bounded(addr, t, opts.ts_depth).bounded:
        warnings.append("finite-depth check does not find the address exponentially bounded at t")
    plan = plan_truncation(addr, t, opts.T_cut, opts.A, ts=ts)
    tracked = opts.mode == "tracked"
    if resume is not None:
        if resume.N != plan.N:
            raise ValueError("checkpoint truncation depth does not match the plan")
        state = resume
        if tracked and not state.tracked:
            raise ValueError("checkpoint has no legs; cannot resume in tracked mode")
    else:
        state = initial_state(plan, addr, t, tracked)

    trace: list[TraceRecord] = []
    reports: list[InvariantReport] = []
    word_records: list[WordBoundRecord] = []
    if opts.monitor:
        reports.append(invariant_report(state, plan))
    if plan.N == 0:
        return SolveResult(state.kappa, True, 0, trace, state, plan, warnings, reports, word_records,
                           time.perf_counter() - t0)

    converged = False
    for _ in range(opts.max_iter):
        if tracked:
            new = sigma_step_tracked(state, opts.collision_eps, opts.A, word_records)
        else:
            new = sigma_step(state, opts.collision_eps)
        step = max(abs(a - b) for a, b in zip(new.points, state.points))
        state = new
        flags = None
        if opts.monitor:
            rep = invariant_report(state, plan)
            reports.append(rep)
            flags = rep.flags()
        rec = TraceRecord(state.iter, state.kappa, step, flags)
        trace.append(rec)
        if on_step is not None:
            on_step(rec, state)
        log.debug("iter %d kappa %r step %.3e", state.iter, state.kappa, step)
        if step < opts.tol:
            converged = True
            break
    return SolveResult(state.kappa, converged, state.iter, trace, state, plan, warnings, reports,
                       word_records, time.perf_counter() - t0)


def fixed_point_residual(state: SpiderState) -> float:
    """max_n |Log(p_{n+1} - kappa) + 2 pi i s_n - p_n|."""
    if state.N == 0:
        return 0.0
    q = _pullback(state, 0.0)
    return max(abs(a - b) for a, b in zip(q, state.points))


# -- persistence ----------------------------------------------------------------

def _c(z: complex) -> list[float]:
    return [z.real, z.imag]


def state_to_json(state: SpiderState) -> str:
    try:
        lit = state.addr.to_literal()
    except ValueError:
        # anonymous generator: only s_0 .. s_N enter the truncated problem
        lit = ",".join(str(s) for s in state.addr.entries(state.N + 1)) + "|zeros"
    return json.dumps({
        "address": lit,
        "t": state.t,
        "N": state.N,
        "points": [_c(p) for p in state.points],
        "frozen_seed": _c(state.frozen_seed),
        "leg_words": None if state.leg_words is None else [str(w) for w in state.leg_words],
        "legs": None if state.legs is None else [[_c(p) for p in leg.points] for leg in state.legs],
        "iter": state.iter,
    })


def state_from_json(text: str) -> SpiderState:
    d = json.loads(text)
    legs = None
    if d.get("legs") is not None:
        legs = tuple(RCurve(complex(*leg[0]), tuple(complex(*p) for p in leg[1:])) for leg in d["legs"])
    words = None
    if d.get("leg_words") is not None:
        words = tuple(parse_word(w) for w in d["leg_words"])
    return SpiderState(parse_address(d["address"]), float(d["t"]), int(d["N"]),
                       tuple(complex(*p) for p in d["points"]), complex(*d["frozen_seed"]),
                       words, legs, int(d["iter"]))
