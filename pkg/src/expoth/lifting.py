"""Path lifting of r-curves through e^z + kappa and monic polynomials.

Both lifts sample the downstairs polyline so that every step is at most a
quarter of the distance to the nearest hazard (punctures, singular values).
A univalent branch maps such a disk onto a convex set (radius of convexity
2 - sqrt(3) > 1/4), so the chord between consecutive lifted samples is
homotopic to the true lift relative to all preimages of the hazards.

The far tail is sampled until the lifted tail has cleared every hazard
preimage; a horizontal ray replaces the rest.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .freegroup import Word
from .rcurve import PunctureSet, RCurve, curve_from_word, homotopy_word

TWO_PI = 2.0 * math.pi
STEP_FRACTION = 0.25


class LiftError(ValueError):
    pass


def branch(z: complex, k: int) -> complex:
    """z + 2 pi i k; shared with the spider so both paths round alike."""
    return z + complex(0.0, TWO_PI * k)


def _ray_distance(c: complex, a: complex) -> float:
    """Distance from c to the ray {a + x : x >= 0}."""
    if c.real <= a.real:
        return abs(c - a)
    return abs(c.imag - a.imag)


def _segment_distance(c: complex, a: complex, b: complex) -> float:
    d = b - a
    dd = abs(d) ** 2
    lam = 0.0 if dd == 0 else min(1.0, max(0.0, ((c - a) * d.conjugate()).real / dd))
    return abs(c - (a + lam * d))


def _dist(w: complex, hazards: np.ndarray) -> float:
    return float(np.abs(hazards - w).min()) if hazards.size else math.inf


def _sample_polyline(pts: Sequence[complex], hazards: np.ndarray, scale: float) -> list[complex]:
    """Subdivide so each step is <= STEP_FRACTION * distance to hazards."""
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        length = abs(b - a)
        u = (b - a) / length
        w = a
        while True:
            d = _dist(w, hazards)
            step = STEP_FRACTION * min(d, scale) if math.isfinite(d) else length
            if step < 1e-13 * (1 + abs(w)):
                raise LiftError("curve hits puncture")
            if abs(b - w) <= step:
                out.append(b)
                break
            w = w + step * u
            out.append(w)
    return out


def _sample_tail(a: complex, hazards: np.ndarray, done) -> list[complex]:
    """Points a + x (x > 0) along the tail until ``done(w)`` holds."""
    out = []
    w = a
    for _ in range(100000):
        if done(w):
            return out
        d = _dist(w, hazards)
        step = STEP_FRACTION * d if math.isfinite(d) else max(1.0, abs(w))
        step = max(step, 1e-3 * (1 + abs(w)))
        w = w + step
        out.append(w)
    raise LiftError("tail sampling did not terminate")


# -- exponential ------------------------------------------------------------

def lift_exp(gamma: RCurve, kappa: complex, target_strip: int = 0,
             hazards: Iterable[complex] = (), eps: float = 1e-12) -> RCurve:
    """Lift of ``gamma`` through e^z + kappa whose tail lies in the strip
    Im in (2 pi k - pi, 2 pi k + pi].

    ``hazards`` are downstairs points whose preimages must be respected
    (the start of ``gamma`` is handled exactly and may be omitted).
    """
    kappa = complex(kappa)
    P = list(gamma.points)
    for a, b in zip(P[:-1], P[1:]):
        if _segment_distance(kappa, a, b) < eps:
            raise LiftError("curve too close to asymptotic value")
    if _ray_distance(kappa, P[-1]) < eps:
        raise LiftError("curve too close to asymptotic value")

    H = np.array([h for h in hazards if h != gamma.start] + [kappa], dtype=complex)
    samples = _sample_polyline(P, H, math.inf) if len(P) > 1 else [P[0]]
    clear = max(float(np.abs(H - kappa).max()), abs(P[0] - kappa), 1e-300)

    def done(w):
        d = w - kappa
        return d.real > 0 and abs(d) >= math.e * clear

    samples += _sample_tail(samples[-1], H, done)

    # backward continuation from the far tail, principal branch there
    z = cmath.log(samples[-1] - kappa)
    lifted = [z]
    for w in reversed(samples[:-1]):
        L = cmath.log(w - kappa)
        z = branch(L, round((z.imag - L.imag) / TWO_PI))
        lifted.append(z)
    lifted.reverse()
    m = round((lifted[0].imag - cmath.log(P[0] - kappa).imag) / TWO_PI)
    lifted[0] = branch(cmath.log(P[0] - kappa), m)
    out = [branch(z, target_strip) for z in lifted]
    clean = [out[0]]
    for z in out[1:]:
        if z != clean[-1]:
            clean.append(z)
    return RCurve(clean[0], tuple(clean[1:]))


# -- polynomials --------------------------------------------------------------

@dataclass(frozen=True)
class MonicPolynomial:
    """z^d + c_{d-1} z^{d-1} + ... + c_0; ``coeffs`` lists c_0 .. c_{d-1}."""

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))
        if len(self.coeffs) < 1:
            raise ValueError("degree must be >= 1")

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    @property
    def _np(self) -> np.ndarray:
        # highest degree first, for numpy
        return np.array((1.0,) + self.coeffs[::-1], dtype=complex)

    def __call__(self, z):
        if isinstance(z, np.ndarray):
            return np.polyval(self._np, z)
        acc = 1.0 + 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def derivative(self, z):
        if isinstance(z, np.ndarray):
            return np.polyval(np.polyder(self._np), z)
        d = self.degree
        acc = complex(d)
        for k in range(d - 1, 0, -1):
            acc = acc * z + k * self.coeffs[k]
        return acc

    def critical_points(self) -> np.ndarray:
        if self.degree == 1:
            return np.zeros(0, dtype=complex)
        return np.roots(np.polyder(self._np)).astype(complex)

    def critical_values(self) -> np.ndarray:
        return self(self.critical_points())

    def preimages(self, w: complex) -> np.ndarray:
        c = self._np.copy()
        c[-1] -= w
        return np.roots(c).astype(complex)

    def cauchy_radius(self, w_max: float) -> float:
        """Roots of p(z) = u, |u| <= w_max, lie in |z| <= this radius."""
        lower = max([abs(c) for c in self.coeffs[1:]] + [abs(self.coeffs[0]) + w_max])
        return 1.0 + lower


@dataclass(frozen=True)
class PolyLift:
    raw: np.ndarray          # lift points, start first, last = far tail sample
    is_r_curve: bool
    rotation: complex        # xi with xi * raw an r-curve
    curve: RCurve            # xi * raw with a horizontal tail


def _separation(p: MonicPolynomial, z: complex, crit: np.ndarray) -> float:
    """Lower bound for the distance from z to any other root of p(.) = p(z)."""
    d = p.degree
    if d == 1:
        return math.inf
    dc = float(np.abs(crit - z).min())
    return 2.0 * dc / (1.0 + 1.0 / math.tan(math.pi / d))


def _newton(p: MonicPolynomial, z: complex, w: complex) -> complex | None:
    for _ in range(60):
        dp = complex(p.derivative(z))
        if dp == 0:
            return None
        dz = (complex(p(z)) - w) / dp
        z -= dz
        if abs(dz) <= 1e-15 * (1 + abs(z)):
            return z
    r = abs(complex(p(z)) - w)
    return z if r <= 1e-10 * (1 + abs(w)) else None


def _track(p: MonicPolynomial, z: complex, w_from: complex, w_to: complex,
           crit: np.ndarray, depth: int = 0) -> complex:
    """Follow the root z of p = w_from to a root of p = w_to."""
    sep = _separation(p, z, crit)
    dp = abs(complex(p.derivative(z)))
    if dp > 0 and abs(w_to - w_from) / dp <= 0.2 * sep:
        z_new = _newton(p, z, w_to)
        if z_new is not None and abs(z_new - z) <= 0.4 * sep:
            return z_new
    if depth > 40:
        raise LiftError("continuation step failed")
    mid = 0.5 * (w_from + w_to)
    z_mid = _track(p, z, w_from, mid, crit, depth + 1)
    return _track(p, z_mid, mid, w_to, crit, depth + 1)


def lift_poly(gamma: RCurve, p: MonicPolynomial, start_preimage: complex | None = None,
              hazards: Iterable[complex] = (), eps: float = 1e-12) -> PolyLift:
    """Root-tracking lift of ``gamma`` through ``p``.

    With ``start_preimage`` the lift through that point is returned, together
    with the root of unity xi for which xi * lift is an r-curve.  With
    ``None`` the lift whose tail is asymptotically horizontal to the right is
    found by continuing backward from the far tail.
    """
    crit = p.critical_points()
    cv = p(crit) if crit.size else np.zeros(0, dtype=complex)
    P = list(gamma.points)
    for c in cv:
        for a, b in zip(P[:-1], P[1:]):
            if _segment_distance(c, a, b) < eps:
                raise LiftError("critical value on path")
        if _ray_distance(c, P[-1]) < eps:
            raise LiftError("critical value on path")
    if start_preimage is not None and abs(complex(p(start_preimage)) - P[0]) > 1e-8 * (1 + abs(P[0])):
        raise LiftError("start_preimage is not a preimage of the curve start")

    H = np.array([h for h in hazards if h != gamma.start] + list(cv), dtype=complex)
    samples = _sample_polyline(P, H, math.inf) if len(P) > 1 else [P[0]]
    w_max = max([abs(h) for h in H] + [abs(w) for w in samples] + [1.0])
    Rz = p.cauchy_radius(w_max)
    d = p.degree
    w_stop = 2.0 * (2.0 * Rz) ** d

    def done(w):
        return w.real > 0 and abs(w.imag) < 0.05 * w.real and abs(w) >= w_stop

    samples += _sample_tail(samples[-1], H, done)

    if start_preimage is None:
        roots = p.preimages(samples[-1])
        z = complex(roots[np.argmax(roots.real)])
        z = _newton(p, z, samples[-1]) or z
        lifted = [z]
        for w_from, w_to in zip(samples[:0:-1], samples[-2::-1]):
            z = _track(p, z, w_from, w_to, crit)
            lifted.append(z)
        lifted.reverse()
    else:
        z = _newton(p, complex(start_preimage), P[0]) or complex(start_preimage)
        lifted = [z]
        for w_from, w_to in zip(samples[:-1], samples[1:]):
            z = _track(p, z, w_from, w_to, crit)
            lifted.append(z)
    raw = np.asarray(lifted, dtype=complex)
    j = round(cmath.phase(raw[-1]) * d / TWO_PI) % d
    xi = cmath.exp(-2j * math.pi * j / d) if j else 1.0 + 0j
    xi = complex(*(0.0 if abs(c) < 1e-15 else c for c in (xi.real, xi.imag)))
    rot = raw * xi if j else raw
    clean = [complex(rot[0])]
    for z in rot[1:]:
        if z != clean[-1]:
            clean.append(complex(z))
    return PolyLift(raw, j == 0, xi, RCurve(clean[0], tuple(clean[1:])))


# -- lift bound checks --------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    family: str
    n: int
    m: int
    w_tilde: int
    bound: int
    d: int = 1

    @property
    def ok(self) -> bool:
        return self.w_tilde < self.bound

    def line(self) -> str:
        return f"{self.n} {self.m} {self.w_tilde} {self.bound} {'PASS' if self.ok else 'FAIL'}"


class ConfigurationError(ValueError):
    pass


def _start_index(V: PunctureSet, gamma: RCurve) -> int:
    try:
        return V.index(gamma.start)
    except ValueError:
        raise ConfigurationError("curve start is not in V") from None


def check_lift_bound_exp(V: PunctureSet, Vt: PunctureSet, gamma: RCurve, gamma_t: RCurve) -> BoundReport:
    if 0j not in V.points:
        raise ConfigurationError("V must contain the asymptotic value 0")
    if gamma.start == 0:
        raise ConfigurationError("curve may not start at the asymptotic value")
    if len(Vt) + 1 != len(V):
        raise ConfigurationError("exp must map Vt injectively onto V minus {0}")
    _start_index(V, gamma)
    _start_index(Vt, gamma_t)
    n, m = len(V), len(homotopy_word(V, gamma))
    wt = len(homotopy_word(Vt, gamma_t))
    return BoundReport("exp", n, m, wt, 6 * n * n * (m + 1))


def check_lift_bound_poly(V: PunctureSet, Vt: PunctureSet, gamma: RCurve, gamma_t: RCurve,
                          p: MonicPolynomial) -> BoundReport:
    cv = p.critical_values()
    W = V.array
    if any(np.abs(W - c).min() > 1e-9 * (1 + abs(c)) for c in cv):
        raise ConfigurationError("V must contain the critical values of p")
    if len(Vt) != len(V):
        raise ConfigurationError("p must map Vt bijectively onto V")
    _start_index(V, gamma)
    _start_index(Vt, gamma_t)
    n, m, d = len(V), len(homotopy_word(V, gamma)), p.degree
    wt = len(homotopy_word(Vt, gamma_t))
    return BoundReport("poly", n, m, wt, 6 * d * n * n * (m + 1), d)


def check_lift_bound_composition(V: PunctureSet, Vt: PunctureSet, gamma: RCurve, gamma_t: RCurve,
                                 p: MonicPolynomial) -> BoundReport:
    sing = list(p.critical_values()) + [complex(p(0))]
    W = V.array
    if any(np.abs(W - c).min() > 1e-9 * (1 + abs(c)) for c in sing):
        raise ConfigurationError("V must contain the singular values of p o exp")
    if len(Vt) > len(V):
        raise ConfigurationError("p o exp must be injective on Vt")
    _start_index(V, gamma)
    _start_index(Vt, gamma_t)
    n, m, d = len(V), len(homotopy_word(V, gamma)), p.degree
    wt = len(homotopy_word(Vt, gamma_t))
    return BoundReport("composition", n, m, wt, 42 * d * n ** 4 * (m + 1), d)


# -- random instances -------------------------------------------------------

BOX = 10.0  # punctures in [-BOX, BOX]^2


def _random_points(rng: np.random.Generator, k: int, avoid: Sequence[complex], sep: float = 0.05) -> list[complex]:
    pts: list[complex] = []
    while len(pts) < k:
        z = complex(*rng.uniform(-BOX, BOX, size=2))
        if all(abs(z - q) > sep for q in list(avoid) + pts):
            pts.append(z)
    return pts


def _random_word(rng: np.random.Generator, n: int, max_len: int = 8) -> Word:
    L = int(rng.integers(0, max_len + 1))
    return Word(tuple((int(rng.integers(n)), int(rng.choice((-1, 1)))) for _ in range(L)))


def _random_poly(rng: np.random.Generator, max_degree: int = 5) -> MonicPolynomial:
    d = int(rng.integers(1, max_degree + 1))
    c = rng.uniform(-2, 2, size=d) + 1j * rng.uniform(-2, 2, size=d)
    return MonicPolynomial(tuple(c))


def _dedupe(points: Iterable[complex], tol: float = 1e-9) -> list[complex]:
    out: list[complex] = []
    for z in points:
        if all(abs(z - q) > tol for q in out):
            out.append(complex(z))
    return out


def random_instance_exp(seed: int, index: int) -> BoundReport:
    rng = np.random.default_rng([seed, index, 0])
    k = int(rng.integers(1, 5))
    V = PunctureSet(tuple([0j] + _random_points(rng, k, [0j])))
    s = int(rng.integers(1, len(V)))
    gamma = curve_from_word(V, s, _random_word(rng, len(V)))
    strip = int(rng.integers(-2, 3))
    gt = lift_exp(gamma, 0j, strip, hazards=V.points)
    Vt = [gt.start if i == s else branch(cmath.log(v), int(rng.integers(-2, 3)))
          for i, v in enumerate(V.points) if i != 0]
    return check_lift_bound_exp(V, PunctureSet(tuple(Vt)), gamma, gt)


def random_instance_poly(seed: int, index: int) -> BoundReport:
    rng = np.random.default_rng([seed, index, 1])
    p = _random_poly(rng)
    cv = _dedupe(p.critical_values())
    extra = _random_points(rng, int(rng.integers(1, 4)), cv)
    V = PunctureSet(tuple(cv + extra))
    s = len(cv) + int(rng.integers(len(extra)))
    gamma = curve_from_word(V, s, _random_word(rng, len(V)))
    lift = lift_poly(gamma, p, None, hazards=V.points)
    gt = lift.curve
    Vt = []
    for i, v in enumerate(V.points):
        if i == s:
            Vt.append(gt.start)
        else:
            roots = p.preimages(v)
            Vt.append(complex(roots[int(rng.integers(len(roots)))]))
    return check_lift_bound_poly(V, PunctureSet(tuple(Vt)), gamma, gt, p)


def random_instance_composition(seed: int, index: int) -> BoundReport:
    rng = np.random.default_rng([seed, index, 2])
    p = _random_poly(rng)
    sing = _dedupe(list(p.critical_values()) + [complex(p(0))])
    extra = _random_points(rng, int(rng.integers(1, 4)), sing)
    V = PunctureSet(tuple(sing + extra))
    s = len(sing) + int(rng.integers(len(extra)))
    gamma = curve_from_word(V, s, _random_word(rng, len(V)))
    delta = lift_poly(gamma, p, None, hazards=V.points).curve
    # one p-preimage per non-singular puncture, then one log branch each
    mids = {}
    for i in range(len(sing), len(V)):
        if i == s:
            mids[i] = delta.start
        else:
            roots = p.preimages(V[i])
            mids[i] = complex(roots[int(rng.integers(len(roots)))])
    gt = lift_exp(delta, 0j, int(rng.integers(-2, 3)), hazards=list(mids.values()))
    Vt = [gt.start if i == s else branch(cmath.log(u), int(rng.integers(-2, 3)))
          for i, u in mids.items()]
    return check_lift_bound_composition(V, PunctureSet(tuple(Vt)), gamma, gt, p)


FAMILIES = {
    "exp": random_instance_exp,
    "poly": random_instance_poly,
    "composition": random_instance_composition,
}


def _run_one(args):
    family, seed, index = args
    return FAMILIES[family](seed, index)


def run_batch(family: str, instances: int, seed: int, jobs: int = 1) -> list[BoundReport]:
    """Deterministic per (seed, index); ``jobs > 1`` uses a process pool."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    tasks = [(family, seed, i) for i in range(instances)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_run_one, tasks, chunksize=32))
    return [_run_one(t) for t in tasks]
