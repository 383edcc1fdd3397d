"""Independent checks of a parameter kappa: backward ray tracing, a
window-limited forward orbit comparison and a real-axis bisection oracle for
the all-zeros address.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .address import ExternalAddress, SATURATION, potential_orbit
from .lifting import branch

TWO_PI = 2.0 * math.pi
EPS_MACH = 2.220446049250313e-16


def auto_depth(t: float, min_seed: float = 50.0, max_depth: int = 64) -> int:
    """Smallest depth d with F^d(t) >= min_seed."""
    orbit = potential_orbit(t, max_depth)
    for d, v in enumerate(orbit.values):
        if v >= min_seed:
            return d
    raise ValueError("no representable seed level reaches min_seed")


def trace_ray(kappa: complex, addr: ExternalAddress, t: float, depth: int,
              min_seed: float = 30.0, eps: float = 1e-12) -> complex:
    """Ray point R_s(t) of e^z + kappa by ``depth`` pullbacks of the seed
    F^depth(t) + 2 pi i s_depth."""
    if t <= 0:
        raise ValueError("potential must be positive")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    orbit = potential_orbit(t, depth)
    if orbit.is_saturated(depth):
        raise ValueError("seed not representable; reduce t or depth")
    tn = orbit.value(depth)
    if tn < min_seed:
        raise ValueError(f"seed level {tn:g} below {min_seed:g}; increase depth")
    kappa = complex(kappa)
    z = complex(tn, TWO_PI * addr.entry(depth))
    for n in range(depth - 1, -1, -1):
        d = z - kappa
        if abs(d) < eps:
            raise ArithmeticError("pullback hit the asymptotic value")
        z = branch(cmath.log(d), addr.entry(n))
    return z


def verify_parameter(kappa: complex, addr: ExternalAddress, t: float, depth: int,
                     min_seed: float = 30.0) -> float:
    return abs(trace_ray(kappa, addr, t, depth, min_seed) - complex(kappa))


def depth_profile(kappa: complex, addr: ExternalAddress, t: float, depths: Iterable[int],
                  min_seed: float = 30.0) -> list[float]:
    """|trace_ray(d) - trace_ray(d+1)| over consecutive representable depths."""
    pts = [trace_ray(kappa, addr, t, d, min_seed) for d in depths]
    return [abs(a - b) for a, b in zip(pts[:-1], pts[1:])]


def tract_index(z: complex) -> int | None:
    """Strip index round(Im z / 2 pi) once Re z > 2, else None."""
    return round(z.imag / TWO_PI) if z.real > 2 else None


@dataclass(frozen=True)
class ForwardCheck:
    residuals: tuple[float, ...]
    noise: tuple[float, ...]       # propagated error from kappa and rounding
    tracts: tuple[int | None, ...]
    saturated_at: int | None
    note: str

    @property
    def trusted(self) -> int:
        """Number of leading levels whose residual is above the noise."""
        k = 0
        for r, e in zip(self.residuals, self.noise):
            if e >= 0.1 * max(r, 1e-300) and e > 1e-6:
                break
            k += 1
        return k


def forward_orbit_check(kappa: complex, addr: ExternalAddress, t: float, n_max: int,
                        kappa_error: float = 1e-10) -> ForwardCheck:
    """Residuals |g^n(kappa) - F^n(t) - 2 pi i s_n| for g(z) = e^z + kappa.

    The derivative of g^n(kappa) with respect to kappa grows like the
    product of the orbit, so an error ``kappa_error`` is amplified; ``noise``
    carries that estimate and ``trusted`` the usable window.
    """
    kappa = complex(kappa)
    orbit = potential_orbit(t, n_max)
    z, dz = kappa, 1.0
    res, noise, tracts = [], [], []
    saturated = None
    note = ""
    for n in range(n_max + 1):
        if orbit.is_saturated(n):
            saturated, note = n, f"F^{n}(t) exceeds {SATURATION:g}"
            break
        if not (math.isfinite(z.real) and math.isfinite(z.imag)) or abs(z) >= SATURATION:
            saturated, note = n, f"orbit leaves double range at n={n}"
            break
        target = complex(orbit.value(n), TWO_PI * addr.entry(n))
        res.append(abs(z - target))
        noise.append(abs(dz) * kappa_error + EPS_MACH * (abs(z) + abs(target)))
        tracts.append(tract_index(z))
        if n == n_max:
            break
        if z.real > 690:
            saturated, note = n + 1, f"orbit leaves double range at n={n + 1}"
            break
        e = cmath.exp(z)
        dz = abs(e) * abs(dz) + 1.0
        z = e + kappa
    if not res:
        note = note or "immediate overflow"
    return ForwardCheck(tuple(res), tuple(noise), tuple(tracts), saturated, note)


# -- real-axis oracle ------------------------------------------------------------

def _real_orbit_above(kappa: float, n: int, target: float) -> bool:
    x = kappa
    for _ in range(n):
        if x > 709:
            return True
        x = math.exp(x) + kappa
    return x > target


def real_axis_oracle(t: float, lo: float = -10.0, hi: float = 1e3) -> float:
    """Real kappa whose all-zeros ray has potential t (bisection).

    For real kappa the orbit of kappa under e^x + kappa is real and
    increasing in kappa; kappa is bisected to machine precision against
    F^n(t) at the largest representable level n.
    """
    if not t > 0:
        raise ValueError("potential must be positive")
    orbit = potential_orbit(t, 64)
    n = len(orbit.values) - 1
    target = orbit.values[-1]
    if _real_orbit_above(lo, n, target) or not _real_orbit_above(hi, n, target):
        raise ValueError("bracket not found in [-10, 1e3]")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _real_orbit_above(mid, n, target):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def real_potential(kappa: float, min_level: float = 30.0) -> float:
    """Potential of the real parameter kappa: pull the orbit of kappa back
    through log1p from its last representable level above ``min_level``."""
    xs = [float(kappa)]
    while xs[-1] < 709:
        xs.append(math.exp(xs[-1]) + kappa)
        if len(xs) > 200:
            raise ValueError("orbit of kappa does not escape")
    while len(xs) > 1 and xs[-1] >= SATURATION:
        xs.pop()
    n = len(xs) - 1
    if xs[n] < min_level:
        raise ValueError("orbit of kappa does not reach min_level")
    u = xs[n]
    for _ in range(n):
        u = math.log1p(u)
    return u


# -- exports ---------------------------------------------------------------------

def format_potential(t: float) -> str:
    return str(int(t)) if float(t).is_integer() else repr(float(t))


def ray_rows(kappa: complex, addr: ExternalAddress, ts: Sequence[float], depth: int | None = None,
             min_seed: float = 30.0) -> list[tuple[float, complex]]:
    rows = []
    for t in ts:
        d = auto_depth(t) if depth is None else depth
        rows.append((t, trace_ray(kappa, addr, t, d, min_seed)))
    return rows


def ray_csv(rows: Iterable[tuple[float, complex]]) -> str:
    return "".join(f"{format_potential(t)},{z.real!r},{z.imag!r}\n" for t, z in rows)
