"""Polygonal r-curves in the punctured plane and their homotopy words.

Conventions
-----------
Each puncture ``w`` carries the cut ``L_w = {w - x : x > 0}``.  Walking along
a curve, an upward crossing of ``L_w`` contributes ``g_w`` and a downward
crossing ``g_w^-1``; the reduced crossing sequence is the homotopy word
relative to the straight reference curve, which passes every puncture on its
line from above.  With this choice a clockwise loop around ``w`` entered and
left from above reads ``g_w``.

Ties are resolved by symbolic perturbation: a point at the height of a
puncture counts as above it, and among punctures of equal height the one with
the larger real part is the lower one.  A horizontal segment through a
puncture therefore passes above it; any other contact raises ``HitPuncture``.

The first segment never crosses the cut of the start puncture.  The word is
therefore invariant under homotopies rel punctures whose initial germ does not
rotate across the leftward direction; such a rotation multiplies the word on
the left by a power of the start generator.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .freegroup import Word


class HitPuncture(ValueError):
    def __init__(self, msg: str = "curve hits puncture"):
        super().__init__(msg)


class DegeneratePosition(ValueError):
    def __init__(self, msg: str = "degenerate position"):
        super().__init__(msg)


def format_complex(z: complex) -> str:
    def num(x: float) -> str:
        return str(int(x)) if float(x).is_integer() and abs(x) < 1e15 else repr(float(x))

    z = complex(z)
    if z.imag == 0:
        return num(z.real)
    if z.real == 0:
        return f"{num(z.imag)}i"
    sign = "+" if z.imag >= 0 else "-"
    return f"{num(z.real)}{sign}{num(abs(z.imag))}i"


_BARE_I = re.compile(r"(?<![\d.])([ij])")


def parse_complex(text: str) -> complex:
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty complex literal")
    s = _BARE_I.sub(r"1\1", s).replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise ValueError(f"bad complex literal {text!r}") from None


@dataclass(frozen=True)
class PunctureSet:
    points: tuple[complex, ...]

    def __post_init__(self):
        pts = tuple(complex(p) for p in self.points)
        if not all(math.isfinite(p.real) and math.isfinite(p.imag) for p in pts):
            raise DegeneratePosition("non-finite puncture")
        if len(set(pts)) != len(pts):
            raise ValueError("punctures must be pairwise distinct")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i: int) -> complex:
        return self.points[i]

    def __iter__(self):
        return iter(self.points)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=complex)

    def index(self, z: complex) -> int:
        try:
            return self.points.index(complex(z))
        except ValueError:
            raise ValueError(f"{z} is not a puncture") from None

    def labels(self) -> dict[int, str]:
        return {i: format_complex(p) for i, p in enumerate(self.points)}

    def min_distance(self) -> float:
        if len(self.points) < 2:
            return math.inf
        a = self.array
        d = np.abs(a[:, None] - a[None, :])
        d[np.diag_indices_from(d)] = np.inf
        return float(d.min())

    def min_height_gap(self) -> float:
        ys = np.unique(self.array.imag)
        return float(np.diff(ys).min()) if len(ys) > 1 else math.inf

    def without(self, i: int) -> "PunctureSet":
        return PunctureSet(self.points[:i] + self.points[i + 1:])


@dataclass(frozen=True)
class RCurve:
    """Polyline start -> vertices[0] -> ... -> vertices[-1], then the
    horizontal ray to the right from the last point."""

    start: complex
    vertices: tuple[complex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "start", complex(self.start))
        object.__setattr__(self, "vertices", tuple(complex(v) for v in self.vertices))
        pts = self.points
        if not np.all(np.isfinite(pts)):
            raise DegeneratePosition("non-finite vertex")
        if len(pts) > 1 and np.any(pts[1:] == pts[:-1]):
            raise DegeneratePosition("repeated consecutive vertex")

    @property
    def points(self) -> np.ndarray:
        return np.asarray((self.start,) + self.vertices, dtype=complex)

    @property
    def tail_height(self) -> float:
        return (self.vertices[-1] if self.vertices else self.start).imag

    @property
    def tail_start(self) -> complex:
        return self.vertices[-1] if self.vertices else self.start

    def __len__(self) -> int:
        return len(self.vertices) + 1

    def to_literal(self) -> str:
        return "; ".join(format_complex(p) for p in self.points) + "; tail"


def parse_curve(text: str) -> RCurve:
    """``"0; 2-1i; 6-1i; tail"``: start, vertices, and the rightward tail."""
    parts = [p.strip() for p in text.split(";") if p.strip()]
    if parts and parts[-1] == "tail":
        parts = parts[:-1]
    if not parts:
        raise ValueError("curve literal needs a start point")
    pts = [parse_complex(p) for p in parts]
    return RCurve(pts[0], tuple(pts[1:]))


@dataclass(frozen=True)
class Crossing:
    segment: int
    param: float
    puncture: int
    sign: int


def crossings(V: PunctureSet, gamma: RCurve) -> list[Crossing]:
    """Ordered signed crossings of ``gamma`` with all cuts ``L_w``."""
    P = gamma.points
    W = V.array
    try:
        s = V.index(gamma.start)
    except ValueError:
        raise ValueError("curve must start at a puncture") from None
    if len(P) < 2 or len(W) == 0:
        return []

    # vertex on a puncture
    hits = P[1:, None] == W[None, :]
    if hits.any():
        raise HitPuncture()

    a, b = P[:-1, None], P[1:, None]
    wy, wx = W.imag[None, :], W.real[None, :]
    above_a = a.imag >= wy
    above_b = b.imag >= wy
    cross = above_a != above_b
    cross[0, s] = False
    dy = b.imag - a.imag
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(cross, (wy - a.imag) / np.where(dy == 0, 1.0, dy), 0.0)
        x = a.real + lam * (b.real - a.real)
    # horizontal segments never cross; a crossing exactly at w is contact
    through = cross & (x == wx)
    if through.any():
        raise HitPuncture()
    _check_passes(P, W, s)
    active = cross & (x < wx)
    seg, idx = np.nonzero(active)
    if seg.size == 0:
        return []
    up = ~above_a[seg, idx]
    signs = np.where(up, 1, -1)
    lams = lam[seg, idx]
    # going down meets the left (higher) puncture first, going up the right
    key = np.where(up, -W.real[idx], W.real[idx])
    order = np.lexsort((key, lams, seg))
    return [Crossing(int(seg[o]), float(lams[o]), int(idx[o]), int(signs[o])) for o in order]


def _check_passes(P: np.ndarray, W: np.ndarray, s: int) -> None:
    """Raise if a non-horizontal segment passes exactly through a puncture."""
    a, b = P[:-1, None], P[1:, None]
    d = b - a
    rel = W[None, :] - a
    cr = d.real * rel.imag - d.imag * rel.real
    dot = d.real * rel.real + d.imag * rel.imag
    inside = (cr == 0) & (dot > 0) & (dot < (d.real ** 2 + d.imag ** 2)) & (d.imag != 0)
    if len(W):
        inside[0, s] = False
    if inside.any():
        raise HitPuncture()


def homotopy_word(V: PunctureSet, gamma: RCurve) -> Word:
    return Word(tuple((c.puncture, c.sign) for c in crossings(V, gamma)))


@dataclass(frozen=True)
class CrossingReport:
    k: int
    length: int
    n: int
    bound: int
    word: Word

    @property
    def ok(self) -> bool:
        return self.length <= self.bound


def word_length_bound_check(V: PunctureSet, gamma: RCurve) -> CrossingReport:
    cs = crossings(V, gamma)
    w = Word(tuple((c.puncture, c.sign) for c in cs))
    k = len(cs)
    return CrossingReport(k, len(w), len(V), (k + 1) * len(V), w)


def _bump_scale(V: PunctureSet) -> tuple[float, float]:
    d = V.min_distance()
    r = 0.25 * d if math.isfinite(d) else 0.5
    r = min(r, 0.5)
    h = min(r, V.min_height_gap() / 3)
    return r, h


def straight_reference(V: PunctureSet, start: int) -> RCurve:
    """Horizontal ray from ``V[start]`` with triangular bumps above every
    puncture on it."""
    v = V[start]
    W = V.array
    on_line = np.nonzero((W.imag == v.imag) & (W.real > v.real))[0]
    if on_line.size == 0:
        return RCurve(v)
    r, h = _bump_scale(V)
    verts = []
    for i in sorted(on_line, key=lambda j: W[j].real):
        w = W[i]
        verts += [w - r, w + 1j * h, w + r]
    return RCurve(v, tuple(verts))


def curve_from_word(V: PunctureSet, start: int, word: Word) -> RCurve:
    """An r-curve from ``V[start]`` with homotopy word ``word``.

    Each letter is realised by a square loop around its puncture, reached
    from the right at a height strictly between puncture levels.
    """
    ref = straight_reference(V, start)
    r, h = _bump_scale(V)
    R = max(p.real for p in V) + 1.0
    pts = list(ref.points)
    y = pts[-1].imag
    if pts[-1].real < R:
        pts.append(complex(R, y))
    for i, e in word:
        w = V[i]
        lane = w.imag + h
        if lane != pts[-1].imag:
            pts.append(complex(R, lane))
        p0 = complex(w.real + r, lane)
        # clockwise: down the right side, up the left side across L_w
        corners = [complex(w.real + r, w.imag - r), complex(w.real - r, w.imag - r),
                   complex(w.real - r, lane)]
        if e == -1:
            corners = [corners[2], corners[1], corners[0]]
        pts += [p0] + corners + [p0, complex(R, lane)]
    clean = [pts[0]]
    for p in pts[1:]:
        if p != clean[-1]:
            clean.append(p)
    return RCurve(clean[0], tuple(clean[1:]))


# -- randomized homotopies ----------------------------------------------------

def _seg_dist(W: np.ndarray, a: complex, b: complex) -> np.ndarray:
    d = b - a
    dd = abs(d) ** 2
    if dd == 0:
        return np.abs(W - a)
    lam = np.clip(((W - a) * np.conj(d)).real / dd, 0.0, 1.0)
    return np.abs(W - (a + lam * d))


def _triangle_clear(W: np.ndarray, a: complex, b: complex, c: complex, margin: float) -> bool:
    """True if no point of W lies in the closed triangle or within margin."""
    if W.size == 0:
        return True
    def side(p, q, z):
        return ((q - p).conjugate() * (z - p)).imag
    s1, s2, s3 = side(a, b, W), side(b, c, W), side(c, a, W)
    inside = ((s1 >= 0) & (s2 >= 0) & (s3 >= 0)) | ((s1 <= 0) & (s2 <= 0) & (s3 <= 0))
    near = np.minimum(np.minimum(_seg_dist(W, a, b), _seg_dist(W, b, c)), _seg_dist(W, c, a)) <= margin
    return not bool((inside | near).any())


def _tail_clear(W: np.ndarray, p: complex, q: complex, margin: float) -> bool:
    """Region swept when the tail start moves from p to q (conservative)."""
    lo, hi = min(p.imag, q.imag) - margin, max(p.imag, q.imag) + margin
    left = min(p.real, q.real) - margin
    return not bool(((W.imag >= lo) & (W.imag <= hi) & (W.real >= left)).any())


def _germ_ok(s: complex, p: complex, q: complex) -> bool:
    a1, a2 = math.atan2((p - s).imag, (p - s).real), math.atan2((q - s).imag, (q - s).real)
    if a1 == math.pi or a2 == math.pi:
        return False
    return abs(a2 - a1) < math.pi


def perturb_homotopic(gamma: RCurve, V: PunctureSet, seed: int, moves: int,
                      margin: float = 1e-6) -> RCurve:
    """Random homotopy rel V: subdivisions, backtracks and vertex slides.

    Every slide is accepted only if the swept triangles (and the swept tail
    region for the last vertex) keep a distance ``margin`` from all
    punctures; the initial germ never rotates across the leftward direction.
    """
    rng = np.random.default_rng(seed)
    W = V.array
    pts = list(gamma.points)
    s = pts[0]
    others = W[W != s]
    scale = max(1.0, float(np.abs(W - s).max()) if W.size else 1.0)

    def valid_point(z: complex) -> bool:
        return bool(np.all(np.abs(W - z) > margin))

    for _ in range(moves):
        kind = rng.integers(3)
        if kind == 0 or len(pts) < 2:
            j = int(rng.integers(len(pts)))
            if j == len(pts) - 1:
                z = pts[j] + float(rng.uniform(0.1, 1.0)) * scale * 0.1
            else:
                lam = float(rng.uniform(0.2, 0.8))
                z = pts[j] + lam * (pts[j + 1] - pts[j])
            if valid_point(z) and z != pts[j] and (j + 1 >= len(pts) or z != pts[j + 1]):
                pts.insert(j + 1, z)
        elif kind == 1:
            j = int(rng.integers(1, len(pts)))
            p = pts[j]
            q = p + complex(*rng.normal(size=2)) * float(rng.uniform(0.05, 1.0)) * scale * 0.2
            if q != p and valid_point(q) and bool(np.all(_seg_dist(W, p, q) > margin)):
                pts[j + 1:j + 1] = [q, p]
        else:
            for _try in range(10):
                j = int(rng.integers(1, len(pts)))
                p = pts[j]
                q = p + complex(*rng.normal(size=2)) * float(rng.uniform(0.02, 1.0)) * scale * 0.2
                if not valid_point(q):
                    continue
                prev = pts[j - 1]
                if q == prev or (j + 1 < len(pts) and q == pts[j + 1]):
                    continue
                if j == 1:
                    if not _germ_ok(s, p, q) or not _triangle_clear(others, prev, p, q, margin):
                        continue
                elif not _triangle_clear(W, prev, p, q, margin):
                    continue
                if j + 1 < len(pts):
                    if not _triangle_clear(W, p, pts[j + 1], q, margin):
                        continue
                elif not _tail_clear(W, p, q, margin):
                    continue
                pts[j] = q
                break
    clean = [pts[0]]
    for p in pts[1:]:
        if p != clean[-1]:
            clean.append(p)
    return RCurve(clean[0], tuple(clean[1:]))
