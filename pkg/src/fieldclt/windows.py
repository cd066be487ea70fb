"""Axis-aligned integration windows and their lattice approximations.

Windows are restricted to boxes: for a box the volume of the dilated
boundary (the collar ``boundary + r*B^d``) has an exact closed form via the
Steiner formula, so the Van Hove boundary-to-bulk ratio can be computed
without quadrature.  The inner lattice collects the integer unit cubes
fully contained in a window; their union is the core region whose integral
is a plain sum of per-cube contributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Window",
    "LatticeCubeSet",
    "WindowDiagnostics",
    "unit_ball_volume",
    "boundary_collar_volume",
    "vh_ratio",
    "inner_lattice",
    "vh_diagnostics",
    "diagnostics_csv",
]

# Snap tolerance for float coordinates that are meant to be integers
# (e.g. windows like [0.5, 8.5] built from arithmetic on halves).
_GRID_EPS = 1e-9


class WindowError(ValueError):
    """Invalid window geometry."""


@dataclass(frozen=True)
class Window:
    """Axis-aligned closed box ``[lower_i, upper_i]`` in d dimensions."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lower = tuple(float(x) for x in self.lower)
        upper = tuple(float(x) for x in self.upper)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if len(lower) != len(upper):
            raise WindowError("lower and upper must have the same dimension")
        if len(lower) == 0:
            raise WindowError("dimension must be >= 1")
        for lo, up in zip(lower, upper):
            if not (math.isfinite(lo) and math.isfinite(up)):
                raise WindowError("window coordinates must be finite")
            if not lo < up:
                raise WindowError(f"degenerate side [{lo}, {up}]")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def side_lengths(self) -> tuple[float, ...]:
        return tuple(up - lo for lo, up in zip(self.lower, self.upper))

    def volume(self) -> float:
        return float(math.prod(self.side_lengths()))

    def dilate(self, r: float) -> "Window":
        """The box grown by ``r`` on every side (Minkowski sum with r*[-1,1]^d)."""
        return Window(tuple(lo - r for lo in self.lower), tuple(up + r for up in self.upper))

    def contains(self, other: "Window") -> bool:
        return all(a <= b for a, b in zip(self.lower, other.lower)) and all(
            a >= b for a, b in zip(self.upper, other.upper)
        )

    def to_json(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper)}

    @classmethod
    def from_json(cls, obj: dict) -> "Window":
        return cls(tuple(obj["lower"]), tuple(obj["upper"]))


@dataclass(frozen=True)
class LatticeCubeSet:
    """A finite set of anchors ``j`` of unit cubes ``j + [0,1)^d``, j integer."""

    dim: int
    anchors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        anchors = tuple(tuple(int(a) for a in anchor) for anchor in self.anchors)
        object.__setattr__(self, "anchors", anchors)
        if self.dim < 1:
            raise WindowError("dimension must be >= 1")
        for anchor in anchors:
            if len(anchor) != self.dim:
                raise WindowError("anchor dimension mismatch")
        if len(set(anchors)) != len(anchors):
            raise WindowError("anchors must be pairwise distinct")

    def __len__(self) -> int:
        return len(self.anchors)

    def union_volume(self) -> float:
        """Volume of the union of the unit cubes (one per anchor)."""
        return float(len(self.anchors))

    def as_array(self) -> np.ndarray:
        if not self.anchors:
            return np.empty((0, self.dim), dtype=np.int64)
        return np.asarray(self.anchors, dtype=np.int64)

    def issubset(self, other: "LatticeCubeSet") -> bool:
        return set(self.anchors) <= set(other.anchors)


def unit_ball_volume(j: int) -> float:
    """Volume kappa_j of the j-dimensional Euclidean unit ball.

    kappa_j = pi^(j/2) / Gamma(j/2 + 1), evaluated by the exact half-integer
    recursion kappa_j = 2*pi/j * kappa_{j-2} with kappa_0 = 1, kappa_1 = 2.
    """
    if j < 0:
        raise ValueError("dimension must be >= 0")
    if j == 0:
        return 1.0
    if j == 1:
        return 2.0
    return 2.0 * math.pi / j * unit_ball_volume(j - 2)


def _elementary_symmetric(values: Sequence[float]) -> list[float]:
    """e_0..e_n of the given values (DP over the defining product)."""
    e = [1.0] + [0.0] * len(values)
    for i, v in enumerate(values, start=1):
        for k in range(i, 0, -1):
            e[k] += v * e[k - 1]
    return e


def boundary_collar_volume(w: Window, radius: float = 1.0) -> float:
    """Exact volume of ``boundary(w) + radius*B^d`` for a box.

    Outer part from the Steiner formula, sum over j >= 1 of
    kappa_j * radius^j * e_{d-j}(side lengths); inner part is the volume lost
    by eroding every side by ``radius`` (clamped to the whole box once a side
    drops below ``2*radius``).
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    sides = w.side_lengths()
    d = w.dim
    e = _elementary_symmetric(sides)
    outer = sum(unit_ball_volume(j) * radius**j * e[d - j] for j in range(1, d + 1))
    eroded = math.prod(max(s - 2.0 * radius, 0.0) for s in sides)
    inner = w.volume() - eroded
    return outer + inner


def vh_ratio(w: Window) -> float:
    """Boundary-collar-to-volume ratio lambda_d(bd(w) + B^d) / lambda_d(w)."""
    return boundary_collar_volume(w, 1.0) / w.volume()


def _snapped_ceil(x: float) -> int:
    r = round(x)
    if abs(x - r) <= _GRID_EPS:
        return int(r)
    return math.ceil(x)


def _snapped_floor(x: float) -> int:
    r = round(x)
    if abs(x - r) <= _GRID_EPS:
        return int(r)
    return math.floor(x)


def inner_lattice(w: Window) -> LatticeCubeSet:
    """All integer anchors j with j + [0,1)^d contained in the window."""
    los = [_snapped_ceil(lo) for lo in w.lower]
    his = [_snapped_floor(up - 1.0) for up in w.upper]
    if any(hi < lo for lo, hi in zip(los, his)):
        return LatticeCubeSet(w.dim, ())
    ranges = [range(lo, hi + 1) for lo, hi in zip(los, his)]
    grids = np.meshgrid(*[np.asarray(r, dtype=np.int64) for r in ranges], indexing="ij")
    anchors = np.stack([g.ravel() for g in grids], axis=-1)
    return LatticeCubeSet(w.dim, tuple(map(tuple, anchors.tolist())))


@dataclass(frozen=True)
class WindowDiagnostics:
    index: int
    volume: float
    vh_ratio: float
    inner_volume_fraction: float


def vh_diagnostics(windows: Sequence[Window]) -> list[WindowDiagnostics]:
    """Per-window VH ratio and inner-lattice volume fraction for a sequence."""
    if not windows:
        raise WindowError("empty window sequence")
    d = windows[0].dim
    for w in windows:
        if w.dim != d:
            raise WindowError("dimension mismatch across window sequence")
    rows = []
    for i, w in enumerate(windows):
        ratio = vh_ratio(w)
        frac = inner_lattice(w).union_volume() / w.volume()
        if not (math.isfinite(ratio) and math.isfinite(frac)):
            raise WindowError(f"non-finite diagnostics for window {i}")
        rows.append(WindowDiagnostics(i, w.volume(), ratio, frac))
    return rows


def diagnostics_csv(rows: Iterable[WindowDiagnostics]) -> str:
    lines = ["index,volume,vh_ratio,inner_volume_fraction"]
    for r in rows:
        lines.append(f"{r.index},{r.volume!r},{r.vh_ratio!r},{r.inner_volume_fraction!r}")
    return "\n".join(lines) + "\n"
