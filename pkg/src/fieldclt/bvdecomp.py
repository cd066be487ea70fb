"""Constructive Jordan decomposition of piecewise-monotone functions.

A function of locally bounded variation splits as f = f_plus + f_minus with
f_plus nondecreasing (the running positive variation, anchored so that
f_plus(0) = f(0)) and f_minus = f - f_plus nonincreasing.  The variation
profile h = f_plus - f_minus is nondecreasing and satisfies
h(t2) - h(t1) >= |f(t2) - f(t1)|, which makes f = g o h for a 1-Lipschitz
factor g defined on range(h); jumps of h leave open gaps in the range, and
those gaps are filled affinely (slope +-1), preserving the Lipschitz bound.

Inputs are piecewise monotone with explicit breakpoints: positive and
negative variation are then finite sums of piece movements and jump parts,
so every evaluator below is exact up to rounding.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "MonotonePiece",
    "PiecewiseMonotoneFn",
    "GapFill",
    "Decomposition",
    "jordan_decompose",
    "total_variation",
    "eval_g",
    "piecewise_from_json",
]

_MONOTONE_GRID = 1000
_MONOTONE_TOL = 1e-12


class DecompositionError(ValueError):
    """Invalid piecewise-monotone input."""


@dataclass(frozen=True)
class MonotonePiece:
    """One monotone piece on an open breakpoint interval.

    ``fn`` must be a closed-form evaluator valid on the closed interval; its
    endpoint values are used as the one-sided limits of f there.
    """

    direction: str  # "up" | "down" | "constant"
    fn: Callable[[float], float]

    def __post_init__(self):
        if self.direction not in ("up", "down", "constant"):
            raise DecompositionError(f"unknown direction {self.direction!r}")


class PiecewiseMonotoneFn:
    """Real function given as monotone pieces between breakpoints.

    ``values[i]`` is the function value at breakpoint ``breakpoints[i]``;
    it may differ from the adjacent piece limits (jumps).  Omitted values
    default to the right-piece limit (left-piece limit at the last point).
    """

    def __init__(
        self,
        breakpoints: Sequence[float],
        pieces: Sequence[MonotonePiece],
        values: Sequence[float] | None = None,
    ):
        self.breakpoints = tuple(float(b) for b in breakpoints)
        self.pieces = tuple(pieces)
        if len(self.breakpoints) < 2:
            raise DecompositionError("need at least two breakpoints")
        if any(b1 >= b2 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise DecompositionError("breakpoints must be strictly increasing")
        if len(self.pieces) != len(self.breakpoints) - 1:
            raise DecompositionError("need exactly one piece per breakpoint interval")
        if values is None:
            vals = [self.pieces[0].fn(self.breakpoints[0])]
            for i in range(1, len(self.breakpoints)):
                vals.append(self.pieces[min(i, len(self.pieces) - 1)].fn(self.breakpoints[i]))
            values = vals
        self.values = tuple(float(v) for v in values)
        if len(self.values) != len(self.breakpoints):
            raise DecompositionError("need one value per breakpoint")
        self._validate()

    def _validate(self) -> None:
        for v in self.values:
            if not math.isfinite(v):
                raise DecompositionError("non-finite breakpoint value")
        for i, piece in enumerate(self.pieces):
            lo, hi = self.breakpoints[i], self.breakpoints[i + 1]
            grid = np.linspace(lo, hi, _MONOTONE_GRID)
            vals = np.asarray([piece.fn(float(x)) for x in grid])
            if not np.all(np.isfinite(vals)):
                raise DecompositionError(f"piece {i} is not finite on [{lo}, {hi}]")
            scale = max(1.0, float(np.max(np.abs(vals))))
            diffs = np.diff(vals)
            if piece.direction == "up" and np.any(diffs < -_MONOTONE_TOL * scale):
                raise DecompositionError(f"piece {i} declared up but decreases")
            if piece.direction == "down" and np.any(diffs > _MONOTONE_TOL * scale):
                raise DecompositionError(f"piece {i} declared down but increases")
            if piece.direction == "constant" and np.any(np.abs(diffs) > _MONOTONE_TOL * scale):
                raise DecompositionError(f"piece {i} declared constant but varies")

    @property
    def domain(self) -> tuple[float, float]:
        return self.breakpoints[0], self.breakpoints[-1]

    def piece_index(self, x: float) -> int:
        """Index of the piece whose closed interval contains x (left-biased)."""
        i = bisect.bisect_right(self.breakpoints, x) - 1
        return min(max(i, 0), len(self.pieces) - 1)

    def __call__(self, x: float) -> float:
        b = self.breakpoints
        if x < b[0] or x > b[-1]:
            raise DecompositionError(f"{x} outside domain [{b[0]}, {b[-1]}]")
        i = bisect.bisect_left(b, x)
        if i < len(b) and b[i] == x:
            return self.values[i]
        return float(self.pieces[self.piece_index(x)].fn(x))

    def left_limit(self, i: int) -> float:
        """Limit of f from below at breakpoint i (i >= 1)."""
        return float(self.pieces[i - 1].fn(self.breakpoints[i]))

    def right_limit(self, i: int) -> float:
        """Limit of f from above at breakpoint i (i <= k-1)."""
        return float(self.pieces[i].fn(self.breakpoints[i]))


def _piece_rise_fall(piece: MonotonePiece, lo: float, hi: float) -> tuple[float, float]:
    """(upward, downward) movement of a monotone piece across [lo, hi]."""
    move = float(piece.fn(hi)) - float(piece.fn(lo))
    if piece.direction == "up":
        return max(move, 0.0), 0.0
    if piece.direction == "down":
        return 0.0, max(-move, 0.0)
    return 0.0, 0.0


class _VariationTables:
    """Cumulative positive/negative variation along the breakpoint walk.

    ``at[i]`` holds the variation accumulated on [b_0, b_i] including the
    jump into b_i (left limit -> value) but not the jump out; ``after[i]``
    adds the outgoing jump (value -> right limit).  With these conventions
    the variation of f over (x, y] is the difference of the "at" functions,
    so the profile h and the interval variation share one data structure.
    """

    def __init__(self, fn: PiecewiseMonotoneFn):
        self.fn = fn
        k = len(fn.pieces)
        self.pos_at = [0.0] * (k + 1)
        self.neg_at = [0.0] * (k + 1)
        self.pos_after = [0.0] * (k + 1)
        self.neg_after = [0.0] * (k + 1)
        for i in range(k + 1):
            if i > 0:
                left = fn.left_limit(i)
                jump = fn.values[i] - left
                rise, fall = self.pos_after[i - 1], self.neg_after[i - 1]
                prise, pfall = _piece_rise_fall(
                    fn.pieces[i - 1], fn.breakpoints[i - 1], fn.breakpoints[i]
                )
                self.pos_at[i] = rise + prise + max(jump, 0.0)
                self.neg_at[i] = fall + pfall + max(-jump, 0.0)
            if i < k:
                out = fn.right_limit(i) - fn.values[i]
                self.pos_after[i] = self.pos_at[i] + max(out, 0.0)
                self.neg_after[i] = self.neg_at[i] + max(-out, 0.0)
            else:
                self.pos_after[i] = self.pos_at[i]
                self.neg_after[i] = self.neg_at[i]

    def pos(self, x: float) -> float:
        """Positive variation accumulated at x (jumps strictly before or into x)."""
        b = self.fn.breakpoints
        i = bisect.bisect_left(b, x)
        if i < len(b) and b[i] == x:
            return self.pos_at[i]
        j = self.fn.piece_index(x)
        rise, _ = _piece_rise_fall(self.fn.pieces[j], b[j], x)
        return self.pos_after[j] + rise

    def neg(self, x: float) -> float:
        b = self.fn.breakpoints
        i = bisect.bisect_left(b, x)
        if i < len(b) and b[i] == x:
            return self.neg_at[i]
        j = self.fn.piece_index(x)
        _, fall = _piece_rise_fall(self.fn.pieces[j], b[j], x)
        return self.neg_after[j] + fall

    def total(self, x: float) -> float:
        return self.pos(x) + self.neg(x)


@dataclass(frozen=True)
class GapFill:
    """Open gap (lower, upper) in range(h), filled affinely between g values."""

    lower: float
    upper: float
    g_lower: float
    g_upper: float


class Decomposition:
    """Evaluators f_plus, f_minus, h and the 1-Lipschitz factor g."""

    def __init__(self, fn: PiecewiseMonotoneFn):
        lo, hi = fn.domain
        if not (lo <= 0.0 <= hi):
            raise DecompositionError("domain must contain 0 (anchor of f_plus)")
        self.fn = fn
        self._tables = _VariationTables(fn)
        self._pos0 = self._tables.pos(0.0)
        self._f0 = fn(0.0)
        self._build_g_nodes()

    # -- the three monotone evaluators ------------------------------------

    def f_plus(self, x: float) -> float:
        """Nondecreasing part: f(0) plus signed positive variation from 0."""
        return self._f0 + self._tables.pos(x) - self._pos0

    def f_minus(self, x: float) -> float:
        """Nonincreasing part, f - f_plus."""
        return self.fn(x) - self.f_plus(x)

    def h(self, x: float) -> float:
        """Variation profile f_plus - f_minus = 2*f_plus - f, nondecreasing."""
        return 2.0 * self.f_plus(x) - self.fn(x)

    # -- the Lipschitz factor ----------------------------------------------

    def _build_g_nodes(self) -> None:
        # Walk breakpoints and piece endpoints, recording (h, f) pairs.  On a
        # monotone piece h moves exactly with |f|, so g is affine with slope
        # +-1 between consecutive nodes and linear interpolation through the
        # nodes reproduces g exactly; jump gaps get their affine fill the
        # same way.
        fn = self.fn
        nodes: list[tuple[float, float]] = []
        gaps: list[GapFill] = []
        k = len(fn.pieces)
        for i in range(k + 1):
            h_at = self._h_from_tables(self._tables.pos_at[i], self._tables.neg_at[i])
            if i > 0:
                left = fn.left_limit(i)
                h_before = h_at - abs(fn.values[i] - left)
                nodes.append((h_before, left))
                if h_at > h_before:
                    gaps.append(GapFill(h_before, h_at, left, fn.values[i]))
            nodes.append((h_at, fn.values[i]))
            if i < k:
                right = fn.right_limit(i)
                h_after = self._h_from_tables(self._tables.pos_after[i], self._tables.neg_after[i])
                nodes.append((h_after, right))
                if h_after > h_at:
                    gaps.append(GapFill(h_at, h_after, fn.values[i], right))
        xs: list[float] = []
        ys: list[float] = []
        for hx, gy in nodes:
            if xs and hx <= xs[-1] + 1e-14 * max(1.0, abs(xs[-1])):
                # h stalled: f must be constant there, keep the first node
                continue
            xs.append(hx)
            ys.append(gy)
        self._g_x = np.asarray(xs)
        self._g_y = np.asarray(ys)
        self.gaps = tuple(g for g in gaps if g.upper - g.lower > 1e-14)

    def _h_from_tables(self, pos: float, neg: float) -> float:
        # h(x) = f(0) + (Pa(x) - Pa(0)) + (Na(x) - Na(0)); the constant parts
        # are folded so that h(0) = f(0), matching f_plus(0) = f(0), f_minus(0) = 0.
        neg0 = self._tables.neg(0.0)
        return self._f0 + (pos - self._pos0) + (neg - neg0)

    def g(self, x):
        """1-Lipschitz factor with affine gap fill, constant outside range(h)."""
        return np.interp(x, self._g_x, self._g_y)

    def g_breakpoints(self) -> np.ndarray:
        return self._g_x.copy()


def jordan_decompose(f: PiecewiseMonotoneFn, domain: tuple[float, float] | None = None) -> Decomposition:
    """Decompose f into f_plus, f_minus, h and the Lipschitz-1 factor g.

    ``domain`` defaults to the breakpoint span; it must contain 0, where
    f_plus is anchored to f(0).
    """
    if domain is not None:
        lo, hi = f.domain
        if domain[0] < lo - 1e-12 or domain[1] > hi + 1e-12:
            raise DecompositionError("requested domain exceeds the breakpoint span")
        if not (domain[0] <= 0.0 <= domain[1]):
            raise DecompositionError("domain must contain 0")
    return Decomposition(f)


def total_variation(f: PiecewiseMonotoneFn, a: float, b: float) -> float:
    """Total variation of f over (a, b], jumps at a counted outgoing only.

    Equals h(b) - h(a) for the decomposition's profile h.
    """
    lo, hi = f.domain
    if not (lo <= a < b <= hi):
        raise DecompositionError(f"invalid interval [{a}, {b}] within [{lo}, {hi}]")
    tables = _VariationTables(f)
    return tables.total(b) - tables.total(a)


def eval_g(dec: Decomposition, x: float) -> float:
    """The factor g at x, affine in gaps, constant beyond the range hull."""
    return float(dec.g(x))


# -- JSON piece specs (polynomial pieces only) ----------------------------


def _poly_eval(coeffs: Sequence[float]) -> Callable[[float], float]:
    c = [float(v) for v in coeffs]

    def fn(x: float) -> float:
        acc = 0.0
        for coeff in reversed(c):
            acc = acc * x + coeff
        return acc

    return fn


def piecewise_from_json(obj: dict) -> PiecewiseMonotoneFn:
    """Build a piecewise-monotone function from a JSON spec.

    Expected shape::

        {"breakpoints": [-2, 0, 2],
         "pieces": [{"direction": "down", "poly": [0, -1]},
                    {"direction": "up", "poly": [0, 1]}],
         "values": [2, 0, 2]}        # optional

    ``poly`` lists coefficients in ascending order (a0 + a1*x + ...).
    """
    pieces = [
        MonotonePiece(p["direction"], _poly_eval(p["poly"])) for p in obj["pieces"]
    ]
    return PiecewiseMonotoneFn(obj["breakpoints"], pieces, obj.get("values"))
