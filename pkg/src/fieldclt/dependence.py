"""Weak-dependence coefficient algebra.

A dependence sequence is a monotone nonincreasing map r -> theta_r >= 0 with
theta_r -> 0; covariances of bounded Lipschitz functionals over index sets at
distance >= r are controlled by min(#I,#J) * Lip(f) * Lip(g) * theta_r (times
a lattice-density factor for fields sampled on a grid of spacing 1/Delta).
This module provides the sequence transformations used downstream, the
closed-form sequence obtained from a polynomially decaying covariance, and an
exact shell-sum oracle for that bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

__all__ = [
    "ThetaSequence",
    "LipschitzSpec",
    "psi",
    "lip_transform_theta",
    "shift_theta",
    "qa_to_bl_theta",
    "brute_force_tail_sum",
    "CutoffTooSmallError",
]

# Relative tail tolerance for the truncated shell sum (integral-test bound).
TAIL_RTOL = 1e-6

# ceil(r*delta) must not round 4.0-stored-as-3.9999999997 up a shell
_SHELL_EPS = 1e-9


class CutoffTooSmallError(ValueError):
    """Truncated shell sum would miss more than the allowed relative tail."""


@dataclass(frozen=True)
class LipschitzSpec:
    """Global Lipschitz constant (l1 metric), optional coordinate-wise ones."""

    lip: float
    coordinate_lips: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.lip < 0:
            raise ValueError("Lipschitz constant must be nonnegative")
        if self.coordinate_lips is not None:
            if any(c < 0 for c in self.coordinate_lips):
                raise ValueError("coordinate Lipschitz constants must be nonnegative")


@dataclass(frozen=True)
class ThetaSequence:
    """Nonnegative, monotone nonincreasing sequence r -> theta_r (integer r >= 1)."""

    kind: str
    _eval: Callable[[int], float]
    params: dict = field(default_factory=dict)

    def __call__(self, r: int) -> float:
        if int(r) != r or r < 1:
            raise ValueError("index r must be an integer >= 1")
        return float(self._eval(int(r)))

    def values(self, r_max: int) -> np.ndarray:
        return np.asarray([self(r) for r in range(1, r_max + 1)])

    def validate(self, r_max: int = 1000) -> None:
        """Check nonnegativity and monotonicity on r = 1..r_max."""
        vals = self.values(r_max)
        if np.any(vals < 0):
            raise ValueError(f"theta sequence ({self.kind}) takes negative values")
        if np.any(np.diff(vals) > 1e-12 * max(1.0, float(vals[0]))):
            raise ValueError(f"theta sequence ({self.kind}) is not nonincreasing")

    @classmethod
    def from_function(cls, fn: Callable[[int], float], kind: str = "custom", **params) -> "ThetaSequence":
        return cls(kind, fn, dict(params))

    @classmethod
    def tabulated(cls, values: Sequence[float]) -> "ThetaSequence":
        """Sequence from a table; indices beyond the table clamp to the last entry."""
        table = tuple(float(v) for v in values)
        if not table:
            raise ValueError("empty table")
        return cls("tabulated", lambda r: table[min(r, len(table)) - 1], {"length": len(table)})


def psi(n1: int, n2: int, lip_f: float, lip_g: float) -> float:
    """min(n1, n2) * Lip(f) * Lip(g), the functional controlling covariance bounds."""
    if n1 < 1 or n2 < 1:
        raise ValueError("set sizes must be >= 1")
    if lip_f < 0 or lip_g < 0:
        raise ValueError("Lipschitz constants must be nonnegative")
    return float(min(n1, n2)) * lip_f * lip_g


def lip_transform_theta(theta: ThetaSequence, lip: float) -> ThetaSequence:
    """Sequence for the image field under a Lipschitz map: r -> lip^2 * theta_r."""
    if lip < 0:
        raise ValueError("Lipschitz constant must be nonnegative")
    factor = lip * lip
    return ThetaSequence("scaled", lambda r: factor * theta(r), {"base": theta.kind, "lip": lip})


def shift_theta(theta: ThetaSequence, d: int) -> ThetaSequence:
    """Index-shifted sequence r -> theta_{r-d}, clamped to theta_1 for r <= d.

    The shift arises when unit-cube block averages of a continuum field are
    compared at integer distance r: the underlying sample points are only
    guaranteed to be r - d apart in l1 distance.  Indices r <= d have no
    defined value and are clamped to theta_1, the weakest monotone extension.
    """
    if int(d) != d or d < 1:
        raise ValueError("shift d must be an integer >= 1")
    d = int(d)
    return ThetaSequence("shifted", lambda r: theta(r - d) if r > d else theta(1), {"base": theta.kind, "d": d})


def _shell_coefficients(d: int, eps: float) -> list[tuple[float, float]]:
    """(coefficient, exponent p) pairs of the shell-count expansion.

    (2s+1)^d - (2s-1)^d = sum_{i=0}^{d-1} C(d,i) * (1 + (-1)^(d-i-1)) * (2s)^i,
    so each term of the shell sum is coeff * s^(-p) with p = d + eps - i > 1.
    """
    out = []
    for i in range(d):
        parity = 1 + (-1) ** (d - i - 1)
        if parity == 0:
            continue
        coeff = math.comb(d, i) * parity * 2.0**i
        out.append((coeff, d + eps - i))
    return out


def qa_to_bl_theta(c: float, eps: float, d: int, s: int, varmax: float) -> ThetaSequence:
    """Closed-form dependence sequence from covariance decay c * ||t||_inf^(-d-eps).

    For r > 1:
        theta_r = c * s^2 * sum_{i=0}^{d-1} C(d,i) * (1 + (-1)^(d-i-1)) * 2^i
                  * (r-1)^(-d-eps+i+1) / (d+eps-i-1).
    For r = 1 the bound involves the lattice-density factor 3^d / Delta^d,
    which must not leak into theta; the Delta-uniform majorant (valid for all
    Delta > 1) is used:
        theta_1 = 3^d * varmax + theta_2.
    """
    if c <= 0:
        raise ValueError("c must be positive")
    if eps <= 0:
        raise ValueError("eps must be positive (the tail sum diverges otherwise)")
    if int(d) != d or d < 1:
        raise ValueError("d must be an integer >= 1")
    if int(s) != s or s < 1:
        raise ValueError("s must be an integer >= 1")
    if varmax < 0:
        raise ValueError("varmax must be nonnegative")
    d, s = int(d), int(s)
    terms = _shell_coefficients(d, eps)

    def tail(r: int) -> float:
        return c * s * s * sum(coeff * (r - 1.0) ** (1.0 - p) / (p - 1.0) for coeff, p in terms)

    def evaluate(r: int) -> float:
        if r == 1:
            return 3.0**d * varmax + tail(2)
        return tail(r)

    return ThetaSequence(
        "closed-form", evaluate, {"c": c, "eps": eps, "d": d, "s": s, "varmax": varmax}
    )


def _power_sum(p: float, first: int, last: int) -> float:
    """sum_{s=first}^{last} s^(-p), exact via Hurwitz-zeta differences."""
    return float(special.zeta(p, first) - special.zeta(p, last + 1))


def brute_force_tail_sum(r: float, delta: float, d: int, eps: float, cutoff: int) -> float:
    """Exact truncated lattice-tail sum over sup-norm shells.

    Returns sum_{s = ceil(r*delta)}^{cutoff} (s/delta)^(-d-eps) * ((2s+1)^d - (2s-1)^d),
    the number-of-points-times-decay sum that the closed form of
    ``qa_to_bl_theta`` dominates (after multiplying the latter by delta^d).

    The shell count expands by the binomial theorem into pure power sums,
    which are evaluated as Hurwitz-zeta differences; this is the same value
    as the term-by-term sum but works for the very large cutoffs the relative
    tail tolerance demands when eps is small.  Raises ``CutoffTooSmallError``
    when the integral-test bound on the omitted tail exceeds 1e-6 of the sum.
    """
    if r <= 1:
        raise ValueError("r must exceed 1")
    if delta <= 1:
        raise ValueError("delta must exceed 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if int(d) != d or d < 1:
        raise ValueError("d must be an integer >= 1")
    d = int(d)
    first = math.ceil(r * delta - _SHELL_EPS)
    cutoff = int(cutoff)
    if first > cutoff:
        raise CutoffTooSmallError(f"first shell {first} exceeds cutoff {cutoff}")
    scale = delta ** (d + eps)
    total = 0.0
    tail_bound = 0.0
    for coeff, p in _shell_coefficients(d, eps):
        total += scale * coeff * _power_sum(p, first, cutoff)
        # integral test: sum_{s > cutoff} s^-p <= cutoff^(1-p) / (p-1)
        tail_bound += scale * coeff * cutoff ** (1.0 - p) / (p - 1.0)
    if tail_bound >= TAIL_RTOL * total:
        raise CutoffTooSmallError(
            f"tail bound {tail_bound:.3e} exceeds {TAIL_RTOL:.0e} of partial sum {total:.3e}"
        )
    return total


def _direct_shell_sum(r: float, delta: float, d: int, eps: float, cutoff: int) -> float:
    """Literal term-by-term shell sum; cross-check for moderate cutoffs."""
    first = math.ceil(r * delta - _SHELL_EPS)
    s = np.arange(first, cutoff + 1, dtype=float)
    counts = (2 * s + 1) ** d - (2 * s - 1) ** d
    return float(np.sum((s / delta) ** (-(d + eps)) * counts))
