"""Pointwise transforms applied to field values before integration.

A transform either carries a global Lipschitz constant (identity, scaling,
capping) or is a piecewise-monotone function of bounded variation.  The BV
case is admitted on positively associated base fields only, after its
variation profile h is constructed and the second moment of h(X(0)) is
checked to be finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bvdecomp import Decomposition, PiecewiseMonotoneFn, jordan_decompose, piecewise_from_json

__all__ = [
    "IdentityTransform",
    "ScaleTransform",
    "MinCapTransform",
    "PiecewiseTransform",
    "Transform",
    "transform_from_json",
    "transform_to_json",
]


@dataclass(frozen=True)
class IdentityTransform:
    kind: str = "identity"
    lipschitz: float = 1.0
    is_identity: bool = True

    def __call__(self, x):
        return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class ScaleTransform:
    factor: float
    kind: str = "scale"
    is_identity: bool = False

    @property
    def lipschitz(self) -> float:
        return abs(self.factor)

    def __call__(self, x):
        return self.factor * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class MinCapTransform:
    """x -> min(x, cap); Lipschitz with constant 1, bounded variation."""

    cap: float
    kind: str = "min"
    is_identity: bool = False
    lipschitz: float = 1.0

    def __call__(self, x):
        return np.minimum(np.asarray(x, dtype=float), self.cap)


@dataclass(frozen=True, eq=False)
class PiecewiseTransform:
    """BV transform from a piecewise-monotone function, extended constantly
    outside its breakpoint span."""

    fn: PiecewiseMonotoneFn
    kind: str = "piecewise"
    is_identity: bool = False
    lipschitz: float | None = None
    spec: dict | None = None
    decomposition: Decomposition = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "decomposition", jordan_decompose(self.fn))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.fn.domain
        flat = np.clip(x, lo, hi).ravel()
        return np.asarray([self.fn(float(v)) for v in flat]).reshape(x.shape)

    def variation_profile(self, x):
        """h(X) with the same constant extension as the transform itself."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.fn.domain
        flat = np.clip(x, lo, hi).ravel()
        return np.asarray([self.decomposition.h(float(v)) for v in flat]).reshape(x.shape)


Transform = IdentityTransform | ScaleTransform | MinCapTransform | PiecewiseTransform


def transform_from_json(obj: dict) -> Transform:
    kind = obj.get("kind")
    if kind == "identity":
        return IdentityTransform()
    if kind == "scale":
        return ScaleTransform(float(obj["factor"]))
    if kind == "min":
        return MinCapTransform(float(obj["cap"]))
    if kind == "piecewise":
        t = PiecewiseTransform(piecewise_from_json(obj["function"]))
        object.__setattr__(t, "spec", obj["function"])
        return t
    raise ValueError(f"unknown transform kind {kind!r}")


def transform_to_json(t: Transform) -> dict:
    if isinstance(t, IdentityTransform):
        return {"kind": "identity"}
    if isinstance(t, ScaleTransform):
        return {"kind": "scale", "factor": t.factor}
    if isinstance(t, MinCapTransform):
        return {"kind": "min", "cap": t.cap}
    if isinstance(t, PiecewiseTransform):
        if t.spec is None:
            raise ValueError("piecewise transform built in code has no JSON spec")
        return {"kind": "piecewise", "function": t.spec}
    raise TypeError(f"unknown transform {t!r}")
