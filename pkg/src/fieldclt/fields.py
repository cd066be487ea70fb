"""Stationary random-field generators with closed-form moments.

Three families:

* ``ShotNoiseField`` -- sum of compactly supported kernel translates over a
  homogeneous Poisson process.  Genuinely stationary in the continuum,
  positively associated for nonnegative kernels, and window integrals are
  exact sums of kernel-box overlaps (no discretization error).  Points are
  sampled in the window dilated by the kernel side on *both* sides so every
  translate meeting the window is represented (translates beyond the upper
  face contribute zero but keep the stored region invariant simple).
* ``GaussianGridField`` -- a Gaussian field with a prescribed integrable
  covariance, sampled exactly on a regular grid by circulant embedding.
* ``LatticeMAField`` -- moving average of iid centered Gaussian innovations
  on the integer lattice; covariance is defined at integer lags only.

Replication streams derive from ``SeedSequence(master_seed, spawn_key=(rep,))``,
so parallel and serial runs see identical realizations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy import signal

from .windows import Window

__all__ = [
    "BoxKernel",
    "TriangularKernel",
    "GaussianCovariance",
    "ExponentialCovariance",
    "ShotNoiseField",
    "LatticeMAField",
    "GaussianGridField",
    "FieldModel",
    "ShotNoiseRealization",
    "GridRealization",
    "Realization",
    "replication_rng",
    "mean",
    "covariance",
    "covariance_factors",
    "sample",
    "exact_window_integral",
    "shot_noise_on_grid",
    "grid_axes_covering",
    "model_to_json",
    "model_from_json",
    "EmbeddingError",
    "GridSizeError",
]

# Hard cap on circulant-embedding size (total complex nodes).
MAX_EMBED_POINTS = 1 << 24

# Relative tolerance for negative embedding eigenvalues: anything in
# [-1e-9 * max_eig, 0) is rounding noise and is clipped; worse fails loudly
# (silent clipping would change the covariance the experiments assume).
EMBED_EIG_RTOL = 1e-9

_GRID_EPS = 1e-9


class EmbeddingError(RuntimeError):
    """Circulant embedding produced significantly negative eigenvalues."""


class GridSizeError(RuntimeError):
    """Requested grid exceeds the configured memory cap."""


def replication_rng(master_seed: int, rep: int) -> np.random.Generator:
    """Deterministic per-replication generator, independent across reps."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(rep,)))


# -- kernels ----------------------------------------------------------------


def _tent(u):
    """Canonical tent on [0,1]: peak 1 at 1/2."""
    u = np.asarray(u, dtype=float)
    return np.where((u >= 0) & (u <= 1), 1.0 - np.abs(2.0 * u - 1.0), 0.0)


def _tent_cdf(u):
    """Integral of the canonical tent from 0 to u, clipped to [0,1]."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    lower = u * u
    upper = 0.5 - (1.0 - u) ** 2
    return np.where(u <= 0.5, lower, upper)


def _tent_autocorr(tau):
    """rho(tau) = int T(u) T(u+tau) du for the canonical tent (piecewise cubic)."""
    tau = np.abs(np.asarray(tau, dtype=float))
    out = np.zeros_like(tau)
    far = (tau >= 0.5) & (tau < 1.0)
    out[far] = (2.0 / 3.0) * (1.0 - tau[far]) ** 3
    near = tau < 0.5
    t = tau[near]
    a = 0.5 - t
    big_a = 1.0 - t
    i1 = 4.0 * (a**3 / 3.0 + t * a * a / 2.0)
    i2 = 4.0 * (big_a * (0.25 - a * a) / 2.0 - (0.125 - a**3) / 3.0)
    out[near] = 2.0 * i1 + i2
    return out


@dataclass(frozen=True)
class BoxKernel:
    """phi(t) = height * 1{t in [0, side]^d}."""

    height: float
    side: float

    def __post_init__(self):
        if self.height <= 0 or self.side <= 0:
            raise ValueError("kernel height and side must be positive")

    def integral(self, dim: int) -> float:
        return self.height * self.side**dim

    def autocorrelation(self, t: np.ndarray) -> np.ndarray:
        """int phi(s) phi(s+t) ds, separable in the coordinates of t."""
        t = np.atleast_2d(np.asarray(t, dtype=float))
        per_dim = np.clip(self.side - np.abs(t), 0.0, None)
        return self.height**2 * np.prod(per_dim, axis=-1)

    def factor_1d(self) -> Callable[[np.ndarray], np.ndarray]:
        return lambda u: np.clip(self.side - np.abs(u), 0.0, None)

    def window_overlap(self, points: np.ndarray, w: Window) -> np.ndarray:
        """int_w phi(t - x) dt for each point x (exact box-box overlap)."""
        lo = np.asarray(w.lower)
        up = np.asarray(w.upper)
        seg = np.minimum(up, points + self.side) - np.maximum(lo, points)
        return self.height * np.prod(np.clip(seg, 0.0, None), axis=-1)

    def values_1d(self, offsets: np.ndarray) -> np.ndarray:
        """Kernel factor along one axis at offsets t - x (height applied once)."""
        return ((offsets >= 0) & (offsets <= self.side)).astype(float)


@dataclass(frozen=True)
class TriangularKernel:
    """Product tent on [0, side]^d with peak ``height`` at the center."""

    height: float
    side: float

    def __post_init__(self):
        if self.height <= 0 or self.side <= 0:
            raise ValueError("kernel height and side must be positive")

    def integral(self, dim: int) -> float:
        return self.height * (self.side / 2.0) ** dim

    def autocorrelation(self, t: np.ndarray) -> np.ndarray:
        t = np.atleast_2d(np.asarray(t, dtype=float))
        per_dim = self.side * _tent_autocorr(t / self.side)
        return self.height**2 * np.prod(per_dim, axis=-1)

    def factor_1d(self) -> Callable[[np.ndarray], np.ndarray]:
        return lambda u: self.side * _tent_autocorr(np.asarray(u, dtype=float) / self.side)

    def window_overlap(self, points: np.ndarray, w: Window) -> np.ndarray:
        lo = np.asarray(w.lower)
        up = np.asarray(w.upper)
        hi_arg = (up - points) / self.side
        lo_arg = (lo - points) / self.side
        per_dim = self.side * (_tent_cdf(hi_arg) - _tent_cdf(lo_arg))
        return self.height * np.prod(np.clip(per_dim, 0.0, None), axis=-1)

    def values_1d(self, offsets: np.ndarray) -> np.ndarray:
        return _tent(offsets / self.side)


Kernel = Union[BoxKernel, TriangularKernel]


# -- covariance specs for the Gaussian family --------------------------------


@dataclass(frozen=True)
class GaussianCovariance:
    """C(t) = variance * exp(-||t||^2 / length_scale^2); separable."""

    variance: float = 1.0
    length_scale: float = 1.0

    def __post_init__(self):
        if self.variance <= 0 or self.length_scale <= 0:
            raise ValueError("variance and length scale must be positive")

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.atleast_2d(np.asarray(t, dtype=float))
        sq = np.sum(t * t, axis=-1)
        return self.variance * np.exp(-sq / self.length_scale**2)

    def factors_1d(self, dim: int) -> list[Callable]:
        ell2 = self.length_scale**2
        first = lambda u: self.variance * np.exp(-np.asarray(u, dtype=float) ** 2 / ell2)
        rest = lambda u: np.exp(-np.asarray(u, dtype=float) ** 2 / ell2)
        return [first] + [rest] * (dim - 1)


@dataclass(frozen=True)
class ExponentialCovariance:
    """C(t) = variance * exp(-||t||_2 / length_scale); not separable for d >= 2."""

    variance: float = 1.0
    length_scale: float = 1.0

    def __post_init__(self):
        if self.variance <= 0 or self.length_scale <= 0:
            raise ValueError("variance and length scale must be positive")

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.atleast_2d(np.asarray(t, dtype=float))
        norm = np.sqrt(np.sum(t * t, axis=-1))
        return self.variance * np.exp(-norm / self.length_scale)

    def factors_1d(self, dim: int):
        if dim == 1:
            return [lambda u: self.variance * np.exp(-np.abs(np.asarray(u, dtype=float)) / self.length_scale)]
        return None


CovarianceSpec = Union[GaussianCovariance, ExponentialCovariance]


# -- models -------------------------------------------------------------------


@dataclass(frozen=True)
class ShotNoiseField:
    dim: int
    intensity: float
    kernel: Kernel

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.intensity <= 0:
            raise ValueError("intensity must be positive")


@dataclass(frozen=True, eq=False)
class LatticeMAField:
    """X(j) = sum_k weights[k] * xi(j + k), xi iid N(0, innovation_variance)."""

    dim: int
    weights: np.ndarray
    innovation_variance: float = 1.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if w.ndim != self.dim:
            raise ValueError("weights array must have one axis per dimension")
        if len(set(w.shape)) != 1:
            raise ValueError("weights must cover a cube {0..m}^d")
        if self.innovation_variance <= 0:
            raise ValueError("innovation variance must be positive")

    @property
    def ma_range(self) -> int:
        return self.weights.shape[0] - 1


@dataclass(frozen=True)
class GaussianGridField:
    """Gaussian field with covariance ``covariance`` on a grid of spacing 1/n."""

    dim: int
    covariance_spec: CovarianceSpec
    spacing_denominator: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.spacing_denominator < 1:
            raise ValueError("spacing denominator must be >= 1")

    @property
    def spacing(self) -> float:
        return 1.0 / self.spacing_denominator


FieldModel = Union[ShotNoiseField, LatticeMAField, GaussianGridField]


# -- realizations -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ShotNoiseRealization:
    model: ShotNoiseField
    window: Window
    sample_region: Window
    points: np.ndarray  # (N, d)
    master_seed: int
    rep: int

    def __post_init__(self):
        lo = np.asarray(self.sample_region.lower)
        up = np.asarray(self.sample_region.upper)
        if self.points.size and not (np.all(self.points >= lo) and np.all(self.points <= up)):
            raise ValueError("points must lie inside the sample region")


@dataclass(frozen=True, eq=False)
class GridRealization:
    family: str  # "GaussianGrid" | "LatticeMA" | "transformed"
    window: Window
    origin: tuple[float, ...]  # coordinates of the first node
    spacing: float
    values: np.ndarray
    master_seed: int
    rep: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid values must be finite at every node")

    def axes(self) -> list[np.ndarray]:
        return [
            self.origin[i] + self.spacing * np.arange(self.values.shape[i])
            for i in range(self.values.ndim)
        ]

    def to_csv(self) -> str:
        """Node coordinates and values as ``x1,...,xd,value`` rows (debugging)."""
        d = self.values.ndim
        header = ",".join(f"x{i + 1}" for i in range(d)) + ",value"
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        coords = np.stack([m.ravel() for m in mesh], axis=-1)
        lines = [header]
        for row, v in zip(coords, self.values.ravel()):
            lines.append(",".join(repr(float(c)) for c in row) + f",{float(v)!r}")
        return "\n".join(lines) + "\n"


Realization = Union[ShotNoiseRealization, GridRealization]


# -- analytic moments ---------------------------------------------------------


def mean(model: FieldModel) -> float:
    """Stationary mean E X(0)."""
    if isinstance(model, ShotNoiseField):
        return model.intensity * model.kernel.integral(model.dim)
    # MA innovations and the Gaussian family are centered
    return 0.0


def _as_lag(model: FieldModel, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.ndim == 0:
        t = t.reshape(1)
    if t.shape != (model.dim,):
        raise ValueError(f"lag must have {model.dim} coordinates")
    return t


def covariance(model: FieldModel, t) -> float:
    """Analytic Cov(X(0), X(t)).

    For the lattice MA family the covariance is defined at integer lags only;
    non-integer lags return 0.0 by convention (the field lives on Z^d).
    """
    t = _as_lag(model, t)
    if isinstance(model, ShotNoiseField):
        return float(model.intensity * model.kernel.autocorrelation(t)[0])
    if isinstance(model, GaussianGridField):
        return float(model.covariance_spec(t)[0])
    lags = np.rint(t)
    if np.any(np.abs(t - lags) > _GRID_EPS):
        return 0.0
    w = model.weights
    m = model.ma_range
    slices_a, slices_b = [], []
    for lag in lags.astype(int):
        if abs(lag) > m:
            return 0.0
        k0 = max(0, -lag)
        k1 = (m + 1) - max(0, lag)
        slices_a.append(slice(k0, k1))
        slices_b.append(slice(k0 + lag, k1 + lag))
    return float(model.innovation_variance * np.sum(w[tuple(slices_a)] * w[tuple(slices_b)]))


def covariance_factors(model: FieldModel):
    """1-D factors whose product is the covariance, or None if non-separable.

    Separability lets d-dimensional covariance integrals collapse into
    products of 1-D quadratures.
    """
    if isinstance(model, ShotNoiseField):
        scale = model.intensity * model.kernel.height**2
        base = model.kernel.factor_1d()
        first = lambda u: scale * base(u)
        return [first] + [base] * (model.dim - 1)
    if isinstance(model, GaussianGridField):
        return model.covariance_spec.factors_1d(model.dim)
    return None


# -- sampling -----------------------------------------------------------------


def grid_axes_covering(window: Window, spacing: float) -> list[np.ndarray]:
    """Per-axis node coordinates j*spacing covering the window.

    Nodes are aligned to the absolute lattice (integer multiples of
    ``spacing``), so windows with common geometry share node positions.
    """
    axes = []
    for lo, up in zip(window.lower, window.upper):
        j0 = math.floor(lo / spacing + _GRID_EPS)
        j1 = math.ceil(up / spacing - _GRID_EPS)
        axes.append(spacing * np.arange(j0, j1 + 1))
    return axes


def sample(model: FieldModel, w: Window, seed: int, rep: int) -> Realization:
    """Draw one realization of the model over the window, deterministically.

    The result depends only on (model, w, seed, rep); replications may be
    generated concurrently in any order.
    """
    if w.dim != model.dim:
        raise ValueError("window dimension does not match the model")
    rng = replication_rng(seed, rep)
    if isinstance(model, ShotNoiseField):
        return _sample_shot_noise(model, w, rng, seed, rep)
    if isinstance(model, GaussianGridField):
        return _sample_gaussian_grid(model, w, rng, seed, rep)
    return _sample_lattice_ma(model, w, rng, seed, rep)


def _sample_shot_noise(model, w, rng, seed, rep) -> ShotNoiseRealization:
    region = w.dilate(model.kernel.side)
    n = rng.poisson(model.intensity * region.volume())
    lo = np.asarray(region.lower)
    up = np.asarray(region.upper)
    points = rng.uniform(lo, up, size=(int(n), model.dim))
    return ShotNoiseRealization(model, w, region, points, seed, rep)


def _embedding_sizes(shape: tuple[int, ...], doublings: int) -> tuple[int, ...]:
    sizes = []
    for m in shape:
        target = max(2 * (m - 1), 2) << doublings
        sizes.append(1 << max(1, math.ceil(math.log2(target))))
    return tuple(sizes)


_EIG_CACHE: dict = {}


def _embedding_eigenvalues(spec: CovarianceSpec, dim: int, spacing: float, sizes: tuple[int, ...]) -> np.ndarray:
    key = (spec, dim, spacing, sizes)
    cached = _EIG_CACHE.get(key)
    if cached is not None:
        return cached
    lag_axes = []
    for m_emb in sizes:
        idx = np.arange(m_emb)
        lag_axes.append(spacing * np.minimum(idx, m_emb - idx))
    mesh = np.meshgrid(*lag_axes, indexing="ij")
    lags = np.stack(mesh, axis=-1)
    base = spec(lags.reshape(-1, dim)).reshape(sizes)
    eigs = np.fft.fftn(base).real
    _EIG_CACHE[key] = eigs
    return eigs


def _sample_gaussian_grid(model, w, rng, seed, rep) -> GridRealization:
    axes = grid_axes_covering(w, model.spacing)
    shape = tuple(len(a) for a in axes)
    spec = model.covariance_spec
    eigs = None
    for doublings in range(4):
        sizes = _embedding_sizes(shape, doublings)
        if math.prod(sizes) > MAX_EMBED_POINTS:
            raise GridSizeError(
                f"embedding of size {sizes} exceeds the cap of {MAX_EMBED_POINTS} nodes"
            )
        candidate = _embedding_eigenvalues(spec, model.dim, model.spacing, sizes)
        lam_min = float(candidate.min())
        lam_max = float(candidate.max())
        if lam_min >= -EMBED_EIG_RTOL * lam_max:
            eigs = np.clip(candidate, 0.0, None)
            break
    if eigs is None:
        raise EmbeddingError(
            f"covariance is not nonnegative definite on the embedding: "
            f"min eigenvalue {lam_min:.3e} vs max {lam_max:.3e}"
        )
    total = eigs.size
    amp = np.sqrt(eigs / total)
    noise = rng.standard_normal(eigs.shape) + 1j * rng.standard_normal(eigs.shape)
    field = np.fft.fftn(amp * noise).real
    values = field[tuple(slice(0, m) for m in shape)].copy()
    origin = tuple(float(a[0]) for a in axes)
    return GridRealization("GaussianGrid", w, origin, model.spacing, values, seed, rep)


def _sample_lattice_ma(model, w, rng, seed, rep) -> GridRealization:
    m = model.ma_range
    axes = grid_axes_covering(w, 1.0)
    shape = tuple(len(a) for a in axes)
    innov_shape = tuple(s + m for s in shape)
    innovations = rng.standard_normal(innov_shape) * math.sqrt(model.innovation_variance)
    if m == 0:
        values = model.weights.ravel()[0] * innovations
    else:
        values = signal.correlate(innovations, model.weights, mode="valid", method="direct")
    origin = tuple(float(a[0]) for a in axes)
    return GridRealization("LatticeMA", w, origin, 1.0, values, seed, rep)


# -- exact window integrals and grid evaluation -------------------------------


def exact_window_integral(r: Realization, w: Window) -> float:
    """sum_i int_w phi(t - x_i) dt via closed-form kernel-box overlaps.

    Only shot-noise realizations admit this; the sampling region must cover
    every kernel translate that meets ``w``.
    """
    if not isinstance(r, ShotNoiseRealization):
        raise TypeError("exact window integrals require a shot-noise realization")
    a = r.model.kernel.side
    for lo_r, up_r, lo_w, up_w in zip(r.sample_region.lower, r.sample_region.upper, w.lower, w.upper):
        if lo_r > lo_w - a + _GRID_EPS or up_r < up_w - _GRID_EPS:
            raise ValueError("realization sample region does not cover the window")
    if r.points.shape[0] == 0:
        return 0.0
    return float(np.sum(r.model.kernel.window_overlap(r.points, w)))


def shot_noise_on_grid(r: ShotNoiseRealization, axes: Sequence[np.ndarray]) -> np.ndarray:
    """Field values X(node) on a product grid, by per-point kernel patches."""
    if not isinstance(r, ShotNoiseRealization):
        raise TypeError("grid evaluation of this kind requires a shot-noise realization")
    kernel = r.model.kernel
    a = kernel.side
    shape = tuple(len(ax) for ax in axes)
    values = np.zeros(shape)
    for x in r.points:
        slices = []
        factors = []
        empty = False
        for ax, xi in zip(axes, x):
            i0 = int(np.searchsorted(ax, xi - _GRID_EPS, side="left"))
            i1 = int(np.searchsorted(ax, xi + a + _GRID_EPS, side="right"))
            if i0 >= i1:
                empty = True
                break
            slices.append(slice(i0, i1))
            factors.append(kernel.values_1d(ax[i0:i1] - xi))
        if empty:
            continue
        patch = factors[0]
        for f in factors[1:]:
            patch = patch[..., None] * f
        values[tuple(slices)] += kernel.height * patch
    return values


# -- serialization -------------------------------------------------------------


def model_to_json(model: FieldModel) -> dict:
    if isinstance(model, ShotNoiseField):
        kind = "box" if isinstance(model.kernel, BoxKernel) else "triangular"
        return {
            "family": "ShotNoise",
            "dimension": model.dim,
            "intensity": model.intensity,
            "kernel": {"kind": kind, "height": model.kernel.height, "side": model.kernel.side},
        }
    if isinstance(model, GaussianGridField):
        spec = model.covariance_spec
        kind = "gaussian" if isinstance(spec, GaussianCovariance) else "exponential"
        return {
            "family": "GaussianGrid",
            "dimension": model.dim,
            "covariance": {
                "kind": kind,
                "variance": spec.variance,
                "length_scale": spec.length_scale,
            },
            "spacing_denominator": model.spacing_denominator,
        }
    return {
        "family": "LatticeMA",
        "dimension": model.dim,
        "weights": model.weights.tolist(),
        "innovation_variance": model.innovation_variance,
    }


def model_from_json(obj: dict) -> FieldModel:
    family = obj.get("family")
    if family == "ShotNoise":
        k = obj["kernel"]
        kernel_cls = {"box": BoxKernel, "triangular": TriangularKernel}[k["kind"]]
        return ShotNoiseField(obj["dimension"], obj["intensity"], kernel_cls(k["height"], k["side"]))
    if family == "GaussianGrid":
        c = obj["covariance"]
        spec_cls = {"gaussian": GaussianCovariance, "exponential": ExponentialCovariance}[c["kind"]]
        return GaussianGridField(
            obj["dimension"],
            spec_cls(c.get("variance", 1.0), c.get("length_scale", 1.0)),
            obj["spacing_denominator"],
        )
    if family == "LatticeMA":
        return LatticeMAField(
            obj["dimension"], np.asarray(obj["weights"], dtype=float), obj.get("innovation_variance", 1.0)
        )
    raise ValueError(f"unknown model family {family!r}")
