import numpy as np
import pytest

from fieldclt import BoxKernel, ShotNoiseField, Window


@pytest.fixture
def shot_noise_1d():
    return ShotNoiseField(1, 1.0, BoxKernel(1.0, 1.0))


@pytest.fixture
def shot_noise_2d():
    return ShotNoiseField(2, 1.0, BoxKernel(1.0, 1.0))


def mc_collar_volume(w: Window, radius: float, n: int, seed: int) -> tuple[float, float]:
    """Monte Carlo estimate of lambda(boundary(w) + radius*B) with its SE.

    Uniform sampling in the bounding box w + radius*[-1,1]^d; a point is in
    the collar iff its Euclidean distance to the box boundary is <= radius.
    Independent of the Steiner-formula path it checks.
    """
    rng = np.random.default_rng(seed)
    lo = np.asarray(w.lower) - radius
    up = np.asarray(w.upper) + radius
    box_volume = float(np.prod(up - lo))
    pts = rng.uniform(lo, up, size=(n, w.dim))
    below = np.asarray(w.lower) - pts
    above = pts - np.asarray(w.upper)
    outside = np.maximum(np.maximum(below, above), 0.0)
    dist_outside = np.sqrt(np.sum(outside**2, axis=1))
    inside_margin = np.min(
        np.minimum(pts - np.asarray(w.lower), np.asarray(w.upper) - pts), axis=1
    )
    is_inside = dist_outside == 0.0
    dist_to_boundary = np.where(is_inside, inside_margin, dist_outside)
    hits = dist_to_boundary <= radius
    p = hits.mean()
    volume = p * box_volume
    se = float(np.sqrt(p * (1 - p) / n) * box_volume)
    return float(volume), se
