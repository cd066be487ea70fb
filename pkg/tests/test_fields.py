import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate

from fieldclt.fields import (
    BoxKernel,
    EmbeddingError,
    ExponentialCovariance,
    GaussianCovariance,
    GaussianGridField,
    GridSizeError,
    LatticeMAField,
    ShotNoiseField,
    ShotNoiseRealization,
    TriangularKernel,
    covariance,
    exact_window_integral,
    grid_axes_covering,
    mean,
    model_from_json,
    model_to_json,
    sample,
    shot_noise_on_grid,
)
from fieldclt.harness import _pointwise_samples_shot_noise
from fieldclt.windows import Window


def pointwise_values(model, nodes, n_reps, seed):
    chunks = list(_pointwise_samples_shot_noise(model, np.asarray(nodes, dtype=float), n_reps, seed))
    return np.vstack(chunks)


# -- means ---------------------------------------------------------------------


def test_mean_examples(shot_noise_1d):
    assert mean(shot_noise_1d) == 1.0
    assert mean(LatticeMAField(1, np.array([0.3, -2.0]))) == 0.0
    assert mean(ShotNoiseField(2, 2.0, BoxKernel(0.5, 1.0))) == 1.0


def test_mean_monte_carlo_oracle(shot_noise_1d):
    vals = pointwise_values(shot_noise_1d, [0.0], 10**5, seed=4)
    se = vals.std(ddof=1) / np.sqrt(len(vals))
    assert abs(vals.mean() - 1.0) <= 3.0 * se


def test_triangular_mean():
    model = ShotNoiseField(1, 2.0, TriangularKernel(1.0, 1.0))
    assert_allclose(mean(model), 1.0, rtol=1e-15)  # lambda * h * (a/2)^d


# -- covariances -----------------------------------------------------------------


def test_covariance_examples(shot_noise_1d):
    assert_allclose(covariance(shot_noise_1d, 0.5), 0.5, rtol=1e-15)
    assert covariance(shot_noise_1d, 2.0) == 0.0
    gauss = GaussianGridField(1, GaussianCovariance(1.0, 1.0), 8)
    assert_allclose(covariance(gauss, 0.0), 1.0, rtol=1e-15)


@pytest.mark.parametrize(
    "kernel", [BoxKernel(1.0, 1.0), BoxKernel(0.5, 2.0), TriangularKernel(1.3, 1.5)]
)
def test_covariance_matches_quadrature(kernel):
    model = ShotNoiseField(1, 0.7, kernel)

    def phi(u):
        return kernel.height * kernel.values_1d(np.asarray([u]))[0]

    for t in (0.0, 0.25, 0.6, 1.1, 1.9):
        kinks = sorted(
            p for p in {kernel.side - t, kernel.side / 2.0, kernel.side / 2.0 - t} if 0 < p < kernel.side
        )
        expected = 0.7 * integrate.quad(
            lambda u: phi(u) * phi(u + t), 0.0, kernel.side, points=kinks or None, limit=200
        )[0]
        assert_allclose(covariance(model, t), expected, atol=1e-12)


def test_covariance_symmetry():
    models = [
        ShotNoiseField(2, 1.5, BoxKernel(1.0, 1.0)),
        ShotNoiseField(2, 1.0, TriangularKernel(1.0, 2.0)),
        GaussianGridField(2, ExponentialCovariance(2.0, 1.5), 4),
    ]
    rng = np.random.default_rng(8)
    for model in models:
        for _ in range(20):
            t = rng.uniform(-2.0, 2.0, size=2)
            assert_allclose(covariance(model, t), covariance(model, -t), rtol=1e-12)


@pytest.mark.parametrize(
    "model",
    [
        ShotNoiseField(1, 1.0, BoxKernel(1.0, 1.0)),
        ShotNoiseField(1, 2.0, TriangularKernel(1.0, 1.0)),
        GaussianGridField(1, GaussianCovariance(1.0, 1.0), 8),
        GaussianGridField(1, ExponentialCovariance(1.0, 2.0), 8),
    ],
)
def test_covariance_positive_semidefinite_spot_check(model):
    rng = np.random.default_rng(21)
    pts = rng.uniform(-3.0, 3.0, size=12)
    gram = np.empty((12, 12))
    for i in range(12):
        for j in range(12):
            gram[i, j] = covariance(model, pts[i] - pts[j])
    assert np.linalg.eigvalsh(gram).min() >= -1e-8


def test_lattice_ma_covariance():
    model = LatticeMAField(1, np.array([1.0, 0.5]), innovation_variance=2.0)
    assert_allclose(covariance(model, 0.0), 2.0 * 1.25, rtol=1e-15)
    assert_allclose(covariance(model, 1.0), 2.0 * 0.5, rtol=1e-15)
    assert_allclose(covariance(model, -1.0), 2.0 * 0.5, rtol=1e-15)
    assert covariance(model, 2.0) == 0.0
    assert covariance(model, 0.5) == 0.0  # non-integer lags are not modeled


def test_lattice_ma_covariance_2d():
    w = np.array([[1.0, 0.0], [0.5, 0.25]])
    model = LatticeMAField(2, w)
    # direct autocorrelation at lag (1, 0)
    expected = float(np.sum(w[:-1, :] * w[1:, :]))
    assert_allclose(covariance(model, (1.0, 0.0)), expected, rtol=1e-14)


# -- sampling --------------------------------------------------------------------


def test_shot_noise_sample_region_and_count(shot_noise_1d):
    w = Window((0.0,), (100.0,))
    counts = []
    for seed in range(100):
        r = sample(shot_noise_1d, w, seed, 0)
        assert r.sample_region.lower == (-1.0,)
        assert r.sample_region.upper == (101.0,)
        assert np.all(r.points >= -1.0) and np.all(r.points <= 101.0)
        counts.append(len(r.points))
    # dilated length 102; empirical mean within 3 SE of the Poisson mean
    se = np.sqrt(102.0 / 100.0)
    assert abs(np.mean(counts) - 102.0) <= 3.0 * se


def test_sample_reproducible(shot_noise_1d):
    w = Window((0.0,), (50.0,))
    a = sample(shot_noise_1d, w, 9, 3)
    b = sample(shot_noise_1d, w, 9, 3)
    assert np.array_equal(a.points, b.points)
    c = sample(shot_noise_1d, w, 9, 4)
    assert not np.array_equal(a.points, c.points)


def test_gaussian_grid_sample_variance():
    model = GaussianGridField(1, GaussianCovariance(1.0, 1.0), 8)
    w = Window((0.0,), (8.0,))
    vals = np.array([sample(model, w, 77, rep).values[32] for rep in range(10_000)])
    assert abs(vals.var(ddof=1) - 1.0) <= 0.05


def test_gaussian_grid_reproducible():
    model = GaussianGridField(2, GaussianCovariance(1.0, 1.0), 4)
    w = Window((0.0, 0.0), (4.0, 4.0))
    a = sample(model, w, 5, 1)
    b = sample(model, w, 5, 1)
    assert np.array_equal(a.values, b.values)
    assert a.values.shape == (17, 17)


def test_gaussian_grid_empirical_covariance():
    model = GaussianGridField(1, GaussianCovariance(1.0, 1.0), 4)
    w = Window((0.0,), (4.0,))
    vals = np.stack([sample(model, w, 31, rep).values for rep in range(4000)])
    # covariance between node 0 and node at lag 1 (4 spacings)
    emp = np.cov(vals[:, 4], vals[:, 8])[0, 1]
    assert abs(emp - covariance(model, 1.0)) <= 3.0 * 0.02


def test_lattice_ma_white_noise():
    model = LatticeMAField(1, np.array([1.0]))
    r = sample(model, Window((0.0,), (9999.0,)), 5, 0)
    v = r.values
    assert abs(v.var(ddof=1) - 1.0) <= 0.05
    lag1 = np.corrcoef(v[:-1], v[1:])[0, 1]
    assert abs(lag1) <= 3.0 / np.sqrt(len(v))


def test_lattice_ma_matches_weights():
    # deterministic check of the correlation orientation: X(j) = sum w_k xi(j+k)
    model = LatticeMAField(1, np.array([2.0, 1.0]))
    r = sample(model, Window((0.0,), (5.0,)), 12, 0)
    from fieldclt.fields import replication_rng

    rng = replication_rng(12, 0)
    innov = rng.standard_normal(7)
    expected = 2.0 * innov[:-1] + 1.0 * innov[1:]
    assert_allclose(r.values, expected, rtol=1e-12)


def test_shot_noise_stationarity(shot_noise_1d):
    vals = pointwise_values(shot_noise_1d, [0.3, 7.7], 10**4, seed=13)
    means = vals.mean(axis=0)
    ses = vals.std(axis=0, ddof=1) / np.sqrt(vals.shape[0])
    assert abs(means[0] - means[1]) <= 3.0 * np.hypot(ses[0], ses[1])
    variances = vals.var(axis=0, ddof=1)
    assert abs(variances[0] - variances[1]) <= 3.0 * 0.03


def test_shot_noise_empirical_covariance(shot_noise_1d):
    nodes = [0.0, 0.25, 0.5, 1.5]
    vals = pointwise_values(shot_noise_1d, nodes, 10**5, seed=99)
    for k, t in enumerate(nodes):
        if k == 0:
            emp = vals[:, 0].var(ddof=1)
        else:
            emp = np.cov(vals[:, 0], vals[:, k])[0, 1]
        se = 3.0 * np.sqrt(2.0 / vals.shape[0])  # crude but generous
        assert abs(emp - covariance(shot_noise_1d, t)) <= 3.0 * se


# -- exact window integrals -------------------------------------------------------


def _single_point_realization(model, window, x):
    return ShotNoiseRealization(
        model=model,
        window=window,
        sample_region=window.dilate(model.kernel.side),
        points=np.asarray(x, dtype=float).reshape(-1, model.dim),
        master_seed=0,
        rep=0,
    )


def test_exact_window_integral_single_points(shot_noise_1d):
    w = Window((0.0,), (10.0,))
    assert_allclose(exact_window_integral(_single_point_realization(shot_noise_1d, w, [0.5]), w), 1.0)
    assert_allclose(exact_window_integral(_single_point_realization(shot_noise_1d, w, [-0.5]), w), 0.5)
    empty = _single_point_realization(shot_noise_1d, w, np.empty((0, 1)))
    assert exact_window_integral(empty, w) == 0.0


def test_exact_window_integral_rejects_bad_input(shot_noise_1d):
    w = Window((0.0,), (10.0,))
    grid = sample(GaussianGridField(1, GaussianCovariance(1.0, 1.0), 4), w, 0, 0)
    with pytest.raises(TypeError):
        exact_window_integral(grid, w)
    r = sample(shot_noise_1d, Window((0.0,), (5.0,)), 0, 0)
    with pytest.raises(ValueError):
        exact_window_integral(r, w)  # sample region too small for this window


def test_exact_integral_agrees_with_fine_grid(shot_noise_1d):
    w = Window((0.0,), (8.0,))
    r = sample(shot_noise_1d, w, 3, 0)
    exact = exact_window_integral(r, w)
    axes = grid_axes_covering(w, 1.0 / 256.0)
    values = shot_noise_on_grid(r, axes)
    approx = float(values.sum()) / 256.0
    assert abs(exact - approx) <= 0.05 * max(1.0, abs(exact))


def test_triangular_window_overlap_quadrature():
    kernel = TriangularKernel(2.0, 1.0)
    model = ShotNoiseField(1, 1.0, kernel)
    w = Window((0.0,), (10.0,))
    for x in (-0.7, -0.2, 0.3, 9.6):
        r = _single_point_realization(model, w, [x])
        expected = integrate.quad(
            lambda t: kernel.height * kernel.values_1d(np.asarray([t - x]))[0], 0.0, 10.0
        )[0]
        assert_allclose(exact_window_integral(r, w), expected, atol=1e-10)


def test_shot_noise_on_grid_matches_pointwise(shot_noise_2d):
    w = Window((0.0, 0.0), (3.0, 3.0))
    r = sample(shot_noise_2d, w, 10, 0)
    axes = grid_axes_covering(w, 0.25)
    values = shot_noise_on_grid(r, axes)
    # direct evaluation of X(t) = sum_i 1{t - x_i in [0,1]^2} at a few nodes
    for idx in [(0, 0), (3, 7), (12, 12), (5, 2)]:
        node = np.array([axes[0][idx[0]], axes[1][idx[1]]])
        offsets = node - r.points
        direct = np.sum(np.all((offsets >= 0) & (offsets <= 1.0), axis=1))
        assert_allclose(values[idx], direct, rtol=1e-12)


# -- circulant embedding guards ----------------------------------------------------


class TopHatCovariance:
    """Indicator covariance; not positive definite, must be rejected."""

    variance = 1.0
    length_scale = 1.0

    def __call__(self, t):
        t = np.atleast_2d(np.asarray(t, dtype=float))
        return (np.sqrt(np.sum(t * t, axis=-1)) <= 2.0).astype(float)

    def __hash__(self):
        return hash("top-hat")

    def __eq__(self, other):
        return isinstance(other, TopHatCovariance)


def test_embedding_rejects_non_psd_covariance():
    model = GaussianGridField(1, TopHatCovariance(), 8)
    with pytest.raises(EmbeddingError):
        sample(model, Window((0.0,), (8.0,)), 0, 0)


def test_embedding_grid_size_cap():
    model = GaussianGridField(3, GaussianCovariance(1.0, 1.0), 64)
    with pytest.raises(GridSizeError):
        sample(model, Window((0.0,) * 3, (16.0,) * 3), 0, 0)


# -- serialization -----------------------------------------------------------------


@pytest.mark.parametrize(
    "model",
    [
        ShotNoiseField(2, 1.5, BoxKernel(0.5, 2.0)),
        ShotNoiseField(1, 1.0, TriangularKernel(1.0, 1.0)),
        GaussianGridField(2, GaussianCovariance(2.0, 0.5), 8),
        GaussianGridField(1, ExponentialCovariance(1.0, 3.0), 4),
        LatticeMAField(1, np.array([1.0, 0.25]), 0.5),
    ],
)
def test_model_json_round_trip(model):
    restored = model_from_json(model_to_json(model))
    assert type(restored) is type(model)
    assert restored.dim == model.dim
    if isinstance(model, LatticeMAField):
        assert np.array_equal(restored.weights, model.weights)
    else:
        assert model_to_json(restored) == model_to_json(model)


def test_model_from_json_rejects_unknown_family():
    with pytest.raises(ValueError):
        model_from_json({"family": "Unknown"})


def test_grid_realization_csv_export():
    model = GaussianGridField(2, GaussianCovariance(1.0, 1.0), 2)
    r = sample(model, Window((0.0, 0.0), (1.0, 1.0)), 0, 0)
    lines = r.to_csv().strip().split("\n")
    assert lines[0] == "x1,x2,value"
    assert len(lines) == 1 + r.values.size
    x1, x2, v = map(float, lines[1].split(","))
    assert (x1, x2) == (0.0, 0.0)
    assert v == float(r.values[0, 0])


def test_grid_realization_rejects_nonfinite():
    from fieldclt.fields import GridRealization

    with pytest.raises(ValueError):
        GridRealization(
            "GaussianGrid", Window((0.0,), (1.0,)), (0.0,), 0.5, np.array([1.0, np.nan, 0.0]), 0, 0
        )


def test_lipschitz_spec_validation():
    from fieldclt.dependence import LipschitzSpec

    spec = LipschitzSpec(2.0, (1.0, 2.0))
    assert spec.lip == 2.0
    with pytest.raises(ValueError):
        LipschitzSpec(-1.0)
    with pytest.raises(ValueError):
        LipschitzSpec(1.0, (-0.5,))
