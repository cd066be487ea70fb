import numpy as np
import pytest
from numpy.testing import assert_allclose

from fieldclt.bvdecomp import (
    DecompositionError,
    MonotonePiece,
    PiecewiseMonotoneFn,
    eval_g,
    jordan_decompose,
    piecewise_from_json,
    total_variation,
)


def make_abs():
    return PiecewiseMonotoneFn(
        [-2.0, 0.0, 2.0],
        [MonotonePiece("down", lambda x: -x), MonotonePiece("up", lambda x: x)],
    )


def make_neg_abs():
    return PiecewiseMonotoneFn(
        [-2.0, 0.0, 2.0],
        [MonotonePiece("up", lambda x: x), MonotonePiece("down", lambda x: -x)],
    )


def make_cubic():
    return PiecewiseMonotoneFn([-2.0, 2.0], [MonotonePiece("up", lambda x: x**3)])


def make_step():
    # indicator of x >= 0 on [-2, 2]
    return PiecewiseMonotoneFn(
        [-2.0, 0.0, 2.0],
        [MonotonePiece("constant", lambda x: 0.0), MonotonePiece("constant", lambda x: 1.0)],
        values=[0.0, 1.0, 1.0],
    )


def make_zigzag():
    # up with slope 1, down with slope 2, up with slope 3; continuous
    return PiecewiseMonotoneFn(
        [-2.0, -0.5, 0.5, 2.0],
        [
            MonotonePiece("up", lambda x: x),
            MonotonePiece("down", lambda x: -2.0 * x - 1.5),
            MonotonePiece("up", lambda x: 3.0 * x - 4.0),
        ],
    )


ALL_FUNCTIONS = {
    "abs": make_abs,
    "neg_abs": make_neg_abs,
    "cubic": make_cubic,
    "step": make_step,
    "zigzag": make_zigzag,
}


@pytest.mark.parametrize("name", sorted(ALL_FUNCTIONS))
def test_reconstruction_on_dense_grid(name):
    fn = ALL_FUNCTIONS[name]()
    dec = jordan_decompose(fn)
    grid = np.linspace(-2.0, 2.0, 10_000)
    for t in grid:
        t = float(t)
        assert abs(float(dec.g(dec.h(t))) - fn(t)) <= 1e-10


@pytest.mark.parametrize("name", sorted(ALL_FUNCTIONS))
def test_monotonicity_and_sum(name):
    fn = ALL_FUNCTIONS[name]()
    dec = jordan_decompose(fn)
    grid = np.linspace(-2.0, 2.0, 2_000)
    f_plus = np.array([dec.f_plus(float(t)) for t in grid])
    f_minus = np.array([dec.f_minus(float(t)) for t in grid])
    h = np.array([dec.h(float(t)) for t in grid])
    f = np.array([fn(float(t)) for t in grid])
    assert np.all(np.diff(f_plus) >= -1e-12)
    assert np.all(np.diff(f_minus) <= 1e-12)
    assert np.all(np.diff(h) >= -1e-12)
    assert_allclose(f_plus + f_minus, f, atol=1e-10)
    assert_allclose(2.0 * f_plus - f, h, atol=1e-10)


@pytest.mark.parametrize("name", sorted(ALL_FUNCTIONS))
def test_anchor_at_zero(name):
    fn = ALL_FUNCTIONS[name]()
    dec = jordan_decompose(fn)
    assert_allclose(dec.f_plus(0.0), fn(0.0), atol=1e-14)
    assert_allclose(dec.f_minus(0.0), 0.0, atol=1e-14)


@pytest.mark.parametrize("name", sorted(ALL_FUNCTIONS))
def test_lipschitz_certificate(name):
    fn = ALL_FUNCTIONS[name]()
    dec = jordan_decompose(fn)
    rng = np.random.default_rng(17)
    lo = float(dec.g_breakpoints()[0]) - 1.0
    hi = float(dec.g_breakpoints()[-1]) + 1.0
    x = rng.uniform(lo, hi, size=10**6)
    y = rng.uniform(lo, hi, size=10**6)
    gx = dec.g(x)
    gy = dec.g(y)
    denom = np.abs(x - y)
    mask = denom > 0
    ratio = np.abs(gx[mask] - gy[mask]) / denom[mask]
    assert float(ratio.max()) <= 1.0 + 1e-8


@pytest.mark.parametrize("name", sorted(ALL_FUNCTIONS))
def test_h_increment_dominates_f_increment(name):
    fn = ALL_FUNCTIONS[name]()
    dec = jordan_decompose(fn)
    rng = np.random.default_rng(5)
    for _ in range(500):
        t1, t2 = sorted(rng.uniform(-2.0, 2.0, size=2))
        lhs = dec.h(float(t2)) - dec.h(float(t1))
        rhs = abs(fn(float(t2)) - fn(float(t1)))
        assert lhs >= rhs - 1e-12


def test_abs_hand_values():
    dec = jordan_decompose(make_abs())
    for t in (-1.5, -0.3, 0.0, 0.4, 1.9):
        assert_allclose(dec.f_plus(t), max(t, 0.0), atol=1e-14)
        assert_allclose(dec.f_minus(t), -t if t < 0 else 0.0, atol=1e-14)
        assert_allclose(dec.h(t), t, atol=1e-14)
    # g equals |.| on range(h) = [-2, 2]
    assert_allclose(float(dec.g(0.7)), 0.7, atol=1e-14)
    assert_allclose(float(dec.g(-1.2)), 1.2, atol=1e-14)


def test_neg_abs_hand_values():
    dec = jordan_decompose(make_neg_abs())
    for t in (-1.5, 0.0, 1.2):
        assert_allclose(dec.h(t), t, atol=1e-14)
        assert_allclose(float(dec.g(t)), -abs(t), atol=1e-14)


def test_cubic_monotone_case():
    fn = make_cubic()
    dec = jordan_decompose(fn)
    for t in (-1.8, -0.2, 0.0, 1.1):
        assert_allclose(dec.f_plus(t), t**3, atol=1e-12)
        assert_allclose(dec.f_minus(t), 0.0, atol=1e-12)
        assert_allclose(dec.h(t), t**3, atol=1e-12)
    # g restricted to range(h) is the identity
    for v in (-6.0, -1.0, 0.5, 7.9):
        assert_allclose(float(dec.g(v)), v, atol=1e-12)


def test_step_gap_fill():
    dec = jordan_decompose(make_step())
    assert_allclose(dec.h(-1.0), 0.0, atol=1e-14)
    assert_allclose(dec.h(0.0), 1.0, atol=1e-14)
    assert_allclose(dec.h(1.0), 1.0, atol=1e-14)
    # the jump of h leaves the open gap (0, 1), filled affinely
    assert len(dec.gaps) == 1
    gap = dec.gaps[0]
    assert (gap.lower, gap.upper) == (0.0, 1.0)
    assert_allclose(float(dec.g(0.5)), 0.5, atol=1e-14)
    assert_allclose(eval_g(dec, 0.25), 0.25, atol=1e-14)


def test_g_constant_extension_outside_hull():
    dec = jordan_decompose(make_abs())
    h_lo = float(dec.g_breakpoints()[0])
    h_hi = float(dec.g_breakpoints()[-1])
    assert float(dec.g(h_lo - 5.0)) == float(dec.g(h_lo))
    assert float(dec.g(h_hi + 5.0)) == float(dec.g(h_hi))


def test_interior_jump_with_intermediate_value():
    # jump from 0 to 2 at x = 0 with f(0) = 0.5 strictly between the limits
    fn = PiecewiseMonotoneFn(
        [-2.0, 0.0, 2.0],
        [MonotonePiece("constant", lambda x: 0.0), MonotonePiece("constant", lambda x: 2.0)],
        values=[0.0, 0.5, 2.0],
    )
    dec = jordan_decompose(fn)
    assert_allclose(dec.h(-1.0), 0.0, atol=1e-14)
    assert_allclose(dec.h(0.0), 0.5, atol=1e-14)
    assert_allclose(dec.h(1.0), 2.0, atol=1e-14)
    assert len(dec.gaps) == 2
    assert abs(float(dec.g(dec.h(0.0))) - 0.5) <= 1e-14
    grid = np.linspace(-2.0, 2.0, 1001)
    for t in grid:
        assert abs(float(dec.g(dec.h(float(t)))) - fn(float(t))) <= 1e-12


def test_total_variation_examples():
    abs_fn = PiecewiseMonotoneFn(
        [-1.0, 0.0, 1.0],
        [MonotonePiece("down", lambda x: -x), MonotonePiece("up", lambda x: x)],
    )
    assert_allclose(total_variation(abs_fn, -1.0, 1.0), 2.0, atol=1e-14)

    const = PiecewiseMonotoneFn([-1.0, 1.0], [MonotonePiece("constant", lambda x: 3.0)])
    assert total_variation(const, -1.0, 1.0) == 0.0

    # up by 2 then down by 1
    updown = PiecewiseMonotoneFn(
        [-1.0, 0.0, 1.0],
        [MonotonePiece("up", lambda x: 2.0 * x), MonotonePiece("down", lambda x: -x)],
        values=[-2.0, 0.0, -1.0],
    )
    assert_allclose(total_variation(updown, -1.0, 1.0), 3.0, atol=1e-14)


def test_total_variation_additivity():
    fn = make_zigzag()
    rng = np.random.default_rng(2)
    for _ in range(100):
        a, b, c = sorted(rng.uniform(-2.0, 2.0, size=3))
        if a == b or b == c:
            continue
        left = total_variation(fn, a, b)
        right = total_variation(fn, b, c)
        assert_allclose(left + right, total_variation(fn, a, c), atol=1e-10)


def test_total_variation_matches_h(name="zigzag"):
    fn = ALL_FUNCTIONS[name]()
    dec = jordan_decompose(fn)
    for a, b in [(-2.0, 2.0), (-1.0, 0.25), (0.5, 1.75)]:
        assert_allclose(total_variation(fn, a, b), dec.h(b) - dec.h(a), atol=1e-12)


def test_total_variation_out_of_domain():
    fn = make_abs()
    with pytest.raises(DecompositionError):
        total_variation(fn, -3.0, 1.0)
    with pytest.raises(DecompositionError):
        total_variation(fn, 1.0, 1.0)


def test_rejects_misdeclared_piece():
    with pytest.raises(DecompositionError):
        PiecewiseMonotoneFn([-1.0, 1.0], [MonotonePiece("up", lambda x: -x)])
    with pytest.raises(DecompositionError):
        PiecewiseMonotoneFn([-1.0, 1.0], [MonotonePiece("constant", lambda x: x)])
    with pytest.raises(DecompositionError):
        MonotonePiece("sideways", lambda x: x)


def test_rejects_domain_without_zero():
    fn = PiecewiseMonotoneFn([1.0, 2.0], [MonotonePiece("up", lambda x: x)])
    with pytest.raises(DecompositionError):
        jordan_decompose(fn)


def test_rejects_nonfinite_piece():
    with pytest.raises(DecompositionError):
        PiecewiseMonotoneFn([-1.0, 1.0], [MonotonePiece("up", lambda x: np.inf * x)])


def test_piecewise_from_json_round_trip():
    spec = {
        "breakpoints": [-2.0, 0.0, 2.0],
        "pieces": [
            {"direction": "down", "poly": [0.0, -1.0]},
            {"direction": "up", "poly": [0.0, 1.0]},
        ],
    }
    fn = piecewise_from_json(spec)
    reference = make_abs()
    for t in np.linspace(-2.0, 2.0, 101):
        assert_allclose(fn(float(t)), reference(float(t)), atol=1e-14)
