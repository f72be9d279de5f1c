import itertools
import math

import numpy as np
import pytest
import scipy.integrate

from thermoholo.coherence import CoherenceTrace, sample_trace
from thermoholo.errors import ConvergenceError, HolographyError, PeriodError
from thermoholo.quadrature import (
    KernelParams,
    adaptive_quad,
    cauchy_kernel_integral,
    fourier_resum,
    harmonics,
    integrate_truncated,
    interpolate_trace,
    taper,
)


def _brute_kernel(a, b, kappa):
    """∫ e^{iκt}/(a+ibt) dt over ℝ via QUADPACK's Fourier-weight routine.

    The imaginary part is odd in t and vanishes as a principal value, so the
    integral is 2∫₀^∞ (a·cos κt + b·t·sin κt)/(a² + b²t²) dt.
    """
    den = lambda t: a * a + b * b * t * t
    if kappa == 0:
        return 2 * scipy.integrate.quad(lambda t: a / den(t), 0, np.inf)[0]
    w = abs(kappa)
    cos_part = scipy.integrate.quad(lambda t: a / den(t), 0, np.inf, weight="cos", wvar=w)[0]
    sin_part = scipy.integrate.quad(lambda t: b * t / den(t), 0, np.inf, weight="sin", wvar=w)[0]
    return 2 * (cos_part + math.copysign(1, kappa) * sin_part)


def test_kernel_examples():
    assert cauchy_kernel_integral(KernelParams(1, 1, 1)) == pytest.approx(2 * math.pi * math.exp(-1), rel=1e-15)
    assert cauchy_kernel_integral(KernelParams(1, 1, -2)) == 0
    assert cauchy_kernel_integral(KernelParams(1, 1, 0)) == pytest.approx(math.pi, rel=1e-15)


@pytest.mark.parametrize("a,b,kappa", list(itertools.product((-1.5, 0.4, 2.0), (-0.7, 1.0, 3.0), (-1.2, 0.0, 0.8))))
def test_kernel_against_brute_force(a, b, kappa):
    got = cauchy_kernel_integral(KernelParams(a, b, kappa))
    assert abs(got - _brute_kernel(a, b, kappa)) < 1e-6


def test_kernel_errors():
    with pytest.raises(HolographyError):
        KernelParams(1, 0, 1)
    with pytest.raises(HolographyError):
        cauchy_kernel_integral(KernelParams(0, 1, 1))


def test_oscillator_harmonics_are_geometric():
    tr = sample_trace("Oscillator", 1.0, 1.0, 1.0, 100)
    levels, c = harmonics(tr)
    n = np.arange(30)
    assert np.array_equal(levels[:3], [0, 1, 2])
    assert np.allclose(c[:30], (1 - math.exp(-1)) * np.exp(-n), rtol=1e-12, atol=1e-16)


def test_harmonics_for_negative_eta():
    tr = sample_trace("Oscillator", 1.0, 1.0, -0.5, 64)
    _, c = harmonics(tr)
    assert np.allclose(c[:20], (1 - math.exp(-1)) * np.exp(-np.arange(20)), rtol=1e-12, atol=1e-16)


def test_constant_trace_keeps_only_zeroth_harmonic():
    t = np.arange(8) * (2 * math.pi / 8)
    tr = CoherenceTrace(1.0, 1.0, 1.0, t, np.ones(8), period=2 * math.pi)
    res = fourier_resum(tr, 2.0, on_budget="warn")
    assert res.n_harmonics == 1
    # S ≡ 1: ∫ dt/(2π(−1 + it)) is the κ = 0 kernel, −π/(2π)
    assert res.value == pytest.approx(-0.5, abs=1e-15)


def test_resum_against_contour_closure():
    # β = η = 1, m = 0: the value is the upward line integral of
    # Ξ(λ)/(λ − λ′) dλ/2πi divided by Ξ(λ0).  With Ξ = 1 + Σ_{n≥1} e^{−nλ},
    # the constant gives the principal value ±1/2 and each decaying term
    # closes to the right, picking up −e^{−nλ′} only when λ′ lies there.
    tr = sample_trace("Oscillator", 1.0, 1.0, 1.0, 100)
    xi0 = 1 / (1 - math.exp(-1))
    for lp in (1.5, 2.0 + 0.4j, 2.7 - 1.1j):
        xi = 1 / (1 - np.exp(-lp))
        assert fourier_resum(tr, lp).value == pytest.approx((0.5 - xi) / xi0, abs=1e-14)
    for lp in (0.5, 0.3 - 0.8j):
        assert fourier_resum(tr, lp).value == pytest.approx(0.5 / xi0, abs=1e-14)


def test_aliasing_bound():
    a = sample_trace("Oscillator", 1.0, 1.0, 1.0, 100)
    b = sample_trace("Oscillator", 1.0, 1.0, 1.0, 200)
    for lp, m in ((2.0, 0.0), (2.0, -0.5), (0.5, 1.5), (1.7 + 0.6j, -1.0)):
        assert abs(fourier_resum(a, lp, m).value - fourier_resum(b, lp, m).value) < 1e-12


def test_resum_linearity():
    a = sample_trace("Oscillator", 1.0, 1.0, 1.0, 100)
    # samples taken on another line, relabelled: only the data matter here
    b = CoherenceTrace(1.0, 1.0, 1.0, a.times, sample_trace("Oscillator", 1.0, 1.6, 1.0, 100).values, period=a.period)
    mix = CoherenceTrace(1.0, 1.0, 1.0, a.times, 0.3 * a.values + 0.7 * b.values, period=a.period)
    for lp, m in ((2.0, 0.0), (0.4 + 0.2j, 1.5)):
        want = 0.3 * fourier_resum(a, lp, m).value + 0.7 * fourier_resum(b, lp, m).value
        assert abs(fourier_resum(mix, lp, m).value - want) < 1e-12


def test_truncated_linearity():
    f = lambda t: np.exp(1j * t) / (1 + 1j * t)
    g = lambda t: 1 / (1 + t * t)
    va, _ = integrate_truncated(f, 300, tol=1e-9)
    vb, _ = integrate_truncated(g, 300, tol=1e-9)
    vm, _ = integrate_truncated(lambda t: 2 * f(t) - 0.5j * g(t), 300, tol=1e-9)
    assert abs(vm - (2 * va - 0.5j * vb)) < 1e-12


def test_resum_requires_period():
    tr = sample_trace("Oscillator", 1.0, 1.0, 1.0, 16, horizon=3.0)
    with pytest.raises(PeriodError):
        fourier_resum(tr, 2.0)
    t = np.arange(8.0)
    with pytest.raises(PeriodError):
        fourier_resum(CoherenceTrace(1.0, 1.0, 1.0, t, np.ones(8)), 2.0)


def test_resum_budget():
    tr = sample_trace("Oscillator", 1.0, 0.05, 1.0, 16)
    with pytest.raises(ConvergenceError):
        fourier_resum(tr, 1.0)
    with pytest.warns(RuntimeWarning):
        fourier_resum(tr, 1.0, on_budget="warn")


def test_resum_on_line_rejected():
    tr = sample_trace("Oscillator", 1.0, 1.0, 1.0, 100)
    with pytest.raises(HolographyError):
        fourier_resum(tr, 1.0 + 0.5j)


def test_tail_bound_reported():
    tr = sample_trace("Oscillator", 1.0, 1.0, 1.0, 100)
    full = fourier_resum(tr, 2.0, tol=1e-16)
    cut = fourier_resum(tr, 2.0, tol=1e-6)
    assert cut.n_harmonics < full.n_harmonics
    assert abs(cut.value - full.value) <= cut.tail_bound


def test_interpolation_reproduces_closed_form():
    tr = sample_trace("Oscillator", 1.0, 1.0, 1.0, 100)
    t = np.linspace(-20, 20, 101)
    want = (1 - math.exp(-1)) / (1 - np.exp(-1 - 1j * t))
    assert np.max(np.abs(interpolate_trace(tr, t) - want)) < 1e-13
    sp = sample_trace("SingleSpin", 1.0, 0.4, 1.0, 16)
    want = np.cosh(0.4 + 1j * t) / math.cosh(0.4)
    assert np.max(np.abs(interpolate_trace(sp, t) - want)) < 1e-13


def test_truncated_examples():
    v, bound = integrate_truncated(lambda t: np.exp(1j * t) / (1 + 1j * t), 500)
    assert abs(v - 2 * math.pi * math.exp(-1)) <= bound
    v, _ = integrate_truncated(lambda t: 1 / (1 + t * t), 500)
    assert abs(v - math.pi) < 1e-10
    assert integrate_truncated(lambda t: 0 * t, 50) == (0j, 0.0)


def test_resum_agrees_with_truncated_over_200_periods():
    tr = sample_trace("Oscillator", 1.0, 1.0, 1.0, 100)
    for lp, m in ((2.0, 0.0), (2.0 + 0.3j, -0.5), (0.5, 2.0)):
        exact = fourier_resum(tr, lp, m).value
        f = lambda t: np.exp((1 + 1j * t - lp) * m) * interpolate_trace(tr, t) / (1 + 1j * t - lp) / (2 * math.pi)
        v, bound = integrate_truncated(f, 200 * tr.period, tol=1e-8, n_panels=1024, strict=False)
        assert abs(v - exact) <= bound


def test_adaptive_quad():
    v, err = adaptive_quad(np.sin, 0, math.pi, tol=1e-12)
    assert v == pytest.approx(2.0, abs=1e-13)
    assert err < 1e-10
    with pytest.raises(ConvergenceError):
        adaptive_quad(lambda x: np.sign(x - 0.3), 0, 1, tol=1e-14, n_panels=2, max_depth=2)
    v, _ = adaptive_quad(lambda x: np.sign(x - 0.3), 0, 1, tol=1e-14, n_panels=2, max_depth=2, strict=False)
    assert v == pytest.approx(0.4, abs=1e-2)


def test_taper():
    x = np.array([0.0, 0.3, 0.5, 0.75, 1.0, 2.0, -0.4])
    w = taper(x)
    assert np.array_equal(w[[0, 1, 2, 6]], [1, 1, 1, 1])
    assert np.array_equal(w[[4, 5]], [0, 0])
    assert w[3] == pytest.approx(0.5)


def test_truncated_window_validation():
    with pytest.raises(HolographyError):
        integrate_truncated(np.cos, 0.0)
