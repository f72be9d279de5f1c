import io
import json
import math
import warnings

import numpy as np
import pytest

from thermoholo.coherence import sample_trace
from thermoholo.errors import (
    ConditioningError,
    ConsistencyError,
    DampingConstantError,
    HolographyError,
)
from thermoholo.holography import (
    ConditioningWarning,
    ExperimentResult,
    ReconstructionConfig,
    cauchy_disk,
    circle_contour,
    coherence_transport,
    default_damping,
    free_energy_difference,
    reconstruct_from_coherence,
    reconstruct_left_half,
    reconstruct_right_half,
    reconstruct_two_lines,
)
from thermoholo.models import ModelSpec, build_model
from thermoholo.spectral import partition_function


def osc(x):
    return 1 / (1 - np.exp(-x))


@pytest.fixture(scope="module")
def osc_trace():
    return sample_trace("Oscillator", 1.0, 1.0, 1.0, 100)


@pytest.fixture(scope="module")
def osc8():
    return build_model(ModelSpec("Oscillator", fock_cutoff=8))


# ---------------------------------------------------------------- config


def test_config_validation():
    with pytest.raises(HolographyError):
        ReconstructionConfig(quad="Simpson")
    with pytest.raises(HolographyError):
        ReconstructionConfig(line1=2.0, line2=1.0)
    with pytest.raises(HolographyError):
        ReconstructionConfig(tol=0.0)
    with pytest.raises(HolographyError):
        ReconstructionConfig(m_minus=float("nan"))
    cfg = ReconstructionConfig(line1=1.0)
    assert cfg.replace(tol=1e-3).tol == 1e-3 and cfg.tol == 1e-6


def test_default_damping():
    assert default_damping(0.0, 8.0, 1.0) == (-2.0, 10.0)
    assert default_damping(-1.0, 1.0, 0.5) == (-3.0, 3.0)
    lo, hi = default_damping(0.0, math.inf, 1.0)
    assert lo == -1.0 and hi == math.inf


# ---------------------------------------------------------------- Cauchy disk


def test_cauchy_disk_single_spin():
    z = circle_contour(0.3, 1.0, 256)
    f = 2 * np.cosh(z)
    assert cauchy_disk(z, f, 0.3) == pytest.approx(2 * math.cosh(0.3), rel=1e-8)
    assert abs(cauchy_disk(z, f, 3.0 + 1j)) < 1e-8 * abs(2 * np.cosh(3 + 1j))


def test_cauchy_disk_constant_and_ellipse():
    z = circle_contour(0, 2.0, 64)
    assert cauchy_disk(z, np.full(64, 2.5 - 1j), 0.4j) == pytest.approx(2.5 - 1j, abs=1e-13)
    theta = 2 * np.pi * np.arange(128) / 128
    ell = 1.5 * np.cos(theta) + 0.8j * np.sin(theta)
    assert cauchy_disk(ell, np.exp(ell), 0.2 + 0.1j) == pytest.approx(np.exp(0.2 + 0.1j), rel=1e-10)


def test_cauchy_disk_errors():
    z = circle_contour(0, 1, 64)
    with pytest.raises(ConditioningError):
        cauchy_disk(z, np.ones(64), 0.99)
    with pytest.raises(HolographyError):
        cauchy_disk(z[:8], np.ones(8), 0.0)
    with pytest.raises(HolographyError):
        cauchy_disk(z, np.ones(63), 0.0)


# ---------------------------------------------------------------- model paths


def test_two_lines_examples():
    cfg = ReconstructionConfig(line1=0.0, line2=2.0)
    assert reconstruct_two_lines("SingleSpin", 1.0, cfg, 1.0).value == pytest.approx(2 * math.cosh(1), rel=1e-8)
    z = 1 + 0.5j
    assert reconstruct_two_lines("SingleSpin", 1.0, cfg, z).value == pytest.approx(2 * np.cosh(z), rel=1e-8)
    cfg = ReconstructionConfig(line1=0.5, line2=3.0)
    assert reconstruct_two_lines("Oscillator", 1.0, cfg, 1.0).value == pytest.approx(osc(1.0), rel=1e-8)


def test_right_half_examples():
    cfg = ReconstructionConfig(line1=1.0, m_minus=-0.5)
    assert reconstruct_right_half("Oscillator", 1.0, cfg, 2.0).value == pytest.approx(osc(2.0), rel=1e-8)
    cfg = ReconstructionConfig(line1=0.5, m_minus=-1.5)
    assert reconstruct_right_half("SingleSpin", 1.0, cfg, 1.5).value == pytest.approx(2 * math.cosh(1.5), rel=1e-8)


def test_left_half_examples(osc8):
    cfg = ReconstructionConfig(line2=2.0, m_plus=1.5)
    assert reconstruct_left_half("SingleSpin", 1.0, cfg, 1.0).value == pytest.approx(2 * math.cosh(1), rel=1e-8)
    assert reconstruct_left_half("SingleSpin", 1.0, cfg, 0.0).value == pytest.approx(2.0, rel=1e-8)
    cfg = ReconstructionConfig(line2=2.5, m_plus=9.0)
    for z in (1.0, 0.3 + 0.7j, -1.0 - 0.2j):
        want = complex(partition_function(osc8, 1.0, z))
        assert reconstruct_left_half(osc8, 1.0, cfg, z).value == pytest.approx(want, rel=1e-8)


def test_oracle_grid_all_paths(osc8):
    rng = np.random.default_rng(4)
    for source, l1, l2 in (("SingleSpin", -1.0, 1.5), (osc8, 0.5, 2.5)):
        cfg = ReconstructionConfig(line1=l1, line2=l2)
        re = rng.uniform(l1 + 0.1, l2 - 0.1, 20)
        im = np.where(np.arange(20) % 2, rng.uniform(-2, 2, 20), 0.0)
        for z in re + 1j * im:
            want = complex(partition_function(source, 1.0, z))
            vals = [fn(source, 1.0, cfg, z).value
                    for fn in (reconstruct_two_lines, reconstruct_right_half, reconstruct_left_half)]
            for v in vals:
                assert abs(v / want - 1) < 1e-6
            # path consistency
            assert max(abs(a - b) for a in vals for b in vals) <= 2e-6 * abs(want)


def test_m_invariance():
    vals = [reconstruct_right_half("Oscillator", 1.0, ReconstructionConfig(line1=1.0, m_minus=m), 2.0 + 0.3j).value
            for m in (-0.25, -0.5, -1.0)]
    assert max(abs(a / b - 1) for a in vals for b in vals) <= 2e-6


def test_damping_invariants(osc8):
    with pytest.raises(DampingConstantError):
        reconstruct_right_half("Oscillator", 1.0, ReconstructionConfig(line1=1.0, m_minus=0.0), 2.0)
    with pytest.raises(DampingConstantError):
        reconstruct_left_half(osc8, 1.0, ReconstructionConfig(line2=1.0, m_plus=8.0), 0.5)
    with pytest.raises(DampingConstantError):
        reconstruct_left_half("Oscillator", 1.0, ReconstructionConfig(line2=2.0), 1.5)


def test_region_errors():
    with pytest.raises(HolographyError):
        reconstruct_two_lines("SingleSpin", 1.0, ReconstructionConfig(line1=0.0, line2=1.0), 1.5)
    with pytest.raises(HolographyError):
        reconstruct_right_half("SingleSpin", 1.0, ReconstructionConfig(line1=1.0), 0.5)
    with pytest.raises(HolographyError):
        reconstruct_left_half("SingleSpin", 1.0, ReconstructionConfig(line2=1.0), 1.5)
    with pytest.raises(HolographyError):
        reconstruct_right_half("SingleSpin", 1.0, ReconstructionConfig(line2=1.0), 1.5)


def test_ising_strip_uses_truncated_quadrature():
    # non-commuting: Ξ on a line is not a finite Fourier series
    m = build_model(ModelSpec("IsingChain", n_sites=2, coupling=0.7))
    cfg = ReconstructionConfig(line1=-0.5, line2=0.5, quad="TruncatedAdaptive", tol=1e-3)
    for z in (-0.1 + 0.4j,):
        want = complex(partition_function(m, 1.0, z))
        assert reconstruct_two_lines(m, 1.0, cfg, z).value == pytest.approx(want, rel=1e-3)


# ---------------------------------------------------------------- coherence paths


def test_from_coherence_right_half(osc_trace):
    cfg = ReconstructionConfig(line1=1.0, m_minus=-0.5)
    got = reconstruct_from_coherence(osc_trace, cfg, 2.0, anchors={1.0: osc(1.0)}).value
    assert got == pytest.approx(1.156517642749666, rel=1e-8)
    got = reconstruct_from_coherence([osc_trace], cfg, 2.0, source="Oscillator").value
    assert got == pytest.approx(osc(2.0), rel=1e-8)


def test_from_coherence_single_spin_strip():
    a = sample_trace("SingleSpin", 1.0, -0.5, 1.0, 32)
    b = sample_trace("SingleSpin", 1.0, 1.0, 1.0, 32)
    cfg = ReconstructionConfig(line1=-0.5, line2=1.0)
    for z in (0.2, 0.5 - 0.9j):
        got = reconstruct_from_coherence([a, b], cfg, z, source="SingleSpin")
        assert got.path == "two_lines"
        assert got.value == pytest.approx(2 * np.cosh(z), rel=1e-8)


def test_from_coherence_left_half():
    tr = sample_trace("SingleSpin", 1.0, 1.0, 1.0, 32)
    cfg = ReconstructionConfig(line2=1.0)
    got = reconstruct_from_coherence(tr, cfg, -0.4 + 0.3j, anchors={1.0: 2 * math.cosh(1.0)})
    assert got.path == "left_half"
    assert got.value == pytest.approx(2 * np.cosh(-0.4 + 0.3j), rel=1e-8)


def test_from_coherence_errors(osc_trace):
    cfg = ReconstructionConfig(line1=1.0)
    with pytest.raises(HolographyError):
        reconstruct_from_coherence(osc_trace, cfg, 2.0)
    with pytest.raises(HolographyError):
        reconstruct_from_coherence(osc_trace, cfg, 1.0 + 0.5j, source="Oscillator")
    with pytest.raises(HolographyError):
        reconstruct_from_coherence(osc_trace, ReconstructionConfig(line1=1.5), 2.0, source="Oscillator")


def test_truncated_path_from_trace(osc_trace):
    cfg = ReconstructionConfig(line1=1.0, quad="TruncatedAdaptive", tol=1e-3)
    got = reconstruct_from_coherence(osc_trace, cfg, 2.0, source="Oscillator").value
    assert got == pytest.approx(osc(2.0), rel=1e-3)


# ---------------------------------------------------------------- free energy


def test_free_energy_examples(osc_trace):
    cfg = ReconstructionConfig()
    fe = free_energy_difference(osc_trace, 2.0, cfg)
    want = (1 - math.exp(-1)) / (1 - math.exp(-2))
    assert fe.ratio == pytest.approx(want, rel=1e-8)
    assert fe.ratio == pytest.approx(0.7310585786300049, rel=1e-8)
    assert fe.delta_f == pytest.approx(-math.log(want), rel=1e-8)
    assert fe.imag_residual < 1e-6
    spin = sample_trace("SingleSpin", 1.0, 1.0, 1.0, 32)
    assert free_energy_difference(spin, 0.5, cfg).ratio == pytest.approx(math.cosh(0.5) / math.cosh(1), rel=1e-8)
    assert free_energy_difference(spin, 1.8, cfg).ratio == pytest.approx(math.cosh(1.8) / math.cosh(1), rel=1e-8)


def test_free_energy_near_line(osc_trace):
    cfg = ReconstructionConfig()
    for d in (1e-6, -1e-6):
        fe = free_energy_difference(osc_trace, 1.0 + d, cfg)
        want = osc(1.0 + d) / osc(1.0)
        assert fe.ratio == pytest.approx(want, rel=1e-6)
    assert free_energy_difference(osc_trace, 1.0, cfg) == (1.0, 0.0, 0.0, 0.0)


def test_free_energy_errors(osc_trace):
    with pytest.raises(HolographyError):
        free_energy_difference(osc_trace, 2.0 + 0.1j, ReconstructionConfig())
    with pytest.raises(ConsistencyError):
        free_energy_difference(osc_trace, 2.0, ReconstructionConfig(tol=1e-20))


def test_free_energy_both_branches_match_direct():
    spin = sample_trace("SingleSpin", 0.7, 0.4, 1.3, 32)
    for x in (-1.5, -0.3, 0.1, 0.9, 2.2):
        want = math.cosh(0.7 * x) / math.cosh(0.7 * 0.4)
        assert free_energy_difference(spin, x, ReconstructionConfig()).ratio == pytest.approx(want, rel=1e-6)


def test_degradation_toward_line(osc_trace):
    # fixed budget: one pass of GK15 on 512 panels, no refinement
    cfg = ReconstructionConfig(quad="TruncatedAdaptive", tol=1e-14, strict=False, max_depth=0,
                               n_panels=512, window_periods=200, m_minus=-1.0)
    errs = []
    for d in (1.0, 0.5, 0.25, 0.1, 0.05):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConditioningWarning)
            got = free_energy_difference(osc_trace, 1.0 + d, cfg).ratio
        errs.append(abs(got / (osc(1.0 + d) / osc(1.0)) - 1))
    assert all(a < b for a, b in zip(errs, errs[1:]))


def test_conditioning_warning_near_line(osc_trace):
    cfg = ReconstructionConfig(quad="TruncatedAdaptive", tol=1e-3, strict=False, max_depth=0, n_panels=64)
    with pytest.warns(ConditioningWarning):
        free_energy_difference(osc_trace, 1.0 + 1e-4, cfg)


# ---------------------------------------------------------------- transport


def test_transport_figure(osc_trace):
    t = np.arange(100) * (2 * math.pi / 100)
    got = coherence_transport(osc_trace, 2.0, t, ReconstructionConfig())
    want = (1 - math.exp(-2)) / (1 - np.exp(-2 - 1j * t))
    assert np.max(np.abs(got - want)) < 1e-6
    assert got[0] == pytest.approx(1.0, abs=1e-6)
    assert got[50] == pytest.approx(math.tanh(1.0), abs=1e-6)


def test_transport_to_self(osc_trace):
    got = coherence_transport(osc_trace, 1.0, osc_trace.times[:10], ReconstructionConfig())
    assert np.max(np.abs(got - osc_trace.values[:10])) < 1e-12


def test_transport_left_branch():
    spin = sample_trace("SingleSpin", 1.0, 1.0, 1.0, 32)
    t = np.linspace(0, 3, 7)
    got = coherence_transport(spin, 0.3, t, ReconstructionConfig())
    want = np.cosh(0.3 + 1j * t) / math.cosh(0.3)
    assert np.max(np.abs(got - want)) < 1e-6


# ---------------------------------------------------------------- results


def test_experiment_result_serialization():
    res = ExperimentResult(np.array([1 + 1j, 2.0]), np.array([1.0, 2.0 + 1e-9j]), np.array([1.0, 2.0]),
                           {"kind": "demo"})
    assert np.allclose(res.abs_err, [0, 1e-9])
    assert np.allclose(res.rel_err, [0, 5e-10])
    buf = io.StringIO()
    res.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("#")
    header = next(line for line in lines if not line.startswith("#"))
    assert header == "lambda_prime_re,lambda_prime_im,recon_re,recon_im,ref_re,ref_im,abs_err,rel_err"
    doc = json.loads(res.to_json())
    assert doc["metadata"] == {"kind": "demo"}
    assert doc["targets"][0] == [1.0, 1.0]
    with pytest.raises(HolographyError):
        ExperimentResult(np.ones(2), np.ones(3), np.ones(2))
