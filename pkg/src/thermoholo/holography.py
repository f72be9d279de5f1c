"""Reconstruction of Ξ(β, λ′) from its values on vertical lines.

Every path reduces to one primitive, the damped Cauchy line integral

    I_m(λL; λ′) = ∫ exp(β(λL + iy − λ′)·m) · Ξ(λL + iy) / (λL + iy − λ′) dy/2π

over the whole line Re λ = λL.  Then

    two lines λ1 < Re λ′ < λ2 :  Ξ(λ′) = I_0(λ2) − I_0(λ1)
    right of λ1, m = M− :        Ξ(λ′) = −I_M−(λ1)
    left of λ2,  m = M+ :        Ξ(λ′) = +I_M+(λ2)

On a line, Ξ(λL + iy) = Ξ(λL)·S(λL, t) with y = ηt/β, so a measured probe
coherence S plus one anchor value Ξ(λL) carries the same information.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from . import _io
from .coherence import CoherenceTrace, coherence_identity, sample_trace
from .errors import (
    ConditioningError,
    ConsistencyError,
    DampingConstantError,
    HolographyError,
    ModelError,
    PeriodError,
    SingularPointError,
)
from .models import ModelKind, ParamHamiltonian
from .quadrature import RESUM_TOL, MAX_DEPTH, fourier_resum, harmonics, integrate_truncated, interpolate_trace
from .spectral import level_structure, partition_function

QUAD_STRATEGIES = ("FourierResum", "TruncatedAdaptive")


class ConditioningWarning(UserWarning):
    """Target so close to a line that the kernel pole is under-resolved."""

MIN_CONTOUR_SAMPLES = 16
MAX_LINE_SAMPLES = 1 << 16
# the truncated integrator works relative to the integrand's L1 norm, which
# exceeds |Ξ(λ′)| by the damping factor; this margin absorbs that loss
TRUNCATED_TOL_FACTOR = 1e-2


@dataclass(frozen=True)
class ReconstructionConfig:
    """Lines, damping constants and quadrature settings for a reconstruction.

    ``m_minus``/``m_plus`` left as None are filled from the h1 spectrum by
    :func:`default_damping`.  ``tol`` is the relative accuracy requested from
    the truncated quadrature and the threshold for consistency checks.
    """

    line1: Optional[float] = None
    line2: Optional[float] = None
    m_minus: Optional[float] = None
    m_plus: Optional[float] = None
    quad: str = "FourierResum"
    tol: float = 1e-6
    harmonic_tol: float = RESUM_TOL
    max_harmonics: Optional[int] = None
    on_budget: str = "raise"
    window_periods: float = 200.0
    max_depth: int = MAX_DEPTH
    n_panels: int = 256
    strict: bool = True

    def __post_init__(self):
        if self.quad not in QUAD_STRATEGIES:
            raise HolographyError(f"quad must be one of {QUAD_STRATEGIES}, got {self.quad!r}")
        if not self.tol > 0 or not self.harmonic_tol > 0:
            raise HolographyError("tolerances must be positive")
        if self.line1 is not None and self.line2 is not None and not self.line1 < self.line2:
            raise HolographyError("line1 must lie left of line2")
        if self.on_budget not in ("raise", "warn"):
            raise HolographyError("on_budget must be 'raise' or 'warn'")
        if self.n_panels < 8:
            raise HolographyError("n_panels must be at least 8")
        if not self.window_periods > 0:
            raise HolographyError("window_periods must be positive")
        for name in ("line1", "line2", "m_minus", "m_plus"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                raise HolographyError(f"{name} must be finite")

    def replace(self, **changes):
        return ReconstructionConfig(**{**asdict(self), **changes})


class Reconstruction(NamedTuple):
    value: complex
    error: float
    path: str


class FreeEnergyDifference(NamedTuple):
    ratio: float  # exp(−β[F(λ′) − F(λ)])
    delta_f: float
    imag_residual: float
    error: float


def default_damping(h1_min, h1_max, beta):
    """(M−, M+) placed max(1/β, spread/4) outside the h1 spectrum.

    The margin keeps every harmonic's kernel exponent moderate while making
    the line integrands decay quickly enough for truncated quadrature.
    """
    spread = h1_max - h1_min if math.isfinite(h1_max) else 0.0
    margin = max(1.0 / beta, 0.25 * spread)
    m_plus = h1_max + margin if math.isfinite(h1_max) else math.inf
    return h1_min - margin, m_plus


# ---------------------------------------------------------------------------
# Cauchy contour formula


def circle_contour(center, radius, n_samples):
    """``n_samples`` counterclockwise points on a circle, uniform in angle."""
    theta = 2.0 * math.pi * np.arange(n_samples) / n_samples
    return complex(center) + radius * np.exp(1j * theta)


def cauchy_disk(points, values, lam_prime):
    """(2πi)⁻¹ ∮ f(λ)/(λ − λ′) dλ from samples on a closed contour.

    ``points`` must be ordered counterclockwise and uniform in some periodic
    parameter; the tangent comes from a spectral derivative of the points, so
    the trapezoid rule converges geometrically for analytic boundary data.
    Points outside the contour give 0.
    """
    z = np.asarray(points, dtype=complex)
    f = np.asarray(values, dtype=complex)
    n = z.size
    if z.ndim != 1 or f.shape != z.shape:
        raise HolographyError("points and values must be 1-D arrays of equal length")
    if n < MIN_CONTOUR_SAMPLES:
        raise HolographyError(f"need at least {MIN_CONTOUR_SAMPLES} contour samples")
    spacing = np.mean(np.abs(np.diff(np.append(z, z[0]))))
    dist = np.min(np.abs(z - lam_prime))
    if dist < 2.0 * spacing:
        raise ConditioningError(f"λ′ is {dist:.3g} from the contour, under two sample spacings")
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    dz = np.fft.ifft(1j * k * np.fft.fft(z))
    total = np.sum(f * dz / (z - lam_prime)) * (2.0 * math.pi / n)
    return complex(total / (2j * math.pi))


# ---------------------------------------------------------------------------
# line data


@dataclass(frozen=True)
class _Line:
    position: float
    anchor: complex
    trace: Optional[CoherenceTrace]
    beta: float
    eta: float
    coherence: object = field(default=None)  # callable S(t) for truncated quadrature
    window: float = 0.0
    h1_range: tuple = (-math.inf, math.inf)


def _source_h1_range(source):
    if isinstance(source, ParamHamiltonian):
        spec = source.h1_spectrum()
        return float(spec[0]), float(spec[-1])
    lv = level_structure(source)
    return lv.offset, lv.top


def _trace_h1_range(trace, harmonic_tol):
    if trace.period is None or not trace.spans_period:
        return -math.inf, math.inf
    levels, c = harmonics(trace)
    mag = np.abs(c)
    seen = levels[mag >= harmonic_tol * mag.max()]
    return float(seen.min()), float(seen.max())


def _samples_for(source, beta, position):
    lv = level_structure(source)
    if lv.count is not None:
        return max(MIN_CONTOUR_SAMPLES, lv.count + 16)
    x = beta * position
    if not x > 0:
        raise ModelError("the untruncated oscillator needs lines with βω > 0")
    n = math.ceil(40.0 / x) + 16
    if n > MAX_LINE_SAMPLES:
        raise ModelError(f"line at βω={x:g} needs {n} samples; move it further right")
    return n


def _model_line(source, beta, position, cfg):
    """Line data computed from a model or closed form.

    The coherence is sampled with η = β so that time equals Im λ.
    """
    if isinstance(source, str) and ModelKind(source) is ModelKind.OSCILLATOR and position <= 0:
        raise ModelError("the untruncated oscillator has no trace for Re ω <= 0")
    anchor = complex(partition_function(source, beta, complex(position)))
    if anchor == 0:
        raise SingularPointError(f"Ξ vanishes on the line at λ={position}")
    lv = level_structure(source)
    eta = beta
    trace = None
    if lv is not None and lv.count != 1:
        trace = sample_trace(source, beta, position, eta, _samples_for(source, beta, position))
        window = cfg.window_periods * trace.period
    elif cfg.quad == "FourierResum":
        raise PeriodError("h1 levels are not commensurate; use TruncatedAdaptive")
    else:
        window = cfg.window_periods * 2.0 * math.pi

    def coherence(t):
        return np.asarray(coherence_identity(source, beta, position, eta, t), dtype=complex)

    return _Line(position, anchor, trace, beta, eta, coherence, window, _source_h1_range(source))


def _trace_line(trace, anchor, cfg):
    if anchor is None:
        raise HolographyError(f"no anchor Ξ(β, {trace.lambda0}) supplied for the trace's line")
    anchor = complex(anchor)
    if anchor == 0:
        raise SingularPointError("anchor Ξ on the line is zero")
    if trace.period is not None and trace.spans_period:
        def coherence(t):
            return interpolate_trace(trace, t)
        window = cfg.window_periods * trace.period
    else:
        if cfg.quad == "FourierResum":
            raise PeriodError("Fourier resummation needs a trace spanning exactly one period")
        coherence, window = _spline_coherence(trace)
    # a level counts as present once it is visible at the working accuracy;
    # the truncated path squares tol because left-half targets amplify a
    # level e by exp(β·e·(λ − Re λ′))
    resolution = cfg.harmonic_tol if cfg.quad == "FourierResum" else cfg.tol ** 2
    return _Line(trace.lambda0, anchor, trace, trace.beta, trace.eta, coherence, window,
                 _trace_h1_range(trace, resolution))


def _spline_coherence(trace):
    """Cubic spline over [−T, T] using S(−t) = conj S(t) on a real line."""
    t = trace.times
    full_t = np.concatenate([-t[:0:-1], t])
    full_v = np.concatenate([np.conj(trace.values[:0:-1]), trace.values])
    spline = CubicSpline(full_t, full_v)
    edge = t[-1]

    def coherence(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= edge, spline(np.clip(x, -edge, edge)), 0.0)

    return coherence, edge


def _line_integral(line, lam_prime, m, cfg):
    """I_m on ``line`` at ``lam_prime``: returns (value, error estimate)."""
    lam_prime = complex(lam_prime)
    if lam_prime.real == line.position:
        raise HolographyError("target lies on an integration line")
    if cfg.quad == "FourierResum":
        r = fourier_resum(line.trace, lam_prime, m, cfg.harmonic_tol, cfg.max_harmonics, cfg.on_budget)
        return line.anchor * r.value, abs(line.anchor) * r.tail_bound
    beta, eta = line.beta, line.eta
    scale = line.anchor * abs(eta) / (2.0 * math.pi * beta)
    pole_width = abs(line.position - lam_prime.real) * beta / abs(eta)
    finest = 2.0 * line.window / cfg.n_panels / 2.0 ** cfg.max_depth
    if pole_width < finest:
        warnings.warn(f"target within {pole_width:.3g} time units of the line, below the finest "
                      "quadrature panel; expect the error to grow like 1/distance",
                      ConditioningWarning, stacklevel=3)

    def integrand(t):
        z = line.position + 1j * eta * t / beta - lam_prime
        return scale * np.exp(beta * m * z) * line.coherence(t) / z

    value, err = integrate_truncated(integrand, line.window, tol=TRUNCATED_TOL_FACTOR * cfg.tol,
                                     n_panels=cfg.n_panels, max_depth=cfg.max_depth, strict=cfg.strict)
    return value, err


def _damping(cfg, line, side):
    lo, hi = line.h1_range
    d_minus, d_plus = default_damping(lo, hi, line.beta) if math.isfinite(lo) else (None, None)
    if side < 0:
        m = cfg.m_minus if cfg.m_minus is not None else d_minus
        if m is None:
            raise DampingConstantError("M− must be given: the h1 spectrum is unknown")
        if not m < lo:
            raise DampingConstantError(f"M−={m} must lie below the smallest h1 level {lo}")
        return m
    m = cfg.m_plus if cfg.m_plus is not None else d_plus
    if m is None:
        raise DampingConstantError("M+ must be given: the h1 spectrum is unknown")
    if not math.isfinite(hi):
        raise DampingConstantError("h1 is unbounded above; the left half-plane formula does not apply")
    if not m > hi:
        raise DampingConstantError(f"M+={m} must lie above the largest h1 level {hi}")
    return m


def _two_lines(line1, line2, lam_prime, cfg):
    if not line1.position < complex(lam_prime).real < line2.position:
        raise HolographyError("target outside the open strip between the lines")
    v2, e2 = _line_integral(line2, lam_prime, 0.0, cfg)
    v1, e1 = _line_integral(line1, lam_prime, 0.0, cfg)
    return Reconstruction(complex(v2 - v1), e1 + e2, "two_lines")


def _right_half(line, lam_prime, cfg):
    if not complex(lam_prime).real > line.position:
        raise HolographyError("target must lie right of the line")
    m = _damping(cfg, line, -1)
    v, e = _line_integral(line, lam_prime, m, cfg)
    return Reconstruction(complex(-v), e, "right_half")


def _left_half(line, lam_prime, cfg):
    if not complex(lam_prime).real < line.position:
        raise HolographyError("target must lie left of the line")
    m = _damping(cfg, line, +1)
    v, e = _line_integral(line, lam_prime, m, cfg)
    return Reconstruction(complex(v), e, "left_half")


def _need(value, name):
    if value is None:
        raise HolographyError(f"configuration needs {name}")
    return value


# ---------------------------------------------------------------------------
# public reconstruction operators


def reconstruct_two_lines(source, beta, cfg, lam_prime):
    """Ξ(β, λ′) for λ1 < Re λ′ < λ2 from Ξ on both lines."""
    line1 = _model_line(source, beta, _need(cfg.line1, "line1"), cfg)
    line2 = _model_line(source, beta, _need(cfg.line2, "line2"), cfg)
    return _two_lines(line1, line2, lam_prime, cfg)


def reconstruct_right_half(source, beta, cfg, lam_prime):
    """Ξ(β, λ′) for Re λ′ > λ1 from Ξ on the single line Re λ = λ1."""
    line = _model_line(source, beta, _need(cfg.line1, "line1"), cfg)
    return _right_half(line, lam_prime, cfg)


def reconstruct_left_half(source, beta, cfg, lam_prime):
    """Ξ(β, λ′) for Re λ′ < λ2 from Ξ on the single line Re λ = λ2."""
    line = _model_line(source, beta, _need(cfg.line2, "line2"), cfg)
    return _left_half(line, lam_prime, cfg)


def _lines_from_traces(traces, cfg, anchors, source):
    if isinstance(traces, CoherenceTrace):
        traces = [traces]
    anchors = dict(anchors or {})
    lines = {}
    for tr in traces:
        anchor = anchors.get(tr.lambda0)
        if anchor is None and source is not None:
            anchor = complex(partition_function(source, tr.beta, complex(tr.lambda0)))
        lines[tr.lambda0] = _trace_line(tr, anchor, cfg)
    return lines


def _find(lines, position, name):
    for pos, line in lines.items():
        if math.isclose(pos, position, rel_tol=1e-12, abs_tol=1e-12):
            return line
    raise HolographyError(f"no trace measured at {name}={position}")


def reconstruct_from_coherence(traces, cfg, lam_prime, anchors=None, source=None):
    """Ξ(β, λ′) from probe coherence traces recorded on the configured lines.

    The anchor Ξ(β, λ_line) multiplying each line integral comes from
    ``anchors`` (a mapping line position → value) or, failing that, from
    ``source``.  The path is chosen from the configured lines: the strip if
    λ′ lies between two lines, otherwise the half-plane on λ′'s side.
    """
    lines = _lines_from_traces(traces, cfg, anchors, source)
    x = complex(lam_prime).real
    if cfg.line1 is not None and cfg.line2 is not None and cfg.line1 < x < cfg.line2:
        return _two_lines(_find(lines, cfg.line1, "line1"), _find(lines, cfg.line2, "line2"), lam_prime, cfg)
    if cfg.line1 is not None and x > cfg.line1:
        return _right_half(_find(lines, cfg.line1, "line1"), lam_prime, cfg)
    if cfg.line2 is not None and x < cfg.line2:
        return _left_half(_find(lines, cfg.line2, "line2"), lam_prime, cfg)
    raise HolographyError(f"Re λ′={x} is not inside any region covered by the configured lines")


def _normalized_integral(trace, lam_prime, cfg):
    """sgn(λ − λ′) · I_M(λ)/Ξ(λ) for the trace's own line, M by the same sign."""
    line = _trace_line(trace, 1.0, cfg)
    x = complex(lam_prime).real
    if x == trace.lambda0:
        raise HolographyError("target lies on the trace's line")
    side = 1 if trace.lambda0 > x else -1
    m = _damping(cfg, line, side)
    v, e = _line_integral(line, lam_prime, m, cfg)
    return side * v, e


def free_energy_difference(trace, lam_prime, cfg):
    """exp(−β[F(λ′) − F(λ)]) and ΔF from one coherence trace at λ.

    The imaginary part of the reconstructed ratio should vanish for real
    λ′; it is returned as a diagnostic and raises
    :class:`ConsistencyError` beyond 100·tol.  λ′ = λ gives ΔF = 0 without
    any integration.
    """
    if complex(lam_prime).imag != 0:
        raise HolographyError("free-energy differences need a real target")
    if float(np.real(lam_prime)) == trace.lambda0:
        return FreeEnergyDifference(1.0, 0.0, 0.0, 0.0)
    val, err = _normalized_integral(trace, float(np.real(lam_prime)), cfg)
    if abs(val.imag) > 100.0 * cfg.tol * max(abs(val), 1e-300):
        raise ConsistencyError(f"imaginary residual {val.imag:.3e} of exp(−βΔF)={val.real:.6g}")
    if not val.real > 0:
        raise ConsistencyError(f"reconstructed exp(−βΔF)={val.real:.6g} is not positive")
    return FreeEnergyDifference(val.real, -math.log(val.real) / trace.beta, abs(val.imag), err)


def coherence_transport(trace, lam_prime, t_prime, cfg):
    """⟨S₊(λ′, t′)⟩ from the coherence recorded at the trace's line λ.

    Evaluated as the ratio of the line integrals at λ′ + iηt′/β and at λ′,
    both damped with the M selected by sgn(λ − λ′).  At λ′ = λ the trace is
    returned directly (band-limited interpolation between samples).
    """
    t_prime = np.asarray(t_prime, dtype=float)
    lam_prime = float(np.real(lam_prime))
    if lam_prime == trace.lambda0:
        if trace.period is not None and trace.spans_period:
            out = interpolate_trace(trace, t_prime)
        else:
            out = np.interp(t_prime, trace.times, trace.values.real) + 1j * np.interp(
                t_prime, trace.times, trace.values.imag)
        return out if out.ndim else complex(out)
    den, _ = _normalized_integral(trace, lam_prime, cfg)
    if abs(den) < 1e-300:
        raise SingularPointError("reconstructed Ξ(λ′) vanishes; coherence undefined")
    shift = 1j * trace.eta / trace.beta
    out = np.array([_normalized_integral(trace, lam_prime + shift * t, cfg)[0] / den
                    for t in t_prime.ravel()], dtype=complex).reshape(t_prime.shape)
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class ExperimentResult:
    """Reconstructed and reference values at a list of targets."""

    targets: np.ndarray
    reconstructed: np.ndarray
    reference: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        arrs = [np.atleast_1d(np.asarray(getattr(self, k), dtype=complex))
                for k in ("targets", "reconstructed", "reference")]
        if len({a.shape for a in arrs}) != 1 or arrs[0].ndim != 1:
            raise HolographyError("targets, reconstructed and reference must be congruent 1-D arrays")
        for k, a in zip(("targets", "reconstructed", "reference"), arrs):
            a.setflags(write=False)
            object.__setattr__(self, k, a)

    @property
    def abs_err(self):
        return np.abs(self.reconstructed - self.reference)

    @property
    def rel_err(self):
        ref = np.abs(self.reference)
        return self.abs_err / np.where(ref > 0, ref, 1.0)

    def to_csv(self, fh):
        fh.write(_io.comment_block(self.metadata))
        rows = zip(self.targets.real, self.targets.imag, self.reconstructed.real,
                   self.reconstructed.imag, self.reference.real, self.reference.imag,
                   self.abs_err, self.rel_err)
        header = ["lambda_prime_re", "lambda_prime_im", "recon_re", "recon_im",
                  "ref_re", "ref_im", "abs_err", "rel_err"]
        _io.write_rows(fh, header, rows)

    def to_json(self):
        doc = {
            "metadata": self.metadata,
            "targets": [[z.real, z.imag] for z in self.targets],
            "reconstructed": [[z.real, z.imag] for z in self.reconstructed],
            "reference": [[z.real, z.imag] for z in self.reference],
            "abs_err": self.abs_err.tolist(),
            "rel_err": self.rel_err.tolist(),
        }
        return json.dumps(doc, indent=2, sort_keys=True, default=_io._jsonable)
