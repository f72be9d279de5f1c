"""Integration engines for the slowly decaying line integrals.

Along a vertical line the reconstruction integrands fall off only as 1/t.
For periodic coherence traces :func:`fourier_resum` expands the trace in
harmonics and integrates each harmonic against the Cauchy kernel in closed
form.  :func:`integrate_truncated` is the general fallback.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, HolographyError, PeriodError

RESUM_TOL = 1e-14
MAX_DEPTH = 40
NOISE_FLOOR = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class KernelParams:
    """∫ exp(iκt) / (a + ibt) dt over the real line."""

    a: float
    b: float
    kappa: float

    def __post_init__(self):
        if self.b == 0:
            raise HolographyError("kernel scale b must be nonzero")


def _kernel_parts(a, b, kappa):
    """Split the kernel integral into ``coef · exp(expo)`` (arrays over κ).

    The pole sits at t = ia/b.  Closing the contour on the side where
    exp(iκt) decays picks it up only when sign(κ) = sign(a/b); κ = 0 is the
    symmetric principal value π·sign(a)/|b|.
    """
    kappa = np.asarray(kappa, dtype=float)
    coef = np.zeros(kappa.shape)
    expo = np.zeros(kappa.shape)
    side = np.sign(a / b)
    hit = np.sign(kappa) == side
    coef[hit] = side * 2.0 * math.pi / b
    expo[hit] = -kappa[hit] * a / b
    zero = kappa == 0
    coef[zero] = math.pi * np.sign(a) / abs(b)
    return coef, expo


def cauchy_kernel_integral(p):
    """Closed form of ∫ exp(iκt)/(a + ibt) dt by residues.

    For a, b > 0 this is (2π/b)·exp(−κa/b) when κ > 0, π/b at κ = 0 and 0 for
    κ < 0; the other sign quadrants mirror it.
    """
    if p.a == 0:
        raise HolographyError("a = 0 puts the pole on the integration path")
    coef, expo = _kernel_parts(p.a, p.b, np.array([p.kappa]))
    return complex(coef[0] * math.exp(expo[0]))


# ---------------------------------------------------------------------------
# Fourier resummation


@dataclass(frozen=True)
class ResumResult:
    value: complex
    tail_bound: float
    n_harmonics: int


def harmonics(trace):
    """Levels e_k and coefficients c_k with S(t) = Σ_k c_k·exp(−iη·e_k·t).

    The trace must cover exactly one period.  Harmonic k belongs to the h1
    level ``level_offset + k·g``; the assignment is one-sided because no
    level lies below the offset.
    """
    if trace.period is None:
        raise PeriodError("trace has no period; use truncated quadrature")
    if not trace.spans_period:
        raise PeriodError("Fourier resummation needs a trace spanning exactly one period")
    n = len(trace)
    spacing = 2.0 * math.pi / (abs(trace.eta) * trace.period)
    carrier = np.exp(1j * trace.eta * trace.level_offset * trace.times)
    p = trace.values * carrier
    c = np.fft.ifft(p) if trace.eta > 0 else np.fft.fft(p) / n
    levels = trace.level_offset + spacing * np.arange(n)
    return levels, c


def fourier_resum(trace, lam_prime, m=0.0, tol=RESUM_TOL, max_harmonics=None, on_budget="raise"):
    """Line integral of the damped Cauchy kernel against a periodic trace.

    Returns the integral over all real t of

        exp(β(λ0 + iηt/β − λ')·m) · S(t) / (λ0 + iηt/β − λ') · |η|/(2πβ)

    where λ0 is the trace's line.  The measure uses |η| so that the result
    is the upward line integral in λ for either sign of the coupling.
    Harmonics below ``tol·max|c|`` are dropped and their exact contribution
    is summed into ``tail_bound``; coefficients at the DFT roundoff floor
    carry no signal and are left out of the bound as well.
    ``on_budget`` ('raise' or 'warn') governs what happens when the highest
    available harmonic is still above the threshold.
    """
    lam_prime = complex(lam_prime)
    beta, eta, lam0 = trace.beta, trace.eta, trace.lambda0
    a = lam0 - lam_prime.real
    if a == 0:
        raise HolographyError("target lies on the trace's line")
    levels, c = harmonics(trace)
    if max_harmonics is not None:
        levels, c = levels[:max_harmonics], c[:max_harmonics]
    b = eta / beta
    t0 = beta * lam_prime.imag / eta
    kappa = eta * (m - levels)
    coef, expo = _kernel_parts(a, b, kappa)
    phase = beta * m * (lam0 - lam_prime) + 1j * kappa * t0 + expo
    terms = (abs(eta) / (2.0 * math.pi * beta)) * c * coef * np.exp(phase)

    mag = np.abs(c)
    keep = mag >= tol * mag.max()
    if keep[-1]:
        msg = f"harmonic budget exhausted: |c| at the last of {len(c)} harmonics is above tol"
        if on_budget == "raise":
            raise ConvergenceError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    # ascending |n| for a reproducible summation order
    value = complex(np.sum(terms[keep]))
    signal = mag >= NOISE_FLOOR * mag.max()
    tail = float(np.sum(np.abs(terms[~keep & signal])))
    return ResumResult(value, tail, int(np.count_nonzero(keep)))


def interpolate_trace(trace, t):
    """Band-limited interpolation of a periodic trace at arbitrary times.

    The levels are equally spaced, so the series is a polynomial in
    exp(−iη·g·t) and is evaluated by Horner's rule.
    """
    levels, c = harmonics(trace)
    mag = np.abs(c)
    last = int(np.nonzero(mag > 1e-17 * mag.max())[0][-1])
    t = np.asarray(t, dtype=float)
    spacing = levels[1] - levels[0] if levels.size > 1 else 0.0
    z = np.exp(-1j * trace.eta * spacing * t)
    acc = np.full(t.shape, c[last], dtype=complex)
    for ck in c[last - 1::-1] if last > 0 else ():
        acc = acc * z + ck
    return acc * np.exp(-1j * trace.eta * levels[0] * t)


# ---------------------------------------------------------------------------
# truncated adaptive quadrature

# Gauss–Kronrod 7/15 abscissae and weights on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f, lo, hi):
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=complex).reshape(x.shape)
    kron = (y @ _WK) * half
    gauss = (y @ _WG15) * half
    return kron, np.abs(kron - gauss)


def adaptive_quad(f, lo, hi, tol=1e-10, n_panels=64, max_depth=MAX_DEPTH, strict=True):
    """Vectorized adaptive Gauss–Kronrod on [lo, hi].

    A panel is accepted once its error estimate is below its share of
    ``tol`` times the running L1 scale.  ``f`` must accept and return arrays.
    Returns ``(value, error_estimate)``.
    """
    edges = np.linspace(lo, hi, n_panels + 1)
    a, b = edges[:-1], edges[1:]
    width = hi - lo
    total, err, scale = 0j, 0.0, 0.0
    for _ in range(max_depth + 1):
        k, e = _gk15(f, a, b)
        scale = max(scale, float(np.sum(np.abs(k))))
        ok = e <= tol * scale * (b - a) / width
        total += np.sum(k[ok])
        err += float(np.sum(e[ok]))
        if ok.all():
            return complex(total), err
        a, b = a[~ok], b[~ok]
        mid = 0.5 * (a + b)
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
    # depth exhausted: fold in what is left at the finest level
    k, e = _gk15(f, a, b)
    total += np.sum(k)
    err += float(np.sum(e))
    if strict:
        raise ConvergenceError(f"tolerance {tol:g} not met after {max_depth} subdivision levels")
    return complex(total), err


def _bump(u):
    return np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)


def taper(x):
    """C∞ window: 1 on |x| ≤ 1/2, 0 on |x| ≥ 1."""
    x = np.abs(np.asarray(x, dtype=float))
    s = np.clip(2.0 * x - 1.0, 0.0, 1.0)
    up, down = _bump(1.0 - s), _bump(s)
    return up / (up + down)


def integrate_truncated(integrand, window, tol=1e-10, n_panels=256, max_depth=MAX_DEPTH, strict=True):
    """Improper integral ∫ f dt from a finite symmetric window.

    The integrand is multiplied by a smooth taper that is flat on the inner
    half of the window; this suppresses the oscillatory 1/t tails far below
    a hard cut.  The non-oscillatory part of the tail leaves corrections in
    odd powers of 1/T, which two Richardson steps over the half-widths
    T, T/2, T/4 remove.  ``window`` is a half-width T or a ``(lo, hi)`` pair.

    Returns ``(value, error_bound)``; the bound adds the quadrature error to
    the last Richardson correction.
    """
    if np.isscalar(window):
        center, half = 0.0, float(window)
    else:
        lo, hi = map(float, window)
        center, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    if not half > 0:
        raise HolographyError("window must have positive width")

    vals, errs = [], []
    for level in range(3):
        w = half / 2 ** level
        panels = max(8, n_panels // 2 ** level)

        def tapered(t, w=w):
            return integrand(t) * taper((t - center) / w)

        v, e = adaptive_quad(tapered, center - w, center + w, tol, panels, max_depth, strict)
        vals.append(v)
        errs.append(e)
    j1, j2, j3 = vals
    r_a = 2.0 * j1 - j2
    r_b = 2.0 * j2 - j3
    value = (8.0 * r_a - r_b) / 7.0
    bound = abs(value - r_a) + 3.0 * sum(errs)
    return complex(value), float(bound)
