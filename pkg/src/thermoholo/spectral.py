"""Partition functions Ξ(β, λ) = Tr exp(−β(h0 + λ·h1)) at complex λ.

A partition *source* is either a :class:`~thermoholo.models.ParamHamiltonian`
or the name of a model with a closed form (``"Oscillator"`` or
``"SingleSpin"``).  All evaluators accept arrays of λ.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg

from .errors import MatrixExponentialError, ModelError, SingularPointError
from .models import ModelKind, ParamHamiltonian

SINGULAR_TOL = 1e-12
EIGVEC_COND_MAX = 1e12
CLOSED_FORMS = (ModelKind.OSCILLATOR, ModelKind.SINGLE_SPIN)


@dataclass(frozen=True)
class PartitionValue:
    value: complex
    beta: float

    def __complex__(self):
        return complex(self.value)


class FreeEnergy(NamedTuple):
    value: complex
    complex_valued: bool


class InequalityCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class Levels:
    """Equally spaced h1 levels ``offset + k·spacing``.

    ``count`` is None for an unbounded ladder (the untruncated oscillator).
    """

    offset: float
    spacing: float
    count: Optional[int]

    @property
    def top(self):
        return math.inf if self.count is None else self.offset + (self.count - 1) * self.spacing


def _as_kind(source):
    if isinstance(source, ParamHamiltonian):
        return None
    try:
        kind = ModelKind(source)
    except ValueError:
        raise ModelError(f"not a partition source: {source!r}") from None
    if kind not in CLOSED_FORMS:
        raise ModelError(f"no closed form for {kind.value}")
    return kind


def partition_closed_form(kind, beta, lam):
    """Ξ for the untruncated oscillator (λ = ω) or a single spin (λ = h).

    Raises :class:`SingularPointError` within 1e-12 of an oscillator pole
    λ = 2πin/β.
    """
    kind = _as_kind(kind)
    lam = np.asarray(lam, dtype=complex)
    x = beta * lam
    if kind is ModelKind.SINGLE_SPIN:
        out = 2.0 * np.cosh(x)
    else:
        denom = -np.expm1(-x)
        if np.any(np.abs(denom) < SINGULAR_TOL):
            raise SingularPointError("oscillator partition function evaluated at a pole ω = 2πin/β")
        out = 1.0 / denom
    return out if out.ndim else complex(out)


def _trace_exp_eig(a):
    """Tr exp(a) from eigenvalues, with an eigenvector-conditioning guard."""
    w, v = np.linalg.eig(a)
    if np.linalg.cond(v) > EIGVEC_COND_MAX:
        return None
    return np.sum(np.exp(w))


def _trace_exp(a):
    try:
        val = _trace_exp_eig(a)
    except np.linalg.LinAlgError:
        val = None
    if val is None or not np.isfinite(val):
        try:
            val = np.trace(scipy.linalg.expm(a))
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise MatrixExponentialError(str(exc)) from exc
        if not np.isfinite(val):
            raise MatrixExponentialError("matrix exponential overflowed")
    return complex(val)


def _model_partition(model, beta, lam):
    lam = np.asarray(lam, dtype=complex)
    flat = lam.ravel()
    if beta == 0:
        return np.full(lam.shape, float(model.dim), dtype=complex)
    if model.commuting:
        e0, e1 = model.joint_levels()
        out = np.empty(flat.shape, dtype=complex)
        for s in range(0, flat.size, 4096):
            chunk = flat[s:s + 4096]
            expo = -beta * (e0[None, :] + chunk[:, None] * e1[None, :])
            shift = np.max(expo.real, axis=1, keepdims=True)
            out[s:s + 4096] = np.exp(shift[:, 0]) * np.sum(np.exp(expo - shift), axis=1)
        return out.reshape(lam.shape)
    out = np.empty(flat.shape, dtype=complex)
    for i, z in enumerate(flat):
        if z.imag == 0:
            w = np.linalg.eigvalsh(-beta * (model.h0 + z.real * model.h1))
            out[i] = np.sum(np.exp(w))
        else:
            out[i] = _trace_exp(-beta * (model.h0 + z * model.h1))
    return out.reshape(lam.shape)


def partition_function(source, beta, lam):
    """Vectorized Ξ(β, λ) for any partition source; returns a complex array."""
    if isinstance(source, ParamHamiltonian):
        return _model_partition(source, beta, lam)
    return np.asarray(partition_closed_form(source, beta, lam), dtype=complex)


def partition_trace(model, beta, lam):
    """Tr exp(−β(h0 + λ·h1)) as a :class:`PartitionValue`."""
    val = complex(_model_partition(model, beta, np.asarray(complex(lam)))[()])
    if not cmath.isfinite(val):
        raise MatrixExponentialError(f"non-finite partition function at λ={lam}")
    return PartitionValue(val, beta)


def free_energy(xi):
    """F = −ln(Ξ)/β on the principal branch.

    Real for real positive Ξ; otherwise the complex value is returned and
    ``complex_valued`` is set.
    """
    val = complex(xi.value)
    if val == 0:
        raise SingularPointError("Ξ = 0: free energy is singular at a Lee-Yang zero")
    if xi.beta == 0:
        raise ModelError("free energy undefined at β = 0")
    if val.imag == 0 and val.real > 0:
        return FreeEnergy(-math.log(val.real) / xi.beta, False)
    return FreeEnergy(-cmath.log(val) / xi.beta, True)


def level_structure(source, tol=1e-9):
    """Equally spaced h1 levels of a source, or None if none exist.

    Non-commuting models return None: Ξ along vertical lines is then not a
    finite Fourier series even when h1 alone has a commensurate spectrum.
    """
    kind = None if isinstance(source, ParamHamiltonian) else _as_kind(source)
    if kind is ModelKind.OSCILLATOR:
        return Levels(0.0, 1.0, None)
    if kind is ModelKind.SINGLE_SPIN:
        return Levels(-1.0, 2.0, 2)
    if not source.commuting:
        return None
    spec = source.h1_spectrum()
    g = common_spacing(spec, tol)
    if g is None:
        return None
    lo = float(spec[0])
    if g == 0:
        return Levels(lo, 1.0, 1)
    count = int(round((spec[-1] - lo) / g)) + 1
    return Levels(lo, g, count)


def common_spacing(values, tol=1e-9, max_ratio=1e6):
    """Largest g with every (v − min v) an integer multiple of g, or None.

    Returns 0.0 for a single distinct value.
    """
    v = np.sort(np.asarray(values, dtype=float))
    span = v[-1] - v[0]
    scale = max(abs(v[0]), abs(v[-1]), 1.0)
    if span <= tol * scale:
        return 0.0
    d = v - v[0]
    d = d[d > tol * span]
    g = d[0]
    for x in d[1:]:
        g = _float_gcd(g, x, tol * span)
        if g is None or span / g > max_ratio:
            return None
    ratios = d / g
    if np.max(np.abs(ratios - np.round(ratios))) > tol * max(1.0, span / g):
        return None
    return float(g)


def _float_gcd(a, b, atol):
    a, b = max(a, b), min(a, b)
    for _ in range(200):
        if b <= atol:
            return a
        r = math.fmod(a, b)
        if b - r <= atol:
            r = 0.0
        a, b = b, r
    return None


def check_vertical_bound(model, beta, lam_re, lam_im):
    """|Ξ(β, λ_R + iλ_I)| ≤ Ξ(β, λ_R), with 1e-10 relative slack."""
    lhs = abs(complex(partition_function(model, beta, complex(lam_re, lam_im))))
    rhs = float(np.real(partition_function(model, beta, complex(lam_re, 0.0))))
    return InequalityCheck(lhs, rhs, lhs <= rhs + 1e-10 * rhs)


def check_bernstein(a):
    """Tr[exp(A†) exp(A)] ≤ Tr[exp(A† + A)] for a square matrix."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ModelError("Bernstein check needs a square matrix")
    if a.shape[0] > 256:
        raise ModelError("Bernstein check limited to dim <= 256")
    ea = scipy.linalg.expm(a)
    lhs = float(np.real(np.trace(ea.conj().T @ ea)))
    rhs = float(np.sum(np.exp(np.linalg.eigvalsh(a + a.conj().T))))
    return InequalityCheck(lhs, rhs, lhs <= rhs * (1 + 1e-10))
