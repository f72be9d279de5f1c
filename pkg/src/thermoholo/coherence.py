"""Probe-spin coherence ⟨S₊(λ, t)⟩ of a bath coupled through h1.

Two routes are provided.  :func:`coherence_identity` evaluates the ratio
Ξ(β, λ + iηt/β) / Ξ(β, λ).  :func:`coherence_dynamics` propagates the two
probe branches explicitly; it agrees with the identity only when h0 and h1
commute.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _io
from .errors import HolographyError, ModelError, PeriodError, SingularPointError
from .models import ParamHamiltonian
from .spectral import level_structure, partition_function

VALUE0_TOL = 1e-12
_META_LINE = re.compile(r"^#\s*([A-Za-z_]\w*)=(.*)$")
MODULUS_TOL = 1e-10


@dataclass(frozen=True)
class CoherenceTrace:
    """Uniformly sampled coherence of a probe at real parameter ``lambda0``.

    ``level_offset`` is the lowest h1 level; with ``period`` it fixes which
    frequency each Fourier harmonic of the samples belongs to.
    """

    lambda0: float
    beta: float
    eta: float
    times: np.ndarray
    values: np.ndarray
    period: Optional[float] = None
    level_offset: float = 0.0
    horizon: float = field(default=None)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if times.ndim != 1 or times.shape != values.shape:
            raise HolographyError("times and values must be 1-D arrays of equal length")
        if times.size < 2:
            raise HolographyError("a trace needs at least two samples")
        if self.eta == 0:
            raise HolographyError("η must be nonzero to map time onto Im λ")
        step = times[1] - times[0]
        if times[0] != 0 or not np.allclose(np.diff(times), step, rtol=1e-9, atol=0):
            raise HolographyError("trace times must form a uniform grid starting at 0")
        if abs(values[0] - 1) > VALUE0_TOL:
            raise HolographyError(f"coherence must start at 1, got {values[0]}")
        if np.max(np.abs(values)) > 1 + MODULUS_TOL:
            raise HolographyError("coherence modulus exceeds 1")
        horizon = self.horizon if self.horizon is not None else step * times.size
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "horizon", float(horizon))

    def __len__(self):
        return self.times.size

    @property
    def spans_period(self):
        return self.period is not None and math.isclose(self.horizon, self.period, rel_tol=1e-9)

    def to_csv(self, path_or_fh, header=None):
        """Write the samples; ``header`` (a dict) is embedded as '#' JSON lines."""
        meta = {
            "beta": self.beta,
            "lambda0": self.lambda0,
            "eta": self.eta,
            "period": self.period,
            "level_offset": self.level_offset,
            "horizon": self.horizon,
        }
        if hasattr(path_or_fh, "write"):
            self._write(path_or_fh, meta, header)
        else:
            with open(path_or_fh, "w", newline="") as fh:
                self._write(fh, meta, header)

    def _write(self, fh, meta, header):
        if header is not None:
            fh.write(_io.comment_block(header))
        for key, val in meta.items():
            fh.write(f"# {key}={'' if val is None else _io.fmt(val)}\n")
        rows = zip(self.times, self.values.real, self.values.imag)
        _io.write_rows(fh, ["t_ns", "s_plus_re", "s_plus_im"], rows)

    @classmethod
    def from_csv(cls, path_or_fh):
        if hasattr(path_or_fh, "read"):
            lines = path_or_fh.read().splitlines()
        else:
            with open(path_or_fh) as fh:
                lines = fh.read().splitlines()
        meta, data = {}, []
        for line in lines:
            if line.startswith("#"):
                hit = _META_LINE.match(line)
                if hit:
                    val = hit.group(2).strip()
                    meta[hit.group(1)] = float(val) if val else None
            elif line.strip() and not line.startswith("t_ns"):
                data.append([float(x) for x in line.split(",")])
        arr = np.array(data)
        return cls(
            lambda0=meta["lambda0"],
            beta=meta["beta"],
            eta=meta["eta"],
            times=arr[:, 0],
            values=arr[:, 1] + 1j * arr[:, 2],
            period=meta.get("period"),
            level_offset=meta.get("level_offset") or 0.0,
            horizon=meta.get("horizon"),
        )


def coherence_identity(source, beta, lambda0, eta, t):
    """⟨S₊(λ0, t)⟩ = Ξ(β, λ0 + itη/β) / Ξ(β, λ0); vectorized over ``t``."""
    denom = complex(partition_function(source, beta, complex(lambda0)))
    if denom == 0:
        raise SingularPointError(f"Ξ(β, {lambda0}) = 0")
    t = np.asarray(t, dtype=float)
    shifted = lambda0 + 1j * t * eta / beta
    out = partition_function(source, beta, shifted) / denom
    return out if out.ndim else complex(out)


def coherence_dynamics(model, beta, lambda0, eta, t):
    """Tr[e^{−βH} e^{iH₊t} e^{−iH₋t}] / Ξ with branch Hamiltonians H(λ0) ∓ (η/2)·h1.

    The half coupling per branch makes the branch splitting η·h1, which is
    what reproduces the +iηt/β shift of the identity path for commuting
    models.
    """
    if not isinstance(model, ParamHamiltonian):
        raise ModelError("coherence dynamics needs explicit matrices")
    t = np.asarray(t, dtype=float)
    h = model.hamiltonian(lambda0)
    e, v = np.linalg.eigh(h)
    boltz = np.exp(-beta * (e - e[0]))
    rho = (v * (boltz / boltz.sum())) @ v.conj().T
    ea, ua = np.linalg.eigh(h - 0.5 * eta * model.h1)
    eb, ub = np.linalg.eigh(h + 0.5 * eta * model.h1)
    m = ub.conj().T @ rho @ ua
    w = ua.conj().T @ ub
    weights = (m.T * w).ravel()  # weights[j, k] = m[k, j] · w[j, k]
    freqs = (ea[:, None] - eb[None, :]).ravel()
    flat = t.ravel()
    out = np.empty(flat.shape, dtype=complex)
    for s in range(0, flat.size, 1024):
        chunk = flat[s:s + 1024]
        out[s:s + 1024] = np.exp(1j * chunk[:, None] * freqs[None, :]) @ weights
    out = out.reshape(t.shape)
    return out if out.ndim else complex(out)


def detect_period(source, eta):
    """2π/(|η|·g) for equally spaced h1 levels with spacing g, else None.

    The coherence repeats with this period up to the global phase
    exp(−iη·offset·t) carried by the lowest level.
    """
    lv = level_structure(source)
    if lv is None or lv.count == 1:
        return None
    return 2.0 * math.pi / (abs(eta) * lv.spacing)


def sample_trace(source, beta, lambda0, eta, n_samples=100, horizon=None, path="identity"):
    """Sample the coherence on ``n_samples`` uniform times in [0, horizon)."""
    if n_samples < 4:
        raise HolographyError("n_samples must be >= 4")
    period = detect_period(source, eta)
    if horizon is None:
        if period is None:
            raise PeriodError("levels of h1 are not uniformly spaced; pass horizon explicitly")
        horizon = period
    if not horizon > 0:
        raise HolographyError("horizon must be positive")
    times = np.arange(n_samples) * (horizon / n_samples)
    if path == "identity":
        values = coherence_identity(source, beta, lambda0, eta, times)
    elif path == "dynamics":
        values = coherence_dynamics(source, beta, lambda0, eta, times)
    else:
        raise ValueError(f"unknown path {path!r}")
    lv = level_structure(source)
    return CoherenceTrace(
        lambda0=float(lambda0),
        beta=float(beta),
        eta=float(eta),
        times=times,
        values=values,
        period=period,
        level_offset=lv.offset if lv is not None else 0.0,
        horizon=float(horizon),
    )
