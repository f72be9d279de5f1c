"""Parameterized Hamiltonians H(λ) = h0 + λ·h1 on finite bases.

Energies are in GHz, times in ns, ħ = k_B = 1.  The spin-1 basis is ordered
(|−1⟩, |0⟩, |+1⟩); the pseudo-spin built from |0⟩ and |+1⟩ uses
σ_z = |+1⟩⟨+1| − |0⟩⟨0|.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional

import numpy as np

from .errors import CutoffError, ModelError, ResonanceError

HERMITIAN_ATOL = 1e-12
COMMUTE_RTOL = 1e-10
MAX_DIM = 4096
MAX_SITES = 12
MAX_FOCK_CUTOFF = 512


class ModelKind(str, enum.Enum):
    SINGLE_SPIN = "SingleSpin"
    ISING_CHAIN = "IsingChain"
    OSCILLATOR = "Oscillator"
    SPIN_OSCILLATOR_EFFECTIVE = "SpinOscillatorEffective"
    SPIN_OSCILLATOR_FULL = "SpinOscillatorFull"


class PerturbationWarning(UserWarning):
    """Dispersive (second-order) treatment of the spin–oscillator coupling is unreliable."""


def _readonly(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def commutes(h0, h1, rtol=COMMUTE_RTOL):
    """True when ‖h0·h1 − h1·h0‖_max ≤ rtol·‖h0‖_max·‖h1‖_max."""
    n0 = np.max(np.abs(h0)) if h0.size else 0.0
    n1 = np.max(np.abs(h1)) if h1.size else 0.0
    if n0 == 0.0 or n1 == 0.0:
        return True
    comm = h0 @ h1 - h1 @ h0
    return bool(np.max(np.abs(comm)) <= rtol * n0 * n1)


@dataclass(frozen=True)
class ParamHamiltonian:
    """Linear family H(λ) = h0 + λ·h1 of Hermitian matrices.

    ``h1`` doubles as the probe coupling operator ∂H/∂λ.  ``commuting`` is
    derived from the matrices and cannot be passed in.
    """

    h0: np.ndarray
    h1: np.ndarray
    commuting: bool = field(init=False)

    def __post_init__(self):
        h0 = _readonly(self.h0)
        h1 = _readonly(self.h1)
        if h0.ndim != 2 or h0.shape[0] != h0.shape[1]:
            raise ModelError(f"h0 must be square, got shape {h0.shape}")
        if h1.shape != h0.shape:
            raise ModelError(f"h0 and h1 shapes differ: {h0.shape} vs {h1.shape}")
        if h0.shape[0] == 0:
            raise ModelError("empty Hamiltonian")
        if h0.shape[0] > MAX_DIM:
            raise ModelError(f"dimension {h0.shape[0]} exceeds {MAX_DIM}")
        for name, m in (("h0", h0), ("h1", h1)):
            if not np.all(np.isfinite(m)):
                raise ModelError(f"{name} has non-finite entries")
            if np.max(np.abs(m - m.conj().T)) > HERMITIAN_ATOL:
                raise ModelError(f"{name} is not Hermitian")
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "commuting", commutes(h0, h1))

    @property
    def dim(self):
        return self.h0.shape[0]

    def hamiltonian(self, lam):
        return self.h0 + lam * self.h1

    def h1_spectrum(self):
        return np.linalg.eigvalsh(self.h1)

    def joint_levels(self):
        """Simultaneous eigenvalues ``(e0, e1)`` of h0 and h1.

        Only defined for commuting models; then
        Ξ(β, λ) = Σ_j exp(−β(e0_j + λ·e1_j)).
        """
        if not self.commuting:
            raise ModelError("joint levels require [h0, h1] = 0")
        return _joint_levels(self.h0, self.h1)


def _joint_levels(h0, h1):
    # Eigenvectors of a generic real combination diagonalize both commuting
    # matrices unless the combination is accidentally degenerate.
    _, vecs = np.linalg.eigh(h0 + (math.pi / 3.0) * h1)
    d0 = vecs.conj().T @ h0 @ vecs
    d1 = vecs.conj().T @ h1 @ vecs
    scale = max(np.max(np.abs(h0)), np.max(np.abs(h1)), 1.0)
    off = max(np.max(np.abs(d0 - np.diag(np.diag(d0)))), np.max(np.abs(d1 - np.diag(np.diag(d1)))))
    if off <= 1e-9 * scale:
        return np.real(np.diag(d0)), np.real(np.diag(d1))
    e0v, v0 = np.linalg.eigh(h0)
    l0, l1 = [], []
    for idx in _cluster(e0v, 1e-9 * scale):
        sub = v0[:, idx]
        l0.extend([np.mean(e0v[idx])] * len(idx))
        l1.extend(np.linalg.eigvalsh(sub.conj().T @ h1 @ sub))
    return np.array(l0), np.array(l1)


def _cluster(values, tol):
    order = np.argsort(values)
    groups, cur = [], [order[0]]
    for i in order[1:]:
        if values[i] - values[cur[-1]] <= tol:
            cur.append(i)
        else:
            groups.append(cur)
            cur = [i]
    groups.append(cur)
    return groups


# ---------------------------------------------------------------------------
# elementary operators

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SPIN1_X = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / math.sqrt(2.0)
SPIN1_Z = np.diag([-1.0, 0.0, 1.0]).astype(complex)
# pseudo-spin on {|0⟩, |+1⟩}, ordered (|0⟩, |+1⟩)
PSEUDO_Z = np.diag([-1.0, 1.0]).astype(complex)


def annihilation(cutoff):
    """Truncated bosonic lowering operator on Fock states 0..cutoff."""
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1).astype(complex)


def number_operator(cutoff):
    return np.diag(np.arange(cutoff + 1, dtype=float)).astype(complex)


def _site_op(op, site, n_sites):
    mats = [np.eye(2, dtype=complex)] * n_sites
    mats[site] = op
    return reduce(np.kron, mats)


# ---------------------------------------------------------------------------
# model specification


@dataclass(frozen=True)
class ModelSpec:
    """Declarative description of one of the supported models.

    The holographic parameter λ is the field ``h`` for spin models and the
    oscillator frequency ``ω`` for oscillator models, so neither value enters
    the matrices themselves.
    """

    kind: ModelKind
    n_sites: int = 2
    coupling: float = 1.0
    delta_split: float = 2.87
    spin_coupling: float = 1e-3
    fock_cutoff: Optional[int] = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", ModelKind(self.kind))
        except ValueError:
            raise ModelError(f"unknown model kind {self.kind!r}") from None
        if self.fock_cutoff is not None and self.fock_cutoff < 2:
            raise ModelError("fock_cutoff must be >= 2")
        if self.kind is ModelKind.ISING_CHAIN and not 1 <= self.n_sites <= MAX_SITES:
            raise ModelError(f"chain length must be in 1..{MAX_SITES}")

    def dimension(self, cutoff=None):
        k = cutoff if cutoff is not None else self.fock_cutoff
        kind = self.kind
        if kind is ModelKind.SINGLE_SPIN:
            return 2
        if kind is ModelKind.ISING_CHAIN:
            return 2 ** self.n_sites
        if k is None:
            return None
        if kind is ModelKind.OSCILLATOR:
            return k + 1
        if kind is ModelKind.SPIN_OSCILLATOR_EFFECTIVE:
            return 2 * (k + 1)
        return 3 * (k + 1)


def default_fock_cutoff(beta, omega):
    """Smallest K with exp(−βωK) < 1e-14, capped at 512."""
    x = beta * omega
    if not x > 0:
        raise ModelError("default Fock cutoff needs βω > 0")
    k = math.floor(14.0 * math.log(10.0) / x) + 1
    return int(min(max(k, 2), MAX_FOCK_CUTOFF))


def build_model(spec, beta=None, omega=None):
    """Assemble ``(h0, h1)`` for ``spec``.

    ``beta`` and ``omega`` are only consulted to pick a Fock cutoff when the
    spec leaves it unset.
    """
    kind = spec.kind
    if kind in (ModelKind.OSCILLATOR, ModelKind.SPIN_OSCILLATOR_EFFECTIVE, ModelKind.SPIN_OSCILLATOR_FULL):
        cutoff = spec.fock_cutoff
        if cutoff is None:
            if beta is None or omega is None:
                raise ModelError("fock_cutoff unset: pass beta and omega to derive it")
            cutoff = default_fock_cutoff(beta, omega)
        dim = spec.dimension(cutoff)
        if dim > MAX_DIM:
            raise ModelError(f"dimension {dim} exceeds {MAX_DIM}")

    if kind is ModelKind.SINGLE_SPIN:
        return ParamHamiltonian(np.zeros((2, 2)), -PAULI_Z)

    if kind is ModelKind.ISING_CHAIN:
        n = spec.n_sites
        dim = 2 ** n
        h0 = np.zeros((dim, dim), dtype=complex)
        for i in range(n - 1):
            h0 -= spec.coupling * _site_op(PAULI_X, i, n) @ _site_op(PAULI_X, i + 1, n)
        h1 = -sum(_site_op(PAULI_Z, i, n) for i in range(n))
        return ParamHamiltonian(h0, h1)

    if kind is ModelKind.OSCILLATOR:
        return ParamHamiltonian(np.zeros((cutoff + 1, cutoff + 1)), number_operator(cutoff))

    if kind is ModelKind.SPIN_OSCILLATOR_EFFECTIVE:
        eye_f = np.eye(cutoff + 1)
        h0 = spec.delta_split * np.kron(PSEUDO_Z, eye_f)
        h1 = np.kron(np.eye(2), number_operator(cutoff))
        return ParamHamiltonian(h0, h1)

    # SpinOscillatorFull: H = Δ S_z² + ω a†a + δ S_x (a† + a), λ = ω
    a = annihilation(cutoff)
    eye_f = np.eye(cutoff + 1)
    h0 = spec.delta_split * np.kron(SPIN1_Z @ SPIN1_Z, eye_f)
    h0 = h0 + spec.spin_coupling * np.kron(SPIN1_X, a + a.conj().T)
    h1 = np.kron(np.eye(3), number_operator(cutoff))
    return ParamHamiltonian(h0, h1)


# ---------------------------------------------------------------------------
# spin–oscillator dispersive regime


@dataclass(frozen=True)
class SpinOscillatorParams:
    delta_split: float
    omega: float
    coupling: float

    @property
    def eta(self):
        return eta_coupling(self.delta_split, self.omega, self.coupling)

    @property
    def perturbative(self):
        """False once δ²/|Δ² − ω²| exceeds 1% of ω."""
        d2 = self.delta_split ** 2 - self.omega ** 2
        if d2 == 0:
            return False
        return self.coupling ** 2 / abs(d2) <= 0.01 * abs(self.omega)


def eta_coupling(delta_split, omega, coupling):
    """Dispersive probe coupling η = 4δ²ω / (Δ² − ω²) in GHz."""
    denom = delta_split ** 2 - omega ** 2
    if denom == 0 or abs(denom) <= 1e-15 * max(delta_split ** 2, omega ** 2):
        raise ResonanceError(f"resonant spin and oscillator (Δ={delta_split}, ω={omega})")
    return 4.0 * coupling ** 2 * omega / denom


def _symmetric_sector(params, cutoff):
    """Full spin-1 model restricted to the sector even under |+1⟩ ↔ |−1⟩.

    H commutes with that exchange, and only the bright combination
    (|+1⟩ + |−1⟩)/√2 couples to |0⟩, so this sector is exactly a two-level
    system {|0⟩, |B⟩} with splitting Δ and coupling δσ_x(a + a†).
    """
    a = annihilation(cutoff)
    eye_f = np.eye(cutoff + 1)
    n = number_operator(cutoff)
    sx = PAULI_X
    proj_b = np.diag([0.0, 1.0])
    return (params.delta_split * np.kron(proj_b, eye_f)
            + params.omega * np.kron(np.eye(2), n)
            + params.coupling * np.kron(sx, a + a.conj().T))


def full_spin_oscillator(params, cutoff):
    """Untransformed H = ΔS_z² + ωa†a + δS_x(a† + a) on spin-1 ⊗ Fock."""
    a = annihilation(cutoff)
    eye_f = np.eye(cutoff + 1)
    return (params.delta_split * np.kron(SPIN1_Z @ SPIN1_Z, eye_f)
            + params.omega * np.kron(np.eye(3), number_operator(cutoff))
            + params.coupling * np.kron(SPIN1_X, a + a.conj().T))


def effective_spin_oscillator(params, cutoff, eta=None):
    """Dispersive H_eff on {|0⟩, |+1⟩} ⊗ Fock.

    The bare pseudo-spin term is written Δ|+1⟩⟨+1| (= Δ(1 + σ_z)/2) so that it
    coincides with ΔS_z² on the subspace; the difference from Δσ_z is a
    constant plus a rescaled splitting that ground-state alignment cannot
    absorb otherwise.
    """
    eta = params.eta if eta is None else eta
    n = number_operator(cutoff)
    eye_f = np.eye(cutoff + 1)
    proj_up = np.diag([0.0, 1.0])
    return (params.delta_split * np.kron(proj_up, eye_f)
            + params.omega * np.kron(np.eye(2), n)
            + eta * np.kron(PSEUDO_Z, n))


def verify_effective_hamiltonian(params, cutoff, eta=None):
    """Largest deviation between low-lying levels of the full and effective models.

    Compares the lowest ⌊cutoff/2⌋ eigenvalues of the full model's
    exchange-symmetric sector with those of the dispersive Hamiltonian, both
    shifted so their ground states sit at zero.  ``eta`` overrides the
    closed-form coupling, which is handy for comparing against a measured one.
    """
    if not params.perturbative:
        warnings.warn("coupling outside the dispersive regime", PerturbationWarning, stacklevel=2)
    if cutoff < 2:
        raise CutoffError("cutoff must be >= 2")
    n_levels = cutoff // 2
    full = _symmetric_sector(params, cutoff)
    ef, vf = np.linalg.eigh(full)
    top = np.zeros(cutoff + 1)
    top[-1] = 1.0
    top_proj = np.kron(np.ones(2), top)
    pop = np.sum(np.abs(vf[:, :n_levels]) ** 2 * top_proj[:, None], axis=0)
    if np.max(pop) > 1e-6:
        raise CutoffError(f"Fock cutoff {cutoff} too small: top-level population {np.max(pop):.2e}")
    ee = np.linalg.eigvalsh(effective_spin_oscillator(params, cutoff, eta))
    lo_full = ef[:n_levels] - ef[0]
    lo_eff = ee[:n_levels] - ee[0]
    return float(np.max(np.abs(lo_full - lo_eff)))


def measured_dispersive_coupling(params, cutoff=20):
    """η read off the exact spectrum: half the slope difference of the two branches.

    The branch energies are tracked through the first two Fock levels of the
    exchange-symmetric sector.  Useful when the closed form is in doubt.
    """
    full = _symmetric_sector(params, cutoff)
    e, v = np.linalg.eigh(full)
    labels = {}
    dim_f = cutoff + 1
    for j in range(len(e)):
        k = int(np.argmax(np.abs(v[:, j]) ** 2))
        labels.setdefault((k // dim_f, k % dim_f), e[j])
    slope_0 = labels[(0, 1)] - labels[(0, 0)]
    slope_b = labels[(1, 1)] - labels[(1, 0)]
    return 0.5 * (slope_b - slope_0)
