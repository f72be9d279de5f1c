"""Property suites run by ``thermoholo verify``.

Every suite returns a list of :class:`~thermoholo.experiments.Check`; the
random ones are seeded so a run is reproducible.
"""
from __future__ import annotations

import math
import time

import numpy as np
import scipy.stats

from .coherence import coherence_dynamics, coherence_identity, sample_trace
from .experiments import Check
from .holography import (
    ReconstructionConfig,
    cauchy_disk,
    circle_contour,
    coherence_transport,
    free_energy_difference,
    reconstruct_left_half,
    reconstruct_right_half,
    reconstruct_two_lines,
)
from .models import (
    ModelSpec,
    ParamHamiltonian,
    SpinOscillatorParams,
    build_model,
    eta_coupling,
    verify_effective_hamiltonian,
)
from .spectral import check_bernstein, check_vertical_bound, partition_function

SEED = 20240611


def _random_hermitian(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / 2


def vertical_bound_suite(n_models=1000, seed=SEED):
    """|Ξ(λ_R + iλ_I)| ≤ Ξ(λ_R) on random Hermitian pairs of dimension ≤ 16."""
    rng = np.random.default_rng(seed)
    violations, worst = 0, 0.0
    for _ in range(n_models):
        dim = int(rng.integers(1, 17))
        model = ParamHamiltonian(_random_hermitian(rng, dim), _random_hermitian(rng, dim))
        beta = float(rng.uniform(0.1, 2.0))
        res = check_vertical_bound(model, beta, float(rng.uniform(-2, 2)), float(rng.uniform(-10, 10)))
        worst = max(worst, res.lhs / res.rhs - 1.0)
        violations += not res.holds
    return [Check("vertical_bound_violations", violations == 0, violations, 0)]


def bernstein_suite(n_matrices=100, seed=SEED + 1):
    """Tr[exp(A†)exp(A)] ≤ Tr exp(A† + A) on random complex matrices."""
    rng = np.random.default_rng(seed)
    violations = 0
    for _ in range(n_matrices):
        dim = int(rng.integers(1, 17))
        a = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) * rng.uniform(0.1, 1.0)
        violations += not check_bernstein(a).holds
    return [Check("bernstein_violations", violations == 0, violations, 0)]


def commuting_suite(n_configs=50, seed=SEED + 2, tol=1e-10):
    """Explicit two-branch dynamics equals the partition-function ratio."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_configs):
        dim = int(rng.integers(2, 9))
        u = scipy.stats.unitary_group.rvs(dim, random_state=rng)
        d0 = rng.normal(size=dim)
        d1 = rng.integers(-3, 4, size=dim) * rng.uniform(0.2, 1.5)
        model = ParamHamiltonian((u * d0) @ u.conj().T, (u * d1) @ u.conj().T)
        beta, lam, eta = rng.uniform(0.2, 2.0), rng.uniform(-1, 1), rng.uniform(-2, 2)
        t = rng.uniform(0, 20, size=16)
        diff = np.abs(coherence_dynamics(model, beta, lam, eta, t) - coherence_identity(model, beta, lam, eta, t))
        worst = max(worst, float(np.max(diff)))
    return [Check("dynamics_vs_identity", worst <= tol, worst, tol)]


def cauchy_suite(tol=1e-8, seed=SEED + 3):
    """Contour closure on a circle for the single spin, inside and outside."""
    rng = np.random.default_rng(seed)
    beta, center, radius = 1.0, 0.3, 1.0
    z = circle_contour(center, radius, 256)
    f = partition_function("SingleSpin", beta, z)
    r_in = radius * 0.6 * np.sqrt(rng.uniform(size=20))
    inner = center + r_in * np.exp(2j * math.pi * rng.uniform(size=20))
    r_out = radius * rng.uniform(1.5, 3.0, size=20)
    outer = center + r_out * np.exp(2j * math.pi * rng.uniform(size=20))
    rel_in = max(abs(cauchy_disk(z, f, p) / complex(partition_function("SingleSpin", beta, p)) - 1) for p in inner)
    rel_out = max(abs(cauchy_disk(z, f, p)) / abs(complex(partition_function("SingleSpin", beta, p))) for p in outer)
    return [Check("cauchy_interior", rel_in <= tol, rel_in, tol),
            Check("cauchy_exterior", rel_out <= tol, rel_out, tol)]


def _targets(rng, lo, hi, n=20):
    re = rng.uniform(lo, hi, size=n)
    im = np.where(np.arange(n) % 2 == 0, 0.0, rng.uniform(-1.0, 1.0, size=n))
    return re + 1j * im


def oracle_suite(tol=1e-6, seed=SEED + 4):
    """Strip and half-plane reconstructions against direct evaluation."""
    rng = np.random.default_rng(seed)
    osc8 = build_model(ModelSpec("Oscillator", fock_cutoff=8))
    checks = []
    for name, source, l1, l2 in (("single_spin", "SingleSpin", -1.0, 1.5), ("oscillator_k8", osc8, 0.5, 2.5)):
        cfg = ReconstructionConfig(line1=l1, line2=l2)
        for path, fn, lo, hi in (("two_lines", reconstruct_two_lines, l1, l2),
                                 ("right_half", reconstruct_right_half, l1, l1 + 3.0),
                                 ("left_half", reconstruct_left_half, l2 - 3.0, l2)):
            worst = 0.0
            for p in _targets(rng, lo + 0.05, hi - 0.05):
                want = complex(partition_function(source, 1.0, p))
                worst = max(worst, abs(fn(source, 1.0, cfg, p).value / want - 1))
            checks.append(Check(f"{name}_{path}", worst <= tol, worst, tol))
    return checks


def m_invariance_suite(tol=2e-6):
    values = [reconstruct_right_half("Oscillator", 1.0, ReconstructionConfig(line1=1.0, m_minus=m), 2.0).value
              for m in (-0.25, -0.5, -1.0)]
    spread = max(abs(a / b - 1) for a in values for b in values)
    return [Check("m_invariance", spread <= tol, spread, tol)]


def figure_suite():
    """Free-energy sweep and coherence transport from one oscillator trace."""
    tr = sample_trace("Oscillator", 1.0, 1.0, 1.0, 100)
    xs = np.round(np.arange(0.5, 3.0 + 1e-9, 0.05), 12)
    exact = (1 - math.exp(-1)) / (1 - np.exp(-xs))
    checks = []
    for quad, tol, limit in (("FourierResum", 1e-6, 1e-6), ("TruncatedAdaptive", 1e-3, 1e-2)):
        cfg = ReconstructionConfig(quad=quad, tol=tol)
        got = np.array([free_energy_difference(tr, x, cfg).ratio for x in xs])
        rel = float(np.max(np.abs(got / exact - 1)))
        checks.append(Check(f"free_energy_{quad}", rel <= limit, rel, limit))
    t = np.arange(100) * (2 * math.pi / 100)
    got = coherence_transport(tr, 2.0, t, ReconstructionConfig())
    err = float(np.max(np.abs(got - (1 - math.exp(-2)) / (1 - np.exp(-2 - 1j * t)))))
    checks.append(Check("coherence_transport", err <= 1e-6, err, 1e-6))
    return checks


def effective_hamiltonian_suite():
    """Dispersive coupling at the device numbers and H_eff's spectral error."""
    params = SpinOscillatorParams(2.87, 3.0, 1e-3)
    eta = eta_coupling(params.delta_split, params.omega, params.coupling)
    ok_eta = math.isclose(eta, -1.57e-5, rel_tol=0.01)
    period = abs(2 * math.pi / eta)
    dev = verify_effective_hamiltonian(params, 30)
    return [Check("eta_value", ok_eta, eta, -1.57e-5),
            Check("period_order_1e5_ns", 1e5 <= period < 1e6, period, 4e5),
            Check("spectral_deviation_ghz", dev <= 1e-8, dev, 1e-8)]


SUITES = {
    "vertical_bound": vertical_bound_suite,
    "bernstein": bernstein_suite,
    "commuting": commuting_suite,
    "cauchy": cauchy_suite,
    "oracle": oracle_suite,
    "m_invariance": m_invariance_suite,
    "figures": figure_suite,
    "effective_hamiltonian": effective_hamiltonian_suite,
}


def run_all(mapper=map):
    """[(suite, seconds, checks)] in a fixed order."""
    def timed(item):
        name, fn = item
        t0 = time.perf_counter()
        checks = fn()
        return name, time.perf_counter() - t0, checks

    return list(mapper(timed, SUITES.items()))
