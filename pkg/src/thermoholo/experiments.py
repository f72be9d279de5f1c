"""Figure and sweep computations behind the command line.

Each runner takes an :class:`~thermoholo.config.ExperimentConfig` and a
``mapper`` with the semantics of the builtin ``map`` (results in input
order), and returns a :class:`RunResult` holding CSV rows plus the tolerance
checks that decide the exit status.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .coherence import coherence_identity, sample_trace
from .holography import (
    ExperimentResult,
    coherence_transport,
    free_energy_difference,
    reconstruct_from_coherence,
)
from .models import ModelKind, build_model
from .quadrature import interpolate_trace
from .spectral import partition_function


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    threshold: float


@dataclass
class RunResult:
    name: str
    header: list
    rows: list
    checks: list = field(default_factory=list)
    result: ExperimentResult = None
    trace: object = None

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def make_source(cfg):
    """Closed form where one exists, otherwise the explicit matrices."""
    spec = cfg.model
    if spec.kind is ModelKind.SINGLE_SPIN:
        return ModelKind.SINGLE_SPIN.value
    if spec.kind is ModelKind.OSCILLATOR and spec.fock_cutoff is None:
        return ModelKind.OSCILLATOR.value
    return build_model(spec, beta=cfg.beta, omega=max(cfg.lambda0, 1e-3))


def make_trace(cfg, source, lambda0=None, n_samples=None):
    lam = cfg.lambda0 if lambda0 is None else lambda0
    n = cfg.n_samples if n_samples is None else n_samples
    return sample_trace(source, cfg.beta, lam, cfg.eta, n, cfg.horizon, cfg.trace_path)


def _ratio_exact(source, beta, lam0, lam):
    return complex(partition_function(source, beta, complex(lam)) / partition_function(source, beta, complex(lam0)))


def run_trace(cfg, mapper=map):
    source = make_source(cfg)
    tr = make_trace(cfg, source)
    rows = list(zip(tr.times, tr.values.real, tr.values.imag))
    check = Check("s_plus_at_zero", abs(tr.values[0] - 1) <= cfg.tol, abs(tr.values[0] - 1), cfg.tol)
    return RunResult("trace", ["t_ns", "s_plus_re", "s_plus_im"], rows, [check], trace=tr)


def run_figure2b(cfg, mapper=map):
    """Probe coherence (S_x, S_y) against ηt over one period."""
    source = make_source(cfg)
    tr = make_trace(cfg, source)
    exact = np.asarray(coherence_identity(source, cfg.beta, cfg.lambda0, cfg.eta, tr.times))
    err = float(np.max(np.abs(tr.values - exact)))
    rows = list(zip(cfg.eta * tr.times, tr.values.real, tr.values.imag))
    checks = [
        Check("initial_coherence", abs(tr.values[0] - 1) <= cfg.tol, abs(tr.values[0] - 1), cfg.tol),
        Check("max_abs_err_vs_identity", err <= cfg.tol, err, cfg.tol),
    ]
    return RunResult("fig2b", ["eta_t", "s_x", "s_y"], rows, checks)


def _free_energy_rows(cfg, source, tr, targets, mapper, recon=None):
    recon = cfg.recon if recon is None else recon
    lam0 = tr.lambda0

    def one(z):
        x = float(z.real)
        got = free_energy_difference(tr, x, recon).ratio
        want = _ratio_exact(source, cfg.beta, lam0, x).real
        return cfg.beta * x, got, want, abs(got - want)

    return list(mapper(one, targets))


def run_figure2c(cfg, mapper=map):
    """exp(−β[F(λ′) − F(λ0)]) over the configured βλ′ targets."""
    source = make_source(cfg)
    tr = make_trace(cfg, source)
    rows = _free_energy_rows(cfg, source, tr, cfg.targets, mapper)
    rel = max(r[3] / abs(r[2]) for r in rows)
    checks = [Check("max_rel_err", rel <= cfg.tol, rel, cfg.tol)]
    return RunResult("fig2c", ["beta_omega_prime", "ratio_recon", "ratio_exact", "abs_err"], rows, checks)


def run_figure3(cfg, mapper=map):
    """Coherence transported to βλ′ = transport.target over one period of t′."""
    source = make_source(cfg)
    tr = make_trace(cfg, source)
    lam = cfg.transport_target / cfg.beta
    period = tr.period if tr.period is not None else tr.horizon
    times = np.arange(cfg.n_times) * (period / cfg.n_times)
    chunks = np.array_split(times, max(1, min(len(times), 8)))
    got = np.concatenate(list(mapper(lambda ts: np.atleast_1d(coherence_transport(tr, lam, ts, cfg.recon)), chunks)))
    exact = np.atleast_1d(coherence_identity(source, cfg.beta, lam, cfg.eta, times))
    err = float(np.max(np.abs(got - exact)))
    rows = list(zip(cfg.eta * times, got.real, got.imag, exact.real, exact.imag))
    checks = [Check("max_abs_err", err <= cfg.tol, err, cfg.tol)]
    header = ["eta_t_prime", "sx_recon", "sy_recon", "sx_exact", "sy_exact"]
    return RunResult("fig3", header, rows, checks)


def run_reconstruct(cfg, mapper=map):
    """Ξ at the targets from traces simulated on the configured lines."""
    source = make_source(cfg)
    recon = cfg.recon
    single = recon.line1 is None and recon.line2 is None
    lines = [cfg.lambda0] if single else [x for x in (recon.line1, recon.line2) if x is not None]
    traces = [make_trace(cfg, source, lambda0=x) for x in lines]
    anchors = cfg.anchors or None
    src = None if anchors and all(x in anchors for x in lines) else source

    def one(z):
        for tr in traces:
            if z.real == tr.lambda0:
                # measured directly: Ξ(λ0 + iy) = Ξ(λ0)·S(t = βy/η)
                if anchors and tr.lambda0 in anchors:
                    anchor = anchors[tr.lambda0]
                else:
                    anchor = partition_function(source, cfg.beta, tr.lambda0)
                return complex(anchor) * complex(_trace_at(tr, cfg.beta * z.imag / tr.eta))
        use = recon
        if single:
            # the one trace serves as λ1 for targets on its right, λ2 on its left
            use = recon.replace(line1=cfg.lambda0) if z.real >= cfg.lambda0 else recon.replace(line2=cfg.lambda0)
        return reconstruct_from_coherence(traces, use, z, anchors, src).value

    values = np.array(list(mapper(one, cfg.targets)))
    reference = partition_function(source, cfg.beta, cfg.targets)
    result = ExperimentResult(cfg.targets, values, reference, {"config": cfg.document})
    worst = float(np.max(result.rel_err))
    checks = [Check("max_rel_err", worst <= cfg.tol, worst, cfg.tol)]
    return RunResult("reconstruct", [], [], checks, result)


def _trace_at(tr, t):
    if tr.period is not None and tr.spans_period:
        return interpolate_trace(tr, np.array([t]))[0]
    return np.interp(t, tr.times, tr.values.real) + 1j * np.interp(t, tr.times, tr.values.imag)


def _trend_check(name, errors, floor, increasing_with_index):
    """Monotone within ``floor``: errors never drop (or rise) by more than it."""
    diffs = np.diff(errors)
    worst = float(np.max(-diffs if increasing_with_index else diffs, initial=0.0))
    return Check(name, worst <= floor, worst, floor)


def run_error_sweep(cfg, mapper=map):
    """Max relative error of the free-energy task along one varied axis."""
    source = make_source(cfg)
    axis, values = cfg.sweep_axis, cfg.sweep_values
    errors = []
    for v in values:
        if axis == "n_samples":
            tr = make_trace(cfg, source, n_samples=int(v))
            targets, recon = cfg.targets, cfg.recon.replace(on_budget="warn")
        elif axis == "distance":
            tr = make_trace(cfg, source)
            targets, recon = np.array([cfg.lambda0 + v / cfg.beta + 0j]), cfg.recon
        else:
            tr = make_trace(cfg, source)
            side = 1 if axis == "m_minus" else -1
            targets = np.array([z for z in cfg.targets if side * (z.real - cfg.lambda0) > 0])
            recon = cfg.recon.replace(**{axis: float(v)})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            rows = _free_energy_rows(cfg, source, tr, targets, mapper, recon)
        errors.append(max(r[3] / abs(r[2]) for r in rows))
    rows = list(zip(values, errors))
    errs = np.array(errors)
    checks = []
    if len(values) > 1:
        if axis == "n_samples":
            order = np.argsort(values)
            checks.append(_trend_check("error_non_increasing_in_samples", errs[order], cfg.sweep_floor, False))
        elif axis == "distance":
            order = np.argsort(values)[::-1]
            checks.append(_trend_check("error_non_decreasing_toward_line", errs[order], cfg.sweep_floor, True))
        else:
            spread = float(np.max(errs) - np.min(errs))
            checks.append(Check("m_invariance", spread <= 2 * cfg.tol, spread, 2 * cfg.tol))
    return RunResult("sweep", [axis, "max_err"], rows, checks)


RUNNERS = {
    "trace": run_trace,
    "fig2b": run_figure2b,
    "fig2c": run_figure2c,
    "fig3": run_figure3,
    "reconstruct": run_reconstruct,
    "sweep": run_error_sweep,
}

