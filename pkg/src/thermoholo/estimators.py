"""Estimator-style wrappers: fit on coherence traces, predict at targets.

The estimators follow the scikit-learn conventions (constructor arguments are
hyperparameters, ``fit`` returns self, fitted state ends in an underscore), so
``get_params``/``set_params``/``clone`` work as usual.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .holography import (
    ReconstructionConfig,
    coherence_transport,
    free_energy_difference,
    reconstruct_from_coherence,
)
from .validation import check_targets, check_traces


class _HoloBase(BaseEstimator):
    def __init__(self, m_minus=None, m_plus=None, quad="FourierResum", tol=1e-6):
        self.m_minus = m_minus
        self.m_plus = m_plus
        self.quad = quad
        self.tol = tol

    def _config(self, **lines):
        return ReconstructionConfig(m_minus=self.m_minus, m_plus=self.m_plus,
                                    quad=self.quad, tol=self.tol, **lines)


class PartitionHologram(_HoloBase):
    """Ξ(β, λ′) at arbitrary targets from traces on one or two lines.

    With two traces the left one is λ1 and the right one λ2; targets between
    them use the strip formula, the others the half-plane on their side.
    """

    def fit(self, traces, anchors=None, source=None):
        """``anchors`` maps line position → Ξ there; ``source`` computes missing ones."""
        traces = sorted(check_traces(traces), key=lambda tr: tr.lambda0)
        if len(traces) > 2:
            raise ValueError("at most two lines are supported")
        lines = [tr.lambda0 for tr in traces]
        line1 = lines[0]
        line2 = lines[1] if len(lines) == 2 else lines[0]
        self.config_ = self._config(line1=line1, line2=line2 if len(lines) == 2 else None)
        self.left_config_ = self.config_.replace(line1=None, line2=line2)
        self.traces_ = traces
        self.anchors_ = anchors
        self.source_ = source
        return self

    def predict(self, targets):
        check_is_fitted(self, "config_")
        targets = check_targets(targets)
        out = np.empty(targets.shape, dtype=complex)
        for i, z in enumerate(targets):
            cfg = self.config_ if z.real > self.config_.line1 else self.left_config_
            r = reconstruct_from_coherence(self.traces_, cfg, z, self.anchors_, self.source_)
            out[i] = r.value
        return out


class FreeEnergyHologram(TransformerMixin, _HoloBase):
    """exp(−β[F(λ′) − F(λ)]) from a single coherence trace at λ.

    ``predict`` returns the Boltzmann ratio, ``transform`` the free-energy
    difference ΔF itself.
    """

    def fit(self, trace, y=None):
        (self.trace_,) = check_traces(trace)
        self.config_ = self._config()
        return self

    def _solve(self, targets):
        check_is_fitted(self, "trace_")
        targets = check_targets(targets, real=True)
        return [free_energy_difference(self.trace_, x, self.config_) for x in targets]

    def predict(self, targets):
        return np.array([r.ratio for r in self._solve(targets)])

    def transform(self, targets):
        return np.array([r.delta_f for r in self._solve(targets)])


class CoherenceTransporter(_HoloBase):
    """Probe coherence at a new parameter ``target`` from a trace at λ.

    ``predict`` takes the times t′ at which ⟨S₊(target, t′)⟩ is wanted.
    """

    def __init__(self, target=2.0, m_minus=None, m_plus=None, quad="FourierResum", tol=1e-6):
        super().__init__(m_minus=m_minus, m_plus=m_plus, quad=quad, tol=tol)
        self.target = target

    def fit(self, trace, y=None):
        (self.trace_,) = check_traces(trace)
        self.config_ = self._config()
        return self

    def predict(self, times):
        check_is_fitted(self, "trace_")
        times = check_targets(times, real=True)
        return coherence_transport(self.trace_, float(self.target), times, self.config_)
