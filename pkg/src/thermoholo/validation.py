"""Input checks shared by the estimators and the command line."""
from __future__ import annotations

import math

import numpy as np

from .coherence import CoherenceTrace
from .errors import HolographyError


def check_beta(beta):
    beta = float(beta)
    if not (math.isfinite(beta) and beta > 0):
        raise HolographyError(f"β must be finite and positive, got {beta}")
    return beta


def check_targets(targets, real=False):
    """Targets as a finite 1-D array, complex unless ``real``."""
    arr = np.atleast_1d(np.asarray(targets))
    if arr.ndim != 1 or arr.size == 0:
        raise HolographyError("targets must be a non-empty 1-D sequence")
    if real:
        if np.iscomplexobj(arr) and np.any(arr.imag != 0):
            raise HolographyError("targets must be real")
        arr = np.real(arr).astype(float)
    else:
        arr = arr.astype(complex)
    if not np.all(np.isfinite(arr)):
        raise HolographyError("targets must be finite")
    return arr


def check_traces(traces):
    """A single trace or a sequence of traces with a common β and η."""
    if isinstance(traces, CoherenceTrace):
        traces = [traces]
    traces = list(traces)
    if not traces:
        raise HolographyError("no coherence traces given")
    for tr in traces:
        if not isinstance(tr, CoherenceTrace):
            raise HolographyError(f"expected CoherenceTrace, got {type(tr).__name__}")
    if len({tr.beta for tr in traces}) != 1:
        raise HolographyError("traces were recorded at different β")
    if len({tr.lambda0 for tr in traces}) != len(traces):
        raise HolographyError("two traces share a line")
    return traces
