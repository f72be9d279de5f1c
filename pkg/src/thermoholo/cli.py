"""Command-line runner.

    thermoholo <verb> [--config PATH] [--out DIR] [--workers N] [--tol X]

Verbs: trace, fig2b, fig2c, fig3, reconstruct, sweep, verify.  Each flag
falls back to an environment variable THERMOHOLO_<FLAG> (for example
THERMOHOLO_WORKERS=4).  The exit status is 0 exactly when every tolerance
check of the run passes, 1 when one fails and 2 on invalid input or a
reconstruction that cannot be carried out.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path

from . import _io
from .config import ENV_PREFIX, load
from .errors import HolographyError
from .experiments import RUNNERS
from .verification import run_all

VERBS = (*RUNNERS, "verify")


def _env(name, default=None):
    return os.environ.get(ENV_PREFIX + name.upper(), default)


def build_parser():
    p = argparse.ArgumentParser(prog="thermoholo", description=__doc__.split("\n\n")[0])
    p.add_argument("verb", choices=VERBS)
    p.add_argument("--config", default=_env("config"), help="JSON experiment config")
    p.add_argument("--out", default=_env("out", "results"), help="output directory")
    p.add_argument("--workers", type=int, default=int(_env("workers", "1")), help="parallel workers")
    p.add_argument("--tol", type=float, default=_env("tol"), help="override the reconstruction tolerance")
    return p


@contextmanager
def _mapper(workers):
    if workers <= 1:
        yield map
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        yield pool.map


def _write_table(path, document, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(_io.comment_block(document))
        _io.write_rows(fh, header, rows)


def _checks_json(checks):
    return [{"name": c.name, "passed": bool(c.passed), "value": float(c.value),
             "threshold": float(c.threshold)} for c in checks]


def _report(prefix, checks):
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {prefix}{c.name}: {float(c.value):.3e} (threshold {float(c.threshold):.3e})")


def _run_experiment(args):
    cfg = load(args.config, args.tol)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with _mapper(args.workers) as mapper:
        run = RUNNERS[args.verb](cfg, mapper)
    doc = cfg.document
    if cfg.outputs.get("csv", True):
        if run.result is not None:
            with open(out / f"{run.name}.csv", "w", newline="") as fh:
                run.result.to_csv(fh)
        elif run.trace is not None:
            run.trace.to_csv(out / f"{run.name}.csv", header=doc)
        else:
            _write_table(out / f"{run.name}.csv", doc, run.header, run.rows)
    if cfg.outputs.get("json", True):
        if run.result is not None:
            payload = json.loads(run.result.to_json())
        else:
            payload = {"config": doc, "columns": run.header, "rows": [list(map(float, r)) for r in run.rows]}
        payload["checks"] = _checks_json(run.checks)
        with open(out / f"{run.name}.json", "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=_io._jsonable)
    _report("", run.checks)
    return 0 if run.passed else 1


def _run_verify(args):
    t0 = time.perf_counter()
    with _mapper(args.workers) as mapper:
        results = run_all(mapper)
    elapsed = time.perf_counter() - t0
    ok = True
    doc = {"suites": [], "seconds": elapsed}
    for name, seconds, checks in results:
        _report(f"{name}.", checks)
        ok &= all(c.passed for c in checks)
        doc["suites"].append({"name": name, "seconds": seconds, "checks": _checks_json(checks)})
    print(f"verify finished in {elapsed:.1f} s")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "verify.json", "w") as fh:
        json.dump(doc, fh, indent=2)
    return 0 if ok else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "verify":
            return _run_verify(args)
        return _run_experiment(args)
    except HolographyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
