#!/usr/bin/env python3
"""Run the bundled demonstration scenarios and print a summary table.

By default the fast scenarios run; ``--include-slow`` adds the full-size
ones.  Result files (CSV + JSON per scenario) are written under ``--out``.

Examples::

    python3 scripts/run_scenarios.py
    python3 scripts/run_scenarios.py --scenario fig6 --out results
    python3 scripts/run_scenarios.py --include-slow --jobs 4
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from gdesprit.harness import (
    bundled_scenarios,
    bundled_spec,
    run_experiment,
    singular_value_table,
)

SLOW = ("fig1", "fig2", "fig4")


def summarize(name: str, results, elapsed: float) -> None:
    failures = [r for r in results if r.failed]
    ok = [r for r in results if not r.failed]
    print(f"{name}: {len(results)} runs in {elapsed:.1f}s, {len(failures)} failed")
    if failures:
        reasons = sorted({r.error for r in failures})
        for reason in reasons:
            print(f"  failure: {reason}")
    if not ok:
        return
    ratios = sorted({r.noise_ratio for r in ok})
    for ratio in ratios:
        errs = [float(np.max(r.lambda_errors)) for r in ok if r.noise_ratio == ratio]
        label = "noise-free" if ratio == 0 else f"ratio {ratio:.3e}"
        print(
            f"  {label}: median max node error {np.median(errs):.3e}, "
            f"worst {max(errs):.3e}"
        )
    if len(ratios) > 1:
        K = len(ok[0].lambda_errors)
        table = singular_value_table(results)
        print(f"  rank jump sigma_{K}/sigma_{K + 1} of the median spectrum:")
        for ratio, spectrum in table.items():
            print(f"    ratio {ratio:.3e}: {spectrum[K - 1] / spectrum[K]:.1f}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--scenario",
        action="append",
        choices=bundled_scenarios(),
        help="run only this scenario (repeatable)",
    )
    parser.add_argument("--include-slow", action="store_true", help="add the full-size scenarios")
    parser.add_argument("--out", default="results", help="output directory (default: results)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    args = parser.parse_args(argv)

    if args.scenario:
        names = list(dict.fromkeys(args.scenario))
    else:
        names = [n for n in bundled_scenarios() if args.include_slow or n not in SLOW]

    for name in names:
        spec = bundled_spec(name, output=args.out)
        start = time.perf_counter()
        results = run_experiment(spec, jobs=args.jobs)
        summarize(name, results, time.perf_counter() - start)
    print(f"result files written under {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
