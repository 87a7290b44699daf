"""Command-line front end.

Subcommands:

* ``run``            execute an experiment config (JSON), write regret CSV
* ``sweep``          worst-case deterministic sweep over seller values
* ``verify``         run the empirical verification suites, write JSON
* ``list-envs``      registered environment id patterns
* ``list-learners``  registered learner id patterns

Exit codes: 0 success, 1 failed verify check, 2 config/parse error (also
unknown suite), 3 unresolvable environment or learner id.

Config format (run): ``{"output": "curves.csv", "runs": [{"learner":
"conv-pricing", "env": "lb-mu", "horizons": [1000, 10000], "n_episodes":
50, "base_seed": 1, "feedback": "two-bit"}, ...]}``.  The env field takes
an id string or an inline object (see environments.env_from_config).
Identical config and seeds produce byte-identical CSV.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .algorithms import LEARNER_ID_PATTERNS, parse_learner
from .environments import ENVIRONMENT_ID_PATTERNS, FeedbackModel, UnknownIdError, env_from_config
from .harness import (
    FeedbackMismatchError,
    RunConfig,
    adversarial_deterministic_sweep,
    fit_exponent,
    run_monte_carlo,
)
from .verify import UnknownSuiteError, resolve_suite_names, run_suites

_CSV_HEADER = ("algorithm", "env", "T", "n_episodes", "mean_regret", "stderr", "slope")


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _resolve_threads(value) -> int:
    if value is None:
        value = os.environ.get("FTL_THREADS", "1")
    threads = int(value)
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    return threads


def _parse_horizons(entry: dict) -> list:
    if "horizons" in entry:
        hs = [int(t) for t in entry["horizons"]]
    else:
        hs = [int(entry["horizon"])]
    if not hs:
        raise ValueError("a run needs at least one horizon")
    if hs != sorted(hs):
        raise ValueError(f"horizons must be sorted ascending, got {hs}")
    return hs


def cmd_run(args) -> int:
    threads = _resolve_threads(args.threads)
    with open(args.config, "r", encoding="utf-8") as fh:
        config = json.load(fh)
    out_path = args.out or config.get("output")
    if not out_path:
        raise ValueError("no output path: pass --out or set 'output' in the config")
    runs = config.get("runs")
    if not isinstance(runs, list) or not runs:
        raise ValueError("config needs a non-empty 'runs' list")
    rows = []
    for entry in runs:
        spec = parse_learner(entry["learner"])
        env = env_from_config(entry["env"])
        feedback = FeedbackModel.parse(entry["feedback"]) if "feedback" in entry else None
        horizons = _parse_horizons(entry)
        n_episodes = int(entry.get("n_episodes", 1))
        base_seed = int(entry.get("base_seed", args.seed if args.seed is not None else 0))
        cfg = RunConfig(
            env=env,
            learner=spec,
            horizon=horizons[0],
            n_episodes=n_episodes,
            base_seed=base_seed,
            feedback=feedback,
            strict_feedback=args.strict_feedback,
        )
        curve = run_monte_carlo(cfg, horizons=horizons, threads=threads)
        slope = ""
        if len(horizons) >= 3 and all(m > 0.0 for m in curve.means):
            slope = _fmt(fit_exponent(curve).slope)
        for T, mean, stderr in zip(curve.horizons, curve.means, curve.stderrs):
            rows.append(
                (spec.learner_id, env.env_id, str(T), str(n_episodes), _fmt(mean), _fmt(stderr), slope)
            )
        print(
            f"{spec.learner_id} on {env.env_id}: "
            + ", ".join(f"T={t} regret={_fmt(m)}" for t, m in zip(curve.horizons, curve.means))
        )
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {out_path}")
    return 0


def cmd_sweep(args) -> int:
    spec = parse_learner(args.learner)
    s_values = np.linspace(args.s_min, args.s_max, args.points)
    report = adversarial_deterministic_sweep(
        spec, args.horizon, s_values=s_values, buyer=args.buyer
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("s", "regret"))
            for s, r in zip(report.s_values, report.regrets):
                writer.writerow((_fmt(s), _fmt(r)))
    print(
        f"sweep {spec.learner_id} T={report.horizon} b={_fmt(report.buyer)}: "
        f"max regret {_fmt(report.max_regret)} at s={_fmt(report.argmax_s)}"
    )
    return 0


def cmd_verify(args) -> int:
    threads = _resolve_threads(args.threads)
    names = resolve_suite_names(args.suite)
    rows = run_suites(names, threads=threads)
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        print(
            f"{status} {r.check}: measured={r.measured:.6g} "
            f"tolerance={r.tolerance:.6g} ({r.runtime_ms:.0f} ms)"
        )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump([r.as_dict() for r in rows], fh, indent=2)
            fh.write("\n")
        print(f"wrote {len(rows)} checks to {args.out}")
    return 0 if all(r.passed for r in rows) else 1


def cmd_list_envs(args) -> int:
    for pattern in ENVIRONMENT_ID_PATTERNS:
        print(pattern)
    print('inline: {"joint": [[s, b, w], ...]} or {"independent": {"seller": [[v, w], ...], "buyer": [[v, w], ...]}}')
    return 0


def cmd_list_learners(args) -> int:
    for pattern in LEARNER_ID_PATTERNS:
        print(pattern)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairtrade",
        description="Posted-price bilateral trade simulations: regret curves, "
        "worst-case sweeps, and verification suites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment config, write regret CSV")
    run_p.add_argument("--config", required=True, help="JSON experiment file")
    run_p.add_argument("--out", help="output CSV path (overrides the config's 'output')")
    run_p.add_argument("--threads", type=int, default=None, help="episode workers (or FTL_THREADS)")
    run_p.add_argument("--seed", type=int, default=None, help="default base_seed for runs lacking one")
    run_p.add_argument("--strict-feedback", action="store_true", help="forbid deriving two bits from full feedback")
    run_p.set_defaults(handler=cmd_run)

    sweep_p = sub.add_parser("sweep", help="worst-case deterministic sweep over seller values")
    sweep_p.add_argument("--learner", required=True, help="deterministic two-bit learner id")
    sweep_p.add_argument("--horizon", type=int, required=True)
    sweep_p.add_argument("--points", type=int, default=4097, help="grid points (default 4097)")
    sweep_p.add_argument("--s-min", type=float, default=0.0)
    sweep_p.add_argument("--s-max", type=float, default=0.25)
    sweep_p.add_argument("--buyer", type=float, default=1.0)
    sweep_p.add_argument("--out", help="per-point CSV path")
    sweep_p.set_defaults(handler=cmd_sweep)

    verify_p = sub.add_parser("verify", help="run verification suites, write JSON report")
    verify_p.add_argument("--suite", default="all", help="suite name or 'all'")
    verify_p.add_argument("--out", help="JSON report path")
    verify_p.add_argument("--threads", type=int, default=None, help="episode workers (or FTL_THREADS)")
    verify_p.set_defaults(handler=cmd_verify)

    sub.add_parser("list-envs", help="registered environment ids").set_defaults(
        handler=cmd_list_envs
    )
    sub.add_parser("list-learners", help="registered learner ids").set_defaults(
        handler=cmd_list_learners
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except UnknownIdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except UnknownSuiteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        FeedbackMismatchError,
        json.JSONDecodeError,
        OSError,
        KeyError,
        TypeError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
