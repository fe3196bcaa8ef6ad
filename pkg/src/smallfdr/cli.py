"""Command-line interface.

Subcommands cover local FDR estimation from a p-value table, the step-up
control rule, the mixture simulation grid, exact small-N coverage, and the
abundance-table t-test pipeline.  Every file written gets a sidecar
manifest recording parameters, seeds, and input digests, and all numeric
output uses 12 significant digits so reruns are byte-identical.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from datetime import datetime, timezone

from . import __version__
from .ingest import (
    TableFormatError,
    load_abundance_csv,
    load_pvalues_csv,
    shift_log_transform,
    two_sample_t_pvalues,
)
from .lfdr import bh_lfdr_link, lfdr_estimates
from .nfdr import KIND_CORRECTED, KIND_MEAN, KIND_MLE, NumericFailure
from .simulate import (
    POOLING_PER_REPLICATE,
    POOLING_POOLED,
    SimulationConfig,
    exact_small_n_coverage,
    run_grid,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

SEED_ENV_VAR = "SMALLFDR_SEED"

ESTIMATOR_FLAGS = {"mle": KIND_MLE, "corrected": KIND_CORRECTED, "mean": KIND_MEAN}


class UsageError(Exception):
    """Bad flag values discovered after argparse."""


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        seed = args.seed
    else:
        raw = os.environ.get(SEED_ENV_VAR)
        if raw is None:
            return 0
        try:
            seed = int(raw)
        except ValueError:
            raise UsageError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None
    if seed < 0:
        raise UsageError(f"seed must be nonnegative, got {seed}")
    return seed


def _parse_float_grid(text: str, flag: str) -> list[float]:
    """Comma-separated values; 'start:stop:step' pieces expand to ranges."""
    values: list[float] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            pieces = part.split(":")
            if len(pieces) != 3:
                raise UsageError(f"{flag}: range syntax is start:stop:step, got {part!r}")
            try:
                start, stop, step = (float(v) for v in pieces)
            except ValueError:
                raise UsageError(f"{flag}: non-numeric range piece in {part!r}") from None
            if step <= 0.0:
                raise UsageError(f"{flag}: range step must be positive, got {step}")
            v = start
            while v <= stop + 1e-12:
                values.append(round(v, 12))
                v += step
        else:
            try:
                values.append(float(part))
            except ValueError:
                raise UsageError(f"{flag}: non-numeric value {part!r}") from None
    if not values:
        raise UsageError(f"{flag}: empty grid")
    return values


def _parse_int_grid(text: str, flag: str) -> list[int]:
    values: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            values.append(int(part))
        except ValueError:
            raise UsageError(f"{flag}: non-integer value {part!r}") from None
    if not values:
        raise UsageError(f"{flag}: empty grid")
    return values


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return f"sha256:{digest.hexdigest()}"


def _write_manifest(out_path: str, command: str, params: dict, inputs: list[str],
                    outputs: list[str]) -> None:
    manifest = {
        "tool": "smallfdr",
        "version": __version__,
        "command": command,
        "parameters": params,
        "inputs": {p: _sha256(p) for p in inputs},
        "outputs": {p: _sha256(p) for p in outputs},
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    with open(out_path + ".manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _emit_table(header: list[str], rows: list[tuple], args, command: str,
                params: dict, inputs: list[str]) -> None:
    """Write a CSV table to --out (with manifest, optional JSON mirror) or stdout."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    payload = buffer.getvalue()
    out = getattr(args, "out", None)
    if out is None:
        sys.stdout.write(payload)
        return
    with open(out, "w", encoding="utf-8", newline="") as handle:
        handle.write(payload)
    outputs = [out]
    if getattr(args, "json", False):
        mirror = os.path.splitext(out)[0] + ".json"
        records = [
            {key: (None if value == "" else value) for key, value in zip(header, row)}
            for row in rows
        ]
        with open(mirror, "w", encoding="utf-8") as handle:
            json.dump(records, handle, indent=2)
            handle.write("\n")
        outputs.append(mirror)
    _write_manifest(out, command, params, inputs, outputs)


def cmd_lfdr(args) -> int:
    seed = _resolve_seed(args)
    if args.mc_draws < 1:
        raise UsageError(f"--mc-draws must be at least 1, got {args.mc_draws}")
    pvals = load_pvalues_csv(args.input, tie_break_seed=seed)
    result = lfdr_estimates(
        pvals, ESTIMATOR_FLAGS[args.estimator], mc_draws=args.mc_draws, seed=seed
    )
    rows = [
        (
            row.id,
            row.p,
            row.rank,
            row.raw_estimate,
            row.raw_estimate if args.no_monotone else row.monotone_estimate,
        )
        for row in result.rows
    ]
    params = {
        "input": args.input,
        "estimator": args.estimator,
        "mc_draws": args.mc_draws,
        "seed": seed,
        "no_monotone": args.no_monotone,
    }
    _emit_table(
        ["id", "p", "rank", "raw_lfdr", "monotone_lfdr"],
        rows,
        args,
        "lfdr",
        params,
        [args.input],
    )
    return EXIT_OK


def cmd_bh(args) -> int:
    seed = _resolve_seed(args)
    if not 0.0 < args.q < 1.0:
        raise UsageError(f"--q must lie in (0, 1), got {args.q}")
    pvals = load_pvalues_csv(args.input, tie_break_seed=seed)
    link = bh_lfdr_link(pvals, args.q)
    rejection = link.rejection
    lines = [
        f"controlled_level_q: {_fmt(args.q)}",
        f"rejections: {rejection.k_star}",
        f"threshold_rank: {rejection.k_star if rejection.k_star else 'none'}",
        f"threshold_p: {_fmt(rejection.threshold_p) if rejection.threshold_p is not None else 'none'}",
        f"rejected_ids: {','.join(rejection.rejected_ids) if rejection.rejected_ids else 'none'}",
    ]
    if link.applicable:
        lines += [
            f"median_rejected_rank: {link.median_rank}",
            f"median_rejected_id: {link.median_id}",
            f"median_rejected_p: {_fmt(link.median_p)}",
            f"mle_lfdr_at_median_rank: {_fmt(link.lfdr_at_median)}",
        ]
    else:
        lines += [
            "median_rejected_rank: not applicable",
            "mle_lfdr_at_median_rank: not applicable",
        ]
    sys.stdout.write("\n".join(lines) + "\n")
    if args.out is not None:
        rejected = set(rejection.rejected_ids)
        order = pvals.order()
        rows = [
            (
                pvals.ids[i],
                pvals.p_values[i],
                pvals.ranks[i],
                1 if pvals.ids[i] in rejected else 0,
            )
            for i in order
        ]
        params = {"input": args.input, "q": args.q, "seed": seed}
        _emit_table(["id", "p", "rank", "rejected"], rows, args, "bh", params, [args.input])
    return EXIT_OK


def cmd_simulate(args) -> int:
    seed = _resolve_seed(args)
    estimator_names = [name.strip() for name in args.estimators.split(",") if name.strip()]
    for name in estimator_names:
        if name not in ESTIMATOR_FLAGS:
            raise UsageError(
                f"--estimators: unknown estimator {name!r}; "
                f"choose from {','.join(ESTIMATOR_FLAGS)}"
            )
    try:
        config = SimulationConfig(
            pi0_grid=tuple(_parse_float_grid(args.pi0_grid, "--pi0-grid")),
            n_grid=tuple(_parse_int_grid(args.n_grid, "--n-grid")),
            delta=args.delta,
            replicates=args.reps,
            seed=seed,
            estimators=tuple(ESTIMATOR_FLAGS[name] for name in estimator_names),
            mc_draws=args.mc_draws,
            pooling=POOLING_PER_REPLICATE if args.per_replicate else POOLING_POOLED,
        )
    except ValueError as err:
        raise UsageError(str(err)) from None
    metrics = run_grid(config)
    metrics.sort(key=lambda row: (row.pi0, row.n, row.estimator))
    rows = [
        (
            row.pi0,
            row.n,
            row.estimator,
            row.rmse,
            row.conservatism_proportion,
            row.bias,
            row.replicate_count,
        )
        for row in metrics
    ]
    params = {
        "pi0_grid": list(config.pi0_grid),
        "n_grid": list(config.n_grid),
        "delta": config.delta,
        "replicates": config.replicates,
        "seed": seed,
        "estimators": list(config.estimators),
        "mc_draws": config.mc_draws,
        "pooling": config.pooling,
    }
    _emit_table(
        ["pi0", "n", "estimator", "rmse", "conservatism_proportion", "bias", "replicates"],
        rows,
        args,
        "simulate",
        params,
        [],
    )
    return EXIT_OK


def cmd_coverage_exact(args) -> int:
    alphas = _parse_float_grid(args.alpha_grid, "--alpha-grid")
    pis = _parse_float_grid(args.pi_grid, "--pi-grid")
    kind = ESTIMATOR_FLAGS[args.estimator]
    rows = []
    for alpha in alphas:
        if not 0.0 < alpha <= 1.0:
            raise UsageError(f"--alpha-grid values must lie in (0, 1], got {alpha}")
        for pi in pis:
            if not 0.0 <= pi <= 1.0:
                raise UsageError(f"--pi-grid values must lie in [0, 1], got {pi}")
            if pi < alpha:
                rows.append((alpha, pi, ""))
            else:
                rows.append((alpha, pi, exact_small_n_coverage(args.n, alpha, pi, kind)))
    params = {
        "n": args.n,
        "alpha_grid": alphas,
        "pi_grid": pis,
        "estimator": args.estimator,
    }
    _emit_table(["alpha", "pi", "coverage"], rows, args, "coverage-exact", params, [])
    return EXIT_OK


def cmd_ttest(args) -> int:
    seed = _resolve_seed(args)
    matrix = load_abundance_csv(args.input)
    if args.transform == "shift-log":
        matrix = shift_log_transform(matrix)
    pvals = two_sample_t_pvalues(matrix, tie_break_seed=seed)
    rows = list(zip(pvals.ids, pvals.p_values))
    params = {"input": args.input, "transform": args.transform, "seed": seed}
    _emit_table(["id", "p"], rows, args, "ttest", params, [args.input])
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smallfdr",
        description="Conservative false discovery rate estimation from very few p-values.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    seed_help = f"random seed (default: ${SEED_ENV_VAR} or 0)"

    p_lfdr = sub.add_parser("lfdr", help="estimate local FDRs from an 'id,p' table")
    p_lfdr.add_argument("input", help="p-value CSV with header 'id,p'")
    p_lfdr.add_argument(
        "--estimator", choices=sorted(ESTIMATOR_FLAGS), default="corrected"
    )
    p_lfdr.add_argument("--mc-draws", type=int, default=100,
                        help="Monte Carlo draws for the mean estimator")
    p_lfdr.add_argument("--seed", type=int, default=None, help=seed_help)
    p_lfdr.add_argument("--no-monotone", action="store_true",
                        help="skip monotonicity enforcement in the output column")
    p_lfdr.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    p_lfdr.add_argument("--json", action="store_true",
                        help="also write a JSON mirror next to --out")
    p_lfdr.set_defaults(func=cmd_lfdr)

    p_bh = sub.add_parser("bh", help="step-up rejection report at level q")
    p_bh.add_argument("input", help="p-value CSV with header 'id,p'")
    p_bh.add_argument("--q", type=float, required=True, help="control level in (0, 1)")
    p_bh.add_argument("--seed", type=int, default=None, help=seed_help)
    p_bh.add_argument("--out", default=None, help="optional per-hypothesis CSV")
    p_bh.add_argument("--json", action="store_true",
                      help="also write a JSON mirror next to --out")
    p_bh.set_defaults(func=cmd_bh)

    p_sim = sub.add_parser("simulate", help="mixture-model error metrics over a grid")
    p_sim.add_argument("--pi0-grid", default="0.5,0.75,0.9,1.0")
    p_sim.add_argument("--n-grid", default="2,4,8,16,32")
    p_sim.add_argument("--delta", type=float, default=2.0)
    p_sim.add_argument("--reps", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=None, help=seed_help)
    p_sim.add_argument("--estimators", default="mle,corrected,mean")
    p_sim.add_argument("--mc-draws", type=int, default=100)
    p_sim.add_argument("--per-replicate", action="store_true",
                       help="average metrics per replicate instead of pooling")
    p_sim.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    p_sim.add_argument("--json", action="store_true",
                       help="also write a JSON mirror next to --out")
    p_sim.set_defaults(func=cmd_simulate)

    p_cov = sub.add_parser(
        "coverage-exact", help="exact small-N probability of reaching the bound"
    )
    p_cov.add_argument("--n", type=int, required=True, choices=range(1, 6),
                       help="number of hypotheses (1..5)")
    p_cov.add_argument("--alpha-grid", default="0.01,0.05,0.1,0.2,0.3,0.5")
    p_cov.add_argument("--pi-grid", default="0.05:1.0:0.05")
    p_cov.add_argument(
        "--estimator", choices=sorted(ESTIMATOR_FLAGS), default="corrected"
    )
    p_cov.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    p_cov.add_argument("--json", action="store_true",
                       help="also write a JSON mirror next to --out")
    p_cov.set_defaults(func=cmd_coverage_exact)

    p_tt = sub.add_parser("ttest", help="abundance table to p-value table")
    p_tt.add_argument("input", help="abundance CSV with header 'feature,<id>:<group>,...'")
    p_tt.add_argument("--transform", choices=("shift-log", "none"), default="shift-log")
    p_tt.add_argument("--seed", type=int, default=None, help=seed_help)
    p_tt.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    p_tt.add_argument("--json", action="store_true",
                      help="also write a JSON mirror next to --out")
    p_tt.set_defaults(func=cmd_ttest)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as err:
        print(f"smallfdr: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (TableFormatError, OSError) as err:
        print(f"smallfdr: data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except NumericFailure as err:
        print(f"smallfdr: numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except FloatingPointError as err:
        print(f"smallfdr: numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as err:
        print(f"smallfdr: data error: {err}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
