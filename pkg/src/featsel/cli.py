"""Command-line interface.

Subcommands::

    featsel filter  --data d.csv --label-col y [...]   # p-value ranking + MCE curve
    featsel wrapper --data d.csv --label-col y [...]   # prefilter + forward selection
    featsel synth   --out data.csv [...]               # write a synthetic dataset

Flags may also come from a line-oriented ``key = value`` config file
(``--config FILE``); explicit CLI flags override file values.  Exit code 0
on success, 2 on usage/validation errors, 1 on runtime failures, always
with a diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .dataset import COVARIANCE_MODES, save_csv, synthetic_gaussian
from .errors import FeatselError, ValidationError
from .pipeline import (
    CLASSIFIER_TOKENS,
    DEFAULT_GRID,
    STOP_TOKENS,
    PipelineConfig,
    emit_report,
    run_filter_experiment,
    run_wrapper_experiment,
)
from .selection import StopRule

log = logging.getLogger(__name__)

_CONFIG_KEYS = (
    "data",
    "label_col",
    "seed",
    "train_count",
    "classifier",
    "ridge",
    "folds",
    "prefilter_k",
    "grid",
    "stop",
    "max_size",
    "out",
    "stratified",
    "workers",
    "pooled_ttest",
)


def parse_grid(token: str) -> tuple[int, ...]:
    """Parse ``A:B:STEP`` into the inclusive range (A, A+STEP, ..., <=B)."""
    parts = token.split(":")
    if len(parts) != 3:
        raise ValidationError(f"grid must look like A:B:STEP, got {token!r}")
    try:
        lo, hi, step = (int(p) for p in parts)
    except ValueError:
        raise ValidationError(f"grid components must be integers, got {token!r}") from None
    if lo < 1 or step < 1 or hi < lo:
        raise ValidationError(f"grid {token!r} must satisfy 1 <= A <= B with STEP >= 1")
    return tuple(range(lo, hi + 1, step))


def _parse_bool(token: str, key: str) -> bool:
    lowered = token.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValidationError(f"cannot parse boolean for {key}: {token!r}")


def read_config_file(path) -> dict:
    """Read ``key = value`` lines; blank lines and ``#`` comments allowed."""
    values = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(
                    f"{path}:{line_no}: expected 'key = value', got {raw.strip()!r}"
                )
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ValidationError(f"{path}:{line_no}: unknown config key {key!r}")
            values[key] = value
    return values


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="key = value config file")
    parser.add_argument("--data", metavar="PATH", help="input CSV file")
    parser.add_argument("--label-col", metavar="NAME", help="label column name or index")
    parser.add_argument("--seed", type=int, metavar="N")
    parser.add_argument("--train-count", type=int, metavar="N")
    parser.add_argument("--classifier", choices=sorted(CLASSIFIER_TOKENS))
    parser.add_argument("--ridge", type=float, metavar="X")
    parser.add_argument("--folds", type=int, metavar="N")
    parser.add_argument("--prefilter-k", type=int, metavar="N")
    parser.add_argument("--grid", type=parse_grid, metavar="A:B:STEP")
    parser.add_argument("--stop", choices=sorted(STOP_TOKENS))
    parser.add_argument("--max-size", type=int, metavar="N")
    parser.add_argument("--out", metavar="DIR")
    parser.add_argument("--workers", type=int, metavar="N")
    parser.add_argument(
        "--no-stratify", action="store_true", help="disable stratified holdout"
    )
    parser.add_argument(
        "--pooled-ttest", action="store_true", help="pooled-variance t-test filter"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="featsel",
        description="Filter and wrapper feature selection with LDA/QDA.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_flags(sub.add_parser("filter", help="t-test ranking and test-MCE curve"))
    _add_run_flags(sub.add_parser("wrapper", help="prefilter + sequential forward selection"))

    synth = sub.add_parser("synth", help="generate a synthetic CSV dataset")
    synth.add_argument("--out", required=True, metavar="FILE")
    synth.add_argument("--n0", type=int, default=100, metavar="N")
    synth.add_argument("--n1", type=int, default=100, metavar="N")
    synth.add_argument("--d", type=int, default=1000, metavar="N")
    synth.add_argument(
        "--informative",
        default=None,
        metavar="K|I,J,...",
        help="count of leading informative features (default min(10, d)), "
        "or a comma list of indices",
    )
    synth.add_argument("--delta", type=float, default=1.0, metavar="X")
    synth.add_argument("--cov-mode", choices=COVARIANCE_MODES, default="identity")
    synth.add_argument("--scale", type=float, default=2.0, metavar="X")
    synth.add_argument("--var-ratio", type=float, default=9.0, metavar="X")
    synth.add_argument("--seed", type=int, default=0, metavar="N")
    return parser


def _merged(cli_value, file_values: dict, key: str, convert):
    if cli_value is not None:
        return cli_value
    if key in file_values:
        return convert(file_values[key])
    return None


def parse_config(args, config_file=None) -> PipelineConfig:
    """Build a PipelineConfig from CLI tokens plus an optional config file.

    ``args`` is the full argument list including the ``filter``/``wrapper``
    subcommand.  CLI flags override file values; anything left unset falls
    back to the documented defaults.
    """
    namespace = build_parser().parse_args(list(args))
    if namespace.command not in ("filter", "wrapper"):
        raise ValidationError(f"{namespace.command!r} does not take a pipeline config")
    return _config_from_namespace(namespace, config_file)


def _config_from_namespace(ns: argparse.Namespace, config_file=None) -> PipelineConfig:
    path = config_file if config_file is not None else ns.config
    file_values = read_config_file(path) if path else {}

    def pick(key, cli_value, convert, default):
        value = _merged(cli_value, file_values, key, convert)
        return default if value is None else value

    label_col = pick("label_col", ns.label_col, str, "label")
    if isinstance(label_col, str) and label_col.lstrip("-").isdigit():
        label_col = int(label_col)
    stop_token = pick("stop", ns.stop, str, "local-min")
    if stop_token not in STOP_TOKENS:
        raise ValidationError(
            f"stop must be one of {sorted(STOP_TOKENS)}, got {stop_token!r}"
        )
    if ns.no_stratify:
        stratified = False
    else:
        stratified = pick(
            "stratified", None, lambda v: _parse_bool(v, "stratified"), True
        )
    pooled = ns.pooled_ttest or pick(
        "pooled_ttest", None, lambda v: _parse_bool(v, "pooled_ttest"), False
    )
    return PipelineConfig(
        data=pick("data", ns.data, str, None),
        label_col=label_col,
        seed=pick("seed", ns.seed, int, 0),
        train_count=pick("train_count", ns.train_count, int, None),
        classifier=pick("classifier", ns.classifier, str, "qda"),
        ridge=pick("ridge", ns.ridge, float, 0.0),
        folds=pick("folds", ns.folds, int, 10),
        prefilter_k=pick("prefilter_k", ns.prefilter_k, int, 150),
        filter_grid=pick("grid", ns.grid, parse_grid, None) or DEFAULT_GRID,
        stop=StopRule(
            mode=STOP_TOKENS[stop_token],
            max_size=pick("max_size", ns.max_size, int, 50),
        ),
        stratified=stratified,
        pooled_ttest=pooled,
        workers=pick("workers", ns.workers, int, 1),
        out_dir=pick("out", ns.out, str, "featsel_out"),
    )


def _parse_informative(token: str | None, d: int) -> tuple[int, ...]:
    if token is None:
        return tuple(range(min(10, d)))
    if "," in token:
        return tuple(int(part) for part in token.split(","))
    count = int(token)
    if count > d:
        raise ValidationError(f"informative count {count} exceeds d={d}")
    return tuple(range(count))


def _run_synth(ns: argparse.Namespace) -> int:
    ds = synthetic_gaussian(
        (ns.n0, ns.n1),
        ns.d,
        _parse_informative(ns.informative, ns.d),
        ns.delta,
        ns.cov_mode,
        ns.seed,
        scale=ns.scale,
        var_ratio=ns.var_ratio,
    )
    save_csv(ds, ns.out)
    print(ns.out)
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        namespace = build_parser().parse_args(argv)
        if namespace.command == "synth":
            return _run_synth(namespace)
        cfg = _config_from_namespace(namespace)
        runner = (
            run_filter_experiment
            if namespace.command == "filter"
            else run_wrapper_experiment
        )
        report = runner(cfg)
        emit_report(report, cfg.out_dir)
        print(
            f"{report.experiment}: selected {len(report.selected_features)} features, "
            f"final_test_mce={report.final_test_mce:.4f}, out={cfg.out_dir}"
        )
        return 0
    except ValidationError as err:
        print(f"featsel: {err}", file=sys.stderr)
        return 2
    except FeatselError as err:
        print(f"featsel: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
