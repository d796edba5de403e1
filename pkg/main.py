"""
driftgate - Main Entry Point
Adversarial-validation driven training-data selection for credit scoring under dataset shift.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from pydantic import ValidationError

from src.config import configure_logging
from src.errors import ContractError, DriftGateError

logger = logging.getLogger("driftgate")

STRATEGIES = ["baseline", "chrono-cv", "chrono-holdout", "weighted", "filtered", "augmented"]
SHIFT_KINDS = ["none", "covariate", "prior_probability", "concept", "selection_bias"]


def _params(path: Optional[str]):
    from src.gbdt import BoostParams, load_params

    return load_params(path) if path else BoostParams()


def _month(text: Optional[str], flag: str):
    from src.dataset import MonthStamp

    if text is None:
        raise ContractError(f"{flag} is required for this strategy")
    return MonthStamp.parse(text)


def cmd_ingest(args) -> None:
    """Load a CSV with its schema, optionally apply the Lending Club pipeline and a month split."""
    from src.dataset import (
        MonthStamp,
        encode_loan_status,
        lending_club_schema,
        load_csv,
        load_schema,
        preprocess_lending_club,
        save_dataset,
        split_by_month,
    )

    if args.schema:
        schema = load_schema(args.schema)
    elif args.lending_club:
        schema = lending_club_schema()
    else:
        raise ContractError("--schema is required unless --lending-club is given")

    ds = load_csv(args.csv, schema)
    if args.lending_club:
        ds = preprocess_lending_club(encode_loan_status(ds))

    if args.split_month:
        if not args.out_test:
            raise ContractError("--out-test is required with --split-month")
        train, test = split_by_month(ds, MonthStamp.parse(args.split_month))
        save_dataset(train, args.out)
        save_dataset(test, args.out_test)
        print(f"✅ Wrote {train.n_rows} train rows to {args.out} and {test.n_rows} test rows to {args.out_test}")
    else:
        save_dataset(ds, args.out)
        print(f"✅ Wrote {ds.n_rows} rows to {args.out}")


def cmd_adversarial(args) -> None:
    """Adversarial validation between a train and a test dataset."""
    from src.adversarial import adversarial_validate, save_report
    from src.dataset import load_dataset

    report = adversarial_validate(
        load_dataset(args.train),
        load_dataset(args.test),
        _params(args.params),
        k=args.k,
        seed=args.seed,
        threshold=args.threshold,
    )
    save_report(report, args.out)
    print(f"✅ Adversarial AUC {report.adv_auc:.4f} (threshold {report.threshold:.2f}): {report.verdict}")


def cmd_plan(args) -> None:
    """Build a training plan."""
    from src.adversarial import load_report
    from src.dataset import load_dataset
    from src.strategies import (
        augmented_cv_plan,
        baseline_cv_plan,
        chrono_cv_plan,
        chrono_holdout_plan,
        filtered_cv_plan,
        save_plan,
        weighted_plan,
    )

    train = load_dataset(args.train)
    strategy = args.strategy
    if strategy == "baseline":
        plan = baseline_cv_plan(train, args.k, args.seed)
    elif strategy == "chrono-cv":
        plan = chrono_cv_plan(train, _month(args.start, "--start"), args.k, args.seed)
    elif strategy == "chrono-holdout":
        plan = chrono_holdout_plan(train, _month(args.start, "--start"), _month(args.valid_start, "--valid-start"))
    else:
        if not args.report:
            raise ContractError(f"--report is required for the {strategy} strategy")
        report = load_report(args.report)
        if strategy == "weighted":
            plan = weighted_plan(train, report, args.k, args.seed)
        else:
            if args.keep_fraction is None:
                raise ContractError(f"--keep-fraction is required for the {strategy} strategy")
            builder = filtered_cv_plan if strategy == "filtered" else augmented_cv_plan
            plan = builder(train, report, args.keep_fraction, args.k, args.seed)

    save_plan(plan, args.out)
    print(f"✅ {plan.strategy_tag} [{plan.param_tag}] plan with {plan.k} fold(s) written to {args.out}")


def cmd_run(args) -> None:
    """Execute a saved plan."""
    from src.dataset import load_dataset
    from src.strategies import execute_plan, load_plan, save_outcome

    outcome = execute_plan(
        load_plan(args.plan), load_dataset(args.train), load_dataset(args.test), _params(args.params)
    )
    save_outcome(outcome, args.out, include_models=args.save_models)
    print(f"✅ Mean valid AUC {outcome.mean_valid_auc:.4f}, test AUC {outcome.test_auc:.4f}")


def cmd_grid(args) -> None:
    """Run the experiment grid and write the results directory."""
    from src.dataset import load_dataset
    from src.harness import GridConfig, emit_report, run_grid

    config = GridConfig()
    if args.config:
        config = GridConfig.model_validate_json(Path(args.config).read_text(encoding="utf-8"))
    report = run_grid(load_dataset(args.train), load_dataset(args.test), _params(args.params), config)
    emit_report(report, args.out)
    best = report.best()
    print(f"✅ {len(report.rows)} experiments written to {args.out}")
    print(f"   Best: set {best.set_id} {best.strategy_tag} [{best.param_tag}] test AUC {best.test_auc:.4f}")


def cmd_generate(args) -> None:
    """Generate a synthetic train/test pair with a controlled shift."""
    from src.dataset import save_dataset
    from src.harness import ShiftSpec, generate_shifted

    spec = ShiftSpec(
        kind=args.kind,
        magnitude=args.magnitude,
        seed=args.seed,
        n_train=args.n_train,
        n_test=args.n_test,
        n_features=args.n_features,
        base_rate=args.base_rate,
        months=args.months,
    )
    train, test = generate_shifted(spec)
    save_dataset(train, args.out_train)
    save_dataset(test, args.out_test)
    print(f"✅ {spec.kind} shift (magnitude {spec.magnitude}): {args.out_train}, {args.out_test}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="driftgate", description="Training-data selection under dataset shift")
    parser.add_argument("--log-level", default=None, help="Override DRIFTGATE_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="Load and preprocess a CSV")
    ingest.add_argument("--csv", required=True)
    ingest.add_argument("--schema")
    ingest.add_argument("--out", required=True)
    ingest.add_argument("--lending-club", action="store_true", help="Apply the Lending Club preprocessing")
    ingest.add_argument("--split-month", help="First test month (YYYY-MM); rows before it form the train set")
    ingest.add_argument("--out-test", help="Output for the test rows when splitting")
    ingest.set_defaults(handler=cmd_ingest)

    adversarial = sub.add_parser("adversarial", help="Adversarial validation")
    adversarial.add_argument("--train", required=True)
    adversarial.add_argument("--test", required=True)
    adversarial.add_argument("--threshold", type=float, default=None)
    adversarial.add_argument("--params")
    adversarial.add_argument("--k", type=int, default=5)
    adversarial.add_argument("--seed", type=int, default=None)
    adversarial.add_argument("--out", required=True)
    adversarial.set_defaults(handler=cmd_adversarial)

    plan = sub.add_parser("plan", help="Build a training plan")
    plan.add_argument("--strategy", choices=STRATEGIES, required=True)
    plan.add_argument("--train", required=True)
    plan.add_argument("--report", help="Adversarial report (weighted, filtered, augmented)")
    plan.add_argument("--start", help="Start month, YYYY-MM (chrono-cv, chrono-holdout)")
    plan.add_argument("--valid-start", help="Validation start month, YYYY-MM (chrono-holdout)")
    plan.add_argument("--keep-fraction", type=float)
    plan.add_argument("--k", type=int, default=5)
    plan.add_argument("--seed", type=int, default=42)
    plan.add_argument("--out", required=True)
    plan.set_defaults(handler=cmd_plan)

    run = sub.add_parser("run", help="Execute a plan")
    run.add_argument("--plan", required=True)
    run.add_argument("--train", required=True)
    run.add_argument("--test", required=True)
    run.add_argument("--params")
    run.add_argument("--save-models", action="store_true")
    run.add_argument("--out", required=True)
    run.set_defaults(handler=cmd_run)

    grid = sub.add_parser("grid", help="Run the experiment grid")
    grid.add_argument("--train", required=True)
    grid.add_argument("--test", required=True)
    grid.add_argument("--config")
    grid.add_argument("--params")
    grid.add_argument("--out", required=True)
    grid.set_defaults(handler=cmd_grid)

    generate = sub.add_parser("generate", help="Generate synthetic shifted data")
    generate.add_argument("--kind", choices=SHIFT_KINDS, required=True)
    generate.add_argument("--magnitude", type=float, default=0.0)
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--n-train", type=int, default=20000)
    generate.add_argument("--n-test", type=int, default=4000)
    generate.add_argument("--n-features", type=int, default=10)
    generate.add_argument("--base-rate", type=float, default=0.2)
    generate.add_argument("--months", type=int, default=18)
    generate.add_argument("--out-train", required=True)
    generate.add_argument("--out-test", required=True)
    generate.set_defaults(handler=cmd_generate)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns the process exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        args.handler(args)
    except DriftGateError as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        print(f"❌ Error: invalid input: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return 3
    except Exception as e:
        logger.exception("Unexpected failure")
        print(f"❌ Error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
