#!/usr/bin/env python3
"""
VoxPath - pathological voice feature extraction and detection
Main command-line entry point
"""

import argparse
import sys
from typing import Callable, Dict

from dotenv import load_dotenv

# Load environment variables before settings are read
load_dotenv()

from src.config.settings import settings  # noqa: E402
from src.schemas.models import ClassifierKind, ExperimentConfig, ExtractionConfig, Scenario  # noqa: E402
from src.utils.logging_config import setup_logging  # noqa: E402


def _extraction_config(args: argparse.Namespace) -> ExtractionConfig:
    config = ExtractionConfig.from_settings(settings)
    overrides = {
        "frame_ms": getattr(args, "frame_ms", None),
        "hop_ms": getattr(args, "hop_ms", None),
    }
    return config.model_copy(update={k: v for k, v in overrides.items() if v is not None})


def cmd_extract(args: argparse.Namespace) -> bool:
    """Extract the feature matrix of every recording in a manifest"""
    try:
        from src.extraction.pipeline import extract_all, filter_scenario, load_manifest

        manifest = filter_scenario(load_manifest(args.manifest), args.gender)
        print(f"Extracting features for {len(manifest)} recordings...")
        fm = extract_all(manifest, _extraction_config(args), workers=args.workers)
        fm.to_csv(args.out)
        print(f"✅ Feature matrix written: {args.out} ({len(fm)} rows, {len(fm.columns)} features)")
        if fm.skipped:
            print(f"⚠️  Skipped {len(fm.skipped)} unreadable recording(s)")
        return True
    except Exception as e:
        print(f"❌ Error extracting features: {e}")
        return False


def cmd_select(args: argparse.Namespace) -> bool:
    """Mann-Whitney-U p-values of every column, sorted ascending"""
    try:
        from src.extraction.pipeline import significance_report
        from src.selection.stats_select import FeatureMatrix, select_features, write_p_values

        fm = FeatureMatrix.from_csv(args.features)
        result = select_features(fm, args.alpha, settings.MISSING_THRESHOLD)
        write_p_values(result, args.out)
        print(f"✅ {len(result.selected)} of {len(fm.columns)} features pass alpha={args.alpha}")
        print(f"P-values written: {args.out}")
        print("\n📊 Most significant features:")
        print(significance_report(fm, args.alpha, settings.MISSING_THRESHOLD).to_string(index=False))
        return True
    except Exception as e:
        print(f"❌ Error selecting features: {e}")
        return False


def cmd_experiment(args: argparse.Namespace) -> bool:
    """Repeated-split classification experiment"""
    try:
        from src.evaluation.engine import ExperimentEngine, format_report_table
        from src.selection.stats_select import FeatureMatrix
        from src.utils.helpers import write_json

        fm = FeatureMatrix.from_csv(args.features)
        config = ExperimentConfig.from_settings(
            settings,
            classifier=args.classifier,
            repetitions=args.reps,
            seed=args.seed,
            scenario=args.gender,
        )
        report = ExperimentEngine(workers=args.workers).run_experiment(fm, config)
        write_json(args.out, report.model_dump(mode="json"))
        print(format_report_table(report))
        print(f"✅ Report written: {args.out}")
        return True
    except Exception as e:
        print(f"❌ Error running experiment: {e}")
        return False


def cmd_psi(args: argparse.Namespace) -> bool:
    """Band-summed modulation spectrum of one recording"""
    try:
        from src.extraction.pipeline import psi_curve
        from src.utils.helpers import ensure_parent_dir

        curve = psi_curve(args.wav, _extraction_config(args))
        curve.to_csv(ensure_parent_dir(args.out), index=False)
        print(f"✅ Modulation spectrum written: {args.out} ({len(curve)} bins)")
        return True
    except Exception as e:
        print(f"❌ Error computing modulation spectrum: {e}")
        return False


def cmd_xi(args: argparse.Namespace) -> bool:
    """Per-band inferior colliculus coefficients of one recording"""
    try:
        from src.extraction.pipeline import xi_curve
        from src.utils.helpers import ensure_parent_dir

        curve = xi_curve(args.wav, _extraction_config(args))
        curve.to_csv(ensure_parent_dir(args.out), index=False)
        print(f"✅ Colliculus coefficients written: {args.out} ({len(curve)} bands)")
        return True
    except Exception as e:
        print(f"❌ Error computing colliculus coefficients: {e}")
        return False


def cmd_rule30(args: argparse.Namespace) -> bool:
    try:
        from src.evaluation.engine import rule_of_30

        print(f"Rule of 30 for {args.n} trials: {rule_of_30(args.n):.2f}%")
        return True
    except Exception as e:
        print(f"❌ Error: {e}")
        return False


def cmd_density(args: argparse.Namespace) -> bool:
    """Per-class KDE curves of the most significant features"""
    try:
        from src.extraction.pipeline import density_curves, significance_report
        from src.selection.stats_select import FeatureMatrix
        from src.utils.helpers import ensure_parent_dir

        fm = FeatureMatrix.from_csv(args.features)
        top = significance_report(fm, settings.ALPHA, settings.MISSING_THRESHOLD, args.top)
        curves = density_curves(fm, list(top["feature_name"]), args.points)
        curves.to_csv(ensure_parent_dir(args.out), index=False)
        print(f"✅ Density curves for {len(top)} features written: {args.out}")
        return True
    except Exception as e:
        print(f"❌ Error computing density curves: {e}")
        return False


COMMANDS: Dict[str, Callable[[argparse.Namespace], bool]] = {
    "extract": cmd_extract,
    "select": cmd_select,
    "experiment": cmd_experiment,
    "psi": cmd_psi,
    "xi": cmd_xi,
    "rule30": cmd_rule30,
    "density": cmd_density,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="VoxPath - pathological voice detection pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", default=None, help="Logging level (default from VOXPATH_LOG_LEVEL)")

    framing = argparse.ArgumentParser(add_help=False)
    framing.add_argument("--frame-ms", type=float, default=None, help="Frame length in ms")
    framing.add_argument("--hop-ms", type=float, default=None, help="Frame step in ms")

    p = sub.add_parser("extract", parents=[common, framing], help="Extract the feature matrix")
    p.add_argument("--manifest", required=True, help="CSV with path,label,speaker,gender")
    p.add_argument("--out", required=True, help="Output feature CSV")
    p.add_argument("--gender", choices=[s.value for s in Scenario], default=Scenario.BOTH.value)
    p.add_argument("--workers", type=int, default=None, help="Worker processes (default VOXPATH_THREADS)")

    p = sub.add_parser("select", parents=[common], help="Mann-Whitney-U feature p-values")
    p.add_argument("--features", required=True, help="Feature CSV")
    p.add_argument("--alpha", type=float, default=settings.ALPHA, help="Significance level")
    p.add_argument("--out", required=True, help="Output p-value CSV")

    p = sub.add_parser("experiment", parents=[common], help="Repeated-split classification")
    p.add_argument("--features", required=True, help="Feature CSV")
    p.add_argument("--classifier", choices=[c.value for c in ClassifierKind], default=settings.CLASSIFIER)
    p.add_argument("--reps", type=int, default=settings.REPETITIONS, help="Number of repetitions")
    p.add_argument("--seed", type=int, default=settings.SEED, help="Master seed")
    p.add_argument("--gender", choices=[s.value for s in Scenario], default=Scenario.BOTH.value)
    p.add_argument("--workers", type=int, default=None, help="Worker threads (default VOXPATH_THREADS)")
    p.add_argument("--out", required=True, help="Output report JSON")

    for name, what in (("psi", "modulation spectrum ψ[l]"), ("xi", "colliculus coefficients ξ[p]")):
        p = sub.add_parser(name, parents=[common, framing], help=f"Write the {what} of one recording")
        p.add_argument("--wav", required=True, help="Input WAV file")
        p.add_argument("--out", required=True, help="Output CSV")

    p = sub.add_parser("rule30", parents=[common], help="Rule-of-30 error-rate threshold")
    p.add_argument("--n", type=int, required=True, help="Number of trials (recordings)")

    p = sub.add_parser("density", parents=[common], help="KDE curves of the most significant features")
    p.add_argument("--features", required=True, help="Feature CSV")
    p.add_argument("--top", type=int, default=10, help="Number of features")
    p.add_argument("--points", type=int, default=200, help="Grid points per curve")
    p.add_argument("--out", required=True, help="Output CSV")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)

    print(f"🎙️  VoxPath {args.command}")
    print("=" * 40)
    success = COMMANDS[args.command](args)
    print("=" * 40)
    if success:
        print("✅ Operation completed successfully!")
        return 0
    print("❌ Operation failed!")
    return 1


if __name__ == "__main__":
    sys.exit(main())
