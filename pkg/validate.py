#!/usr/bin/env python3
"""
VoxPath Validation Script
Checks the environment, dependencies, configuration and a short synthetic extraction
"""

import sys
import tempfile
from pathlib import Path

# Add the project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))


def test_imports():
    """Test if all pipeline modules can be imported"""
    print("Testing imports...")

    modules = [
        ("Audio input", "src.audio.wav_io"),
        ("Spectral core", "src.spectral.core"),
        ("Modulation spectrum", "src.features.modspec"),
        ("Inferior colliculus", "src.features.colliculus"),
        ("Bispectrum", "src.features.bispec"),
        ("Kernel entropies", "src.features.entropy"),
        ("Empirical mode decomposition", "src.features.emd"),
        ("High-level statistics", "src.aggregation.statistics"),
        ("Feature selection", "src.selection.stats_select"),
        ("Extraction pipeline", "src.extraction.pipeline"),
        ("Experiment engine", "src.evaluation.engine"),
    ]
    for title, module in modules:
        try:
            __import__(module)
            print(f"✓ {title} import successful")
        except ImportError as e:
            print(f"✗ {title} import failed: {e}")
            return False
    return True


def test_configuration():
    """Test configuration loading"""
    print("\nTesting configuration...")

    try:
        from src.config.settings import settings
        from src.schemas.models import ExperimentConfig, ExtractionConfig

        extraction = ExtractionConfig.from_settings(settings)
        experiment = ExperimentConfig.from_settings(settings)
        print("✓ Configuration loaded successfully")
        print(f"  - Sample rate: {extraction.sample_rate} Hz")
        print(f"  - Frames: {extraction.frame_ms} ms every {extraction.hop_ms} ms")
        print(f"  - Classifier: {experiment.classifier.value}, {experiment.repetitions} repetitions")
        print(f"  - Worker threads: {settings.THREADS}")
        return True
    except Exception as e:
        print(f"✗ Configuration loading failed: {e}")
        return False


def test_synthetic_extraction():
    """Extract features from a short synthetic corpus"""
    print("\nTesting synthetic extraction...")

    try:
        from src.config.settings import settings
        from src.extraction.pipeline import extract_all, feature_columns, load_manifest
        from src.schemas.models import ExtractionConfig
        from src.utils.test_data import build_corpus

        with tempfile.TemporaryDirectory(prefix="voxpath_validate_") as tmp:
            manifest = load_manifest(build_corpus(tmp, per_class=1, duration=0.5))
            config = ExtractionConfig.from_settings(settings)
            fm = extract_all(manifest, config, workers=1)

        expected = len(feature_columns(config))
        if len(fm) != 2 or len(fm.columns) != expected:
            print(f"✗ Unexpected matrix shape {len(fm)}x{len(fm.columns)}, expected 2x{expected}")
            return False
        finite = fm.features.notna().to_numpy().mean() * 100
        print(f"✓ Extracted {expected} features per recording ({finite:.1f}% defined)")
        return True
    except Exception as e:
        print(f"✗ Synthetic extraction failed: {e}")
        return False


def check_environment():
    """Check environment setup"""
    print("\nChecking environment...")

    env_file = project_root / ".env"
    if env_file.exists():
        print("✓ .env file found")
    else:
        print("⚠ .env file not found (using defaults and system environment)")

    for dir_name in ["logs", "data"]:
        dir_path = project_root / dir_name
        if dir_path.exists():
            print(f"✓ {dir_name}/ directory exists")
        else:
            print(f"⚠ {dir_name}/ directory missing (will be created)")

    return True


def check_dependencies():
    """Check if required packages are available"""
    print("\nChecking dependencies...")

    required_packages = [
        "python-dotenv", "pydantic", "pandas", "numpy", "scipy", "scikit-learn", "pytest"
    ]
    import_names = {"python-dotenv": "dotenv", "scikit-learn": "sklearn"}

    missing_packages = []

    for package in required_packages:
        try:
            __import__(import_names.get(package, package.replace("-", "_")))
            print(f"✓ {package} available")
        except ImportError:
            print(f"✗ {package} missing")
            missing_packages.append(package)

    if missing_packages:
        print(f"\nMissing packages: {', '.join(missing_packages)}")
        print("Run: pip install -r requirements.txt")
        return False

    return True


def main():
    """Run all validation tests"""
    print("=" * 50)
    print("VoxPath System Validation")
    print("=" * 50)

    try:
        from dotenv import load_dotenv
        load_dotenv()
    except ImportError:
        pass

    tests = [
        ("Environment Check", check_environment),
        ("Dependencies Check", check_dependencies),
        ("Configuration Test", test_configuration),
        ("Import Test", test_imports),
        ("Synthetic Extraction Test", test_synthetic_extraction),
    ]

    passed = 0
    total = len(tests)

    for test_name, test_func in tests:
        try:
            if test_func():
                passed += 1
            else:
                print(f"❌ {test_name} failed")
        except Exception as e:
            print(f"❌ {test_name} crashed: {e}")

    print("\n" + "=" * 50)
    print(f"VALIDATION RESULTS: {passed}/{total} tests passed")
    print("=" * 50)

    if passed == total:
        print("🎉 All checks passed! VoxPath is ready to run.")
        print("Run 'python dev_setup.py' to create a demo corpus.")
    else:
        print("⚠️  Some checks failed. Please check the issues above.")
        print("Common solutions:")
        print("1. Run 'pip install -r requirements.txt'")
        print("2. Check VOXPATH_* variables in your .env file")

    return passed == total


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
