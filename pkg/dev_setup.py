"""
Development utilities: writes a synthetic healthy/pathological corpus
"""

import argparse
import os
import tempfile
from pathlib import Path

from src.utils.test_data import build_corpus


def create_demo_corpus(directory=None, per_class: int = 10, duration: float = 1.0, seed: int = 0) -> Path:
    """Write the demo WAVs and manifest.csv, returning the manifest path"""
    directory = directory or tempfile.mkdtemp(prefix="voxpath_demo_")
    os.makedirs(directory, exist_ok=True)
    manifest = build_corpus(directory, per_class=per_class, duration=duration, seed=seed)
    print(f"Demo corpus created with {2 * per_class} recordings in {directory}")
    return manifest


def cleanup_demo_corpus(directory: str):
    """Clean up demo files"""
    import shutil
    try:
        shutil.rmtree(directory)
        print(f"Cleaned up demo directory: {directory}")
    except Exception as e:
        print(f"Error cleaning up demo files: {e}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Create a synthetic VoxPath demo corpus")
    parser.add_argument("--dir", default="data/demo", help="Output directory")
    parser.add_argument("--per-class", type=int, default=10, help="Recordings per class")
    parser.add_argument("--duration", type=float, default=1.0, help="Recording length in seconds")
    parser.add_argument("--seed", type=int, default=0, help="Seed")
    args = parser.parse_args()

    print("Setting up VoxPath development corpus...")
    manifest = create_demo_corpus(args.dir, args.per_class, args.duration, args.seed)

    print("\nDevelopment setup completed!")
    print(f"Manifest: {manifest}")
    print("\nYou can now run:")
    print(f"  python app.py extract --manifest {manifest} --out data/features.csv")
    print("  python app.py experiment --features data/features.csv --out data/report.json")
