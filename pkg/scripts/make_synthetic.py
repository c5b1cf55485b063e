#!/usr/bin/env python3
"""Script to write the two-Gaussian classification dataset as CSV."""
import argparse
import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from rnnkit.utils.data_loader import write_csv
from rnnkit.utils.synthetic import two_gaussians

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output", type=Path)
    parser.add_argument("--count", type=int, default=400)
    parser.add_argument("--dims", type=int, default=8)
    parser.add_argument("--separation", type=float, default=3.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    X, labels = two_gaussians(args.count, args.dims, args.separation, args.seed)
    write_csv(args.output, X, [f"class{label}" for label in labels])
    print(f"Wrote {args.count} rows to {args.output}")
