"""Run every CLI preset and write the outputs into one directory.

    python scripts/run_presets.py --out-dir results --seed 0
"""
import argparse
import sys
from pathlib import Path

from usckd.cli import PRESETS, main

EXT = {"sweep": "csv", "trace": "csv", "keygen": "json", "eve": "json"}


def run_all(out_dir: Path, seed: int) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    worst = 0
    for cmd, presets in PRESETS.items():
        for name in presets:
            out = out_dir / f"{cmd}_{name}.{EXT[cmd]}"
            code = main([cmd, "--preset", name, "--seed", str(seed), "--out", str(out)])
            print(f"{cmd:7s} {name:15s} -> {out}  (exit {code})")
            worst = max(worst, code)
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    sys.exit(run_all(args.out_dir, args.seed))
