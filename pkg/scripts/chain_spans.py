"""Fringe-extrema spacing of alternating MZI chains, n = 1..N."""
import argparse
import math

from usckd.interferometer import measure_extrema_spacing

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=4)
    ap.add_argument("--samples", type=int, default=10_000)
    args = ap.parse_args()
    print("n  extrema  spacing/rad  spacing/pi  min_gap  max_gap")
    for n in range(1, args.max_n + 1):
        s = measure_extrema_spacing(n, args.samples)
        print(f"{n}  {len(s.positions):7d}  {s.spacing:11.6f}  {s.spacing / math.pi:10.4f}  "
              f"{s.min_gap:7.4f}  {s.max_gap:7.4f}")
