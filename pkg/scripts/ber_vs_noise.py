"""Mean bit error rate and erasure fraction versus per-round phase noise."""
import argparse

import numpy as np

from usckd.drive import NO_NOISE, NoiseModel
from usckd.protocol import DetectorConfig, run_session

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigmas", type=float, nargs="+", default=[0.0, 0.1, 0.2, 0.4, 0.8])
    ap.add_argument("--rounds", type=int, default=1000)
    ap.add_argument("--sessions", type=int, default=20)
    ap.add_argument("--erasure-band", type=float, default=0.1)
    args = ap.parse_args()
    det = DetectorConfig(0.5, args.erasure_band)
    print("sigma    ber      erasure_frac")
    for s in args.sigmas:
        ber, era = [], []
        for k in range(args.sessions):
            noise = NoiseModel.random_walk(s, 1000 + k) if s else NO_NOISE
            res = run_session(args.rounds, noise, det, seed=k)
            ber.append(res.bit_error_rate)
            era.append(res.erasure_count / args.rounds)
        print(f"{s:5.2f}  {np.mean(ber):.5f}  {np.mean(era):.5f}")
