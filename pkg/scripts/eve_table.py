"""Eavesdropper accuracy and mutual information for every strategy/placement."""
import argparse

from usckd.adversary import EveStrategy, Placement, StrategyKind, TapConfig, eve_accuracy, mutual_information

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ratios", type=float, nargs="+", default=[0.01, 0.1, 0.5])
    args = ap.parse_args()
    print(f"{'strategy':17s} {'placement':13s} {'r':>5s}  acc_phi  acc_key  MI_phi  MI_key")
    for kind in StrategyKind:
        for placement in Placement:
            for r in args.ratios:
                tap = TapConfig(r, placement)
                strat = EveStrategy(kind)
                phi, key = eve_accuracy(strat, tap)
                mi_p = mutual_information(strat, tap, target="phi")
                mi_k = mutual_information(strat, tap, target="key")
                print(f"{kind.value:17s} {placement.value:13s} {r:5.2f}  {phi:7.3f}  {key:7.3f}  {mi_p:6.3f}  {mi_k:6.3f}")
