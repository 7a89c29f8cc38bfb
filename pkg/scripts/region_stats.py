"""Region and subset counts of the duration pipeline on random timed automata.

    python scripts/region_stats.py --seeds 100 --delta 1 [--json out.json]
"""
import argparse
import json
import statistics
import time

from etop.durations import Limits
from etop.opacity import class_sets
from etop.regions import RegionCapExceeded
from etop.testsupport import GenSpec, gen_ta
from etop.transforms import as_bound


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--delta", default="1")
    ap.add_argument("--max-regions", type=int, default=500_000)
    ap.add_argument("--json")
    args = ap.parse_args()
    delta = as_bound(args.delta)
    rows = []
    for seed in range(args.seeds):
        ta = gen_ta(GenSpec(seed=seed))
        t0 = time.perf_counter()
        try:
            st = class_sets(ta, delta, Limits(regions=args.max_regions)).stats
            rows.append({"seed": seed, "clocks": len(ta.clocks), "regions": st.regions, "subsets": st.subsets,
                         "seconds": round(time.perf_counter() - t0, 4)})
        except RegionCapExceeded:
            rows.append({"seed": seed, "clocks": len(ta.clocks), "regions": None, "subsets": None, "seconds": None})
    done = [r for r in rows if r["regions"] is not None]
    regions = [r["regions"] for r in done]
    print(f"delta={args.delta}: {len(done)}/{len(rows)} within cap")
    if regions:
        print(f"regions: median {statistics.median(regions)}, max {max(regions)}")
        print(f"subsets: max {max(r['subsets'] for r in done)}")
        print(f"seconds: total {sum(r['seconds'] for r in done):.1f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
