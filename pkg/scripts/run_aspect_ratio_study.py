#!/usr/bin/env python3
"""Runtime vs array shape at a fixed PE budget.

Defaults sweep 8x2048 through 2048x8 (16384 PEs) for all bundled workloads
and dataflows.
"""

import argparse
from collections import defaultdict
from pathlib import Path

from systolicsim.bundled import bundled_workloads, default_config_path
from systolicsim.config import load_config
from systolicsim.sweeps import run_aspect_ratio_study, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(default_config_path()))
    ap.add_argument("--workloads", nargs="*", default=None)
    ap.add_argument("--total-pes", type=int, default=16384)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    base = load_config(args.config)
    workloads = args.workloads or [str(p) for p in bundled_workloads().values()]
    rows = run_aspect_ratio_study(workloads, base, total_pes=args.total_pes)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, out_dir / "sweep_aspect.csv")
    print(f"wrote {out_dir / 'sweep_aspect.csv'} ({len(rows)} cells)")

    best = defaultdict(list)
    for r in rows:
        if r["status"] == "ok":
            best[(r["workload"], r["dataflow"])].append(
                (r["total_cycles"], r["rows"], r["cols"]))
    for (wl, df), cells in sorted(best.items()):
        cyc, r, c = min(cells)
        print(f"  {wl:24s} {df}: best shape {r}x{c} ({cyc} cycles)")


if __name__ == "__main__":
    main()
