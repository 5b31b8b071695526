#!/usr/bin/env python3
"""Runtime and energy across dataflows and square array sizes.

Defaults reproduce the dataflow case study: all bundled workloads on
8x8..128x128 arrays under os/ws/is.
"""

import argparse
from collections import defaultdict
from pathlib import Path

from systolicsim.bundled import bundled_workloads, default_config_path
from systolicsim.config import load_config
from systolicsim.sweeps import run_dataflow_study, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(default_config_path()))
    ap.add_argument("--workloads", nargs="*", default=None)
    ap.add_argument("--sizes", default="8,16,32,64,128")
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    base = load_config(args.config)
    workloads = args.workloads or [str(p) for p in bundled_workloads().values()]
    sizes = tuple(int(s) for s in args.sizes.split(","))
    rows = run_dataflow_study(workloads, base, sizes=sizes)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, out_dir / "sweep_dataflow.csv")

    winners = defaultdict(list)
    for r in rows:
        if r["status"] == "ok":
            winners[(r["workload"], r["rows"])].append((r["total_cycles"], r["dataflow"]))
    print(f"wrote {out_dir / 'sweep_dataflow.csv'} ({len(rows)} cells)")
    for (wl, size), cells in sorted(winners.items()):
        cyc, df = min(cells)
        print(f"  {wl:24s} {size:4d}x{size:<4d} fastest: {df} ({cyc} cycles)")


if __name__ == "__main__":
    main()
