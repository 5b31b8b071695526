#!/usr/bin/env python3
"""Scale-up vs scale-out comparison.

Defaults climb the 64..16384 PE ladder: one growing square array vs a farm
of 8x8 nodes with output channels sharded across nodes.  Prints the
runtime(up)/runtime(out) ratio per workload, dataflow, and rung.
"""

import argparse
from pathlib import Path

from systolicsim.bundled import bundled_workloads, default_config_path
from systolicsim.config import load_config
from systolicsim.sweeps import run_scale_study, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(default_config_path()))
    ap.add_argument("--workloads", nargs="*", default=None)
    ap.add_argument("--pe-ladder", default="64,256,1024,4096,16384")
    ap.add_argument("--dataflows", default="os,ws,is")
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    base = load_config(args.config)
    workloads = args.workloads or [str(p) for p in bundled_workloads().values()]
    ladder = tuple(int(s) for s in args.pe_ladder.split(","))
    dataflows = tuple(args.dataflows.split(","))
    rows = run_scale_study(workloads, base, pe_ladder=ladder, dataflows=dataflows)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, out_dir / "sweep_scale.csv")
    print(f"wrote {out_dir / 'sweep_scale.csv'} ({len(rows)} rows)")

    nets = {}
    for r in rows:
        if r["layer"] == "network" and r["status"] == "ok":
            key = (r["workload"], r["dataflow"], r["pe_count"])
            nets.setdefault(key, {})[r["mode"]] = r["total_cycles"]
    for (wl, df, pe), modes in sorted(nets.items()):
        if {"up", "out"} <= modes.keys():
            ratio = modes["up"] / modes["out"]
            print(f"  {wl:24s} {df} {pe:6d} PEs: up/out runtime ratio {ratio:.3f}")


if __name__ == "__main__":
    main()
