#!/usr/bin/env python3
"""Required DRAM read bandwidth vs scratchpad size.

Defaults sweep the IFMAP and filter buffers together from 32KB to 2048KB on
the default 128x128 array, reporting the stall-free bandwidth requirement so
the knee of each workload's curve is visible.
"""

import argparse
from pathlib import Path

from systolicsim.bundled import bundled_workloads, default_config_path
from systolicsim.config import load_config
from systolicsim.sweeps import run_memory_sweep, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(default_config_path()))
    ap.add_argument("--workloads", nargs="*", default=None)
    ap.add_argument("--sram-sizes", default="32,64,128,256,512,1024,2048")
    ap.add_argument("--dataflows", default="os,ws,is")
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    base = load_config(args.config)
    workloads = args.workloads or [str(p) for p in bundled_workloads().values()]
    sizes = tuple(int(s) for s in args.sram_sizes.split(","))
    dataflows = tuple(args.dataflows.split(","))
    rows = run_memory_sweep(workloads, base, sram_sizes_kb=sizes, dataflows=dataflows)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, out_dir / "sweep_memory.csv")
    print(f"wrote {out_dir / 'sweep_memory.csv'} ({len(rows)} cells)")
    for r in rows:
        if r["status"] == "ok":
            print(f"  {r['workload']:24s} {r['dataflow']} {r['sram_kb']:5d}KB "
                  f"-> {r['avg_rd_bw']:.3f} B/cycle")
        else:
            print(f"  {r['workload']:24s} {r['dataflow']} {r['sram_kb']:>5}KB "
                  f"-> {r['status']}")


if __name__ == "__main__":
    main()
