"""Per-layer and per-network reports reduced from traces and fold plans.

The summary CSV column order is a stable external contract; network.csv
repeats the per-layer rows and appends an aggregate "total" row.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

from .config import ArchConfig
from .engine import TraceSet
from .errors import ConfigError
from .mapping import mapping_efficiency
from .memory import DramDemand

SUMMARY_COLUMNS = (
    "layer", "dataflow", "rows", "cols", "total_cycles", "mapping_eff",
    "compute_util", "sram_rd_ifmap", "sram_rd_filter", "sram_wr_ofmap",
    "dram_rd_bytes", "dram_wr_bytes", "avg_rd_bw", "peak_rd_bw",
    "avg_wr_bw", "peak_wr_bw", "energy",
)


@dataclass(frozen=True)
class EnergyCostTable:
    """Linear energy model.  The defaults (1, 6, 6, 200) are arbitrary but
    plausible relative costs per MAC, SRAM word read/write, and DRAM byte;
    override via a cost-table file for anything quantitative."""

    e_mac: float = 1.0
    e_sram_read: float = 6.0
    e_sram_write: float = 6.0
    e_dram_access: float = 200.0

    def __post_init__(self):
        for f in ("e_mac", "e_sram_read", "e_sram_write", "e_dram_access"):
            if getattr(self, f) < 0:
                raise ConfigError(f"energy cost {f} must be non-negative")


def load_energy_table(path: str | Path) -> EnergyCostTable:
    """key = value lines; keys e_mac, e_sram_read, e_sram_write, e_dram_access."""
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"bad energy table line: {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in ("e_mac", "e_sram_read", "e_sram_write", "e_dram_access"):
            raise ConfigError(f"unknown energy table key {key!r}")
        values[key] = float(val)
    return EnergyCostTable(**values)


def energy(macs: int, sram_reads: int, sram_writes: int, dram_bytes: int,
           table: EnergyCostTable) -> float:
    return (macs * table.e_mac + sram_reads * table.e_sram_read
            + sram_writes * table.e_sram_write + dram_bytes * table.e_dram_access)


def compute_runtime(traces: TraceSet) -> int:
    """Runtime is defined by the output trace: 1 + the last write cycle."""
    if not len(traces.ofmap_writes):
        raise ValueError("empty ofmap write trace has no runtime")
    return traces.ofmap_writes.max_cycle + 1


@dataclass
class LayerReport:
    name: str
    dataflow: str
    rows: int
    cols: int
    total_cycles: int
    macs_total: int
    mapping_efficiency: float
    compute_utilization: float
    sram_reads_ifmap: int
    sram_reads_filter: int
    sram_writes_ofmap: int
    sram_reads_ofmap_partials: int
    dram_read_bytes: int
    dram_write_bytes: int
    avg_read_bw: float
    peak_read_bw: int
    avg_write_bw: float
    peak_write_bw: int
    energy: float
    # fold bookkeeping so network mapping efficiency aggregates exactly
    active_pe_folds: int = 0
    fold_pe_area: int = 0


def layer_report(traces: TraceSet, dram: DramDemand, arch: ArchConfig,
                 table: EnergyCostTable | None = None) -> LayerReport:
    table = table or EnergyCostTable()
    counts, plan = traces.counts, traces.plan
    cycles = compute_runtime(traces)
    sram_reads = (len(traces.ifmap_reads) + len(traces.filter_reads)
                  + len(traces.ofmap_partial_reads))
    active = sum(f.rows_used * f.cols_used for f in plan.folds)
    area = plan.num_folds * arch.array_rows * arch.array_cols
    return LayerReport(
        name=traces.layer.name,
        dataflow=arch.dataflow.value,
        rows=arch.array_rows,
        cols=arch.array_cols,
        total_cycles=cycles,
        macs_total=counts.macs_total,
        mapping_efficiency=mapping_efficiency(plan, arch),
        compute_utilization=counts.macs_total / (cycles * arch.array_rows * arch.array_cols),
        sram_reads_ifmap=len(traces.ifmap_reads),
        sram_reads_filter=len(traces.filter_reads),
        sram_writes_ofmap=len(traces.ofmap_writes),
        sram_reads_ofmap_partials=len(traces.ofmap_partial_reads),
        dram_read_bytes=dram.total_dram_reads,
        dram_write_bytes=dram.total_dram_writes,
        avg_read_bw=dram.avg_read_bw,
        peak_read_bw=dram.peak_read_bw,
        avg_write_bw=dram.avg_write_bw,
        peak_write_bw=dram.peak_write_bw,
        energy=energy(counts.macs_total, sram_reads, len(traces.ofmap_writes),
                      dram.total_dram_reads + dram.total_dram_writes, table),
        active_pe_folds=active,
        fold_pe_area=area,
    )


@dataclass
class NetworkReport:
    layers: list[LayerReport]
    total: LayerReport


def summarize_network(layers: list[LayerReport]) -> NetworkReport:
    """Serialized execution: cycles, accesses, and energy add across layers;
    utilizations aggregate from the summed integers; peaks take the max."""
    if not layers:
        raise ValueError("network has no layers")
    rows, cols = layers[0].rows, layers[0].cols
    cycles = sum(l.total_cycles for l in layers)
    macs = sum(l.macs_total for l in layers)
    dram_rd = sum(l.dram_read_bytes for l in layers)
    dram_wr = sum(l.dram_write_bytes for l in layers)
    active = sum(l.active_pe_folds for l in layers)
    area = sum(l.fold_pe_area for l in layers)
    total = LayerReport(
        name="total",
        dataflow=layers[0].dataflow,
        rows=rows,
        cols=cols,
        total_cycles=cycles,
        macs_total=macs,
        mapping_efficiency=active / area,
        compute_utilization=macs / (cycles * rows * cols),
        sram_reads_ifmap=sum(l.sram_reads_ifmap for l in layers),
        sram_reads_filter=sum(l.sram_reads_filter for l in layers),
        sram_writes_ofmap=sum(l.sram_writes_ofmap for l in layers),
        sram_reads_ofmap_partials=sum(l.sram_reads_ofmap_partials for l in layers),
        dram_read_bytes=dram_rd,
        dram_write_bytes=dram_wr,
        avg_read_bw=dram_rd / cycles,
        peak_read_bw=max(l.peak_read_bw for l in layers),
        avg_write_bw=dram_wr / cycles,
        peak_write_bw=max(l.peak_write_bw for l in layers),
        energy=sum(l.energy for l in layers),
        active_pe_folds=active,
        fold_pe_area=area,
    )
    return NetworkReport(list(layers), total)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_row(r: LayerReport) -> str:
    return ",".join(_fmt(v) for v in (
        r.name, r.dataflow, r.rows, r.cols, r.total_cycles, r.mapping_efficiency,
        r.compute_utilization, r.sram_reads_ifmap, r.sram_reads_filter,
        r.sram_writes_ofmap, r.dram_read_bytes, r.dram_write_bytes,
        r.avg_read_bw, r.peak_read_bw, r.avg_write_bw, r.peak_write_bw, r.energy))


def summary_csv(layers: list[LayerReport]) -> str:
    out = io.StringIO()
    out.write(",".join(SUMMARY_COLUMNS) + "\n")
    for r in layers:
        out.write(report_row(r) + "\n")
    return out.getvalue()


def network_csv(net: NetworkReport) -> str:
    out = io.StringIO()
    out.write(",".join(SUMMARY_COLUMNS) + "\n")
    for r in net.layers:
        out.write(report_row(r) + "\n")
    out.write(report_row(net.total) + "\n")
    return out.getvalue()
