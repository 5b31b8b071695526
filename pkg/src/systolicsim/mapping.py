"""Workload quantities and fold (time-multiplexing) schedules.

A layer is viewed as N_w convolution windows of W_sz elements reduced
against M filters.  When the work exceeds the physical array it is split
into folds executed serially; folds are ordered row-major over the fold
grid with the stationary dimension outermost.

Window enumeration is raster order over (ofmap_h, ofmap_w); within a
window elements are ordered (r, s, c) with the channel innermost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import ArchConfig, Dataflow, LayerSpec
from .errors import SimulationError


@dataclass(frozen=True)
class WorkloadCounts:
    ofmap_h: int
    ofmap_w: int
    n_windows: int      # N_w = ofmap_h * ofmap_w
    window_size: int    # W_sz = filter_h * filter_w * channels
    n_filters: int      # M
    macs_total: int     # N_w * M * W_sz


def workload_counts(layer: LayerSpec) -> WorkloadCounts:
    ofmap_h = (layer.ifmap_h - layer.filter_h) // layer.stride + 1
    ofmap_w = (layer.ifmap_w - layer.filter_w) // layer.stride + 1
    if ofmap_h < 1 or ofmap_w < 1:
        raise SimulationError(f"layer {layer.name!r}: derived OFMAP dimension < 1")
    n_w = ofmap_h * ofmap_w
    w_sz = layer.filter_h * layer.filter_w * layer.channels
    m = layer.num_filters
    return WorkloadCounts(ofmap_h, ofmap_w, n_w, w_sz, m, n_w * m * w_sz)


@dataclass(frozen=True)
class Fold:
    """One mapping round.  row_start/col_start locate the fold's slice of the
    dataflow's (row-dimension, column-dimension) work."""

    rows_used: int
    cols_used: int
    stream_len: int
    row_start: int = 0
    col_start: int = 0


@dataclass(frozen=True)
class FoldPlan:
    dataflow: Dataflow
    folds: tuple[Fold, ...]

    @property
    def num_folds(self) -> int:
        return len(self.folds)


def _grid(row_total: int, col_total: int, rows: int, cols: int, stream_len: int):
    folds = []
    for i in range(math.ceil(row_total / rows)):
        r = min(rows, row_total - i * rows)
        for j in range(math.ceil(col_total / cols)):
            c = min(cols, col_total - j * cols)
            folds.append(Fold(r, c, stream_len, row_start=i * rows, col_start=j * cols))
    return tuple(folds)


def fold_schedule(counts: WorkloadCounts, arch: ArchConfig) -> FoldPlan:
    """Row/column work per dataflow:

    OS: rows take windows, cols take filters, W_sz streamed per fold.
    WS: rows take window elements (reduction), cols take filters, N_w streamed.
    IS: rows take window elements, cols take windows, M streamed.
    """
    rows, cols = arch.array_rows, arch.array_cols
    if arch.dataflow is Dataflow.OS:
        folds = _grid(counts.n_windows, counts.n_filters, rows, cols, counts.window_size)
    elif arch.dataflow is Dataflow.WS:
        folds = _grid(counts.window_size, counts.n_filters, rows, cols, counts.n_windows)
    else:
        folds = _grid(counts.window_size, counts.n_windows, rows, cols, counts.n_filters)
    return FoldPlan(arch.dataflow, folds)


def mapping_efficiency(plan: FoldPlan, arch: ArchConfig) -> float:
    """Mean fraction of the array kept mapped across folds."""
    active = sum(f.rows_used * f.cols_used for f in plan.folds)
    return active / (plan.num_folds * arch.array_rows * arch.array_cols)
