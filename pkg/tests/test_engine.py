import random

import numpy as np
import pytest

from helpers import make_arch, pairs_to_trace, random_small_layer
from systolicsim.config import Dataflow, LayerSpec, lower_gemm
from systolicsim.engine import (addr_filter, addr_ifmap, addr_ofmap,
                                generate_traces)
from systolicsim.errors import ConfigError
from systolicsim.mapping import workload_counts
from systolicsim.oracle import simulate_grid


def test_addr_ifmap_examples():
    layer = LayerSpec("t", 8, 5, 2, 2, 3, 2, 1)
    arch = make_arch(4, 4)
    assert addr_ifmap(0, 0, 0, layer, arch) == arch.ifmap_offset
    assert addr_ifmap(1, 0, 0, layer, arch) - arch.ifmap_offset == 15  # 5*3 words
    big = arch.with_overrides(ifmap_offset=10**6)
    assert addr_ifmap(0, 0, 0, layer, big) == 10**6


def test_addr_filter_and_ofmap_layouts():
    layer = LayerSpec("t", 8, 5, 2, 2, 3, 2, 1)
    arch = make_arch(4, 4)
    # (f, r, s, c) row-major with channel innermost
    assert addr_filter(1, 0, 0, 0, layer, arch) - arch.filter_offset == 12
    assert addr_filter(0, 1, 1, 2, layer, arch) - arch.filter_offset == 11
    assert addr_ofmap(3, 1, layer, arch) - arch.ofmap_offset == 7


def test_addr_out_of_range():
    layer = LayerSpec("t", 4, 4, 2, 2, 1, 1, 1)
    arch = make_arch(2, 2)
    with pytest.raises(IndexError):
        addr_ifmap(4, 0, 0, layer, arch)
    with pytest.raises(IndexError):
        addr_filter(1, 0, 0, 0, layer, arch)
    with pytest.raises(IndexError):
        addr_ofmap(9, 0, layer, arch)


def test_overlapping_regions_rejected():
    layer = LayerSpec("t", 8, 8, 3, 3, 4, 4, 1)
    arch = make_arch(4, 4).with_overrides(filter_offset=10)  # inside ifmap span
    with pytest.raises(ConfigError, match="overlap"):
        generate_traces(layer, arch)


def assert_matches_oracle(layer, arch):
    ts = generate_traces(layer, arch)
    orc = simulate_grid(layer, arch)
    assert ts.total_cycles == orc.total_cycles
    assert ts.ifmap_reads == pairs_to_trace(orc.ifmap_reads)
    assert ts.filter_reads == pairs_to_trace(orc.filter_reads)
    assert ts.ofmap_writes == pairs_to_trace(orc.ofmap_writes)
    assert ts.ofmap_partial_reads == pairs_to_trace(orc.ofmap_partial_reads)
    return ts, orc


def test_os_gemm4_cycle_count():
    ts, _ = assert_matches_oracle(lower_gemm(4, 4, 4), make_arch(4, 4, "os"))
    assert ts.total_cycles == 10


def test_os_square_gemm_law():
    for n in range(2, 33):
        ts, orc = assert_matches_oracle(lower_gemm(n, n, n), make_arch(n, n, "os"))
        assert ts.total_cycles == 3 * n - 2 == orc.total_cycles


def test_os_single_mac_is_one_cycle():
    ts = generate_traces(lower_gemm(1, 1, 1), make_arch(1, 1, "os"))
    assert ts.total_cycles == 1


def test_ws_square_span():
    ts, _ = assert_matches_oracle(lower_gemm(4, 4, 4), make_arch(4, 4, "ws"))
    assert ts.total_cycles == 14  # 2*4 + 4 + 4 - 2


def test_is_mirrors_ws_when_windows_equal_filters():
    ws = generate_traces(lower_gemm(4, 4, 4), make_arch(4, 4, "ws"))
    is_ = generate_traces(lower_gemm(4, 4, 4), make_arch(4, 4, "is"))
    assert ws.total_cycles == is_.total_cycles == 14


def test_ws_is_one_load_one_mac():
    for df in ("ws", "is"):
        ts = generate_traces(lower_gemm(1, 1, 1), make_arch(1, 1, df))
        assert ts.total_cycles == 2


def test_ws_per_fold_read_counts():
    # single fold: W_sz=3, M=2, N_w=18 on a 4x4 array
    layer = LayerSpec("t", 8, 3, 3, 1, 1, 2, 1)
    counts = workload_counts(layer)
    assert (counts.window_size, counts.n_filters, counts.n_windows) == (3, 2, 18)
    ts = generate_traces(layer, make_arch(4, 4, "ws"))
    assert ts.plan.num_folds == 1
    fold = ts.plan.folds[0]
    assert len(ts.filter_reads) == fold.rows_used * fold.cols_used
    assert len(ts.ifmap_reads) == fold.rows_used * counts.n_windows


def test_ws_read_counts_closed_form_multi_fold():
    layer = LayerSpec("t", 6, 6, 3, 3, 2, 5, 1)  # W_sz=18, M=5, N_w=16
    arch = make_arch(4, 2, "ws")
    ts = generate_traces(layer, arch)
    counts = ts.counts
    assert len(ts.filter_reads) == sum(f.rows_used * f.cols_used for f in ts.plan.folds)
    assert len(ts.ifmap_reads) == sum(f.rows_used * counts.n_windows for f in ts.plan.folds)
    assert_matches_oracle(layer, arch)


def test_ws_beats_is_when_fewer_stationary_folds():
    # N_w=100, M=1, W_sz <= rows, cols=1: WS maps once, IS maps 100 times
    layer = lower_gemm(100, 4, 1)
    ws = generate_traces(layer, make_arch(4, 1, "ws"))
    is_ = generate_traces(layer, make_arch(4, 1, "is"))
    assert ws.plan.num_folds == 1
    assert is_.plan.num_folds == 100
    assert ws.total_cycles < is_.total_cycles


def test_cross_reduction_fold_partials():
    # W_sz=12 on 4 rows: 3 reduction folds; partials re-read by later folds
    layer = LayerSpec("t", 5, 4, 2, 2, 3, 2, 1)
    counts = workload_counts(layer)
    for df in ("ws", "is"):
        ts, _ = assert_matches_oracle(layer, make_arch(4, 4, df))
        n_red = 3
        footprint = counts.n_windows * counts.n_filters
        assert len(ts.ofmap_writes) == n_red * footprint
        assert len(ts.ofmap_partial_reads) == (n_red - 1) * footprint


EDGE_BOUNDS = {
    # dataflow -> (ifmap bound field, filter bound field) of a fold
    "os": ("rows_used", "cols_used"),
    "ws": ("rows_used", "cols_used"),
    "is": ("cols_used", "rows_used"),
}


def _check_invariants(layer, arch):
    ts = generate_traces(layer, arch)
    counts = ts.counts
    # MAC conservation implied by the fold plan behind the traces
    assert sum(f.rows_used * f.cols_used * f.stream_len
               for f in ts.plan.folds) == counts.macs_total
    # runtime defined by the output trace
    assert ts.total_cycles == ts.ofmap_writes.max_cycle + 1
    # OFMAP completeness: every output address written, finals exactly once
    addrs, write_counts = np.unique(ts.ofmap_writes.addresses, return_counts=True)
    expected = arch.ofmap_offset + arch.word_bytes * np.arange(
        counts.n_windows * counts.n_filters, dtype=np.int64)
    assert np.array_equal(addrs, expected)
    n_red = 1 if arch.dataflow is Dataflow.OS else -(-counts.window_size // arch.array_rows)
    assert np.all(write_counts == n_red)
    # stall-free edge contract: per-cycle demand within the active edge width
    max_rows = max(f.rows_used for f in ts.plan.folds)
    max_cols = max(f.cols_used for f in ts.plan.folds)
    ifmap_bound = max_rows if EDGE_BOUNDS[arch.dataflow.value][0] == "rows_used" else max_cols
    filter_bound = max_rows if EDGE_BOUNDS[arch.dataflow.value][1] == "rows_used" else max_cols
    if len(ts.ifmap_reads):
        assert ts.ifmap_reads.per_cycle_counts()[1].max() <= ifmap_bound
    if len(ts.filter_reads):
        assert ts.filter_reads.per_cycle_counts()[1].max() <= filter_bound
    write_peak = ts.ofmap_writes.per_cycle_counts()[1].max()
    if arch.dataflow is Dataflow.OS:
        assert write_peak <= min(max_rows, max_cols)
    else:
        assert write_peak <= max_cols
    # determinism: regeneration is identical
    again = generate_traces(layer, arch)
    for attr in ("ifmap_reads", "filter_reads", "ofmap_writes", "ofmap_partial_reads"):
        assert getattr(ts, attr) == getattr(again, attr)


def test_trace_invariants_random_sample():
    rng = random.Random(4242)
    for _ in range(30):
        layer = random_small_layer(rng, max_side=9, max_channels=5, max_filters=6)
        arch = make_arch(rng.randint(1, 10), rng.randint(1, 10),
                         rng.choice(["os", "ws", "is"]))
        _check_invariants(layer, arch)


def test_trace_invariants_at_scale():
    # beyond oracle scale: a mid-size conv on a 128x128 array
    layer = LayerSpec("t", 30, 30, 3, 3, 64, 96, 1)
    for df in ("os", "ws", "is"):
        _check_invariants(layer, make_arch(128, 128, df, ifmap_kb=256, filter_kb=256))


def test_transpose_symmetry_constructed_layers():
    # when N_w == M, WS and IS are role swaps with equal spans
    for m, k in ((6, 5), (13, 20), (32, 9)):
        layer = lower_gemm(m, k, m)
        for rows, cols in ((4, 4), (8, 2), (3, 7)):
            ws = generate_traces(layer, make_arch(rows, cols, "ws"))
            is_ = generate_traces(layer, make_arch(rows, cols, "is"))
            assert ws.total_cycles == is_.total_cycles
            assert [(f.rows_used, f.cols_used) for f in ws.plan.folds] == \
                   [(f.rows_used, f.cols_used) for f in is_.plan.folds]
