"""Scratchpad double-buffer model: SRAM traces -> DRAM traffic + bandwidth.

Each partition (IFMAP, filter, OFMAP) is a pair of buffers: compute reads
the working set while DRAM fills the idle one.  An *epoch* is the residency
interval of one working set; walking an SRAM read trace in cycle order, a
new epoch opens whenever admitting a never-seen-in-this-epoch address would
overflow the buffer.  Re-reads within an epoch are free; addresses reused
across an epoch boundary are fetched again.

Epoch k+1's data is prefetched uniformly across epoch k's use span, which is
the minimum bandwidth that keeps the array stall-free.  The first epoch is
fetched in a prologue of the same length as its own use span, stamped with
negative cycles and excluded from runtime.  Output drains mirror this:
a full output buffer drains across the next buffer's fill interval, and the
final drain lands in an epilogue after the last compute cycle.  Only final
output values drain; WS/IS partial sums stay on chip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ArchConfig
from .errors import WorkingSetUnderflow
from .trace import Trace


@dataclass
class Epoch:
    index: int
    addresses: np.ndarray      # distinct byte addresses, first-use order
    first_use_cycle: int
    last_use_cycle: int
    word_bytes: int

    @property
    def bytes(self) -> int:
        return len(self.addresses) * self.word_bytes

    @property
    def use_span(self) -> int:
        return self.last_use_cycle - self.first_use_cycle + 1


def epochize(trace: Trace, capacity_bytes: int, word_bytes: int = 1) -> list[Epoch]:
    """Split a sorted SRAM read trace into working-set epochs."""
    if capacity_bytes < word_bytes:
        raise ValueError("capacity must hold at least one word")
    if not len(trace):
        return []
    cap_words = capacity_bytes // word_bytes

    lo = int(trace.addresses.min())
    word_idx = (trace.addresses - lo) // word_bytes
    distinct_total = len(np.unique(word_idx))
    if distinct_total <= cap_words:
        # whole footprint fits: one epoch, addresses in first-use order
        uniq, first_pos = np.unique(trace.addresses, return_index=True)
        ordered = uniq[np.argsort(first_pos)]
        return [Epoch(0, ordered, int(trace.cycles[0]), int(trace.cycles[-1]), word_bytes)]

    present = np.zeros(int(word_idx.max()) + 1, dtype=bool)
    cyc_vals, starts = np.unique(trace.cycles, return_index=True)
    bounds = np.append(starts, len(trace))
    epochs: list[Epoch] = []
    cur_parts: list[np.ndarray] = []
    cur_count = 0
    first_cyc = prev_cyc = None

    def close(last_cycle: int) -> None:
        nonlocal cur_parts, cur_count
        idx = np.concatenate(cur_parts)
        epochs.append(Epoch(len(epochs), lo + idx * word_bytes,
                            int(first_cyc), int(last_cycle), word_bytes))
        present[idx] = False
        cur_parts, cur_count = [], 0

    for ci, cyc in enumerate(cyc_vals):
        demand = np.unique(word_idx[bounds[ci]:bounds[ci + 1]])  # ascending = trace order
        if first_cyc is None:
            new = demand
        else:
            new = demand[~present[demand]]
            if cur_count + len(new) > cap_words:
                close(prev_cyc)
                first_cyc = None
                new = demand
        if first_cyc is None:
            if len(new) > cap_words:
                raise WorkingSetUnderflow(
                    f"working set underflow: cycle {int(cyc)} touches {len(new)} distinct "
                    f"words but the buffer holds {cap_words}")
            first_cyc = cyc
        if len(new):
            present[new] = True
            cur_count += len(new)
            cur_parts.append(new)
        prev_cyc = cyc
    close(prev_cyc)
    return epochs


def _spread(addresses: np.ndarray, start_cycle: int, span: int) -> Trace:
    """Distribute one transfer burst uniformly over [start, start+span)."""
    q = np.arange(len(addresses), dtype=np.int64)
    cycles = start_cycle + (q * span) // len(addresses)
    return Trace(cycles, addresses, sort=False)


@dataclass
class ReadFragment:
    """DRAM read traffic for one input partition."""

    epochs: list[Epoch]
    trace: Trace                 # prefetch events; prologue at negative cycles
    total_bytes: int
    steady_peak_bw: float        # max successor demand bytes/cycle, 0 if one epoch
    prologue_bytes: int
    prologue_cycles: int


def gen_dram_read_trace(epochs: list[Epoch]) -> ReadFragment:
    """Prefetch schedule: epoch k+1 over epoch k's use span; epoch 0 in a
    negative-cycle prologue of its own use span."""
    if not epochs:
        return ReadFragment([], Trace.empty(), 0, 0.0, 0, 0)
    pieces = []
    first = epochs[0]
    pieces.append(_spread(first.addresses, -first.use_span, first.use_span))
    steady_peak = 0.0
    for prev, nxt in zip(epochs, epochs[1:]):
        pieces.append(_spread(nxt.addresses, prev.first_use_cycle, prev.use_span))
        steady_peak = max(steady_peak, nxt.bytes / prev.use_span)
    trace = Trace.concat(pieces)
    total = sum(e.bytes for e in epochs)
    return ReadFragment(epochs, trace, total, steady_peak, first.bytes, first.use_span)


@dataclass
class WriteFragment:
    """DRAM write traffic for the output partition: final values only."""

    trace: Trace                 # drain events; epilogue at cycles >= total_cycles
    total_bytes: int
    n_drains: int
    epilogue_bytes: int
    epilogue_cycles: int


def gen_dram_write_trace(ofmap_writes: Trace, capacity_bytes: int,
                         total_cycles: int, word_bytes: int = 1) -> WriteFragment:
    if capacity_bytes < word_bytes:
        raise ValueError("capacity must hold at least one word")
    if not len(ofmap_writes):
        return WriteFragment(Trace.empty(), 0, 0, 0, 0)
    cap_words = capacity_bytes // word_bytes

    # keep the last write per address (partial sums are overwritten in place)
    order = np.lexsort((ofmap_writes.cycles, ofmap_writes.addresses))
    addr_sorted = ofmap_writes.addresses[order]
    last_of_addr = order[np.append(addr_sorted[1:] != addr_sorted[:-1], True)]
    fin_cycles = ofmap_writes.cycles[last_of_addr]
    fin_addrs = ofmap_writes.addresses[last_of_addr]
    by_cycle = np.lexsort((fin_addrs, fin_cycles))
    fin_cycles, fin_addrs = fin_cycles[by_cycle], fin_addrs[by_cycle]

    n = len(fin_addrs)
    n_chunks = -(-n // cap_words)
    pieces = []
    spans = []
    for k in range(n_chunks):
        sl = slice(k * cap_words, min(n, (k + 1) * cap_words))
        spans.append((int(fin_cycles[sl.start]),
                      int(fin_cycles[sl.stop - 1]) - int(fin_cycles[sl.start]) + 1))
    for k in range(n_chunks - 1):
        sl = slice(k * cap_words, (k + 1) * cap_words)
        nxt_first, nxt_span = spans[k + 1]
        pieces.append(_spread(fin_addrs[sl], nxt_first, nxt_span))
    last_sl = slice((n_chunks - 1) * cap_words, n)
    epi_span = spans[-1][1]
    pieces.append(_spread(fin_addrs[last_sl], total_cycles, epi_span))
    epi_bytes = (last_sl.stop - last_sl.start) * word_bytes
    return WriteFragment(Trace.concat(pieces), n * word_bytes, n_chunks,
                         epi_bytes, epi_span)


@dataclass
class DramDemand:
    """Merged DRAM view of one layer."""

    read_trace: Trace
    write_trace: Trace
    ifmap: ReadFragment
    filter: ReadFragment
    write: WriteFragment
    total_dram_reads: int        # bytes, prologue included
    total_dram_writes: int       # bytes, epilogue included
    avg_read_bw: float           # bytes/cycle over the compute runtime
    peak_read_bw: int            # max bytes in one in-run cycle
    avg_write_bw: float
    peak_write_bw: int


def _in_run_peak(trace: Trace, total_cycles: int, word_bytes: int) -> int:
    if not len(trace):
        return 0
    mask = (trace.cycles >= 0) & (trace.cycles < total_cycles)
    if not mask.any():
        return 0
    _, counts = np.unique(trace.cycles[mask], return_counts=True)
    return int(counts.max()) * word_bytes


def bandwidth_report(ifmap_frag: ReadFragment, filter_frag: ReadFragment,
                     write_frag: WriteFragment, total_cycles: int,
                     word_bytes: int = 1) -> DramDemand:
    if total_cycles <= 0:
        raise ValueError("total_cycles must be positive")
    read_trace = Trace.concat([ifmap_frag.trace, filter_frag.trace])
    total_reads = ifmap_frag.total_bytes + filter_frag.total_bytes
    total_writes = write_frag.total_bytes
    return DramDemand(
        read_trace=read_trace,
        write_trace=write_frag.trace,
        ifmap=ifmap_frag,
        filter=filter_frag,
        write=write_frag,
        total_dram_reads=total_reads,
        total_dram_writes=total_writes,
        avg_read_bw=total_reads / total_cycles,
        peak_read_bw=_in_run_peak(read_trace, total_cycles, word_bytes),
        avg_write_bw=total_writes / total_cycles,
        peak_write_bw=_in_run_peak(write_frag.trace, total_cycles, word_bytes),
    )


def dram_demand(traces, arch: ArchConfig) -> DramDemand:
    """Full memory-system pass over one layer's TraceSet."""
    word = arch.word_bytes
    ifmap_frag = gen_dram_read_trace(
        epochize(traces.ifmap_reads, arch.ifmap_capacity_bytes, word))
    filter_frag = gen_dram_read_trace(
        epochize(traces.filter_reads, arch.filter_capacity_bytes, word))
    write_frag = gen_dram_write_trace(
        traces.ofmap_writes, arch.ofmap_capacity_bytes, traces.total_cycles, word)
    return bandwidth_report(ifmap_frag, filter_frag, write_frag,
                            traces.total_cycles, word)
