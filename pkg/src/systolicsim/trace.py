"""Cycle-stamped address streams.

A trace is a pair of parallel int64 arrays sorted by (cycle, address).
The CSV form is one row per (cycle, address) pair with a ``cycle,address``
header; DRAM traces may carry negative cycles for the cold-fill prologue.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

CSV_HEADER = "cycle,address"


class TraceEvent(NamedTuple):
    cycle: int
    addresses: np.ndarray  # all addresses issued this cycle, ascending


class Trace:
    __slots__ = ("cycles", "addresses")

    def __init__(self, cycles: np.ndarray, addresses: np.ndarray, sort: bool = True):
        cycles = np.asarray(cycles, dtype=np.int64)
        addresses = np.asarray(addresses, dtype=np.int64)
        if cycles.shape != addresses.shape:
            raise ValueError("cycle/address arrays must have equal length")
        if sort and len(cycles):
            order = np.lexsort((addresses, cycles))
            cycles, addresses = cycles[order], addresses[order]
        self.cycles = cycles
        self.addresses = addresses

    @classmethod
    def empty(cls) -> "Trace":
        return cls(np.empty(0, np.int64), np.empty(0, np.int64), sort=False)

    @classmethod
    def concat(cls, traces: "list[Trace]") -> "Trace":
        if not traces:
            return cls.empty()
        return cls(np.concatenate([t.cycles for t in traces]),
                   np.concatenate([t.addresses for t in traces]))

    def __len__(self) -> int:
        return len(self.cycles)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Trace)
                and np.array_equal(self.cycles, other.cycles)
                and np.array_equal(self.addresses, other.addresses))

    @property
    def max_cycle(self) -> int:
        if not len(self):
            raise ValueError("empty trace has no max cycle")
        return int(self.cycles[-1])

    def distinct_addresses(self) -> np.ndarray:
        return np.unique(self.addresses)

    def events(self) -> Iterator[TraceEvent]:
        """Yield per-cycle groups, addresses ascending within each cycle."""
        if not len(self):
            return
        cyc, starts = np.unique(self.cycles, return_index=True)
        bounds = np.append(starts, len(self.cycles))
        for i, c in enumerate(cyc):
            yield TraceEvent(int(c), self.addresses[bounds[i]:bounds[i + 1]])

    def per_cycle_counts(self) -> tuple[np.ndarray, np.ndarray]:
        """(cycles, event counts) for cycles that have at least one event."""
        if not len(self):
            return np.empty(0, np.int64), np.empty(0, np.int64)
        return np.unique(self.cycles, return_counts=True)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", buffering=1 << 20) as fh:
            fh.write(CSV_HEADER + "\n")
            for c, a in zip(self.cycles.tolist(), self.addresses.tolist()):
                fh.write(f"{c},{a}\n")

    @classmethod
    def read_csv(cls, path: str | Path) -> "Trace":
        with open(path) as fh:
            fh.readline()
            if not fh.readline().strip():
                return cls.empty()
        data = np.loadtxt(path, dtype=np.int64, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1], sort=False)
