"""Shared test helpers."""

import random

import numpy as np

from systolicsim.config import ArchConfig, Dataflow, LayerSpec
from systolicsim.trace import Trace

# offsets far enough apart for any desk-scale layer
IFMAP_OFF = 0
FILTER_OFF = 10**7
OFMAP_OFF = 2 * 10**7


def make_arch(rows, cols, dataflow="os", ifmap_kb=64, filter_kb=64, ofmap_kb=64,
              word_bytes=1):
    return ArchConfig(rows, cols, ifmap_kb, filter_kb, ofmap_kb,
                      IFMAP_OFF, FILTER_OFF, OFMAP_OFF,
                      Dataflow.parse(dataflow), word_bytes)


def pairs_to_trace(pairs):
    """Oracle (cycle, address) lists -> sorted Trace."""
    if not pairs:
        return Trace.empty()
    arr = np.array(pairs, dtype=np.int64)
    return Trace(arr[:, 0], arr[:, 1])


def random_small_layer(rng: random.Random, max_side=6, max_filter=3,
                       max_channels=4, max_filters=4) -> LayerSpec:
    ih = rng.randint(1, max_side)
    iw = rng.randint(1, max_side)
    fh = rng.randint(1, min(max_filter, ih))
    fw = rng.randint(1, min(max_filter, iw))
    return LayerSpec(
        name=f"rand{rng.randint(0, 10**6)}",
        ifmap_h=ih, ifmap_w=iw, filter_h=fh, filter_w=fw,
        channels=rng.randint(1, max_channels),
        num_filters=rng.randint(1, max_filters),
        stride=rng.randint(1, 2),
    )


def random_medium_layer(rng: random.Random) -> LayerSpec:
    ih = rng.randint(3, 14)
    iw = rng.randint(3, 14)
    fh = rng.randint(1, min(4, ih))
    fw = rng.randint(1, min(4, iw))
    return LayerSpec(
        name=f"rand{rng.randint(0, 10**6)}",
        ifmap_h=ih, ifmap_w=iw, filter_h=fh, filter_w=fw,
        channels=rng.randint(1, 6),
        num_filters=rng.randint(1, 9),
        stride=rng.randint(1, 3),
    )


def write_topology(path, rows):
    """rows: list of (name, ih, iw, fh, fw, c, m, s) tuples."""
    lines = ["Layer Name,IFMAP Height,IFMAP Width,Filter Height,Filter Width,"
             "Channels,Num Filter,Strides"]
    lines += [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_config(path, rows=8, cols=8, dataflow="os", ifmap_kb=64, filter_kb=64,
                 ofmap_kb=64, topology="topo.csv"):
    path.write_text(f"""[architecture]
ArrayHeight = {rows}
ArrayWidth = {cols}
IfmapSRAMSz = {ifmap_kb}
FilterSRAMSz = {filter_kb}
OfmapSRAMSz = {ofmap_kb}
IfmapOffset = {IFMAP_OFF}
FilterOffset = {FILTER_OFF}
OfmapOffset = {OFMAP_OFF}
DataFlow = {dataflow}
Topology = {topology}
""")
    return path
