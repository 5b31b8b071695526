"""Accessors for the bundled example configs and workload topologies.

The topology CSVs are fixtures assembled from the published layer shapes of
well-known networks, reduced in depth (repeated blocks listed once or twice)
to keep full sweeps desk-sized.  They exercise realistic dimension mixes;
they are not claimed to be complete network descriptions.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

WORKLOAD_TAGS = ("w1_alphagozero", "w2_deepspeech2", "w3_fasterrcnn", "w4_ncf",
                 "w5_resnet50", "w6_sentimental_cnn", "w7_transformer")


def _data_dir() -> Path:
    return Path(resources.files("systolicsim") / "data")


def default_config_path() -> Path:
    return _data_dir() / "configs" / "default.cfg"


def workload_path(tag: str) -> Path:
    if tag not in WORKLOAD_TAGS:
        raise KeyError(f"unknown workload tag {tag!r}; known: {', '.join(WORKLOAD_TAGS)}")
    return _data_dir() / "topologies" / f"{tag}.csv"


def bundled_workloads() -> dict[str, Path]:
    return {tag: workload_path(tag) for tag in WORKLOAD_TAGS}
