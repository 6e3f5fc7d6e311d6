"""Versioned text checkpoints for the resumable Mertens scan.

Layout::

    sievekit-mertens-checkpoint v1
    limit=<int> segment_width=<int>
    segment_index,last_prime,sum_neg_log_terms,checked_count,max_log_ratio,argmax_prime,counterexample_count
    0,99999989,3.4...e+00,5761455,-1.2e-05,2,0
    ...
    checksum sha256 <hex digest of every line above>

``sum_neg_log_terms`` is the running ``sum -log(1 - 1/p)`` written with 50
significant digits.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from decimal import Decimal, getcontext
from pathlib import Path
from typing import List, Tuple

from .errors import CheckpointError

MAGIC = "sievekit-mertens-checkpoint v1"
COLUMNS = (
    "segment_index,last_prime,sum_neg_log_terms,checked_count,"
    "max_log_ratio,argmax_prime,counterexample_count"
)


@dataclass
class SegmentRecord:
    segment_index: int
    last_prime: int
    running_sum: Tuple[float, float]  # double-double
    checked_count: int
    max_log_ratio: float
    argmax_prime: int
    counterexample_count: int


def dd_to_decimal_str(x: Tuple[float, float]) -> str:
    getcontext().prec = 60
    return format(Decimal(x[0]) + Decimal(x[1]), ".49e")


def decimal_str_to_dd(text: str) -> Tuple[float, float]:
    getcontext().prec = 60
    d = Decimal(text)
    hi = float(d)
    return hi, float(d - Decimal(hi))


def _digest(lines: List[str]) -> str:
    return hashlib.sha256(("\n".join(lines) + "\n").encode()).hexdigest()


def write_checkpoint(path, limit: int, width: int, records: List[SegmentRecord]) -> None:
    lines = [MAGIC, f"limit={limit} segment_width={width}", COLUMNS]
    for r in records:
        lines.append(
            f"{r.segment_index},{r.last_prime},{dd_to_decimal_str(r.running_sum)},"
            f"{r.checked_count},{r.max_log_ratio!r},{r.argmax_prime},{r.counterexample_count}"
        )
    lines.append(f"checksum sha256 {_digest(lines)}")
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except OSError as exc:
        raise CheckpointError(f"cannot write checkpoint {path}: {exc}") from exc


def read_checkpoint(path, limit: int, width: int) -> List[SegmentRecord]:
    """Records of a checkpoint written for the same ``limit`` and width."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if len(lines) < 4 or lines[0] != MAGIC or lines[2] != COLUMNS:
        raise CheckpointError(f"{path} is not a v1 Mertens checkpoint")
    tail = lines[-1].split()
    if len(tail) != 3 or tail[:2] != ["checksum", "sha256"] or tail[2] != _digest(lines[:-1]):
        raise CheckpointError(f"checksum mismatch in {path}")
    if lines[1] != f"limit={limit} segment_width={width}":
        raise CheckpointError(f"{path} was written for different scan settings: {lines[1]}")
    records = []
    for row in lines[3:-1]:
        f = row.split(",")
        records.append(
            SegmentRecord(
                int(f[0]), int(f[1]), decimal_str_to_dd(f[2]), int(f[3]), float(f[4]), int(f[5]), int(f[6])
            )
        )
    return records
