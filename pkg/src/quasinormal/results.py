"""Verdicts, probe configuration and machine-readable reports."""
from __future__ import annotations

import enum
import hashlib
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Iterator, Sequence

import numpy as np

from .hilbert import Label, Nat, SparseVec, TolerancePolicy, TreeVertex, Block

SCHEMA_VERSION = 1


class Status(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self) -> str:
        return self.value


@dataclass
class Verdict:
    status: Status
    discrepancy: float = 0.0
    witness: Any = None
    context: dict = field(default_factory=dict)
    reason: str = ""

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def fails(self) -> bool:
        return self.status is Status.FAILS

    @property
    def inconclusive(self) -> bool:
        return self.status is Status.INCONCLUSIVE

    def __repr__(self) -> str:
        w = f", witness={_witness_repr(self.witness)}" if self.witness is not None else ""
        r = f", reason={self.reason!r}" if self.reason else ""
        return f"Verdict({self.status.value}, discrepancy={self.discrepancy:.3g}{w}{r})"


def _witness_repr(w) -> str:
    if isinstance(w, SparseVec):
        return f"vector[{len(w)}]"
    return str(w)


def Holds(discrepancy: float = 0.0, **context) -> Verdict:
    return Verdict(Status.HOLDS, float(discrepancy), None, context)


def Fails(discrepancy: float, witness, **context) -> Verdict:
    return Verdict(Status.FAILS, float(discrepancy), witness, context)


def Inconclusive(reason: str, discrepancy: float = 0.0, **context) -> Verdict:
    return Verdict(Status.INCONCLUSIVE, float(discrepancy), None, context, reason)


def decide(discrepancy: float, bound: float, witness, **context) -> Verdict:
    """Holds when ``discrepancy <= bound``; otherwise Fails carrying ``witness``."""
    context.setdefault("bound", bound)
    if discrepancy <= bound:
        return Holds(discrepancy, **context)
    return Fails(discrepancy, witness, **context)


@dataclass(frozen=True)
class ProbeConfig:
    """Deterministic random-probe budget.

    Probes have complex standard Gaussian entries on uniformly chosen subsets
    of ``label_window`` of size ``support_size``; the generator is numpy's
    PCG64 seeded with ``seed``, so identical configs give identical probes.
    """

    seed: int = 0
    num_probes: int = 200
    support_size: int = 6
    label_window: tuple | None = None

    def __post_init__(self):
        if self.num_probes < 0 or self.support_size <= 0:
            raise ValueError("num_probes must be >= 0 and support_size > 0")

    def with_window(self, window: Sequence[Label]) -> "ProbeConfig":
        return ProbeConfig(self.seed, self.num_probes, self.support_size, tuple(window))

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))

    def probe_batch(self, m: int, num: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Index and value arrays of shape (num, k) for a window of size ``m``.

        Supports are the first k entries of a uniformly random permutation
        (argsort of uniform keys), sorted; values are (x + iy)/sqrt(2) with
        x, y standard normal.  Drawn in that order from one PCG64 stream.
        """
        num = self.num_probes if num is None else num
        k = min(self.support_size, m)
        rng = self.rng()
        keys = rng.random((num, m))
        idx = np.sort(np.argsort(keys, axis=1, kind="stable")[:, :k], axis=1)
        vals = (rng.standard_normal((num, k)) + 1j * rng.standard_normal((num, k))) / np.sqrt(2.0)
        return idx, vals

    def dense_probes(self, m: int, num: int | None = None) -> np.ndarray:
        idx, vals = self.probe_batch(m, num)
        x = np.zeros((idx.shape[0], m), dtype=complex)
        np.put_along_axis(x, idx, vals, axis=1)
        return x

    def probes(self, window: Sequence[Label] | None = None) -> Iterator[SparseVec]:
        window = list(window if window is not None else self.label_window or ())
        if not window or self.num_probes == 0:
            return
        idx, vals = self.probe_batch(len(window))
        for row_i, row_v in zip(idx, vals):
            yield SparseVec((window[i], v) for i, v in zip(row_i, row_v))

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "num_probes": self.num_probes,
            "support_size": self.support_size,
            "label_window": None if self.label_window is None else [str(x) for x in self.label_window],
        }


def jsonable(x):
    """Convert verdict context values into plain JSON types."""
    if isinstance(x, (Nat, TreeVertex, Block)):
        return str(x)
    if isinstance(x, SparseVec):
        return x.to_json()
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, TolerancePolicy):
        return x.to_json()
    if isinstance(x, ProbeConfig):
        return x.to_json()
    if x is None or isinstance(x, (bool, int, float, str)):
        return x
    return str(x)


def fmt_real(x: float) -> str:
    return format(float(x), ".17g")


def _witness_json(w):
    if w is None:
        return None
    if isinstance(w, SparseVec):
        return w.to_json()
    if isinstance(w, (Nat, TreeVertex, Block)):
        return {str(w): [1.0, 0.0]}
    return jsonable(w)


def natural_key(text: str) -> list:
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", text)]


@dataclass
class ReportEntry:
    predicate: str
    anchor: str
    verdict: Verdict
    expected: Status | None = None

    @property
    def matched(self) -> bool:
        return self.expected is None or self.verdict.status is self.expected

    def to_json(self, seed) -> dict:
        v = self.verdict
        out = {
            "predicate": self.predicate,
            "anchor": self.anchor,
            "status": v.status.value,
            "discrepancy": fmt_real(v.discrepancy),
            "witness": _witness_json(v.witness),
            "seed": seed,
        }
        if self.expected is not None:
            out["expected"] = self.expected.value
        if v.reason:
            out["reason"] = v.reason
        out["context"] = jsonable(v.context)
        return out


class Report:
    """Ordered record of a check suite; serializes to deterministic JSON."""

    def __init__(self, descriptor: str, config: dict | None = None, seed: int | None = None):
        self.descriptor = descriptor
        self.config = config or {}
        self.seed = seed
        self.entries: list[ReportEntry] = []
        self.notes: dict = {}

    def add(self, predicate: str, anchor: str, verdict: Verdict, expected: Status | None = None):
        self.entries.append(ReportEntry(predicate, anchor, verdict, expected))
        return verdict

    def extend(self, other: "Report", prefix: str = ""):
        for e in other.entries:
            self.entries.append(ReportEntry(prefix + e.predicate, e.anchor, e.verdict, e.expected))
        for k, v in other.notes.items():
            self.notes[prefix + k] = v

    def __iter__(self):
        return iter(self.sorted_entries())

    def __len__(self) -> int:
        return len(self.entries)

    def sorted_entries(self) -> list[ReportEntry]:
        return sorted(self.entries, key=lambda e: natural_key(e.predicate))

    def get(self, predicate: str) -> Verdict:
        for e in self.entries:
            if e.predicate == predicate:
                return e.verdict
        raise KeyError(predicate)

    @property
    def ok(self) -> bool:
        return all(e.matched for e in self.entries)

    def unexpected(self) -> list[ReportEntry]:
        return [e for e in self.sorted_entries() if not e.matched]

    @property
    def has_expectations(self) -> bool:
        return any(e.expected is not None for e in self.entries)

    @property
    def has_inconclusive(self) -> bool:
        return any(e.verdict.inconclusive for e in self.entries)

    def config_hash(self) -> str:
        blob = json.dumps(jsonable(self.config), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_json(self, timestamp: bool = True) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "descriptor": self.descriptor,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds") if timestamp else None,
            "config_hash": self.config_hash(),
            "config": jsonable(self.config),
            "entries": [e.to_json(self.seed) for e in self.sorted_entries()],
        }
        if self.notes:
            out["notes"] = jsonable(self.notes)
        return out

    def dumps(self, timestamp: bool = True) -> str:
        return json.dumps(self.to_json(timestamp), indent=2) + "\n"

    def summary_lines(self) -> list[str]:
        lines = []
        for e in self.sorted_entries():
            exp = "" if e.expected is None else f" (expected {e.expected.value})"
            mark = "ok " if e.matched else "BAD"
            lines.append(f"{mark} {e.predicate:<40} {e.verdict.status.value:<12} "
                         f"{e.verdict.discrepancy:.3e}{exp}")
        return lines
