"""
Master/worker round trips for one fault-tolerant block multiplication.

The master partitions A and B, pre-combines the two signed input blocks for
every term, and ships each node exactly one small product.  Nodes either
return their product or drop out; the master decodes the four C quadrants
from the survivors — exact linear combination or local-relation peeling —
and reassembles the full product.  run() executes a single round trip with
an optionally forced failure pattern; batch() re-runs the decode over many
sampled patterns against one fixed task set, drawing from the same pattern
stream as the Monte Carlo estimator so the failure fractions line up
bit for bit.
"""

from __future__ import annotations

import time
import zlib
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np

from .bilinear import (
    assemble_C,
    combine_blocks,
    naive_block_multiply,
    partition_blocks,
)
from .reliability import failure_pattern_stream
from .schemes import FailurePattern, Scheme, is_decodable, linear_decode, peel_decode

DECODERS = ("linear", "peel")
FLOAT_REL_TOL = 1e-9


# ---------------------------------------------------------------------------
# Task encoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Task:
    """One node's work order: multiply the two pre-combined input blocks."""

    node: int
    term: str
    a_input: np.ndarray
    b_input: np.ndarray


@dataclass(frozen=True, eq=False)
class WorkerOutcome:
    node: int
    completed: bool
    value: Optional[np.ndarray]


def encode_tasks(scheme: Scheme, A: np.ndarray, B: np.ndarray) -> List[Task]:
    """Partition A and B and emit one Task per term of the scheme."""
    blocksA = partition_blocks(A)
    blocksB = partition_blocks(B)
    if blocksA[0].shape[1] != blocksB[0].shape[0]:
        raise ValueError(f"incompatible shapes {np.asarray(A).shape} x "
                         f"{np.asarray(B).shape}")
    return [
        Task(i, t.label, combine_blocks(t.a, blocksA), combine_blocks(t.b, blocksB))
        for i, t in enumerate(scheme.terms)
    ]


def _execute(task: Task) -> np.ndarray:
    return naive_block_multiply(task.a_input, task.b_input)


# ---------------------------------------------------------------------------
# Single round trip
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RunReport:
    scheme_id: str
    M: int
    shape: Tuple[int, int]
    p_e: float
    seed: int
    decoder: str
    forced: bool
    pattern_labels: Tuple[str, ...]
    pattern_hex: str
    decodable: bool          # oracle verdict for the pattern
    decoded: bool            # whether the chosen decoder produced blocks
    verified: bool
    max_rel_error: float
    timings_s: Mapping[str, float]
    result: Optional[np.ndarray]     # assembled C; not serialized

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "scheme": self.scheme_id,
            "M": self.M,
            "shape": list(self.shape),
            "p_e": self.p_e,
            "seed": self.seed,
            "decoder": self.decoder,
            "forced": self.forced,
            "pattern": {
                "labels": list(self.pattern_labels),
                "hex": self.pattern_hex,
                "failures": len(self.pattern_labels),
            },
            "decodable": self.decodable,
            "decoded": self.decoded,
            "verified": self.verified,
            "max_rel_error": self.max_rel_error,
            "timings_s": dict(self.timings_s),
        }


def _resolve_pattern(
    scheme: Scheme,
    p_e: float,
    seed: int,
    fail: Optional[Union[FailurePattern, Iterable[str]]],
) -> Tuple[FailurePattern, bool]:
    if fail is not None:
        pattern = fail if isinstance(fail, FailurePattern) \
            else FailurePattern.from_labels(scheme, fail)
        pattern.validate(scheme)
        return pattern, True
    if p_e == 0.0:
        return FailurePattern(frozenset()), False
    row = next(failure_pattern_stream(scheme, p_e, 1, seed))[0]
    return FailurePattern(frozenset(int(i) for i in np.flatnonzero(row))), False


def run(
    scheme: Scheme,
    A: np.ndarray,
    B: np.ndarray,
    p_e: float = 0.0,
    seed: int = 0,
    decoder: str = "linear",
    fail: Optional[Union[FailurePattern, Iterable[str]]] = None,
) -> RunReport:
    """One encode -> compute -> decode -> verify round trip.

    fail forces an explicit failure pattern (labels or a FailurePattern)
    instead of sampling one; the report carries the verdicts, the assembled
    product, and per-phase wall times.
    """
    if decoder not in DECODERS:
        raise ValueError(f"decoder must be one of {DECODERS}")
    if not 0.0 <= p_e <= 1.0:
        raise ValueError(f"p_e={p_e} outside [0, 1]")

    t0 = time.perf_counter()
    tasks = encode_tasks(scheme, A, B)
    t_encode = time.perf_counter() - t0

    pattern, forced = _resolve_pattern(scheme, p_e, seed, fail)

    # Nodes finish in arbitrary order; aggregation is keyed by node id,
    # so a shuffled schedule must not change anything downstream.
    order_ss = np.random.SeedSequence([max(seed, 0), zlib.crc32(b"schedule")])
    order = np.random.Generator(np.random.Philox(order_ss)).permutation(scheme.M)
    t0 = time.perf_counter()
    outcomes = []
    for node in order:
        node = int(node)
        if node in pattern.failed:
            outcomes.append(WorkerOutcome(node, False, None))
        else:
            outcomes.append(WorkerOutcome(node, True, _execute(tasks[node])))
    t_compute = time.perf_counter() - t0

    values = {o.node: o.value for o in outcomes if o.completed}
    decodable = is_decodable(scheme, pattern)
    t0 = time.perf_counter()
    decode = linear_decode if decoder == "linear" else peel_decode
    blocks = decode(scheme, pattern, values) if values else None
    t_decode = time.perf_counter() - t0

    C = assemble_C(blocks) if blocks is not None else None
    verified = False
    max_rel = float("nan")
    if C is not None:
        ref = naive_block_multiply(A, B)
        denom = np.maximum(np.abs(ref).astype(np.float64), 1.0)
        max_rel = float(np.max(np.abs(C.astype(np.float64) - ref) / denom))
        if np.issubdtype(C.dtype, np.integer) and np.issubdtype(ref.dtype, np.integer):
            verified = bool((C == ref).all())
        else:
            verified = max_rel <= FLOAT_REL_TOL

    return RunReport(
        scheme_id=scheme.id,
        M=scheme.M,
        shape=tuple(np.asarray(A).shape),
        p_e=p_e,
        seed=seed,
        decoder=decoder,
        forced=forced,
        pattern_labels=pattern.labels(scheme),
        pattern_hex=pattern.to_hex(scheme.M),
        decodable=decodable,
        decoded=blocks is not None,
        verified=verified,
        max_rel_error=max_rel,
        timings_s={"encode": t_encode, "compute": t_compute, "decode": t_decode},
        result=C,
    )


# ---------------------------------------------------------------------------
# Batched decode sweeps
# ---------------------------------------------------------------------------

BATCH_CSV_HEADER = ("trial", "pattern_hex", "decoded", "verified")


@dataclass(frozen=True, eq=False)
class BatchResult:
    scheme_id: str
    size: int
    p_e: float
    trials: int
    seed: int
    decoder: str
    rows: Tuple[Tuple[int, str, bool, bool], ...]
    decode_failures: int
    verify_failures: int

    @property
    def failure_fraction(self) -> float:
        return self.decode_failures / self.trials

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "scheme": self.scheme_id,
            "size": self.size,
            "p_e": self.p_e,
            "trials": self.trials,
            "seed": self.seed,
            "decoder": self.decoder,
            "decode_failures": self.decode_failures,
            "verify_failures": self.verify_failures,
            "failure_fraction": self.failure_fraction,
            "rows": [
                {"trial": t, "pattern_hex": h, "decoded": d, "verified": v}
                for t, h, d, v in self.rows
            ],
        }


def batch_csv_rows(result: BatchResult) -> List[Tuple[str, ...]]:
    rows = [BATCH_CSV_HEADER]
    for t, h, d, v in result.rows:
        rows.append((str(t), h, str(d).lower(), str(v).lower()))
    return rows


def random_int_matrices(
    size: int, seed: int = 0, tag: str = "inputs",
) -> Tuple[np.ndarray, np.ndarray]:
    """Deterministic pair of size x size integer matrices with entries in [-9, 9]."""
    if size < 2 or size % 2:
        raise ValueError("size must be even and >= 2")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence([seed, zlib.crc32(tag.encode())])
    gen = np.random.Generator(np.random.Philox(ss))
    A = gen.integers(-9, 10, size=(size, size), dtype=np.int64)
    B = gen.integers(-9, 10, size=(size, size), dtype=np.int64)
    return A, B


def batch(
    scheme: Scheme,
    size: int = 8,
    p_e: float = 0.1,
    trials: int = 1000,
    seed: int = 0,
    decoder: str = "linear",
) -> BatchResult:
    """Decode one fixed task set under `trials` sampled failure patterns.

    Patterns come from the same seeded stream as p_fail_monte_carlo, so with
    the linear decoder the observed failure fraction matches the Monte Carlo
    estimate for (scheme, p_e, trials, seed) exactly.
    """
    if decoder not in DECODERS:
        raise ValueError(f"decoder must be one of {DECODERS}")
    if not 0.0 <= p_e <= 1.0:
        raise ValueError(f"p_e={p_e} outside [0, 1]")

    A, B = random_int_matrices(size, seed)
    tasks = encode_tasks(scheme, A, B)
    values = [_execute(t) for t in tasks]
    ref_blocks = partition_blocks(naive_block_multiply(A, B))

    decode = linear_decode if decoder == "linear" else peel_decode
    rows: List[Tuple[int, str, bool, bool]] = []
    decode_failures = 0
    verify_failures = 0
    trial = 0
    for F in failure_pattern_stream(scheme, p_e, trials, seed):
        for r in range(F.shape[0]):
            pattern = FailurePattern(
                frozenset(int(i) for i in np.flatnonzero(F[r])))
            alive = {i: values[i] for i in range(scheme.M) if i not in pattern.failed}
            blocks = decode(scheme, pattern, alive) if alive else None
            decoded = blocks is not None
            verified = decoded and all(
                (b == rb).all() for b, rb in zip(blocks, ref_blocks))
            if not decoded:
                decode_failures += 1
            elif not verified:
                verify_failures += 1
            rows.append((trial, pattern.to_hex(scheme.M), decoded, verified))
            trial += 1
    return BatchResult(scheme.id, size, p_e, trials, seed, decoder,
                       tuple(rows), decode_failures, verify_failures)
