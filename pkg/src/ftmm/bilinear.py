"""
Exact representation and evaluation of 2x2-block bilinear matrix
multiplication algorithms (Strassen and Winograd variants).

Every sub-computation is one bilinear term: a signed {-1,0,+1} combination
of A-quadrants multiplied by a signed combination of B-quadrants.  Symbolic
work happens on 16-coefficient expansion vectors over the elementary
products A_ij * B_kl; numeric work happens on numpy blocks.

Conventions (fixed, used everywhere):
    C = A @ B
    quadrants ordered row-major: 11 < 12 < 21 < 22
    linear index of (a_idx, b_idx) = 4*ord(b_idx) + ord(a_idx)
    support-mask bit = 15 - linear index      (MSB = (A11,B11))

Under these conventions the four output targets render as the support
masks 0x8040 (C11), 0x0804 (C12), 0x2010 (C21), 0x0201 (C22).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

# ---------------------------------------------------------------------------
# Block indexing
# ---------------------------------------------------------------------------

#: Row-major quadrant labels of a 2x2 partition; this order is the total
#: order used for every serialization in the package.
BLOCKS: Tuple[str, str, str, str] = ("11", "12", "21", "22")

_ORD = {lbl: i for i, lbl in enumerate(BLOCKS)}

#: A {-1,0,+1} coefficient per quadrant, in BLOCKS order.
Coeff4 = Tuple[int, int, int, int]


def coeff4(entries: Mapping[str, int]) -> Coeff4:
    """Build a Coeff4 from a sparse {"11": +-1, ...} mapping."""
    out = [0, 0, 0, 0]
    for lbl, v in entries.items():
        if lbl not in _ORD:
            raise ValueError(f"unknown block label {lbl!r}")
        if v not in (-1, 0, 1):
            raise ValueError(f"coefficient {v} outside {{-1,0,+1}}")
        out[_ORD[lbl]] = v
    return tuple(out)  # type: ignore[return-value]


def coeff4_to_json(c: Coeff4) -> dict:
    """Nonzero entries as an ordered {"11": int, ...} dict."""
    return {lbl: c[_ORD[lbl]] for lbl in BLOCKS if c[_ORD[lbl]] != 0}


# ---------------------------------------------------------------------------
# Terms and expansion vectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BilinearTerm:
    """One sub-matrix multiplication: (sum a_i A_i) @ (sum b_j B_j)."""

    label: str
    a: Coeff4
    b: Coeff4

    def __post_init__(self):
        if not any(self.a) or not any(self.b):
            raise ValueError(f"term {self.label!r} has an all-zero side")


@dataclass(frozen=True)
class ExpansionVector:
    """Integer coefficients over the 16 elementary products A_ij * B_kl.

    coeffs[4*ord(b_idx) + ord(a_idx)] is the coefficient of A_{a_idx} B_{b_idx}.
    """

    coeffs: Tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != 16:
            raise ValueError("expansion vector needs exactly 16 coefficients")

    def support_mask(self) -> int:
        """Bitmask of nonzero positions, bit = 15 - linear index."""
        mask = 0
        for li, x in enumerate(self.coeffs):
            if x != 0:
                mask |= 1 << (15 - li)
        return mask

    @property
    def support_hex(self) -> str:
        return f"0x{self.support_mask():04x}"

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=np.int64)

    def __neg__(self) -> "ExpansionVector":
        return ExpansionVector(tuple(-x for x in self.coeffs))


def expand(term: BilinearTerm) -> ExpansionVector:
    """Outer-product expansion of a term; rank 1 by construction."""
    v = [0] * 16
    for bi in range(4):
        if term.b[bi] == 0:
            continue
        for ai in range(4):
            v[4 * bi + ai] = term.a[ai] * term.b[bi]
    return ExpansionVector(tuple(v))


def combine_expansions(
    signed: Iterable[Tuple[int, ExpansionVector]],
) -> ExpansionVector:
    """Exact entrywise signed integer sum of expansion vectors."""
    acc = [0] * 16
    n = 0
    for sign, vec in signed:
        for i, x in enumerate(vec.coeffs):
            acc[i] += sign * x
        n += 1
    if n == 0:
        raise ValueError("combine_expansions needs at least one term")
    return ExpansionVector(tuple(acc))


def outer_expansion(a: Coeff4, b: Coeff4) -> ExpansionVector:
    """Expansion of the product (sum a_i A_i)(sum b_j B_j) without a term wrapper."""
    v = [0] * 16
    for bi in range(4):
        for ai in range(4):
            v[4 * bi + ai] = a[ai] * b[bi]
    return ExpansionVector(tuple(v))


def _target(pairs) -> ExpansionVector:
    v = [0] * 16
    for a_lbl, b_lbl in pairs:
        v[4 * _ORD[b_lbl] + _ORD[a_lbl]] = 1
    return ExpansionVector(tuple(v))


#: Expansion of each output quadrant of C = A @ B.
#: C11 = A11 B11 + A12 B21, C12 = A11 B12 + A12 B22,
#: C21 = A21 B11 + A22 B21, C22 = A21 B12 + A22 B22.
C_TARGETS: Mapping[str, ExpansionVector] = {
    "11": _target([("11", "11"), ("12", "21")]),
    "12": _target([("11", "12"), ("12", "22")]),
    "21": _target([("21", "11"), ("22", "21")]),
    "22": _target([("21", "12"), ("22", "22")]),
}

#: Frozen support masks of the four targets (see module docstring).
C_TARGET_HEX = {lbl: C_TARGETS[lbl].support_hex for lbl in BLOCKS}


# ---------------------------------------------------------------------------
# Algorithm catalogs
# ---------------------------------------------------------------------------

_STRASSEN_DEFS = (
    # label,  A-side,                 B-side
    ("S1", {"11": 1, "22": 1}, {"11": 1, "22": 1}),           # (A11+A22)(B11+B22)
    ("S2", {"21": 1, "22": 1}, {"11": 1}),                    # (A21+A22) B11
    ("S3", {"11": 1}, {"12": 1, "22": -1}),                   # A11 (B12-B22)
    ("S4", {"22": 1}, {"21": 1, "11": -1}),                   # A22 (B21-B11)
    ("S5", {"11": 1, "12": 1}, {"22": 1}),                    # (A11+A12) B22
    ("S6", {"21": 1, "11": -1}, {"11": 1, "12": 1}),          # (A21-A11)(B11+B12)
    ("S7", {"12": 1, "22": -1}, {"21": 1, "22": 1}),          # (A12-A22)(B21+B22)
)

_WINOGRAD_DEFS = (
    ("W1", {"11": 1}, {"11": 1}),                             # A11 B11
    ("W2", {"12": 1}, {"21": 1}),                             # A12 B21
    ("W3", {"22": 1}, {"11": 1, "12": -1, "21": -1, "22": 1}),  # A22 (B11-B12-B21+B22)
    ("W4", {"11": 1, "21": -1}, {"22": 1, "12": -1}),         # (A11-A21)(B22-B12)
    ("W5", {"21": 1, "22": 1}, {"12": 1, "11": -1}),          # (A21+A22)(B12-B11)
    ("W6", {"11": 1, "12": 1, "21": -1, "22": -1}, {"22": 1}),  # (A11+A12-A21-A22) B22
    ("W7", {"11": 1, "21": -1, "22": -1}, {"11": 1, "12": -1, "22": 1}),  # (A11-A21-A22)(B11-B12+B22)
)


def _build(defs) -> Tuple[BilinearTerm, ...]:
    return tuple(BilinearTerm(lbl, coeff4(a), coeff4(b)) for lbl, a, b in defs)


def strassen_terms() -> Tuple[BilinearTerm, ...]:
    """The seven Strassen sub-computations S1..S7, in order."""
    return _build(_STRASSEN_DEFS)


def winograd_terms() -> Tuple[BilinearTerm, ...]:
    """The seven Winograd sub-computations W1..W7, in order."""
    return _build(_WINOGRAD_DEFS)


# ===========================================================================
#  Numeric block arithmetic
# ===========================================================================

def naive_block_multiply(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Conventional matrix product; the ground-truth oracle everywhere."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise ValueError(f"incompatible shapes {A.shape} x {B.shape}")
    return A @ B


def partition_blocks(M: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Split a matrix into its four quadrants, in BLOCKS order.

    Dimensions must be even; odd sizes are rejected rather than padded.
    """
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    r, c = M.shape
    if r % 2 or c % 2:
        raise ValueError(f"dimensions must be even, got {M.shape}")
    h, w = r // 2, c // 2
    return M[:h, :w], M[:h, w:], M[h:, :w], M[h:, w:]


def assemble_C(blocks: Sequence[np.ndarray]) -> np.ndarray:
    """Concatenate the four C quadrants (BLOCKS order) into the full product."""
    c11, c12, c21, c22 = (np.asarray(b) for b in blocks)
    if c11.shape != c12.shape or c21.shape != c22.shape or c11.shape[1] != c12.shape[1]:
        pass  # np.block raises a clear error below on any genuine mismatch
    return np.block([[c11, c12], [c21, c22]])


def combine_blocks(coeffs: Coeff4, blocks: Sequence[np.ndarray]) -> np.ndarray:
    """Signed sum of quadrants: sum(coeffs[i] * blocks[i])."""
    acc: Optional[np.ndarray] = None
    for i in range(4):
        if coeffs[i] == 0:
            continue
        contrib = blocks[i] if coeffs[i] == 1 else -blocks[i]
        acc = contrib.copy() if acc is None else acc + contrib
    if acc is None:
        raise ValueError("all-zero coefficient side")
    return acc


def evaluate_term(
    term: BilinearTerm,
    blocksA: Sequence[np.ndarray],
    blocksB: Sequence[np.ndarray],
) -> np.ndarray:
    """Numerically evaluate one term on pre-partitioned quadrants.

    blocksA / blocksB are the four quadrants of A and B in BLOCKS order.
    """
    blocksA = [np.asarray(b) for b in blocksA]
    blocksB = [np.asarray(b) for b in blocksB]
    if len({b.shape for b in blocksA}) != 1 or len({b.shape for b in blocksB}) != 1:
        raise ValueError("quadrants of one side must share a shape")
    left = combine_blocks(term.a, blocksA)
    right = combine_blocks(term.b, blocksB)
    return naive_block_multiply(left, right)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def term_to_json(term: BilinearTerm) -> dict:
    return {
        "label": term.label,
        "a": coeff4_to_json(term.a),
        "b": coeff4_to_json(term.b),
    }


def expansion_to_json(vec: ExpansionVector) -> dict:
    return {"coeffs": list(vec.coeffs), "support_hex": vec.support_hex}
