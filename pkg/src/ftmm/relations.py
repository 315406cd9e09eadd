"""
Exhaustive search for recovery relations between bilinear sub-computations.

A *local* relation is a signed {-1,0,+1} selection of scheme terms whose
expansions sum exactly to one of the four output-quadrant targets: it lets
a master node rebuild that quadrant (or back-solve one missing term) from
whatever did arrive.  A *parity* relation sums to some other single
rank-one bilinear product; those are the candidates for extra redundant
sub-computations.

The search walks every ternary sign vector over the term list (global sign
deduplicated: the first nonzero sign of each enumerated vector is +1) and
classifies the combined expansion.  Stored orientation:

  * locals are flipped, when needed, so the sum equals the +target;
  * parities keep the enumerated orientation, and the reported rank-one
    factorization canonicalizes its A-side to lead with +1.

Two enumeration strategies produce identical canonical output: a full
ternary sweep (small term counts) and per-support-size subset enumeration
(larger term counts with a bounded support size).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bilinear import (
    BLOCKS,
    BilinearTerm,
    Coeff4,
    C_TARGETS,
    ExpansionVector,
    coeff4_to_json,
    expand,
)

#: Hard ceiling on the number of terms a search will accept.
MAX_TERMS = 24

_CHUNK = 1 << 18


# ---------------------------------------------------------------------------
# Relation containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Relation:
    """One signed combination of scheme terms with a classified meaning.

    kind "local": the combination equals the output target `target`
    (a quadrant label, "11".."22").  kind "parity": it equals the rank-one
    product factor_a (x) factor_b, which is not any input term's expansion.
    """

    signs: Tuple[int, ...]
    kind: str                      # "local" | "parity"
    target: Optional[str] = None
    factor_a: Optional[Coeff4] = None
    factor_b: Optional[Coeff4] = None

    @property
    def support_size(self) -> int:
        return sum(1 for s in self.signs if s)

    def support_indices(self) -> Tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.signs) if s)

    def combo(self, labels: Sequence[str]) -> str:
        """Render as e.g. 'S2+S4-W4'."""
        parts = []
        for i, s in enumerate(self.signs):
            if s == 0:
                continue
            op = "+" if s > 0 else "-"
            if not parts and s > 0:
                parts.append(labels[i])
            else:
                parts.append(op + labels[i])
        return "".join(parts)


@dataclass(frozen=True)
class RelationSet:
    """Deduplicated, canonically ordered relations for one term catalog."""

    scheme: str
    labels: Tuple[str, ...]
    k_max: int
    locals: Tuple[Relation, ...]
    parities: Tuple[Relation, ...]

    def per_target_counts(self) -> Dict[str, int]:
        counts = {lbl: 0 for lbl in BLOCKS}
        for r in self.locals:
            counts[r.target] += 1
        return counts

    def distinct_local_supports(self) -> int:
        """Number of distinct participating-term sets among local relations."""
        return len({r.support_indices() for r in self.locals})

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "scheme": self.scheme,
            "k_max": self.k_max,
            "labels": list(self.labels),
            "counts": {
                "locals": len(self.locals),
                "parities": len(self.parities),
                "local_supports": self.distinct_local_supports(),
                "per_target": {f"C{k}": v for k, v in self.per_target_counts().items()},
            },
            "locals": [
                {
                    "target": f"C{r.target}",
                    "terms": [
                        {"label": self.labels[i], "sign": int(r.signs[i])}
                        for i in r.support_indices()
                    ],
                }
                for r in self.locals
            ],
            "parities": [
                {
                    "a": coeff4_to_json(r.factor_a),
                    "b": coeff4_to_json(r.factor_b),
                    "terms": [
                        {"label": self.labels[i], "sign": int(r.signs[i])}
                        for i in r.support_indices()
                    ],
                }
                for r in self.parities
            ],
        }


RELATION_CSV_HEADER = ("scheme", "kind", "target", "k", "combo", "factor_a", "factor_b")


def relation_csv_rows(doc: dict) -> List[Tuple[str, ...]]:
    """Flatten a RelationSet JSON document to CSV rows, one relation each."""
    def combo_of(entry):
        parts = []
        for t in entry["terms"]:
            op = "+" if t["sign"] > 0 else "-"
            if not parts and t["sign"] > 0:
                parts.append(t["label"])
            else:
                parts.append(op + t["label"])
        return "".join(parts)

    def side(c):
        return " ".join(f"{k}:{v:+d}" for k, v in c.items())

    rows = [RELATION_CSV_HEADER]
    for entry in doc["locals"]:
        rows.append((doc["scheme"], "local", entry["target"],
                     str(len(entry["terms"])), combo_of(entry), "", ""))
    for entry in doc["parities"]:
        rows.append((doc["scheme"], "parity", "",
                     str(len(entry["terms"])), combo_of(entry),
                     side(entry["a"]), side(entry["b"])))
    return rows


# ---------------------------------------------------------------------------
# Combination parsing (used by the hand-written catalogs and the CLI)
# ---------------------------------------------------------------------------

def parse_combo(expr: str, labels: Sequence[str]) -> Tuple[int, ...]:
    """'S2+S4-W4' -> sign vector over `labels`."""
    index = {lbl: i for i, lbl in enumerate(labels)}
    signs = [0] * len(labels)
    sign, token = 1, ""
    for ch in expr.replace(" ", "") + "+":
        if ch in "+-":
            if token:
                if token not in index:
                    raise ValueError(f"unknown term label {token!r} in {expr!r}")
                if signs[index[token]]:
                    raise ValueError(f"duplicate term {token!r} in {expr!r}")
                signs[index[token]] = sign
            sign = 1 if ch == "+" else -1
            token = ""
        else:
            token += ch
    if not any(signs):
        raise ValueError(f"empty combination {expr!r}")
    return tuple(signs)


# ---------------------------------------------------------------------------
# Rank-one factorization test
# ---------------------------------------------------------------------------

def is_rank_one(v: ExpansionVector) -> Optional[Tuple[Coeff4, Coeff4]]:
    """Factor v as a (x) b with entries in {-1,0,+1}, if possible.

    Returns the canonical factorization (first nonzero of a is +1), or None
    for the zero vector, entries outside {-1,0,+1}, or rank > 1.
    """
    if any(abs(x) > 1 for x in v.coeffs):
        return None
    grid = np.array(v.coeffs, dtype=np.int64).reshape(4, 4)  # rows = b, cols = a
    nonzero_rows = [i for i in range(4) if grid[i].any()]
    if not nonzero_rows:
        return None
    a = grid[nonzero_rows[0]].tolist()
    b = [0, 0, 0, 0]
    for i in nonzero_rows:
        if np.array_equal(grid[i], a):
            b[i] = 1
        elif np.array_equal(grid[i], np.negative(a)):
            b[i] = -1
        else:
            return None
    for x in a:
        if x:
            if x < 0:
                a = [-t for t in a]
                b = [-t for t in b]
            break
    return tuple(a), tuple(b)


# ===========================================================================
#  Search
# ===========================================================================

def verify_relation(terms: Sequence[BilinearTerm], relation: Relation) -> bool:
    """Re-check a relation by exact integer expansion."""
    if len(relation.signs) != len(terms):
        raise ValueError("sign vector length does not match term count")
    acc = [0] * 16
    for sign, term in zip(relation.signs, terms):
        if sign == 0:
            continue
        for i, x in enumerate(expand(term).coeffs):
            acc[i] += sign * x
    if relation.kind == "local":
        return tuple(acc) == C_TARGETS[relation.target].coeffs
    if relation.kind == "parity":
        from .bilinear import outer_expansion
        return tuple(acc) == outer_expansion(relation.factor_a, relation.factor_b).coeffs
    raise ValueError(f"unknown relation kind {relation.kind!r}")


def _classify_chunk(D, X, k_max, M, tgt_pos, tgt_neg, term_keys,
                    elementary_only, out_locals, out_parities):
    ok = (np.abs(X) <= 1).all(axis=1)
    if k_max < M:
        ok &= (D != 0).sum(axis=1) <= k_max
    for di, xi in zip(D[ok], X[ok]):
        key = xi.tobytes()
        hit = False
        for lbl in BLOCKS:
            if key == tgt_pos[lbl]:
                out_locals[tuple(int(s) for s in di)] = lbl
                hit = True
            elif key == tgt_neg[lbl]:
                out_locals[tuple(-int(s) for s in di)] = lbl
                hit = True
        if hit or key in term_keys or not xi.any():
            continue
        vec = ExpansionVector(tuple(int(x) for x in xi))
        if elementary_only:
            nz = [i for i, x in enumerate(vec.coeffs) if x]
            if len(nz) != 1:
                continue
            factor = is_rank_one(vec)
        else:
            factor = is_rank_one(vec)
        if factor is not None:
            out_parities[tuple(int(s) for s in di)] = factor


def _ternary_vectors(M, E, k_max, tgt_pos, tgt_neg, term_keys,
                     elementary_only, out_locals, out_parities):
    # canonical ternary sweep: leading nonzero digit fixed to +1
    for lead in range(M):
        nfree = M - 1 - lead
        total = 3 ** nfree
        for start in range(0, total, _CHUNK):
            stop = min(start + _CHUNK, total)
            block = np.arange(start, stop, dtype=np.int64)
            D = np.zeros((stop - start, M), dtype=np.int16)
            D[:, lead] = 1
            for j in range(nfree):
                digit = (block // (3 ** j)) % 3
                D[:, lead + 1 + j] = np.where(digit == 2, -1, digit).astype(np.int16)
            _classify_chunk(D, D @ E, k_max, M, tgt_pos, tgt_neg, term_keys,
                            elementary_only, out_locals, out_parities)


def _subset_vectors(M, E, k_max, tgt_pos, tgt_neg, term_keys,
                    elementary_only, out_locals, out_parities):
    # per-support-size enumeration; first member of each subset gets +1
    for K in range(1, k_max + 1):
        npat = 1 << (K - 1)
        signs = np.ones((npat, K), dtype=np.int16)
        bits = np.arange(npat, dtype=np.int64)
        for j in range(1, K):
            signs[:, j] = 1 - 2 * ((bits >> (j - 1)) & 1)
        combo_chunk = max(1, _CHUNK // npat)
        it = itertools.combinations(range(M), K)
        while True:
            chunk = list(itertools.islice(it, combo_chunk))
            if not chunk:
                break
            idx = np.array(chunk, dtype=np.int64)          # (m, K)
            m = idx.shape[0]
            D = np.zeros((m * npat, M), dtype=np.int16)
            rows = np.repeat(np.arange(m * npat), K)
            cols = np.tile(idx, (1, npat)).reshape(m * npat, K).ravel()
            D[rows, cols] = np.tile(signs, (m, 1)).ravel()
            _classify_chunk(D, D @ E, k_max, M, tgt_pos, tgt_neg, term_keys,
                            elementary_only, out_locals, out_parities)


def search_lp(
    terms: Sequence[BilinearTerm],
    k_max: Optional[int] = None,
    elementary_only: bool = False,
    scheme_id: str = "",
    mode: str = "auto",
) -> RelationSet:
    """Enumerate all local and parity relations over `terms`.

    k_max bounds the support size (defaults to all of it).  mode is
    "ternary", "subsets", or "auto" (ternary whenever the full 3^M sweep is
    affordable); both modes return the identical canonical RelationSet.
    """
    M = len(terms)
    if M == 0 or M > MAX_TERMS:
        raise ValueError(f"term count {M} outside 1..{MAX_TERMS}")
    if k_max is None:
        k_max = M
    if not 1 <= k_max <= M:
        raise ValueError(f"k_max {k_max} outside 1..{M}")

    E = np.array([expand(t).coeffs for t in terms], dtype=np.int16)
    term_keys = set()
    for row in E:
        term_keys.add(row.tobytes())
        term_keys.add((-row).tobytes())
    tgt_pos = {lbl: np.array(C_TARGETS[lbl].coeffs, dtype=np.int16).tobytes()
               for lbl in BLOCKS}
    tgt_neg = {lbl: np.array((-C_TARGETS[lbl]).coeffs, dtype=np.int16).tobytes()
               for lbl in BLOCKS}

    found_locals: Dict[Tuple[int, ...], str] = {}
    found_parities: Dict[Tuple[int, ...], Tuple[Coeff4, Coeff4]] = {}

    if mode == "auto":
        mode = "ternary" if M <= 16 else "subsets"
    sweep = _ternary_vectors if mode == "ternary" else _subset_vectors
    if mode not in ("ternary", "subsets"):
        raise ValueError(f"unknown search mode {mode!r}")
    sweep(M, E, k_max, tgt_pos, tgt_neg, term_keys,
          elementary_only, found_locals, found_parities)

    locals_ = tuple(sorted(
        (Relation(signs, "local", target=lbl) for signs, lbl in found_locals.items()),
        key=lambda r: (r.target, r.support_size, r.signs),
    ))
    parities = tuple(sorted(
        (Relation(signs, "parity", factor_a=a, factor_b=b)
         for signs, (a, b) in found_parities.items()),
        key=lambda r: (r.support_size, r.signs),
    ))
    labels = tuple(t.label for t in terms)
    return RelationSet(scheme_id or "adhoc", labels, k_max, locals_, parities)


# ===========================================================================
#  Hand-checkable relation catalogs (verified in the test suite)
# ===========================================================================

# Label order shared by all catalogs below: S1..S7 then W1..W7.
CATALOG_LABELS = tuple(f"S{i}" for i in range(1, 8)) + tuple(f"W{i}" for i in range(1, 8))

# The textbook output assignments of each base algorithm.
_CLASSIC = {
    "11": ("S1+S4-S5+S7", "W1+W2"),
    "12": ("S3+S5", "W1+W5+W6-W7"),
    "21": ("S2+S4", "W1-W3+W4-W7"),
    "22": ("S1-S2+S3+S6", "W1+W4+W5-W7"),
}

# One cross-algorithm relation per output quadrant.
_CROSS = {
    "11": "S2+S4-S6+S7+W4-W6",
    "12": "S1+S3+S4+S7-W1-W2",
    "21": "S2+S3+S4+S5-W1-W5-W6+W7",
    "22": "S3+S5+W4-W6",
}

# Further mixed relations that rebuild the first output quadrant.
_EXTRA_C11 = (
    "S2+S4+W2+W3-W4+W7",
    "S3+S5+W2-W5-W6+W7",
    "S1-S2+S3+S6+W2-W4-W5+W7",
    "S1-S2+S3+S7-W3+W4-W5-W6",
    "S1-S2-S5+S6+W1+W2-W4+W6",
    "S1-S2-S5+S7+W1-W3+W4-W7",
    "S1+S3+S4+S7-W1-W5-W6+W7",
    "S2-S3+S4-S5-S6+S7+W1+W4+W5-W7",
    "S2-S3+S4-S5+W1+W2+W3-W4+W5+W6",
)


def _local(expr: str, target: str) -> Relation:
    return Relation(parse_combo(expr, CATALOG_LABELS), "local", target=target)


def classic_output_relations() -> Tuple[Relation, ...]:
    """The eight single-algorithm output assignments (both algorithms)."""
    out = []
    for lbl in BLOCKS:
        for expr in _CLASSIC[lbl]:
            out.append(_local(expr, lbl))
    return tuple(out)


def cross_algorithm_relations() -> Tuple[Relation, ...]:
    """Four relations mixing both algorithms, one per output quadrant."""
    return tuple(_local(_CROSS[lbl], lbl) for lbl in BLOCKS)


def extra_c11_relations() -> Tuple[Relation, ...]:
    """Nine further mixed relations for the first output quadrant."""
    return tuple(_local(expr, "11") for expr in _EXTRA_C11)


def known_relation_catalog() -> Tuple[Relation, ...]:
    """All 21 hand-checkable local relations over the S+W term order."""
    return classic_output_relations() + cross_algorithm_relations() + extra_c11_relations()
