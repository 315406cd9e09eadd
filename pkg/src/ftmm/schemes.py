"""
Coded multiplication schemes and the decoders that run them.

A scheme assigns one bilinear sub-computation per worker node: plain
c-copy replication of a base algorithm, the 14-term union of the Strassen
and Winograd term lists, or that union plus one or two parity
sub-computations (redundant rank-one products chosen to cover the failure
pairs the plain union cannot survive).

Decodability ground truth is the rational-span test: a failure pattern is
decodable iff every output-quadrant target lies in the exact rational span
of the surviving terms' expansions.  Two decoders realize it:

  * linear_decode — expresses each target as an exact rational combination
    of surviving expansions (complete: succeeds on every decodable pattern);
  * peel — iteratively applies local relations with at most one unresolved
    member, producing a replayable step-by-step recovery plan.

Span tests, decode coefficients, and exhaustive censuses are all memoized
per distinct-expansion availability mask, so repeated queries and full
2^M sweeps stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from math import comb, lcm
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .bilinear import (
    BLOCKS,
    BilinearTerm,
    C_TARGETS,
    coeff4,
    expand,
    term_to_json,
)
from .exactlin import SpanSolver
from .relations import Relation, RelationSet, search_lp

# ---------------------------------------------------------------------------
# Scheme construction
# ---------------------------------------------------------------------------

SCHEME_KINDS = (
    "strassen_1copy", "strassen_2copy", "strassen_3copy",
    "winograd_1copy", "winograd_2copy", "winograd_3copy",
    "hybrid_sw", "hybrid_sw_1psmm", "hybrid_sw_2psmm",
)

#: Scheme set compared by the simulation front end, in display order.
DEFAULT_COMPARISON = (
    "strassen_1copy", "strassen_2copy", "strassen_3copy",
    "hybrid_sw", "hybrid_sw_1psmm", "hybrid_sw_2psmm",
)


@dataclass(frozen=True)
class Scheme:
    """An ordered catalog of sub-computations, one per worker node."""

    id: str
    terms: Tuple[BilinearTerm, ...]
    psmm_count: int = 0
    relations: Optional[RelationSet] = None

    @property
    def M(self) -> int:
        return len(self.terms)

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(t.label for t in self.terms)

    def term_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"scheme {self.id!r} has no term {label!r}") from None

    def to_json(self) -> dict:
        terms = []
        for t in self.terms:
            entry = term_to_json(t)
            entry["origin"] = _term_origin(t.label)
            terms.append(entry)
        return {
            "schema_version": 1,
            "id": self.id,
            "M": self.M,
            "psmm_count": self.psmm_count,
            "terms": terms,
        }


def _term_origin(label: str) -> str:
    """Which family a term belongs to: base algorithm, replica, or parity."""
    if "#" in label:
        return f"copy of {label.split('#', 1)[0]}"
    if label.startswith("P"):
        return "parity"
    return "strassen" if label.startswith("S") else "winograd"


def _replicate(base: Tuple[BilinearTerm, ...], copies: int) -> Tuple[BilinearTerm, ...]:
    out: List[BilinearTerm] = list(base)
    for c in range(2, copies + 1):
        out.extend(replace(t, label=f"{t.label}#{c}") for t in base)
    return tuple(out)


def build_scheme(kind: str, psmm2: str = "W2") -> Scheme:
    """Construct a scheme by kind id (see SCHEME_KINDS).

    psmm2 selects which existing term the second parity node duplicates
    ("W2" default, "S7" alternative); it only affects hybrid_sw_2psmm.
    """
    from .bilinear import strassen_terms, winograd_terms

    strassen = strassen_terms()
    winograd = winograd_terms()
    if kind.endswith("copy"):
        base, copies = kind.rsplit("_", 1)
        c = int(copies[0])
        terms = strassen if base == "strassen" else winograd if base == "winograd" else None
        if terms is None or not 1 <= c <= 3:
            raise ValueError(f"unknown scheme kind {kind!r}")
        return Scheme(kind, _replicate(terms, c))

    hybrid = strassen + winograd
    if kind == "hybrid_sw":
        return Scheme(kind, hybrid)
    p1 = BilinearTerm("P1", coeff4({"21": 1}), coeff4({"12": 1, "22": -1}))
    if kind == "hybrid_sw_1psmm":
        return Scheme(kind, hybrid + (p1,), psmm_count=1)
    if kind == "hybrid_sw_2psmm":
        if psmm2 not in ("W2", "S7"):
            raise ValueError(f"psmm2 must be 'W2' or 'S7', got {psmm2!r}")
        src = {t.label: t for t in hybrid}[psmm2]
        p2 = BilinearTerm("P2", src.a, src.b)
        scheme_id = kind if psmm2 == "W2" else f"{kind}_{psmm2.lower()}"
        return Scheme(scheme_id, hybrid + (p1, p2), psmm_count=2)
    raise ValueError(f"unknown scheme kind {kind!r}")


_RELATION_CACHE: Dict[tuple, RelationSet] = {}


def attach_relations(scheme: Scheme, k_max: Optional[int] = None) -> Scheme:
    """Return the scheme with its relation set populated (search is cached).

    Default support bound: the full term count when M <= 16 (a complete
    sweep is affordable there), else 6 — large replication catalogs only
    need small-support relations for peeling.
    """
    if k_max is None:
        k_max = scheme.M if scheme.M <= 16 else 6
    key = (tuple((t.label, t.a, t.b) for t in scheme.terms), k_max)
    rs = _RELATION_CACHE.get(key)
    if rs is None:
        rs = search_lp(scheme.terms, k_max=k_max, scheme_id=scheme.id)
        _RELATION_CACHE[key] = rs
    return replace(scheme, relations=rs)


# ---------------------------------------------------------------------------
# Failure patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FailurePattern:
    """The set of node indices whose results never arrived."""

    failed: frozenset

    @classmethod
    def from_mask(cls, mask: int) -> "FailurePattern":
        return cls(frozenset(i for i in range(mask.bit_length()) if mask >> i & 1))

    @classmethod
    def from_labels(cls, scheme: Scheme, labels: Iterable[str]) -> "FailurePattern":
        return cls(frozenset(scheme.term_index(lbl) for lbl in labels))

    @property
    def mask(self) -> int:
        m = 0
        for i in self.failed:
            m |= 1 << i
        return m

    def size(self) -> int:
        return len(self.failed)

    def to_hex(self, M: int) -> str:
        return f"0x{self.mask:0{(M + 3) // 4}x}"

    def labels(self, scheme: Scheme) -> Tuple[str, ...]:
        return tuple(scheme.labels[i] for i in sorted(self.failed))

    def validate(self, scheme: Scheme) -> None:
        bad = [i for i in self.failed if not 0 <= i < scheme.M]
        if bad:
            raise ValueError(f"pattern indices {bad} outside scheme of size {scheme.M}")


# ===========================================================================
#  Decodability oracle (exact, memoized per availability class mask)
# ===========================================================================

class _Oracle:
    """Per-scheme exact machinery, keyed by distinct expansion classes.

    Terms with identical expansions (replication copies, duplicated parity
    nodes) collapse into one class; every decodability/decoding question
    depends only on which classes still have a live member.
    """

    def __init__(self, terms: Sequence[BilinearTerm]):
        self.M = len(terms)
        exps = [expand(t).coeffs for t in terms]
        class_index: Dict[tuple, int] = {}
        self.class_of: List[int] = []
        for e in exps:
            if e not in class_index:
                class_index[e] = len(class_index)
            self.class_of.append(class_index[e])
        self.C = len(class_index)
        self.class_exps: List[tuple] = [None] * self.C
        for e, c in class_index.items():
            self.class_exps[c] = e
        self.class_members: List[int] = [0] * self.C
        for i, c in enumerate(self.class_of):
            self.class_members[c] |= 1 << i
        self._targets = [C_TARGETS[lbl].coeffs for lbl in BLOCKS]
        self._dec: Dict[int, bool] = {0: False}
        self._coeffs: Dict[int, Optional[List[List[Tuple[int, Fraction]]]]] = {}
        self._table: Optional[np.ndarray] = None
        self._census: Optional[List[int]] = None

    # -- mask plumbing ------------------------------------------------------

    def avail_class_mask(self, failed_mask: int) -> int:
        cm = 0
        for c, mem in enumerate(self.class_members):
            if mem & ~failed_mask:
                cm |= 1 << c
        return cm

    # -- span tests ---------------------------------------------------------

    def decodable_cm(self, cm: int) -> bool:
        hit = self._dec.get(cm)
        if hit is None:
            if self._table is not None:
                hit = bool(self._table[cm])
            else:
                solver = SpanSolver([self.class_exps[c] for c in range(self.C)
                                     if cm >> c & 1])
                hit = all(solver.contains(t) for t in self._targets)
            self._dec[cm] = hit
        return hit

    def decode_coeffs_cm(self, cm: int):
        """Per-target [(class, coeff), ...] lists, or None if undecodable."""
        if cm in self._coeffs:
            return self._coeffs[cm]
        avail = [c for c in range(self.C) if cm >> c & 1]
        solver = SpanSolver([self.class_exps[c] for c in avail])
        out = []
        for t in self._targets:
            coefs = solver.express(t)
            if coefs is None:
                out = None
                break
            out.append([(avail[i], q) for i, q in enumerate(coefs) if q])
        self._coeffs[cm] = out
        return out

    # -- exhaustive structures ----------------------------------------------

    def table(self) -> np.ndarray:
        """Decodability over all 2^C availability class masks (monotone DP)."""
        if self._table is None:
            t = np.zeros(1 << self.C, dtype=np.uint8)
            for cm in range(1, 1 << self.C):
                m = cm
                dec = False
                while m:
                    bit = m & (-m)
                    if t[cm ^ bit]:  # decodable with even fewer classes
                        dec = True
                        break
                    m ^= bit
                if not dec:
                    dec = self.decodable_cm(cm)
                t[cm] = 1 if dec else 0
            self._table = t
        return self._table

    def census(self) -> List[int]:
        """Count of undecodable failure patterns for each failure count k."""
        if self._census is None:
            table = self.table()
            pats = np.arange(1 << self.M, dtype=np.int64)
            avail = np.zeros(1 << self.M, dtype=np.int64)
            for c, mem in enumerate(self.class_members):
                dead = (pats & mem) == mem
                avail |= (~dead).astype(np.int64) << c
            dec = table[avail].astype(bool)
            k = np.zeros(1 << self.M, dtype=np.uint8)
            x = pats.copy()
            while x.any():
                k += (x & 1).astype(np.uint8)
                x >>= 1
            self._census = np.bincount(k[~dec], minlength=self.M + 1).tolist()
        return self._census

    def decodable_bulk(self, failed: np.ndarray) -> np.ndarray:
        """Vectorized decodability for an (n, M) boolean failure matrix."""
        table = self.table()
        n = failed.shape[0]
        cm = np.zeros(n, dtype=np.int64)
        for c, mem in enumerate(self.class_members):
            members = [i for i in range(self.M) if mem >> i & 1]
            dead = failed[:, members].all(axis=1)
            cm |= (~dead).astype(np.int64) << c
        return table[cm].astype(bool)


_ORACLES: Dict[tuple, _Oracle] = {}


def _oracle(scheme: Scheme) -> _Oracle:
    key = tuple(expand(t).coeffs for t in scheme.terms)
    if key not in _ORACLES:
        _ORACLES[key] = _Oracle(scheme.terms)
    return _ORACLES[key]


def is_decodable(scheme: Scheme, pattern: FailurePattern) -> bool:
    """Rational-span ground truth: can all four C quadrants be rebuilt?"""
    pattern.validate(scheme)
    orc = _oracle(scheme)
    return orc.decodable_cm(orc.avail_class_mask(pattern.mask))


def is_decodable_bulk(scheme: Scheme, failed: np.ndarray) -> np.ndarray:
    """Decodability for many patterns at once (rows of booleans, True=failed)."""
    failed = np.asarray(failed, dtype=bool)
    if failed.ndim != 2 or failed.shape[1] != scheme.M:
        raise ValueError(f"expected (n, {scheme.M}) failure matrix")
    return _oracle(scheme).decodable_bulk(failed)


def decodable_pattern_census(scheme: Scheme) -> List[int]:
    """Exhaustive census over all 2^M failure patterns.

    Entry k is the number of k-node failure patterns under which the full
    product cannot be reconstructed.
    """
    if scheme.M > 24:
        raise ValueError(f"census of 2^{scheme.M} patterns exceeds the tractability bound")
    return list(_oracle(scheme).census())


CENSUS_CSV_HEADER = ("scheme", "k", "total_patterns", "undecodable_count")


def census_csv_rows(scheme: Scheme, fc: Sequence[int]) -> List[Tuple[str, ...]]:
    rows = [CENSUS_CSV_HEADER]
    for k, count in enumerate(fc):
        rows.append((scheme.id, str(k), str(comb(scheme.M, k)), str(count)))
    return rows


# ===========================================================================
#  Peeling decoder
# ===========================================================================

@dataclass(frozen=True)
class PlanStep:
    relation: int        # index into scheme.relations.locals
    recovered: str       # "C11".."C22" or a term label


@dataclass(frozen=True)
class RecoveryPlan:
    steps: Tuple[PlanStep, ...]
    final: Mapping[str, int]     # quadrant label ("C11") -> relation index

    def to_json(self) -> dict:
        return {
            "steps": [{"relation": s.relation, "recovered": s.recovered}
                      for s in self.steps],
            "final": dict(self.final),
        }


def _local_relations(scheme: Scheme) -> List[Tuple[int, int, Relation]]:
    """(support_mask, target_ord, relation) for each local relation, in order."""
    if scheme.relations is None:
        raise ValueError(f"scheme {scheme.id!r} has no relations attached; "
                         "call attach_relations first")
    out = []
    for rel in scheme.relations.locals:
        sup = 0
        for i, s in enumerate(rel.signs):
            if s:
                sup |= 1 << i
        out.append((sup, BLOCKS.index(rel.target), rel))
    return out


def peel(scheme: Scheme, pattern: FailurePattern) -> Optional[RecoveryPlan]:
    """Iterative local-relation recovery; returns a replayable plan or None.

    A relation fires either to produce its still-unknown target (all member
    terms resolved) or to back-solve its single unresolved member once the
    target is known.  The lowest-index eligible relation always fires first,
    so plans are deterministic.
    """
    pattern.validate(scheme)
    rels = _local_relations(scheme)
    known = ~pattern.mask & ((1 << scheme.M) - 1)
    targets_done: Dict[int, int] = {}
    steps: List[PlanStep] = []

    while len(targets_done) < 4:
        fired = False
        for ri, (sup, tgt, rel) in enumerate(rels):
            if tgt not in targets_done:
                if sup & ~known == 0:
                    targets_done[tgt] = ri
                    steps.append(PlanStep(ri, f"C{BLOCKS[tgt]}"))
                    fired = True
                    break
            else:
                unknown = sup & ~known
                if unknown and unknown & (unknown - 1) == 0:
                    known |= unknown
                    steps.append(PlanStep(ri, scheme.labels[unknown.bit_length() - 1]))
                    fired = True
                    break
        if not fired:
            return None
    final = {f"C{BLOCKS[t]}": ri for t, ri in targets_done.items()}
    return RecoveryPlan(tuple(steps), final)


def replay_plan(scheme: Scheme, pattern: FailurePattern, plan: RecoveryPlan) -> bool:
    """Strict symbolic replay: every step legal in order, all quadrants reached."""
    rels = _local_relations(scheme)
    known = ~pattern.mask & ((1 << scheme.M) - 1)
    targets_known = set()
    for step in plan.steps:
        if not 0 <= step.relation < len(rels):
            return False
        sup, tgt, _ = rels[step.relation]
        if step.recovered.startswith("C") and step.recovered[1:] in BLOCKS:
            if tgt in targets_known or sup & ~known:
                return False
            targets_known.add(tgt)
        else:
            try:
                idx = scheme.term_index(step.recovered)
            except KeyError:
                return False
            if tgt not in targets_known or sup & ~known != 1 << idx:
                return False
            known |= 1 << idx
    if targets_known != {0, 1, 2, 3}:
        return False
    return all(plan.final.get(f"C{BLOCKS[t]}") is not None for t in range(4))


def _peel_masks_only(rels, M, failed_mask) -> bool:
    # plan-free fast path shared by peel_coverage
    known = ~failed_mask & ((1 << M) - 1)
    targets = 0
    while targets != 0b1111:
        for sup, tgt, _ in rels:
            if not targets >> tgt & 1:
                if sup & ~known == 0:
                    targets |= 1 << tgt
                    break
            else:
                unknown = sup & ~known
                if unknown and unknown & (unknown - 1) == 0:
                    known |= unknown
                    break
        else:
            return False
    return True


def peel_coverage(scheme: Scheme) -> Dict[str, int]:
    """Measure, over all 2^M patterns, how often peeling matches the oracle.

    Returns pattern totals; the coverage ratio peel_ok/decodable is an
    observed quantity of the attached relation set, not a constant.
    """
    if scheme.M > 16:
        raise ValueError("peel coverage sweep is bounded to M <= 16")
    rels = _local_relations(scheme)
    orc = _oracle(scheme)
    table = orc.table()
    decodable = 0
    peel_ok = 0
    for failed in range(1 << scheme.M):
        if table[orc.avail_class_mask(failed)]:
            decodable += 1
            if _peel_masks_only(rels, scheme.M, failed):
                peel_ok += 1
    return {
        "patterns": 1 << scheme.M,
        "decodable": decodable,
        "peel_ok": peel_ok,
    }


# ===========================================================================
#  Exact linear decoder
# ===========================================================================

def _alive_values(scheme: Scheme, pattern: FailurePattern, values) -> Dict[int, np.ndarray]:
    alive = {i for i in range(scheme.M) if i not in pattern.failed}
    got = {}
    for key, val in values.items():
        idx = scheme.term_index(key) if isinstance(key, str) else int(key)
        got[idx] = np.asarray(val)
    if set(got) != alive:
        raise ValueError("values must be supplied exactly for the non-failed terms")
    shapes = {v.shape for v in got.values()}
    if len(shapes) > 1:
        raise ValueError(f"inconsistent block shapes {shapes}")
    return got


def linear_decode(
    scheme: Scheme,
    pattern: FailurePattern,
    values: Mapping,
) -> Optional[Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
    """Decode the four C quadrants as exact rational combinations.

    values maps term label (or index) -> block result for every non-failed
    term.  Returns None when the pattern is undecodable.  Integer inputs
    decode in exact integer arithmetic; float inputs use float coefficients.
    """
    pattern.validate(scheme)
    got = _alive_values(scheme, pattern, values)
    orc = _oracle(scheme)
    cm = orc.avail_class_mask(pattern.mask)
    per_target = orc.decode_coeffs_cm(cm)
    if per_target is None:
        return None

    # one representative value per class: its lowest-index live member
    rep: Dict[int, np.ndarray] = {}
    for idx in sorted(got):
        c = orc.class_of[idx]
        if c not in rep:
            rep[c] = got[idx]
    exact = all(np.issubdtype(v.dtype, np.integer) for v in rep.values())
    shape = next(iter(rep.values())).shape

    blocks = []
    for coefs in per_target:
        if exact:
            den = lcm(*(q.denominator for _, q in coefs)) if coefs else 1
            acc = np.zeros(shape, dtype=np.int64)
            for c, q in coefs:
                acc += (q.numerator * (den // q.denominator)) * rep[c].astype(np.int64)
            if (acc % den != 0).any():
                raise ArithmeticError("non-integer decode on integer inputs")
            blocks.append(acc // den)
        else:
            acc = np.zeros(shape, dtype=np.float64)
            for c, q in coefs:
                acc += float(q) * rep[c].astype(np.float64)
            blocks.append(acc)
    return tuple(blocks)


def peel_decode(
    scheme: Scheme,
    pattern: FailurePattern,
    values: Mapping,
) -> Optional[Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
    """Numeric decoding by replaying a peeling plan (None if peeling fails)."""
    plan = peel(scheme, pattern)
    if plan is None:
        return None
    got = _alive_values(scheme, pattern, values)
    rels = _local_relations(scheme)
    quadrants: Dict[int, np.ndarray] = {}
    for step in plan.steps:
        sup, tgt, rel = rels[step.relation]
        if step.recovered.startswith("C") and step.recovered[1:] in BLOCKS:
            acc = None
            for i in range(scheme.M):
                s = rel.signs[i]
                if s:
                    contrib = got[i] if s > 0 else -got[i]
                    acc = contrib.copy() if acc is None else acc + contrib
            quadrants[tgt] = acc
        else:
            j = scheme.term_index(step.recovered)
            acc = quadrants[tgt].copy()
            for i in range(scheme.M):
                s = rel.signs[i]
                if s and i != j:
                    acc = acc - (got[i] if s > 0 else -got[i])
            got[j] = acc if rel.signs[j] > 0 else -acc
    return tuple(quadrants[t] for t in range(4))
