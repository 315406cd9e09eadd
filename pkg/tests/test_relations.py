from itertools import product

import pytest

from ftmm.bilinear import (
    C_TARGETS,
    coeff4,
    combine_expansions,
    expand,
    outer_expansion,
    strassen_terms,
    winograd_terms,
)
from ftmm.relations import (
    CATALOG_LABELS,
    Relation,
    classic_output_relations,
    cross_algorithm_relations,
    extra_c11_relations,
    is_rank_one,
    known_relation_catalog,
    parse_combo,
    relation_csv_rows,
    search_lp,
    verify_relation,
)

TERMS = strassen_terms() + winograd_terms()


# --- hand-written catalog ---------------------------------------------------

def test_catalog_sizes():
    assert len(classic_output_relations()) == 8
    assert len(cross_algorithm_relations()) == 4
    assert len(extra_c11_relations()) == 9
    assert len(known_relation_catalog()) == 21


def test_catalog_all_verify():
    for rel in known_relation_catalog():
        assert verify_relation(TERMS, rel), rel.combo(CATALOG_LABELS)


def test_classic_targets_covered_twice():
    # one pure-S and one pure-W recombination per output quadrant
    by_target = {}
    for rel in classic_output_relations():
        by_target.setdefault(rel.target, []).append(rel.combo(CATALOG_LABELS))
    assert {t: len(v) for t, v in by_target.items()} == \
        {"11": 2, "12": 2, "21": 2, "22": 2}


def test_extra_relations_all_hit_c11():
    assert {rel.target for rel in extra_c11_relations()} == {"11"}


def test_verify_rejects_tampering():
    rel = known_relation_catalog()[0]
    flipped = Relation(tuple(-s for s in rel.signs), "local", rel.target)
    assert not verify_relation(TERMS, flipped)


def test_parse_combo():
    signs = parse_combo("S2+S4-W4", CATALOG_LABELS)
    assert signs[1] == 1 and signs[3] == 1 and signs[10] == -1
    assert sum(map(abs, signs)) == 3
    with pytest.raises(ValueError):
        parse_combo("S2+S99", CATALOG_LABELS)
    with pytest.raises(ValueError):
        parse_combo("S2+S2", CATALOG_LABELS)


# --- rank-one factorization -------------------------------------------------

def test_rank_one_round_trip_exhaustive():
    """Every {-1,0,+1} outer product factors back to itself, canonically."""
    sides = [s for s in product((-1, 0, 1), repeat=4) if any(s)]
    for a in sides:
        for b in sides:
            v = outer_expansion(a, b)
            got = is_rank_one(v)
            assert got is not None
            fa, fb = got
            assert next(x for x in fa if x) == 1      # canonical leading sign
            assert outer_expansion(fa, fb) == v


def test_rank_one_rejects():
    s1, s2 = expand(TERMS[0]), expand(TERMS[1])
    doubled = combine_expansions([(1, s1), (1, s2)])
    assert doubled.coeffs[4 * 0 + 3] == 2          # A22*B11 appears twice
    assert is_rank_one(doubled) is None
    assert is_rank_one(C_TARGETS["11"]) is None    # rank 2
    zero = combine_expansions([(1, s1), (-1, s1)])
    assert is_rank_one(zero) is None


# --- search -----------------------------------------------------------------

def test_search_strassen_only():
    rs = search_lp(strassen_terms(), k_max=7, scheme_id="strassen_1copy")
    combos = {(r.target, r.combo(rs.labels)) for r in rs.locals}
    assert combos == {
        ("11", "S1+S4-S5+S7"),
        ("12", "S3+S5"),
        ("21", "S2+S4"),
        ("22", "S1-S2+S3+S6"),
    }
    assert rs.parities == ()


def test_search_full_hybrid_counts(hybrid_r):
    rs = hybrid_r.relations
    assert rs.k_max == 14
    assert len(rs.locals) == 57
    assert len(rs.parities) == 288
    assert rs.per_target_counts() == {"11": 14, "12": 14, "21": 15, "22": 14}
    assert rs.distinct_local_supports() == 52
    products = {(r.factor_a, r.factor_b) for r in rs.parities}
    assert len(products) == 54


def test_search_contains_whole_catalog(hybrid_r):
    found = {(r.target, r.signs) for r in hybrid_r.relations.locals}
    for rel in known_relation_catalog():
        assert (rel.target, rel.signs) in found, rel.combo(CATALOG_LABELS)


def test_search_finds_first_parity_product(hybrid_r):
    """S3+W4 collapses to A21*(B12-B22), the first redundancy worth adding."""
    want_a = coeff4({"21": 1})
    want_b = coeff4({"12": 1, "22": -1})
    hits = [r for r in hybrid_r.relations.parities
            if r.factor_a == want_a and r.factor_b == want_b
            and r.support_size == 2]
    assert len(hits) == 1
    assert hits[0].combo(hybrid_r.relations.labels) == "S3+W4"


def test_search_locals_sum_to_target(hybrid_r):
    rs = hybrid_r.relations
    for rel in rs.locals:
        assert verify_relation(TERMS, rel)


def test_search_modes_agree():
    a = search_lp(TERMS, k_max=4, scheme_id="hybrid_sw", mode="ternary")
    b = search_lp(TERMS, k_max=4, scheme_id="hybrid_sw", mode="subsets")
    assert a.to_json() == b.to_json()


def test_search_deterministic():
    a = search_lp(strassen_terms(), k_max=7, scheme_id="x").to_json()
    b = search_lp(strassen_terms(), k_max=7, scheme_id="x").to_json()
    assert a == b


def test_elementary_only_restricts_parities():
    full = search_lp(TERMS, k_max=3, scheme_id="h")
    elem = search_lp(TERMS, k_max=3, scheme_id="h", elementary_only=True)
    assert len(elem.parities) < len(full.parities)
    for r in elem.parities:
        assert sum(map(abs, r.factor_a)) == 1
        assert sum(map(abs, r.factor_b)) == 1
    # locals are unaffected by the parity filter
    assert [x.signs for x in elem.locals] == [x.signs for x in full.locals]


def test_csv_rows_shape(hybrid_r):
    doc = hybrid_r.relations.to_json()
    rows = relation_csv_rows(doc)
    assert rows[0] == ("scheme", "kind", "target", "k", "combo",
                       "factor_a", "factor_b")
    assert len(rows) == 1 + 57 + 288
    locals_rows = [r for r in rows[1:] if r[1] == "local"]
    assert all(r[2].startswith("C") and r[5] == "" for r in locals_rows)
    parity_rows = [r for r in rows[1:] if r[1] == "parity"]
    assert all(r[2] == "" and r[5] for r in parity_rows)
