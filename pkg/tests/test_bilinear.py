from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftmm.bilinear import (
    BLOCKS,
    BilinearTerm,
    C_TARGET_HEX,
    C_TARGETS,
    assemble_C,
    coeff4,
    combine_blocks,
    combine_expansions,
    evaluate_term,
    expand,
    expansion_to_json,
    naive_block_multiply,
    outer_expansion,
    partition_blocks,
    strassen_terms,
    winograd_terms,
    term_to_json,
)

S = {t.label: t for t in strassen_terms()}
W = {t.label: t for t in winograd_terms()}


def test_catalog_shapes():
    assert [t.label for t in strassen_terms()] == [f"S{i}" for i in range(1, 8)]
    assert [t.label for t in winograd_terms()] == [f"W{i}" for i in range(1, 8)]


def test_all_zero_side_rejected():
    with pytest.raises(ValueError):
        BilinearTerm("bad", (0, 0, 0, 0), (1, 0, 0, 0))
    with pytest.raises(ValueError):
        coeff4({"11": 2})
    with pytest.raises(ValueError):
        coeff4({"33": 1})


# --- expansion vectors ------------------------------------------------------

def test_expand_w1():
    # A11*B11 occupies the highest bit
    v = expand(W["W1"])
    assert v.coeffs[0] == 1 and sum(abs(x) for x in v.coeffs) == 1
    assert v.support_hex == "0x8000"


def test_expand_s1():
    assert expand(S["S1"]).support_hex == "0x9009"


def test_expand_s3_signs():
    v = expand(S["S3"])
    # A11*B12 carries +1, A11*B22 carries -1
    assert v.coeffs[4 * 1 + 0] == 1
    assert v.coeffs[4 * 3 + 0] == -1
    assert v.support_hex == "0x0808"


def test_target_support_masks():
    assert C_TARGET_HEX == {"11": "0x8040", "12": "0x0804",
                            "21": "0x2010", "22": "0x0201"}


def test_combine_w1_w2_is_c11():
    got = combine_expansions([(1, expand(W["W1"])), (1, expand(W["W2"]))])
    assert got == C_TARGETS["11"]


def test_combine_cancellation():
    v = expand(S["S1"])
    assert combine_expansions([(1, v), (-1, v)]).is_zero()


def test_s3_plus_w4_is_rank_one_shape():
    # the combination collapses onto A21*(B12-B22)
    got = combine_expansions([(1, expand(S["S3"])), (1, expand(W["W4"]))])
    want = outer_expansion(coeff4({"21": 1}), coeff4({"12": 1, "22": -1}))
    assert got == want


def test_expand_linearity_exhaustive():
    """coeffs[4*j+i] = a[i]*b[j] over every {-1,0,+1}^4 pair of sides."""
    sides = list(product((-1, 0, 1), repeat=4))
    for a in sides:
        for b in sides:
            v = outer_expansion(a, b)
            for bi in range(4):
                for ai in range(4):
                    assert v.coeffs[4 * bi + ai] == a[ai] * b[bi]


# --- numeric evaluation -----------------------------------------------------

def _random_blocks(rng, n):
    return [rng.integers(-9, 10, size=(n, n)) for _ in range(4)]


@settings(max_examples=25, derandomize=True, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1), st.integers(1, 4))
def test_evaluate_matches_expansion(seed, n):
    """evaluate_term == expansion-weighted sum of elementary block products."""
    rng = np.random.default_rng(seed)
    bA = _random_blocks(rng, n)
    bB = _random_blocks(rng, n)
    elementary = {(ai, bi): bA[ai] @ bB[bi] for ai in range(4) for bi in range(4)}
    for term in strassen_terms() + winograd_terms():
        v = expand(term)
        want = sum(v.coeffs[4 * bi + ai] * elementary[(ai, bi)]
                   for ai in range(4) for bi in range(4))
        assert (evaluate_term(term, bA, bB) == want).all()


def test_evaluate_scalar_blocks():
    one = [np.array([[3]]), np.array([[0]]), np.array([[0]]), np.array([[0]])]
    two = [np.array([[8]]), np.array([[0]]), np.array([[0]]), np.array([[0]])]
    assert evaluate_term(W["W1"], one, two) == np.array([[24]])


def test_classic_two_by_two():
    A = np.array([[1, 2], [3, 4]])
    B = np.array([[5, 6], [7, 8]])
    bA, bB = partition_blocks(A), partition_blocks(B)
    s = {lbl: evaluate_term(t, bA, bB) for lbl, t in S.items()}
    C = assemble_C([
        s["S1"] + s["S4"] - s["S5"] + s["S7"],
        s["S3"] + s["S5"],
        s["S2"] + s["S4"],
        s["S1"] - s["S2"] + s["S3"] + s["S6"],
    ])
    assert (C == np.array([[19, 22], [43, 50]])).all()
    assert (C == naive_block_multiply(A, B)).all()


def test_partition_assemble_round_trip():
    M = np.arange(36).reshape(6, 6)
    assert (assemble_C(partition_blocks(M)) == M).all()


def test_partition_rejects_odd():
    with pytest.raises(ValueError):
        partition_blocks(np.zeros((3, 4)))
    with pytest.raises(ValueError):
        partition_blocks(np.zeros(4))


def test_naive_shape_check():
    with pytest.raises(ValueError):
        naive_block_multiply(np.zeros((2, 3)), np.zeros((2, 3)))


def test_combine_blocks_all_zero_rejected():
    with pytest.raises(ValueError):
        combine_blocks((0, 0, 0, 0), [np.zeros((1, 1))] * 4)


# --- serialization ----------------------------------------------------------

def test_term_json_shape():
    doc = term_to_json(W["W4"])
    assert doc == {"label": "W4", "a": {"11": 1, "21": -1},
                   "b": {"12": -1, "22": 1}}
    # keys come out in fixed quadrant order
    assert list(doc["b"]) == ["12", "22"]


def test_expansion_json_shape():
    doc = expansion_to_json(expand(W["W1"]))
    assert doc["support_hex"] == "0x8000"
    assert len(doc["coeffs"]) == 16 and doc["coeffs"][0] == 1
