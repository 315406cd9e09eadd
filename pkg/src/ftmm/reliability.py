"""
Reconstruction-failure probability: exact counting and seeded Monte Carlo.

Each worker node fails independently with probability p_e.  With FC(k) the
number of k-node failure patterns that defeat reconstruction, the failure
probability is the exact sum

    P_f = sum_{k=1..M} FC(k) * p_e^k * (1 - p_e)^(M - k).

FC comes from a closed form for c-copy replication (inclusion-exclusion
over which of the 7 base products lost every copy) and from the exhaustive
pattern census for everything else.  Monte Carlo estimates use a
counter-based generator with per-(scheme, p_e, chunk) derived streams, so
results are bit-identical for a given seed regardless of batching.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from math import comb, sqrt
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .schemes import Scheme, decodable_pattern_census, is_decodable_bulk

# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReliabilityProfile:
    """FC(k) counts for k = 0..M plus where they came from."""

    scheme_id: str
    M: int
    fc: Tuple[int, ...]
    source: str          # "closed_form" | "exhaustive"

    def __post_init__(self):
        if len(self.fc) != self.M + 1:
            raise ValueError("fc must have M+1 entries (k = 0..M)")


def fc_replication_closed_form(c: int, k: int) -> int:
    """Fatal k-failure count for c-copy replication of a 7-term base.

    Inclusion-exclusion over the number n of base products whose copies all
    failed: sum_n (-1)^(n+1) C(7,n) C(7c-cn, k-cn), zero below k = c.
    """
    if c < 1:
        raise ValueError("copy count must be >= 1")
    if not 0 <= k <= 7 * c:
        raise ValueError(f"k={k} outside 0..{7 * c}")
    if k < c:
        return 0
    total = 0
    for n in range(1, k // c + 1):
        total += (-1) ** (n + 1) * comb(7, n) * comb(7 * c - c * n, k - c * n)
    return total


def replication_profile(base: str, copies: int) -> ReliabilityProfile:
    """Closed-form profile for a c-copy replication scheme."""
    M = 7 * copies
    fc = tuple(fc_replication_closed_form(copies, k) for k in range(M + 1))
    return ReliabilityProfile(f"{base}_{copies}copy", M, fc, "closed_form")


def census_profile(scheme: Scheme) -> ReliabilityProfile:
    """Profile from the exhaustive 2^M decodability census."""
    return ReliabilityProfile(scheme.id, scheme.M,
                              tuple(decodable_pattern_census(scheme)), "exhaustive")


def profile_for(scheme: Scheme) -> ReliabilityProfile:
    """Closed form for replication schemes, exhaustive census otherwise."""
    if scheme.id.endswith("copy"):
        base, copies = scheme.id.rsplit("_", 1)
        return replication_profile(base, int(copies[0]))
    return census_profile(scheme)


def p_fail_theoretical(profile: ReliabilityProfile, p_e: float) -> float:
    """Evaluate P_f at one failure probability (ascending-k summation)."""
    if not 0.0 <= p_e <= 1.0:
        raise ValueError(f"p_e={p_e} outside [0, 1]")
    M = profile.M
    total = 0.0
    for k in range(1, M + 1):
        if profile.fc[k]:
            total += profile.fc[k] * p_e ** k * (1.0 - p_e) ** (M - k)
    return total


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

_CHUNK_TRIALS = 4096


def failure_pattern_stream(
    scheme: Scheme, p_e: float, trials: int, seed: int,
) -> Iterator[np.ndarray]:
    """Yield (n, M) boolean failure matrices, deterministically chunked.

    Every chunk draws from its own counter-based stream keyed by
    (seed, scheme id, p_e bits, chunk index): concatenating the chunks is
    reproducible and independent of how many are consumed at a time.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    scheme_key = zlib.crc32(scheme.id.encode())
    pe_bits = int(np.float64(p_e).view(np.uint64))
    done = 0
    chunk_idx = 0
    while done < trials:
        n = min(_CHUNK_TRIALS, trials - done)
        ss = np.random.SeedSequence([seed, scheme_key, pe_bits, chunk_idx])
        gen = np.random.Generator(np.random.Philox(ss))
        yield gen.random((n, scheme.M)) < p_e
        done += n
        chunk_idx += 1


def p_fail_monte_carlo(
    scheme: Scheme, p_e: float, trials: int, seed: int = 0,
) -> Tuple[float, float]:
    """Sampled failure fraction and its binomial standard error."""
    failures = 0
    for F in failure_pattern_stream(scheme, p_e, trials, seed):
        failures += int((~is_decodable_bulk(scheme, F)).sum())
    est = failures / trials
    return est, sqrt(est * (1.0 - est) / trials)


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurveRow:
    p_e: float
    p_f_theory: float
    p_f_mc: float
    stderr: float
    trials: int
    seed: int


@dataclass(frozen=True)
class SchemeCurve:
    scheme_id: str
    M: int
    rows: Tuple[CurveRow, ...]


def default_grid(points: int = 21) -> np.ndarray:
    """Log-spaced failure probabilities from 1e-3 to 0.5."""
    return np.logspace(np.log10(1e-3), np.log10(0.5), points)


def grid_points(lo: float, hi: float, points: int) -> np.ndarray:
    if not 0.0 < lo < hi < 1.0:
        raise ValueError(f"grid bounds must satisfy 0 < {lo} < {hi} < 1")
    if points < 1:
        raise ValueError("grid needs at least one point")
    return np.logspace(np.log10(lo), np.log10(hi), points)


def curve(
    schemes: Sequence[Scheme],
    grid: Optional[Sequence[float]] = None,
    trials: int = 10_000,
    seed: int = 0,
) -> List[SchemeCurve]:
    """Theory + Monte Carlo failure curves over a p_e grid, per scheme."""
    if grid is None:
        grid = default_grid()
    out = []
    for scheme in schemes:
        profile = profile_for(scheme)
        rows = []
        for p_e in grid:
            p_e = float(p_e)
            theory = p_fail_theoretical(profile, p_e)
            est, err = p_fail_monte_carlo(scheme, p_e, trials, seed)
            rows.append(CurveRow(p_e, theory, est, err, trials, seed))
        out.append(SchemeCurve(scheme.id, scheme.M, tuple(rows)))
    return out


# ---------------------------------------------------------------------------
# Tabular exports
# ---------------------------------------------------------------------------

CURVE_CSV_HEADER = ("scheme", "M", "p_e", "p_f_theory", "p_f_mc", "stderr", "trials", "seed")
FC_CSV_HEADER = ("scheme", "k", "fc", "binom_M_k")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def curve_csv_rows(curves: Sequence[SchemeCurve]) -> List[Tuple[str, ...]]:
    rows = [CURVE_CSV_HEADER]
    for c in curves:
        for r in c.rows:
            rows.append((c.scheme_id, str(c.M), _fmt(r.p_e), _fmt(r.p_f_theory),
                         _fmt(r.p_f_mc), _fmt(r.stderr), str(r.trials), str(r.seed)))
    return rows


def fc_csv_rows(profile: ReliabilityProfile) -> List[Tuple[str, ...]]:
    rows = [FC_CSV_HEADER]
    for k, fc in enumerate(profile.fc):
        rows.append((profile.scheme_id, str(k), str(fc), str(comb(profile.M, k))))
    return rows
