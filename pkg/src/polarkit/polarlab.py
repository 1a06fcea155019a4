"""Erasure polynomials, martingale trees and polarization window reports.

For erasure channels the one-step polarization law is exact and polynomial.
Fix an invertible kernel M over F_q and erase each input independently with
rate x.  Conditioned on an erasure pattern e, output j of the transform is
either fully determined by the observations or uniform on F_q, and it is
undetermined exactly when column j of M restricted to the rows in e falls
outside the span of the earlier restricted columns, i.e. when j is a pivot
column of M[e, :].  Counting undetermined patterns by weight gives integer
coefficients c_j[w] and the exact one-step map

    f_j(x) = sum_w c_j[w] * x^w * (1-x)^(k-w),

which satisfies sum_j f_j(x) = k*x (each M[e, :] has full row rank, so every
pattern contributes exactly |e| pivots).  Iterating the maps down a full
index tree is exact density evolution; sampling uniform index paths gives
the martingale view of the same object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fqlin import FqMatrix, enumeration_budget, row_echelon

__all__ = [
    "ErasurePolynomialSet",
    "LeadingExponents",
    "MartingaleTreeLevel",
    "PolarizationReport",
    "LocalProfile",
    "erasure_polynomials",
    "leading_exponents",
    "evolve_tree",
    "sample_paths",
    "polarization_report",
    "local_profile",
]

#: Values below this are flushed to exact zero and counted as polarized-low;
#: doubly exponential decay underflows doubles long before it stops mattering.
UNDERFLOW_FLOOR = 1e-300

DEFAULT_PATTERN_BUDGET = 1 << 20
DEFAULT_TREE_BUDGET = 10**6


@dataclass(frozen=True)
class ErasurePolynomialSet:
    """Pattern counts c_j[w] and evaluation of the one-step maps f_j.

    counts[j, w] is the number of weight-w erasure patterns that leave output
    j undetermined; counts[j, 0] = 0 always and counts[j, k] = 1 for every j
    of an invertible kernel.
    """

    kernel: FqMatrix
    counts: np.ndarray

    @property
    def k(self) -> int:
        return self.kernel.rows

    def evaluate(self, x) -> np.ndarray:
        """f_j(x) for all j; returns shape x.shape + (k,).

        The weight-expansion form has only nonnegative terms, so evaluation
        is stable arbitrarily close to both endpoints.
        """
        x = np.asarray(x, dtype=np.float64)
        k = self.k
        w = np.arange(k + 1)
        xe = x[..., None]
        terms = xe**w * (1.0 - xe) ** (k - w)
        return terms @ self.counts.T.astype(np.float64)


def erasure_polynomials(m: FqMatrix, budget=None) -> ErasurePolynomialSet:
    """Enumerate all 2^k erasure patterns of an invertible kernel.

    One row reduction per pattern marks its pivot columns; those are exactly
    the undetermined outputs.  Supported envelope is k <= 20.
    """
    if m.rows != m.cols:
        raise ValueError("kernel must be square")
    if not m.is_invertible():
        raise ValueError("singular kernel")
    k = m.rows
    budget = enumeration_budget(DEFAULT_PATTERN_BUDGET) if budget is None else budget
    if k > 20 or 2**k > budget:
        raise ValueError(f"pattern enumeration budget exceeded for k={k}")
    counts = np.zeros((k, k + 1), dtype=np.int64)
    rows = np.arange(k)
    for bits in range(1, 2**k):
        erased = rows[(bits >> rows) & 1 == 1]
        _, pivots = row_echelon(m.arr[erased], m.q)
        counts[pivots, len(erased)] += 1
    counts.flags.writeable = False
    return ErasurePolynomialSet(m, counts)


def _coerce_polys(m) -> ErasurePolynomialSet:
    return m if isinstance(m, ErasurePolynomialSet) else erasure_polynomials(m)


@dataclass(frozen=True)
class LeadingExponents:
    """Low-end decay orders d[j] = min weight of an undetermined pattern.

    f_j(x) = constants[j] * x^d[j] + O(x^(d[j]+1)) near zero.  ``eta`` is the
    fraction of indices with d >= 2 and ``b`` the smallest such order, the
    empirical strong-suction pair (b is None when eta = 0).
    """

    d: np.ndarray
    constants: np.ndarray
    eta: float
    b: int | None


def leading_exponents(polys) -> LeadingExponents:
    """Read the leading exponents off the pattern counts."""
    polys = _coerce_polys(polys)
    counts = polys.counts
    d = (counts[:, 1:] > 0).argmax(axis=1) + 1
    constants = counts[np.arange(polys.k), d]
    strong = d >= 2
    eta = float(strong.mean())
    b = int(d[strong].min()) if strong.any() else None
    return LeadingExponents(d, constants, eta, b)


@dataclass(frozen=True)
class MartingaleTreeLevel:
    """All k^t synthetic erasure rates at depth t, lexicographic by index path."""

    t: int
    values: np.ndarray
    underflow_count: int = 0

    @property
    def mean(self) -> float:
        return float(self.values.mean())


def evolve_tree(m, z0: float, t: int, budget=None, return_all: bool = False):
    """Exact density evolution: apply (f_1..f_k) to every node, level by level.

    The value at index path (i_1..i_t) is f_{i_t}(...f_{i_1}(z0)...), laid out
    lexicographically.  Returns the level-t MartingaleTreeLevel, or the whole
    list of levels 0..t with ``return_all``.  Underflow counts accumulate over
    the evolution up to each level.
    """
    polys = _coerce_polys(m)
    k = polys.k
    budget = enumeration_budget(DEFAULT_TREE_BUDGET) if budget is None else budget
    if k**t > budget:
        raise ValueError(f"tree budget exceeded: k^t = {k**t} > {budget}")
    if not 0.0 <= z0 <= 1.0:
        raise ValueError("initial erasure rate must lie in [0, 1]")
    vals = np.array([float(z0)])
    underflow = 0
    levels = [MartingaleTreeLevel(0, vals, 0)]
    for level in range(1, t + 1):
        vals = polys.evaluate(vals).ravel()
        tiny = (vals > 0) & (vals < UNDERFLOW_FLOOR)
        underflow += int(tiny.sum())
        vals[tiny] = 0.0
        vals.flags.writeable = False
        levels.append(MartingaleTreeLevel(level, vals, underflow))
    return levels if return_all else levels[-1]


def sample_paths(m, z0: float, t: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Endpoints of n independent uniform index paths through the tree."""
    polys = _coerce_polys(m)
    k = polys.k
    vals = np.full(n, float(z0))
    for _ in range(t):
        idx = rng.integers(0, k, size=n)
        branched = polys.evaluate(vals)
        vals = branched[np.arange(n), idx]
        vals[(vals > 0) & (vals < UNDERFLOW_FLOOR)] = 0.0
    return vals


@dataclass(frozen=True)
class PolarizationReport:
    """Window fractions per level plus a fitted per-level decay rate.

    fraction_exp[i] is the mass in the open window (2^-2^(lam*t), 1 - gamma^t)
    at level t = levels[i]; fraction_strong uses (gamma^t, 1 - gamma^t).  The
    two windows differ, so neither fraction dominates the other in general.
    rho_hat is exp(slope) of a log-linear fit of fraction_exp against t over
    the levels where it is positive (nan when fewer than two are).
    """

    lam: float
    gamma: float
    threshold: float
    levels: np.ndarray
    fraction_exp: np.ndarray
    fraction_strong: np.ndarray
    rate_at_threshold: np.ndarray
    underflow_counts: np.ndarray
    rho_hat: float

    def rows(self):
        """Per-level rows (t, fraction_exp, fraction_strong, rate, underflow)."""
        for i, t in enumerate(self.levels):
            yield (
                int(t),
                float(self.fraction_exp[i]),
                float(self.fraction_strong[i]),
                float(self.rate_at_threshold[i]),
                int(self.underflow_counts[i]),
            )


def polarization_report(levels, lam: float, gamma: float, threshold: float) -> PolarizationReport:
    """Measure both polarization windows on one or more tree levels.

    Windows are open intervals, so boundary values count as polarized.  The
    low edge 2^-2^(lam*t) underflows to exact 0.0 for large t, at which point
    only flushed-to-zero values escape the window; the underflow counts keep
    that bookkeeping visible.
    """
    if isinstance(levels, MartingaleTreeLevel):
        levels = [levels]
    levels = list(levels)
    if not levels:
        raise ValueError("no levels supplied")
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    ts, f_exp, f_strong, rate, under = [], [], [], [], []
    for lev in levels:
        v = lev.values
        t = lev.t
        low = 2.0 ** -(2.0 ** (lam * t))
        high = 1.0 - gamma**t
        ts.append(t)
        f_exp.append(float(np.mean((v > low) & (v < high))))
        f_strong.append(float(np.mean((v > gamma**t) & (v < high))))
        rate.append(float(np.mean(v <= threshold)))
        under.append(lev.underflow_count)
    f_exp = np.array(f_exp)
    ts = np.array(ts)
    positive = f_exp > 0
    if positive.sum() >= 2:
        slope = np.polyfit(ts[positive], np.log(f_exp[positive]), 1)[0]
        rho_hat = float(math.exp(slope))
    else:
        rho_hat = float("nan")
    return PolarizationReport(
        lam,
        gamma,
        threshold,
        ts,
        f_exp,
        np.array(f_strong),
        np.array(rate),
        np.array(under, dtype=np.int64),
        rho_hat,
    )


@dataclass(frozen=True)
class SuctionRow:
    """Suction fractions for one contraction factor c at both boundary scans."""

    c: int
    tau_low: float
    fraction_low: float
    tau_high: float
    fraction_high: float


@dataclass(frozen=True)
class LocalProfile:
    """One-step variance curve and boundary suction table of a kernel."""

    grid: np.ndarray
    variance: np.ndarray
    suction: list

    def min_variance(self, tau: float = 0.05) -> float:
        inside = (self.grid >= tau) & (self.grid <= 1.0 - tau)
        return float(self.variance[inside].min())


def local_profile(m, grid=None, factors=(2, 4, 8, 16), depth: int = 20) -> LocalProfile:
    """Variance-in-the-middle curve plus suction fractions near both ends.

    v(x) = mean_j (f_j(x) - x)^2 on the grid.  For each factor c the boundary
    scan walks x over 2^-1 .. 2^-depth (and mirrored near 1), records the
    fraction of indices moved by at least the factor c, and reports the
    largest scan point from which that fraction has already stabilized at its
    smallest-x value.
    """
    polys = _coerce_polys(m)
    if grid is None:
        grid = np.linspace(0.01, 0.99, 99)
    grid = np.asarray(grid, dtype=np.float64)
    fx = polys.evaluate(grid)
    variance = np.mean((fx - grid[..., None]) ** 2, axis=-1)

    scan = 2.0 ** -np.arange(1, depth + 1)
    f_low = polys.evaluate(scan)
    f_high = polys.evaluate(1.0 - scan)
    rows = []
    for c in factors:
        frac_low = np.mean(f_low <= scan[:, None] / c, axis=1)
        frac_high = np.mean(1.0 - f_high <= scan[:, None] / c, axis=1)
        rows.append(
            SuctionRow(
                c,
                _stabilized_tau(scan, frac_low),
                float(frac_low[-1]),
                1.0 - _stabilized_tau(scan, frac_high),
                float(frac_high[-1]),
            )
        )
    return LocalProfile(grid, variance, rows)


def _stabilized_tau(scan: np.ndarray, fracs: np.ndarray) -> float:
    """Largest scan point from which the fraction equals its deep-end value."""
    limit = fracs[-1]
    idx = len(fracs) - 1
    while idx > 0 and fracs[idx - 1] == limit:
        idx -= 1
    return float(scan[idx])
