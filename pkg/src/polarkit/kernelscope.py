"""Structural kernel analysis: mixing, containment witnesses, code distance.

A kernel polarizes only if it is mixing: invertible with no row permutation
upper-triangular.  Mixing kernels all contain the 2x2 lower-triangular matrix
H = [[1,0],[a,1]] "usefully" (through a permutation P and a column map T with
P M T = [H; 0] whose last nonzero row of T is a scaled last basis vector),
containment survives tensor squaring, and the left-kernel distance of a
leading column block controls how fast the low-end synthetic entropies decay.
This module computes all of those objects as verified witnesses rather than
existence claims: every witness returned here has been re-multiplied and
checked.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import polarlab
from .fqlin import (
    FqMatrix,
    _as_modulus,
    enumeration_budget,
    field_inverse,
    kron,
    kron_power,
    left_null_space,
    plu_decompose,
)

__all__ = [
    "ContainmentWitness",
    "KernelReport",
    "BuiltKernel",
    "MlFailure",
    "ColumnSearch",
    "is_mixing",
    "find_useful_containment_H",
    "transport_witness",
    "tensor_witness",
    "verify_witness",
    "left_kernel_distance",
    "build_high_distance_kernel",
    "ml_failure_exact",
    "extract_high_distance_columns",
    "random_mixing",
    "kernel_report",
]

DEFAULT_KERNEL_BUDGET = 10**7
DEFAULT_ML_BUDGET = 10**6
BRUTE_FORCE_LIMIT = 8


def is_mixing(m: FqMatrix, method: str = "plu") -> bool:
    """Mixing test: invertible and no row permutation is upper-triangular.

    ``method="brute"`` loops over all k! row permutations (k <= 8) and is the
    defining check.  ``method="plu"`` tests whether the unit lower-triangular
    factor of the first-nonzero-pivot PLU is non-diagonal; with that pivot
    rule the two agree (a non-mixing matrix has exactly one candidate pivot
    row per column, so no multiplier is ever produced), and the test suite
    cross-validates them exhaustively.
    """
    if m.rows != m.cols:
        raise ValueError("mixing is defined for square matrices")
    if method == "brute":
        if m.rows > BRUTE_FORCE_LIMIT:
            raise ValueError(f"brute-force mixing check supports k <= {BRUTE_FORCE_LIMIT}")
        if not m.is_invertible():
            return False
        a = m.arr
        for perm in itertools.permutations(range(m.rows)):
            if all(not a[perm[i], :i].any() for i in range(m.rows)):
                return False
        return True
    if method == "plu":
        try:
            dec = plu_decompose(m)
        except ValueError:
            return False
        low = dec.lower.arr
        return bool(np.any(np.tril(low, -1)))
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class ContainmentWitness:
    """Witness for a useful containment R in M: M.arr[perm] @ T = [R; 0].

    ``perm`` is a row-selection array (row i of the permuted matrix is row
    perm[i] of M).  ``alpha`` is the scale of the last nonzero row of T,
    which usefulness requires to be alpha times the last standard basis row.
    """

    target: FqMatrix
    perm: np.ndarray
    T: FqMatrix
    alpha: int
    useful: bool = True

    def witnessed_index(self) -> int:
        """Row index of the last nonzero row of T (0-based)."""
        nonzero = np.flatnonzero(self.T.arr.any(axis=1))
        return int(nonzero[-1])

    def to_dict(self) -> dict:
        return {
            "target": self.target.to_dict(),
            "perm": [int(p) for p in self.perm],
            "T": self.T.to_dict(),
            "alpha": int(self.alpha),
            "useful": bool(self.useful),
        }


def verify_witness(w: ContainmentWitness, m: FqMatrix) -> bool:
    """Independent check of a witness by explicit multiplication."""
    k = m.rows
    mt = w.target.rows
    perm = np.asarray(w.perm)
    if sorted(perm.tolist()) != list(range(k)):
        return False
    prod = m.arr[perm] @ w.T.arr % m.q
    if not np.array_equal(prod[:mt], w.target.arr):
        return False
    if prod[mt:].any():
        return False
    if w.useful:
        nonzero = np.flatnonzero(w.T.arr.any(axis=1))
        if nonzero.size == 0:
            return False
        last = w.T.arr[nonzero[-1]]
        expected = np.zeros(w.T.cols, dtype=np.int64)
        expected[-1] = w.alpha % m.q
        if w.alpha % m.q == 0 or not np.array_equal(last, expected):
            return False
    return True


def find_useful_containment_H(m: FqMatrix) -> ContainmentWitness:
    """Constructive witness that a mixing M usefully contains H = [[1,0],[a,1]].

    Follows the PLU route: split M[perm] = L2 @ U1 with U1 unit
    upper-triangular, locate in the lower factor the last column s with two
    nonzero entries and the last row r touching it, cancel everything between
    them with the single-entry columns, and transport the resulting witness
    back through U1.  The returned witness verifies against M itself.
    """
    if not is_mixing(m):
        raise ValueError("no containment: matrix is not mixing")
    q = m.q
    k = m.rows
    dec = plu_decompose(m)
    diag = np.diag(dec.upper.arr).copy()
    low2 = dec.lower.arr * diag[None, :] % q
    inv_diag = np.array([field_inverse(d, q) for d in diag])
    u1 = FqMatrix(q, inv_diag[:, None] * dec.upper.arr % q)

    col_weights = (low2 != 0).sum(axis=0)
    s = int(np.flatnonzero(col_weights >= 2)[-1])
    r = int(np.flatnonzero(low2[:, s])[-1])

    inv_ss = field_inverse(low2[s, s], q)
    t1 = np.zeros(k, dtype=np.int64)
    t1[s] = inv_ss
    for i in range(s + 1, r):
        if low2[i, s]:
            t1[i] = (-low2[i, s] * inv_ss * field_inverse(low2[i, i], q)) % q
    t2 = np.zeros(k, dtype=np.int64)
    t2[r] = field_inverse(low2[r, r], q)
    alpha_h = low2[r, s] * inv_ss % q
    target = FqMatrix(q, [[1, 0], [alpha_h, 1]])

    rowsel = np.array([s, r] + [i for i in range(k) if i not in (s, r)])
    w_low = ContainmentWitness(
        target, rowsel, FqMatrix(q, np.column_stack([t1, t2])), alpha=int(t2[r])
    )
    # L2 @ U1 = M[perm]; transporting by U1^{-1} rewrites the witness for it.
    w_perm = transport_witness(w_low, u1.inverse())
    witness = ContainmentWitness(
        w_perm.target, dec.perm[w_perm.perm], w_perm.T, w_perm.alpha
    )
    if not verify_witness(witness, m):
        raise AssertionError("constructed containment witness failed verification")
    return witness


def transport_witness(w: ContainmentWitness, u: FqMatrix) -> ContainmentWitness:
    """Carry a witness for R in M' to one for R in M' @ u^{-1}.

    ``u`` must be unit upper-triangular; then replacing T by u @ T preserves
    both the containment and the usefulness row, alpha included.
    """
    a = u.arr
    if u.rows != u.cols or np.any(np.diag(a) != 1) or np.any(np.tril(a, -1)):
        raise ValueError("transport requires a unit upper-triangular matrix")
    return ContainmentWitness(w.target, w.perm, u @ w.T, w.alpha, w.useful)


def tensor_witness(w: ContainmentWitness) -> ContainmentWitness:
    """Square a witness: R in M becomes R tensor R in M tensor M.

    (P kron P) (M kron M) (T kron T) = (P M T) kron (P M T); a further row
    gather moves the R-kron-R rows to the top.  Usefulness squares the alpha.
    """
    if not w.useful:
        raise ValueError("tensor lifting needs a useful witness")
    k = len(w.perm)
    mt = w.target.rows
    q = w.T.q
    perm = np.asarray(w.perm)
    perm2 = (perm[:, None] * k + perm[None, :]).ravel()
    top = [i * k + j for i in range(mt) for j in range(mt)]
    rest = [i for i in range(k * k) if i not in set(top)]
    gather = np.array(top + rest)
    return ContainmentWitness(
        kron(w.target, w.target),
        perm2[gather],
        kron(w.T, w.T),
        alpha=int(w.alpha * w.alpha % q),
    )


def left_kernel_distance(m0: FqMatrix, budget=None):
    """Minimum Hamming weight over nonzero u with u @ m0 = 0.

    Returns math.inf when the left kernel is trivial.  Enumerates the kernel
    through its basis, so the budget constrains q^(rows - rank).
    """
    basis = left_null_space(m0)
    d = basis.rows
    if d == 0:
        return math.inf
    q = m0.q
    budget = enumeration_budget(DEFAULT_KERNEL_BUDGET) if budget is None else budget
    total = q**d
    if total > budget:
        raise ValueError(f"kernel enumeration budget exceeded: {total} > {budget}")
    best = m0.rows + 1
    chunk = 1 << 16
    for lo in range(1, total, chunk):
        hi = min(lo + chunk, total)
        idx = np.arange(lo, hi)
        coeffs = np.stack([(idx // q**i) % q for i in range(d)], axis=1)
        vecs = coeffs @ basis.arr % q
        best = min(best, int(np.count_nonzero(vecs, axis=1).min()))
    return best


@dataclass(frozen=True)
class MlFailure:
    """Exact min-weight-decoder failure rate and its distance lower bound."""

    failure: float
    lower_bound: float
    distance: object
    bound_ok: bool


def ml_failure_exact(p: FqMatrix, eps: float, budget=None) -> MlFailure:
    """Exact failure rate of min-weight decoding of u @ P under sparse noise.

    u has i.i.d. coordinates equal to 0 with probability 1-eps and uniform
    nonzero otherwise (eps < 1/2).  The decoder returns the minimum-weight
    preimage of the observed u @ P; ties count as failures, which keeps the
    reported number an upper bound for any tie-breaking rule and preserves
    the lower-bound direction of the distance argument.  The companion bound
    is failure >= (eps/(q-1))^A with A the left-kernel distance of P, from
    flipping the support of a minimum-weight kernel vector.
    """
    eps = float(eps)
    if not 0.0 <= eps < 0.5:
        raise ValueError("noise rate must satisfy 0 <= eps < 1/2")
    q = p.q
    k = p.rows
    budget = enumeration_budget(DEFAULT_ML_BUDGET) if budget is None else budget
    if q**k > budget:
        raise ValueError(f"source enumeration budget exceeded: {q**k} > {budget}")

    idx = np.arange(q**k)
    all_u = np.stack([(idx // q ** (k - 1 - i)) % q for i in range(k)], axis=1)
    weights = np.count_nonzero(all_u, axis=1)
    synd = all_u @ p.arr % q
    _, inv = np.unique(synd, axis=0, return_inverse=True)
    n_groups = inv.max() + 1 if inv.size else 0
    gmin = np.full(n_groups, k + 1)
    np.minimum.at(gmin, inv, weights)
    at_min = weights == gmin[inv]
    mult = np.bincount(inv, weights=at_min.astype(np.float64), minlength=n_groups)
    unique_winner = at_min & (mult[inv] == 1)

    pz = 1.0 - eps
    pnz = eps / (q - 1) if q > 1 else 0.0
    probs = pz ** (k - weights[unique_winner]) * pnz ** weights[unique_winner]
    failure = float(1.0 - probs.sum())

    dist = left_kernel_distance(p, budget=budget)
    bound = 0.0 if math.isinf(dist) else pnz**dist
    return MlFailure(failure, bound, dist, failure >= bound - 1e-15)


# ---------------------------------------------------------------------------
# High-distance kernel construction
# ---------------------------------------------------------------------------

# Primitive polynomials for GF(2^m), m = 2..10, as bit masks (x^2 + x + 1 etc).
_PRIMITIVE_POLY = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
}


def _gf2m_powers(m: int, count: int) -> list:
    """alpha^0 .. alpha^(count-1) in GF(2^m) as integers."""
    poly = _PRIMITIVE_POLY[m]
    out = []
    x = 1
    for _ in range(count):
        out.append(x)
        x <<= 1
        if x >> m:
            x ^= poly
    return out


def _bch_block(k: int, b: int) -> FqMatrix:
    """k x (b*m) binary block whose left kernel is a designed-distance 2b+1 code.

    Row i stacks the bit representations of alpha^(i*j) for the odd powers
    j = 1, 3, .., 2b-1; conjugacy supplies the even powers, so the left kernel
    is a (possibly shortened) narrow-sense code of distance > 2b.  For b = 1
    this degenerates to distinct nonzero columns, the Hamming construction.
    """
    m = 1
    while 2**m - 1 < k:
        m += 1
    m = max(m, 2)
    if m not in _PRIMITIVE_POLY:
        raise ValueError(f"no primitive polynomial tabulated for GF(2^{m})")
    rows = np.zeros((k, b * m), dtype=np.int64)
    powers = _gf2m_powers(m, 2 * b)
    for block, j in enumerate(range(1, 2 * b, 2)):
        # alpha^(i*j) for i = 0..k-1, stepping by alpha^j each time
        step = powers[j]
        val = 1
        for i in range(k):
            for bit in range(m):
                rows[i, block * m + bit] = (val >> bit) & 1
            val = _gf2m_mul(val, step, m)
    return FqMatrix(2, rows)


def _gf2m_mul(a: int, b: int, m: int) -> int:
    poly = _PRIMITIVE_POLY[m]
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        if a >> m:
            a ^= poly
        b >>= 1
    return out


def _complete_columns(m0_arr: np.ndarray, q: int) -> np.ndarray:
    """Extend a k x s column block to an invertible k x k matrix greedily."""
    k = m0_arr.shape[0]
    cols = [m0_arr[:, i] for i in range(m0_arr.shape[1])]

    def current_rank(cs):
        if not cs:
            return 0
        return FqMatrix(q, np.column_stack(cs).T).rank()

    rank = current_rank(cols)
    for i in range(k):
        if len(cols) == k:
            break
        cand = np.zeros(k, dtype=np.int64)
        cand[i] = 1
        new_rank = current_rank(cols + [cand])
        if new_rank > rank:
            cols.append(cand)
            rank = new_rank
    return np.column_stack(cols)


def random_mixing(q, k: int, rng: np.random.Generator) -> FqMatrix:
    """Rejection-sample a mixing k x k kernel over F_q."""
    q = _as_modulus(q)
    while True:
        cand = FqMatrix(q, rng.integers(0, q, size=(k, k)))
        if is_mixing(cand):
            return cand


@dataclass(frozen=True)
class KernelReport:
    """Aggregated structural facts about one kernel, all independently verified."""

    mixing: bool
    witness: ContainmentWitness | None
    block_cols: int | None
    distance: object
    exponents: np.ndarray | None
    eta: float | None
    b: int | None
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        dist = self.distance
        if dist is not None and not isinstance(dist, str) and math.isinf(dist):
            dist = "inf"
        return {
            "mixing": bool(self.mixing),
            "distance": dist if dist is None or isinstance(dist, str) else int(dist),
            "block_cols": self.block_cols,
            "exponents": None if self.exponents is None else [int(d) for d in self.exponents],
            "eta": self.eta,
            "b": self.b,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "metadata": self.metadata,
        }


def kernel_report(m: FqMatrix, block_cols: int | None = None, metadata=None) -> KernelReport:
    """Assemble the standard report: mixing, H-witness, block distance, exponents."""
    mixing = is_mixing(m)
    witness = find_useful_containment_H(m) if mixing else None
    distance = None
    if block_cols is not None:
        distance = left_kernel_distance(FqMatrix(m.q, m.arr[:, :block_cols]))
    exponents = eta = b = None
    if mixing and m.rows <= 20:
        lead = polarlab.leading_exponents(m)
        exponents, eta, b = lead.d, lead.eta, lead.b
    return KernelReport(
        mixing, witness, block_cols, distance, exponents, eta, b, metadata or {}
    )


@dataclass(frozen=True)
class BuiltKernel:
    """Output of the high-distance construction: the kernel plus its evidence."""

    matrix: FqMatrix
    block_cols: int
    distance: object
    report: KernelReport


def build_high_distance_kernel(
    q, k: int, b: int, rng: np.random.Generator | None = None, attempts: int = 2000
) -> BuiltKernel:
    """Mixing kernel [M0 | M1] whose leading block has left-kernel distance > 2b.

    Over F_2 the block comes from tabulated parity-check families (Hamming for
    b = 1, designed-distance blocks above); other fields fall back to seeded
    random search with exact verification.  The completion M1 starts as a
    greedy basis extension and, if the result is not mixing, is perturbed by
    right multiplications that leave the leading block untouched.  Every
    returned kernel carries a verified report; a failed search raises with
    the best distance found.
    """
    q = _as_modulus(q)
    rng = rng if rng is not None else np.random.default_rng(0)
    if b < 0:
        raise ValueError("b must be nonnegative")
    if k < 2:
        raise ValueError("kernels need at least two rows")
    if b == 0:
        # Any mixing kernel qualifies (distance of an empty block is infinite);
        # the lower-triangular all-ones matrix is the canonical choice.
        m = FqMatrix(q, np.tril(np.ones((k, k), dtype=np.int64)))
        report = kernel_report(m, block_cols=0, metadata={"q": q, "k": k, "b": 0})
        return BuiltKernel(m, 0, math.inf, report)
    if q == 2:
        m0_arr = _bch_block(k, b).arr
        dist = left_kernel_distance(FqMatrix(2, m0_arr))
        if not dist > 2 * b:
            raise ValueError(f"structured block missed its distance: got {dist}")
    else:
        m0_arr = _search_block(q, k, b, rng, attempts)

    s = m0_arr.shape[1]
    if s >= k:
        raise ValueError(f"block needs {s} columns, leaving no room in a {k}x{k} kernel")
    full = _complete_columns(m0_arr, q)
    m = FqMatrix(q, full)
    for _ in range(attempts):
        if is_mixing(m):
            break
        bmat = rng.integers(0, q, size=(s, k - s))
        v = np.triu(rng.integers(0, q, size=(k - s, k - s)), 1) + np.eye(k - s, dtype=np.int64)
        m1 = (full[:, :s] @ bmat + full[:, s:] @ v) % q
        full = np.column_stack([full[:, :s], m1])
        m = FqMatrix(q, full)
    else:
        raise ValueError("failed to complete the block to a mixing kernel")

    distance = left_kernel_distance(FqMatrix(q, m.arr[:, :s]))
    if not distance > 2 * b:
        raise AssertionError("completed kernel lost the block distance")
    report = kernel_report(m, block_cols=s, metadata={"q": q, "k": k, "b": b})
    return BuiltKernel(m, s, distance, report)


def _search_block(q: int, k: int, b: int, rng: np.random.Generator, attempts: int) -> np.ndarray:
    """Randomized search for a k x s block with left-kernel distance > 2b."""
    best_dist = 0
    for s in range(max(2 * b, 1), k):
        for _ in range(attempts):
            cand = FqMatrix(q, rng.integers(0, q, size=(k, s)))
            try:
                d = left_kernel_distance(cand)
            except ValueError:
                break  # kernel too large to enumerate at this s
            if not math.isinf(d):
                best_dist = max(best_dist, d)
            if d > 2 * b:
                return cand.arr
    raise ValueError(f"no block with distance > {2 * b} found; best seen {best_dist}")


@dataclass(frozen=True)
class ColumnSearch:
    """Best column subset found, with its distance and the padded mixing flag."""

    columns: tuple
    distance: object
    padded_mixing: bool
    exhaustive: bool


def extract_high_distance_columns(
    m: FqMatrix, t0: int, s: int, exhaustive_limit: int = 16, subset_budget: int = 200_000
) -> ColumnSearch:
    """Column subset of the t0-th tensor power maximizing left-kernel distance.

    Exhaustive over all subsets when the power has at most ``exhaustive_limit``
    columns and the subset count fits the budget; otherwise greedy add-one
    search, flagged as non-exhaustive.  Ties prefer the lexicographically
    first subset.  Also reports whether the column permutation putting the
    chosen block first is mixing.
    """
    mt = kron_power(m, t0)
    n = mt.rows
    if not 0 <= s <= n:
        raise ValueError("subset size out of range")
    q = m.q

    def block_distance(cols):
        return left_kernel_distance(FqMatrix(q, mt.arr[:, list(cols)]))

    exhaustive = n <= exhaustive_limit and math.comb(n, s) <= subset_budget
    if exhaustive:
        best_cols, best_dist = None, -1.0
        for cols in itertools.combinations(range(n), s):
            d = block_distance(cols)
            val = float("inf") if math.isinf(d) else d
            if val > best_dist:
                best_cols, best_dist = cols, val
    else:
        chosen = []
        remaining = list(range(n))
        for _ in range(s):
            scored = []
            for c in remaining:
                d = block_distance(chosen + [c])
                scored.append((float("inf") if math.isinf(d) else d, c))
            best = max(scored, key=lambda dc: (dc[0], -dc[1]))
            chosen.append(best[1])
            remaining.remove(best[1])
        best_cols = tuple(chosen)
    dist = block_distance(best_cols)
    order = list(best_cols) + [c for c in range(n) if c not in set(best_cols)]
    padded = FqMatrix(q, mt.arr[:, order])
    return ColumnSearch(tuple(best_cols), dist, is_mixing(padded, method="plu"), exhaustive)
