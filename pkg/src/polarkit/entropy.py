"""Exact conditional entropies of kernel transforms of i.i.d. symbol pairs.

The central object is a joint law p(u, a) of one (symbol, side information)
pair with u in F_q and a in a finite alphabet.  Given k i.i.d. pairs and an
invertible kernel M, the engine enumerates every state (u, a) in F_q^k x [m]^k
with its product weight and accumulates the exact joint law of the transform
prefixes, yielding the per-index profile

    h[j] = H( (uM)_j | (uM)_{<j}, a_1..a_k ) / log2(q).

Entropies are normalized to [0, 1] by log2(q) throughout.  Everything here is
exact enumeration; nothing is estimated from samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fqlin import FqMatrix, _as_modulus, enumeration_budget

__all__ = [
    "SymbolJoint",
    "EntropyProfile",
    "ExponentReport",
    "cond_entropy",
    "polar_entropies",
    "polarization_exponents",
    "map_predictor",
    "fano_bound",
    "consensus_predictor_error",
    "erasure_joint",
    "erasure_family",
    "channel_joint",
]

DEFAULT_STATE_BUDGET = 10**7


class SymbolJoint:
    """Joint distribution p(u, a) over F_q x [m] as an immutable (q, m) table."""

    __slots__ = ("q", "p")

    def __init__(self, q, p):
        object.__setattr__(self, "q", _as_modulus(q))
        p = np.array(p, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] != self.q:
            raise ValueError("joint table must have one row per field element")
        if np.any(p < 0):
            raise ValueError("joint probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("joint probabilities must sum to 1")
        p.flags.writeable = False
        object.__setattr__(self, "p", p)

    def __setattr__(self, name, value):
        raise AttributeError("SymbolJoint is immutable")

    @property
    def m(self) -> int:
        return self.p.shape[1]

    def drop_side_info(self) -> "SymbolJoint":
        """Marginalize the side information away (m = 1 constant observer)."""
        return SymbolJoint(self.q, self.p.sum(axis=1, keepdims=True))

    def __repr__(self):
        return f"SymbolJoint(q={self.q}, m={self.m})"


def erasure_joint(q, z: float) -> SymbolJoint:
    """U uniform on F_q; A = U with probability 1-z, else an erasure label.

    The side alphabet is F_q plus the distinguished label q.  The normalized
    conditional entropy is exactly z, which makes this the canonical test
    family for exponent fits.
    """
    q = _as_modulus(q)
    if not 0.0 <= z <= 1.0:
        raise ValueError("erasure probability must lie in [0, 1]")
    p = np.zeros((q, q + 1))
    for u in range(q):
        p[u, u] = (1.0 - z) / q
        p[u, q] = z / q
    return SymbolJoint(q, p)


def erasure_family(q):
    """The map delta -> erasure_joint(q, delta); calibrated H(U|A) = delta."""
    return lambda delta: erasure_joint(q, delta)


def channel_joint(channel) -> SymbolJoint:
    """Joint of (uniform input, channel output); H(U|A) = 1 - capacity."""
    return SymbolJoint(channel.q, channel.w / channel.q)


def _entropy_bits(weights: np.ndarray) -> float:
    w = weights[weights > 0]
    return float(-np.sum(w * np.log2(w)))


def cond_entropy(joint: SymbolJoint) -> float:
    """Normalized conditional entropy H(U|A)/log2(q), in [0, 1]."""
    p = joint.p
    pa = p.sum(axis=0)
    h_ua = _entropy_bits(p.ravel())
    h_a = _entropy_bits(pa)
    return (h_ua - h_a) / math.log2(joint.q)


@dataclass(frozen=True)
class EntropyProfile:
    """Per-index profile h[j] = H((uM)_j | (uM)_{<j}, a), normalized."""

    h: np.ndarray

    @property
    def total(self) -> float:
        return float(self.h.sum())

    def to_dict(self) -> dict:
        return {"h": [float(x) for x in self.h], "sum": self.total}


def _digit_table(base: int, width: int) -> np.ndarray:
    """All base-ary words of the given width, one per row, first digit most significant."""
    idx = np.arange(base**width)
    cols = [(idx // base ** (width - 1 - i)) % base for i in range(width)]
    return np.stack(cols, axis=1).astype(np.int64)


def polar_entropies(m: FqMatrix, joint: SymbolJoint, budget=None) -> EntropyProfile:
    """Exact entropy profile of the transform u -> uM under i.i.d. ``joint`` pairs.

    Enumerates all (q*m)^k states with product weights; the default budget of
    1e7 states can be overridden per call or via POLARLAB_BUDGET.  The chain
    rule sum(h) = k * H(U|A) is verified internally to 1e-9 as a self-check.
    """
    if m.rows != m.cols:
        raise ValueError("kernel must be square")
    if m.q != joint.q:
        raise ValueError("modulus mismatch between kernel and joint")
    if not m.is_invertible():
        raise ValueError("singular kernel")
    k = m.rows
    q = m.q
    ma = joint.m
    budget = enumeration_budget(DEFAULT_STATE_BUDGET) if budget is None else budget
    n_states = (q * ma) ** k
    if n_states > budget:
        raise ValueError(f"enumeration budget exceeded: {n_states} states > {budget}")

    all_u = _digit_table(q, k)
    v = all_u @ m.arr % q
    all_a = _digit_table(ma, k)
    n_u, n_a = q**k, ma**k
    chunk = max(1, min(n_u, (1 << 22) // n_a + 1))

    cum_bits = np.empty(k + 1)
    for j in range(k + 1):
        vkey = np.zeros(n_u, dtype=np.int64)
        for i in range(j):
            vkey = vkey * q + v[:, i]
        size = (q**j) * n_a
        acc = np.zeros(size)
        offsets = np.arange(n_a, dtype=np.int64)
        for lo in range(0, n_u, chunk):
            hi = min(lo + chunk, n_u)
            w = np.ones((hi - lo, n_a))
            for i in range(k):
                w *= joint.p[all_u[lo:hi, i]][:, all_a[:, i]]
            flat = (vkey[lo:hi, None] * n_a + offsets[None, :]).ravel()
            acc += np.bincount(flat, weights=w.ravel(), minlength=size)
        cum_bits[j] = _entropy_bits(acc)

    h = np.diff(cum_bits) / math.log2(q)
    expected = k * cond_entropy(joint)
    if abs(h.sum() - expected) > 1e-9:
        raise RuntimeError(
            f"chain-rule self check failed: sum(h)={h.sum():.12f}, expected {expected:.12f}"
        )
    if np.any(h < -1e-9) or np.any(h > 1.0 + 1e-9):
        raise RuntimeError("entropy profile escaped [0, 1] beyond tolerance")
    h = np.clip(h, 0.0, 1.0)
    h.flags.writeable = False
    return EntropyProfile(h)


def map_predictor(joint: SymbolJoint):
    """Maximum-posterior predictor f(a) = argmax_u p(u|a) and its exact error.

    Ties break toward the smallest field element.  The error probability is
    exactly 1 - sum_a max_u p(u, a).
    """
    f = np.argmax(joint.p, axis=0).astype(np.int64)
    err = float(1.0 - joint.p.max(axis=0).sum())
    return f, err


def fano_bound(delta: float, alphabet_size: int) -> float:
    """Entropy bound 2*delta*(log2(1/delta) + log2(s)) from a predictor error."""
    if not 0.0 < delta < 0.5:
        raise ValueError("the bound requires 0 < delta < 1/2")
    return 2.0 * delta * (math.log2(1.0 / delta) + math.log2(alphabet_size))


def consensus_predictor_error(joint: SymbolJoint) -> float:
    """Exact failure rate of the two-observation consensus rule.

    Four i.i.d. pairs (U_i, A_i) feed the doubled 2x2 lower-triangular kernel;
    the last output U_4 is estimated from the aliased sums W_2 = c*U_4 + U_2,
    W_3 = c*U_4 + U_3 and the side information: when the residuals
    W_2 - f(A_2) and W_3 - f(A_3) agree the common value is unscrambled,
    otherwise f(A_4) is reported (f the maximum-posterior predictor, whose
    aliasing scale c cancels).  The rule fails exactly when the residuals
    agree on a nonzero error or disagree while f(A_4) is wrong, which decays
    quadratically in the per-pair error.
    """
    q = joint.q
    f, perr = map_predictor(joint)
    resid = np.zeros(q)
    shift = (np.arange(q)[:, None] - f[None, :]) % q
    np.add.at(resid, shift, joint.p)
    same_nonzero = float(np.sum(resid[1:] ** 2))
    differ = float(1.0 - np.sum(resid**2))
    return same_nonzero + differ * perr


@dataclass(frozen=True)
class ExponentReport:
    """Per-index decay exponents fitted on a delta grid.

    ``exponents[j]`` is the least-squares slope of log h[j](delta) against
    log delta over the ``fit_points`` smallest grid values; +inf marks indices
    whose entropy vanished exactly.
    """

    deltas: np.ndarray
    profiles: np.ndarray
    exponents: np.ndarray
    fit_points: int = 3

    def fraction_at_least(self, b: float) -> float:
        """Fraction of indices with fitted exponent >= b."""
        return float(np.mean(self.exponents >= b))

    def suction_pair(self, b_min: float = 1.5):
        """(eta, b) summary: fraction of indices at or above ``b_min`` and
        the smallest exponent among them (None when the fraction is zero)."""
        good = self.exponents[self.exponents >= b_min]
        if good.size == 0:
            return 0.0, None
        return float(good.size) / self.exponents.size, float(good.min())

    def to_dict(self) -> dict:
        return {
            "deltas": [float(d) for d in self.deltas],
            "profiles": [[float(x) for x in row] for row in self.profiles],
            "per_index_exponents": [
                "inf" if math.isinf(e) else float(e) for e in self.exponents
            ],
        }


def polarization_exponents(
    m: FqMatrix, family, deltas, fit_points: int = 3, budget=None
) -> ExponentReport:
    """Fit per-index decay exponents h[j](delta) ~ delta^b over a delta grid.

    ``family`` maps delta to a SymbolJoint and must be calibrated so that
    H(U|A) = delta to 1e-9 (the erasure family is).  The fit uses the
    ``fit_points`` smallest deltas, where constant contamination is weakest.

    Profiles come from differences of state-space entropies, so values below
    roughly 1e-12 are cancellation noise; keep delta^b above that floor (for
    erasure sources the polarlab polynomials evaluate the same quantity with
    no floor).
    """
    deltas = np.sort(np.asarray(deltas, dtype=np.float64))
    if deltas.size < 3:
        raise ValueError("need at least 3 grid points")
    if np.any(deltas <= 0) or np.any(deltas >= 1):
        raise ValueError("grid values must lie in (0, 1)")
    profiles = []
    for d in deltas:
        joint = family(d)
        if abs(cond_entropy(joint) - d) > 1e-9:
            raise ValueError(f"family is miscalibrated at delta={d}")
        profiles.append(polar_entropies(m, joint, budget=budget).h)
    profiles = np.array(profiles)
    k = m.rows
    logd = np.log(deltas[:fit_points])
    exponents = np.empty(k)
    for j in range(k):
        hj = profiles[:fit_points, j]
        if np.any(hj <= 0):
            exponents[j] = math.inf
        else:
            exponents[j] = np.polyfit(logd, np.log(hj), 1)[0]
    return ExponentReport(deltas, profiles, exponents, fit_points)
