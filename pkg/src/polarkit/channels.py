"""Finite-alphabet symmetric memoryless channels as explicit transition tables.

A channel over F_q is a row-stochastic table w[x, y] = P(output y | input x)
with outputs labelled 0..m-1.  Symmetry here means: for every input pair
(a, b) there is an output bijection carrying the conditional distribution of
one onto the other, and all output columns have equal total weight.  The
public constructors (q-ary symmetric and erasure) produce symmetric channels
by construction; an arbitrary table can be wrapped with the symmetry check
disabled so that non-symmetric tables can still be diagnosed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fqlin import _as_modulus

__all__ = [
    "Channel",
    "NoiseLaw",
    "SymmetryCertificate",
    "make_qsc",
    "make_erasure",
    "make_table_channel",
    "validate_symmetric",
    "capacity",
    "sample_output",
    "sample_outputs",
]

ROW_TOL = 1e-12


@dataclass(frozen=True)
class NoiseLaw:
    """Additive noise law on F_q: mass 1-eps on 0, eps/(q-1) on each nonzero."""

    q: int
    eps: float

    def __post_init__(self):
        _as_modulus(self.q)
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError("noise probability must lie in [0, 1]")

    def probabilities(self) -> np.ndarray:
        p = np.full(self.q, self.eps / (self.q - 1))
        p[0] = 1.0 - self.eps
        return p


class Channel:
    """Memoryless channel: prime input modulus q, transition table w (q x m).

    ``kind`` tags the construction (additive | erasure | general) and
    ``param`` records the defining noise parameter where there is one.
    Instances are immutable.
    """

    __slots__ = ("q", "w", "kind", "param")

    def __init__(self, q, w, kind: str = "general", param=None):
        object.__setattr__(self, "q", _as_modulus(q))
        w = np.array(w, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != self.q:
            raise ValueError("transition table must have one row per field element")
        if np.any(w < 0):
            raise ValueError("transition probabilities must be nonnegative")
        if np.any(np.abs(w.sum(axis=1) - 1.0) > ROW_TOL):
            raise ValueError("transition table rows must sum to 1")
        w.flags.writeable = False
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "param", param)

    def __setattr__(self, name, value):
        raise AttributeError("Channel is immutable")

    @property
    def outputs(self) -> int:
        return self.w.shape[1]

    @property
    def erasure_symbol(self) -> int:
        """Label of the erasure output (only meaningful for erasure channels)."""
        if self.kind != "erasure":
            raise ValueError("not an erasure channel")
        return self.q

    def __repr__(self):
        return f"Channel(kind={self.kind!r}, q={self.q}, outputs={self.outputs}, param={self.param})"

    def to_dict(self) -> dict:
        if self.kind in ("additive", "erasure"):
            key = "qsc" if self.kind == "additive" else "erasure"
            return {"kind": key, "q": self.q, "param": float(self.param)}
        return {"kind": "table", "q": self.q, "w": [[float(x) for x in row] for row in self.w]}


def make_qsc(q, eps: float) -> Channel:
    """q-ary symmetric channel: output = input + Z with Z additive noise.

    w[y|x] = 1-eps on y = x and eps/(q-1) elsewhere.
    """
    q = _as_modulus(q)
    noise = NoiseLaw(q, float(eps))  # validates eps
    w = np.full((q, q), noise.eps / (q - 1))
    np.fill_diagonal(w, 1.0 - noise.eps)
    return Channel(q, w, kind="additive", param=float(eps))


def make_erasure(q, z: float) -> Channel:
    """Erasure channel: output = input with prob 1-z, else the erasure label q."""
    q = _as_modulus(q)
    z = float(z)
    if not 0.0 <= z <= 1.0:
        raise ValueError("erasure probability must lie in [0, 1]")
    w = np.zeros((q, q + 1))
    np.fill_diagonal(w, 1.0 - z)
    w[:, q] = z
    return Channel(q, w, kind="erasure", param=z)


def make_table_channel(q, w, require_symmetric: bool = True) -> Channel:
    """Wrap an explicit transition table.

    By default the symmetry invariant is enforced; pass
    ``require_symmetric=False`` to wrap a table for diagnosis only.
    """
    c = Channel(q, w, kind="general")
    if require_symmetric:
        cert = validate_symmetric(c)
        if not cert.ok:
            raise ValueError(f"table is not symmetric: {cert.reason}")
    return c


@dataclass(frozen=True)
class SymmetryCertificate:
    """Outcome of the symmetry check.

    On success ``bijections[(a, b)]`` holds sigma with w[y|a] = w[sigma(y)|b]
    for every output y.  On failure ``violation`` names an offending input
    pair and ``reason`` says why.  ``column_sums_equal`` reports the stricter
    all-outputs sum equality as a diagnostic; it is not part of the verdict
    because an erasure output, fed equally by every input, breaks it while
    leaving the channel perfectly input-symmetric.
    """

    ok: bool
    bijections: dict | None = None
    violation: tuple | None = None
    reason: str = ""
    column_sums_equal: bool = True

    def __bool__(self):
        return self.ok


def validate_symmetric(c: Channel) -> SymmetryCertificate:
    """Find, for every input pair, an output bijection carrying one
    conditional distribution onto the other.

    Candidates are built by matching conditional distributions sorted by
    probability; ties are matched in index order, which is harmless because
    tied entries are interchangeable.  Every candidate is then verified entry
    by entry, so a returned certificate is sound regardless of how ties were
    broken.  The verdict is the existence of all q^2 bijections; the global
    column-sum equality is recorded separately (see SymmetryCertificate).
    """
    w = c.w
    col_sums = w.sum(axis=0)
    sums_equal = bool(np.all(np.abs(col_sums - col_sums.mean()) <= 1e-9))
    orders = [np.argsort(w[x], kind="stable") for x in range(c.q)]
    bijections = {}
    for a in range(c.q):
        for b in range(c.q):
            sigma = np.empty(c.outputs, dtype=np.int64)
            sigma[orders[a]] = orders[b]
            if np.max(np.abs(w[a] - w[b][sigma])) > 1e-12:
                return SymmetryCertificate(
                    ok=False,
                    violation=(a, b),
                    reason=f"no output bijection matches inputs {a} and {b}",
                    column_sums_equal=sums_equal,
                )
            bijections[(a, b)] = sigma
    return SymmetryCertificate(ok=True, bijections=bijections, column_sums_equal=sums_equal)


def capacity(c: Channel) -> float:
    """Normalized capacity I(X;Y)/log2(q) with X uniform, exact from the table.

    Uniform input is optimal for symmetric channels, so this is the channel
    capacity; equals 1 - H(X|Y)/log2(q).  Raises on non-symmetric input.
    """
    cert = validate_symmetric(c)
    if not cert.ok:
        raise ValueError(f"capacity requires a symmetric channel: {cert.reason}")
    w = c.w
    py = w.mean(axis=0)
    ratio = np.divide(w, py[None, :], out=np.ones_like(w), where=(w > 0) & (py > 0))
    bits = float(np.sum(w * np.log2(ratio)) / c.q)
    return bits / np.log2(c.q)


def sample_outputs(c: Channel, x, rng: np.random.Generator) -> np.ndarray:
    """Vectorized channel use: one output draw per entry of ``x``."""
    x = np.asarray(x, dtype=np.int64)
    cdf = np.cumsum(c.w, axis=1)
    r = rng.random(size=x.shape)
    y = np.sum(r[..., None] >= cdf[x], axis=-1)
    return np.minimum(y, c.outputs - 1)


def sample_output(c: Channel, x: int, rng: np.random.Generator) -> int:
    """Draw one channel output for input symbol ``x``."""
    return int(sample_outputs(c, np.asarray([x]), rng)[0])
