"""Random LDGM / regular-LDPC samplers and compound-code assembly.

A compound code couples a sparse generator matrix G (n x m, built row by row
with d_top positions drawn uniformly with replacement) with a regular LDPC
parity-check matrix H (k x m, dv ones per column and dc' per row).  Codewords
are x = G y for information words y with H y = 0.  The k lower checks split
into H1 (first k1 rows) and H2 (remaining k2): fixing the H2 syndrome selects
one coset of a nested partition, which is what the side-information pipelines
consume.

Randomness policy: every sampler takes an explicit ``numpy.random.Generator``
backed by PCG64 (a named, documented algorithm whose stream is stable across
platforms), so experiments replay bit-identically from a seed.  Per-trial
substreams are derived from ``(master_seed, trial_index)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gf2 import (
    BitVector,
    SparseBitMatrix,
    concat,
    matrix_from_text,
    matrix_to_text,
    matvec,
    null_space_basis,
    solve_particular,
    _pack,
    _rref,
)


def new_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for the given 64-bit seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent per-trial substream; replayable at any thread count."""
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((master_seed, trial_index))))


def random_bitvector(length: int, rng: np.random.Generator, p: float = 0.5) -> BitVector:
    """Vector of i.i.d. Bernoulli(p) bits."""
    if p == 0.5:
        bits = rng.integers(0, 2, size=length)
    else:
        bits = (rng.random(length) < p).astype(np.int64)
    return BitVector.from_bits(bits)


@dataclass(frozen=True)
class EnsembleParams:
    """Dimensions, degree triplet and seed of one compound-code ensemble."""

    n: int
    m: int
    k: int
    d_top: int
    dv: int
    dc_prime: int
    seed: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1")
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if self.d_top < 1:
            raise ValueError("d_top must be >= 1")
        if self.m * self.dv != self.k * self.dc_prime:
            raise ValueError(
                f"edge count mismatch: m*dv = {self.m * self.dv} "
                f"!= k*dc' = {self.k * self.dc_prime}")

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "k": self.k, "d_top": self.d_top,
                "dv": self.dv, "dc_prime": self.dc_prime, "seed": self.seed}


def sample_ldgm(n: int, m: int, d_top: int, rng: np.random.Generator) -> SparseBitMatrix:
    """n x m generator matrix, each row built from d_top uniform draws.

    Positions are drawn with replacement; repeats cancel mod 2, so a row has
    at most d_top entries, with the same parity as d_top.
    """
    if n < 1 or m < 1 or d_top < 1:
        raise ValueError("n, m, d_top must all be >= 1")
    draws = rng.integers(0, m, size=(n, d_top))
    return SparseBitMatrix.from_rows(n, m, draws, reduce_mod2=True)


def sample_regular_ldpc(m: int, k: int, dv: int, dc_prime: int,
                        rng: np.random.Generator) -> SparseBitMatrix:
    """k x m parity-check matrix with exactly dv ones per column, dc' per row.

    Uses the configuration model: dv sockets per column and dc' per row are
    joined by a uniform random matching.  A matching with a multi-edge is
    resampled (up to 100 times), then repaired by local edge swaps until the
    graph is simple.  This is the standard surrogate for uniform sampling
    over all regular matrices; exact uniformity over simple matrices is not
    attempted.
    """
    if m * dv != k * dc_prime:
        raise ValueError(f"edge count mismatch: m*dv = {m * dv} != k*dc' = {k * dc_prime}")
    if k == 0:
        return SparseBitMatrix(0, m, [])
    if dv < 1 or dc_prime < 1:
        raise ValueError("dv and dc_prime must be >= 1 when k > 0")
    if dv > k or dc_prime > m:
        raise ValueError("degrees cannot exceed the opposite side's size")
    n_edges = m * dv
    col_of_socket = np.repeat(np.arange(m, dtype=np.int64), dv)
    row_of_edge = np.repeat(np.arange(k, dtype=np.int64), dc_prime)
    for _ in range(10_000):
        for _ in range(100):
            cand = col_of_socket[rng.permutation(n_edges)]
            if np.unique(row_of_edge * m + cand).size == n_edges:
                return _matrix_from_edges(row_of_edge, cand, m, k, dc_prime)
        repaired = _repair_multiedges(row_of_edge, cand, m, rng)
        if repaired is not None:
            return _matrix_from_edges(row_of_edge, repaired, m, k, dc_prime)
    raise RuntimeError("regular LDPC sampling did not converge")


def _matrix_from_edges(row_of_edge, cols, m, k, dc_prime) -> SparseBitMatrix:
    supports = [np.sort(cols[i * dc_prime:(i + 1) * dc_prime]) for i in range(k)]
    return SparseBitMatrix(k, m, supports)


def _repair_multiedges(row_of_edge: np.ndarray, cols: np.ndarray, m: int,
                       rng: np.random.Generator) -> np.ndarray | None:
    """Local double-edge swaps driving the multigraph towards simplicity.

    Swapping the column endpoints of two edges preserves both degree
    sequences.  A proposal is accepted whenever it does not increase the
    total multi-edge excess; sideways moves keep the walk from freezing.
    Returns None when the proposal budget runs out (caller resamples).
    """
    cols = cols.copy()
    n_edges = cols.size
    keys = (row_of_edge * m + cols).tolist()
    counts: dict[int, int] = {}
    for key in keys:
        counts[key] = counts.get(key, 0) + 1

    def excess_delta(changes: dict[int, int]) -> int:
        delta = 0
        for key, step in changes.items():
            q = counts.get(key, 0)
            delta += max(q + step - 1, 0) - max(q - 1, 0)
        return delta

    for _ in range(200 * n_edges):
        dups = [e for e in range(n_edges) if counts[keys[e]] > 1]
        if not dups:
            return cols
        e = dups[int(rng.integers(len(dups)))]
        f = int(rng.integers(n_edges))
        if f == e:
            continue
        new_e = int(row_of_edge[e] * m + cols[f])
        new_f = int(row_of_edge[f] * m + cols[e])
        changes: dict[int, int] = {}
        for key, step in ((keys[e], -1), (keys[f], -1), (new_e, 1), (new_f, 1)):
            changes[key] = changes.get(key, 0) + step
        if excess_delta(changes) > 0:
            continue
        for key, step in changes.items():
            q = counts.get(key, 0) + step
            if q:
                counts[key] = q
            else:
                counts.pop(key, None)
        cols[e], cols[f] = cols[f], cols[e]
        keys[e], keys[f] = new_e, new_f
    return None


@dataclass(frozen=True)
class CodeRates:
    """Nominal design rates plus the effective rate from actual GF(2) ranks."""

    r_G: float
    r_H: float
    nominal: float
    effective: float


class CompoundCode:
    """Assembled (G, H) pair with lower-check partition and cached null bases.

    ``H1`` is the first ``k1`` rows of H and ``H2`` the remaining ``k2``;
    the codeword set is ``{G y : H y = 0}``.  At small sizes H may be
    row-rank-deficient, so the effective rate (from the rank of G restricted
    to the null space of H) is reported alongside the nominal one.
    """

    def __init__(self, G: SparseBitMatrix, H: SparseBitMatrix, k1: int,
                 params: EnsembleParams | None = None):
        if G.cols != H.cols:
            raise ValueError("G and H must share the information-bit dimension")
        if not 0 <= k1 <= H.rows:
            raise ValueError(f"k1 must lie in [0, {H.rows}]")
        self.G = G
        self.H = H
        self.k1 = int(k1)
        self.params = params
        self.H1 = H.row_slice(0, k1)
        self.H2 = H.row_slice(k1, H.rows)
        self.null_basis_H = null_space_basis(H)
        self.null_basis_H1 = (self.null_basis_H if k1 == H.rows
                              else null_space_basis(self.H1))
        self.rates = self._compute_rates()

    @property
    def n(self) -> int:
        return self.G.rows

    @property
    def m(self) -> int:
        return self.G.cols

    @property
    def k(self) -> int:
        return self.H.rows

    @property
    def k2(self) -> int:
        return self.H.rows - self.k1

    def _compute_rates(self) -> CodeRates:
        r_G = self.m / self.n
        r_H = 1.0 - self.k / self.m
        effective = image_log2_size(self.G, self.null_basis_H) / self.n
        return CodeRates(r_G=r_G, r_H=r_H, nominal=r_G * r_H, effective=effective)

    def __repr__(self) -> str:
        return (f"CompoundCode(n={self.n}, m={self.m}, k={self.k}, "
                f"k1={self.k1}, k2={self.k2})")


def image_log2_size(G: SparseBitMatrix, basis: list[BitVector]) -> int:
    """log2 of the number of distinct G*y over y in span(basis)."""
    if not basis:
        return 0
    images = SparseBitMatrix(len(basis), G.rows,
                             [matvec(G, b).support() for b in basis])
    return len(_rref(_pack(images), G.rows))


def assemble(params: EnsembleParams, k1: int | None = None,
             rng: np.random.Generator | None = None) -> CompoundCode:
    """Sample G then H from ``params`` (in that order) and assemble the code.

    With ``rng`` omitted a fresh PCG64 stream is seeded from ``params.seed``,
    so identical params give bit-identical matrices.
    """
    k1 = params.k if k1 is None else k1
    if rng is None:
        rng = new_rng(params.seed)
    G = sample_ldgm(params.n, params.m, params.d_top, rng)
    H = sample_regular_ldpc(params.m, params.k, params.dv, params.dc_prime, rng)
    return CompoundCode(G, H, k1, params=params)


@dataclass
class Coset:
    """One member of the nested partition: ``y0 XOR span(basis)``.

    ``feasible`` is False when no information word satisfies
    ``H1 y = 0, H2 y = syndrome`` (possible when H2 restricted to the null
    space of H1 is rank-deficient); that is an explicit status, not an error.
    """

    feasible: bool
    y0: BitVector | None
    basis: list[BitVector]
    syndrome: BitVector


def coset_code(code: CompoundCode, m_bits: BitVector) -> Coset:
    """Coset of the nested partition selected by the H2-syndrome ``m_bits``."""
    if m_bits.length != code.k2:
        raise ValueError(f"syndrome length {m_bits.length} != k2 = {code.k2}")
    b = concat(BitVector.zeros(code.k1), m_bits)
    y0 = solve_particular(code.H, b)
    return Coset(feasible=y0 is not None, y0=y0,
                 basis=code.null_basis_H, syndrome=m_bits)


def coset_from_solution(code: CompoundCode, y: BitVector) -> Coset:
    """Coset containing a known solution ``y`` with ``H1 y = 0`` (no solve needed)."""
    return Coset(feasible=True, y0=y, basis=code.null_basis_H,
                 syndrome=matvec(code.H2, y))


# ---------------------------------------------------------------------------
# serialization

_FORMAT = "compound-code-v1"


def save_code(code: CompoundCode, path: str | Path) -> None:
    """Write a JSON container (params, partition sizes, both matrices in
    text form); loading it back reproduces the code bit-exactly."""
    doc = {
        "format": _FORMAT,
        "params": code.params.to_dict() if code.params else None,
        "k1": code.k1,
        "k2": code.k2,
        "G": matrix_to_text(code.G),
        "H": matrix_to_text(code.H),
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True))


def load_code(path: str | Path) -> CompoundCode:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != _FORMAT:
        raise ValueError(f"unrecognized code container format: {doc.get('format')!r}")
    params = EnsembleParams(**doc["params"]) if doc["params"] else None
    code = CompoundCode(matrix_from_text(doc["G"]), matrix_from_text(doc["H"]),
                        doc["k1"], params=params)
    if code.k2 != doc["k2"]:
        raise ValueError(f"inconsistent partition sizes in container: "
                         f"k2={doc['k2']} but H has {code.k} rows with k1={code.k1}")
    return code
