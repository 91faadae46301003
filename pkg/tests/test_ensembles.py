"""Ensemble sampler and compound-code assembly tests."""

import itertools
import math

import pytest

from compoundcode.ensembles import (
    CompoundCode,
    EnsembleParams,
    assemble,
    coset_code,
    load_code,
    new_rng,
    sample_ldgm,
    sample_regular_ldpc,
    save_code,
    trial_rng,
)
from compoundcode.gf2 import BitVector, matvec, rank


# ---------------------------------------------------------------------------
# LDGM sampler


def test_ldgm_row_support_parity():
    # Duplicates cancel in pairs, so support size keeps the parity of d_top.
    G = sample_ldgm(4, 6, 3, new_rng(0))
    for sup in G.row_support:
        assert sup.size in (1, 3)


def test_ldgm_determinism():
    a = sample_ldgm(20, 30, 4, new_rng(123))
    b = sample_ldgm(20, 30, 4, new_rng(123))
    assert a == b


def test_ldgm_birthday_collision_rate():
    # Fraction of rows with a repeated draw among 4 draws from m bins.
    n, m, d = 10_000, 10_000, 4
    G = sample_ldgm(n, m, d, new_rng(42))
    short = sum(sup.size < d for sup in G.row_support) / n
    p_collision = 1.0 - (m - 1) * (m - 2) * (m - 3) / m ** 3
    sigma = math.sqrt(p_collision * (1 - p_collision) / n)
    assert abs(short - p_collision) < 4 * sigma


# ---------------------------------------------------------------------------
# LDPC sampler


def test_ldpc_exact_degrees():
    H = sample_regular_ldpc(6, 3, 3, 6, new_rng(1))
    dense = H.to_dense()
    assert (dense.sum(axis=0) == 3).all()
    assert (dense.sum(axis=1) == 6).all()


def test_ldpc_edge_count_gate():
    sample_regular_ldpc(8, 4, 3, 6, new_rng(2))  # 24 == 24, accepted
    with pytest.raises(ValueError):
        sample_regular_ldpc(8, 3, 3, 6, new_rng(2))  # 24 != 18


def test_ldpc_simple_over_many_samples():
    rng = new_rng(3)
    for _ in range(1000):
        H = sample_regular_ldpc(8, 4, 2, 4, rng)
        dense = H.to_dense()
        assert dense.max() <= 1
        assert (dense.sum(axis=0) == 2).all()
        assert (dense.sum(axis=1) == 4).all()


def test_ldpc_determinism():
    assert sample_regular_ldpc(12, 6, 3, 6, new_rng(9)) == \
        sample_regular_ldpc(12, 6, 3, 6, new_rng(9))


# ---------------------------------------------------------------------------
# params


def test_params_edge_consistency():
    with pytest.raises(ValueError):
        EnsembleParams(n=10, m=8, k=4, d_top=3, dv=3, dc_prime=5, seed=0)
    EnsembleParams(n=10, m=8, k=4, d_top=3, dv=3, dc_prime=6, seed=0)


def test_params_pure_ldgm_requires_zero_dv():
    EnsembleParams(n=10, m=8, k=0, d_top=3, dv=0, dc_prime=0, seed=0)
    with pytest.raises(ValueError):
        EnsembleParams(n=10, m=8, k=0, d_top=3, dv=3, dc_prime=6, seed=0)


# ---------------------------------------------------------------------------
# assembly


def desk_params(seed=0):
    return EnsembleParams(n=24, m=16, k=8, d_top=4, dv=3, dc_prime=6, seed=seed)


def test_assemble_nominal_rate():
    code = assemble(desk_params())
    assert code.rates.r_G == pytest.approx(16 / 24)
    assert code.rates.r_H == pytest.approx(0.5)
    assert code.rates.nominal == pytest.approx(1 / 3)


def test_assemble_trivial_partition():
    code = assemble(desk_params(), k1=8)
    assert code.k2 == 0
    assert code.null_basis_H1 is code.null_basis_H


def test_assemble_pure_ldgm():
    params = EnsembleParams(n=12, m=8, k=0, d_top=3, dv=0, dc_prime=0, seed=5)
    code = assemble(params)
    assert code.rates.r_H == 1.0
    assert len(code.null_basis_H) == 8  # no checks: every y is admissible


def test_null_bases_check_against_matrices():
    code = assemble(desk_params(seed=2), k1=5)
    for b in code.null_basis_H:
        assert matvec(code.H, b).weight() == 0
    for b in code.null_basis_H1:
        assert matvec(code.H1, b).weight() == 0
    assert len(code.null_basis_H) == code.m - rank(code.H)


def test_full_null_space_nested_in_h1():
    code = assemble(desk_params(seed=3), k1=5)
    for b in code.null_basis_H:
        assert matvec(code.H1, b).weight() == 0


def test_effective_rate_bound():
    # effective <= nominal + rank-deficiency slack (k - rank H)/n
    for seed in range(8):
        code = assemble(desk_params(seed=seed))
        slack = (code.k - rank(code.H)) / code.n
        assert code.rates.effective <= code.rates.nominal + slack + 1e-12


def test_assemble_determinism():
    a = assemble(desk_params(seed=11), k1=4)
    b = assemble(desk_params(seed=11), k1=4)
    assert a.G == b.G and a.H == b.H


def test_trial_rng_streams_differ():
    x = trial_rng(7, 0).integers(0, 1 << 30)
    y = trial_rng(7, 1).integers(0, 1 << 30)
    z = trial_rng(7, 0).integers(0, 1 << 30)
    assert x == z and x != y


# ---------------------------------------------------------------------------
# cosets and the nested partition


def enumerate_null(code, basis):
    y = BitVector.zeros(code.m)
    out = {y.key(): y}
    for i in range(1, 1 << len(basis)):
        j = (i & -i).bit_length() - 1
        y = y ^ basis[j]
        out[y.key()] = y
    return out


def test_coset_zero_syndrome_is_base_subcode():
    code = assemble(EnsembleParams(n=20, m=12, k=6, d_top=3, dv=3,
                                   dc_prime=6, seed=4), k1=3)
    coset = coset_code(code, BitVector.zeros(code.k2))
    assert coset.feasible
    assert matvec(code.H, coset.y0).weight() == 0


def test_partition_exhaustive_union_and_disjointness():
    code = assemble(EnsembleParams(n=20, m=12, k=6, d_top=3, dv=3,
                                   dc_prime=6, seed=8), k1=3)
    h1_null = set()
    y = BitVector.zeros(code.m)
    for i, b in enumerate(_gray_iter(code.null_basis_H1, code.m)):
        h1_null.add(b.key())
    seen = {}
    total = 0
    for bits in itertools.product((0, 1), repeat=code.k2):
        m_bits = BitVector.from_bits(bits)
        coset = coset_code(code, m_bits)
        if not coset.feasible:
            continue
        members = {v.key() for v in _gray_iter(coset.basis, code.m, coset.y0)}
        for key in members:
            assert key not in seen, "cosets overlap"
            seen[key] = bits
        total += len(members)
        # every member satisfies the defining constraints
        for v in _gray_iter(coset.basis, code.m, coset.y0):
            assert matvec(code.H1, v).weight() == 0
            assert matvec(code.H2, v) == m_bits
    assert total == len(h1_null)
    assert set(seen) == h1_null


def _gray_iter(basis, length, y0=None):
    y = BitVector.zeros(length) if y0 is None else y0
    yield y
    for i in range(1, 1 << len(basis)):
        j = (i & -i).bit_length() - 1
        y = y ^ basis[j]
        yield y


def test_distinct_syndromes_give_disjoint_cosets():
    code = assemble(EnsembleParams(n=16, m=8, k=4, d_top=3, dv=3,
                                   dc_prime=6, seed=10), k1=2)
    a = coset_code(code, BitVector.from_string("01"))
    b = coset_code(code, BitVector.from_string("10"))
    if a.feasible and b.feasible:
        mem_a = {v.key() for v in _gray_iter(a.basis, code.m, a.y0)}
        mem_b = {v.key() for v in _gray_iter(b.basis, code.m, b.y0)}
        assert not (mem_a & mem_b)


def test_infeasible_coset_reported():
    # All-ones H2 row restricted to null(H1) can miss odd syndromes.
    from compoundcode.gf2 import SparseBitMatrix
    G = sample_ldgm(6, 4, 3, new_rng(0))
    H = SparseBitMatrix.from_rows(2, 4, [[0, 1], [0, 1]])
    code = CompoundCode(G, H, k1=1)
    infeasible = coset_code(code, BitVector.from_string("1"))
    assert not infeasible.feasible and infeasible.y0 is None


# ---------------------------------------------------------------------------
# serialization


def test_code_round_trip(tmp_path):
    code = assemble(desk_params(seed=21), k1=5)
    path = tmp_path / "code.json"
    save_code(code, path)
    again = load_code(path)
    assert again.G == code.G and again.H == code.H
    assert again.k1 == code.k1 and again.params == code.params
    save_code(again, tmp_path / "code2.json")
    assert (tmp_path / "code.json").read_text() == (tmp_path / "code2.json").read_text()
