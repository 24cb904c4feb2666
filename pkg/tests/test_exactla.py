from __future__ import annotations

import random

import numpy as np
import pytest

from varcert.exactla import (
    FieldMatrix,
    MatrixFormatError,
    SizeGuardExceeded,
    dense_rank_oracle,
    dump_matrix,
    kernel_witness,
    load_matrix,
    rank,
    rref,
    _rref_float_blocked,
    _rref_int64,
    _rref_sparse,
)
from varcert.polyring import PrimeField, enumerate_monomials, parse_form, partial_derivatives

PRIMES = [5, 10007, 1048573, 67108859, (1 << 31) - 1, (1 << 62) - 57]


def rand_mat(rng, p, r, c, density):
    rows = [{j: rng.randrange(1, p) for j in range(c) if rng.random() < density}
            for _ in range(r)]
    return FieldMatrix.from_rows(p, c, rows)


def test_backends_agree_on_full_rref():
    rng = random.Random(20240401)
    for _ in range(80):
        p = rng.choice(PRIMES)
        r, c = rng.randrange(0, 15), rng.randrange(1, 15)
        m = rand_mat(rng, p, r, c, rng.choice([0.2, 0.6, 1.0]))
        ref = _rref_sparse(m)
        others = []
        if p <= 1 << 23:
            others.append(_rref_float_blocked(m))
        if p < 1 << 31:
            others.append(_rref_int64(m))
        for e in others:
            assert e.pivots == ref.pivots
            for k in range(e.rank):
                assert e.row_as_dict(k) == ref.row_as_dict(k)
        assert dense_rank_oracle(m) == ref.rank


def test_rref_invariant_under_row_shuffle():
    rng = random.Random(7)
    for _ in range(25):
        p = rng.choice([10007, 1048573])
        m = rand_mat(rng, p, rng.randrange(3, 12), rng.randrange(3, 12), 0.5)
        ref = rref(m)
        shuffled = list(m.rows)
        rng.shuffle(shuffled)
        e = rref(FieldMatrix(p, m.nrows, m.ncols, shuffled))
        assert e.pivots == ref.pivots
        for k in range(e.rank):
            assert e.row_as_dict(k) == ref.row_as_dict(k)


def test_rank_equals_transpose_rank():
    rng = random.Random(11)
    for _ in range(20):
        p = rng.choice([10007, 1048573])
        m = rand_mat(rng, p, rng.randrange(1, 12), rng.randrange(1, 12), 0.4)
        assert rank(m) == rank(m.transpose())


def test_low_rank_product_has_expected_rank():
    rng = random.Random(3)
    p = 1048573
    r, c, k = 40, 30, 12
    a = [[rng.randrange(p) for _ in range(k)] for _ in range(r)]
    b = [[rng.randrange(p) for _ in range(c)] for _ in range(k)]
    prod = [[sum(a[i][t] * b[t][j] for t in range(k)) % p for j in range(c)]
            for i in range(r)]
    m = FieldMatrix.from_dense(p, prod)
    assert rank(m) == k == dense_rank_oracle(m)
    w = kernel_witness(m)
    assert w is not None and any(w)


def test_fermat_quartic_ideal_matrix_rank():
    # rows are x_k * dF/dx_i for the Fermat quartic in four variables, in
    # the degree-4 monomial basis; 16 distinct monomials x_k*x_i^3 appear
    field = PrimeField(10007)
    f = parse_form("x0^4 + x1^4 + x2^4 + x3^4", 3, field)
    parts = partial_derivatives(f)
    mons1 = enumerate_monomials(3, 1)
    idx = {m: i for i, m in enumerate(enumerate_monomials(3, 4))}
    rows = []
    for m in mons1:
        for fi in parts:
            rows.append({idx[tuple(a + b for a, b in zip(m, mm))]: cc
                         for mm, cc in fi.terms.items()})
    mat = FieldMatrix.from_rows(10007, 35, rows)
    assert (mat.nrows, mat.ncols) == (16, 35)
    assert rank(mat) == 16 == dense_rank_oracle(mat)


def test_reduce_vector_properties():
    rng = random.Random(5)
    for p in [10007, (1 << 62) - 57]:
        m = rand_mat(rng, p, 8, 10, 0.6)
        e = rref(m)
        v = [rng.randrange(p) for _ in range(10)]
        w = [rng.randrange(p) for _ in range(10)]
        rv, rw = e.reduce_vector(v), e.reduce_vector(w)
        assert all(rv[j] == 0 for j in e.pivots)
        assert e.reduce_vector(rv) == rv
        s = e.reduce_vector([(a + b) % p for a, b in zip(v, w)])
        assert s == [(a + b) % p for a, b in zip(rv, rw)]
        for row in m.rows:
            dense = [row.get(j, 0) for j in range(10)]
            assert e.reduce_vector(dense) == [0] * 10


def test_reduce_block_matches_reduce_vector():
    rng = random.Random(6)
    m = rand_mat(rng, 1048573, 9, 12, 0.5)
    e = rref(m)
    block = np.array([[rng.randrange(1048573) for _ in range(12)] for _ in range(5)],
                     dtype=np.int64)
    red = e.reduce_block(block)
    for i in range(5):
        assert list(red[i]) == e.reduce_vector([int(x) for x in block[i]])


def test_kernel_witness_none_iff_full_column_rank():
    rng = random.Random(9)
    for _ in range(20):
        p = rng.choice([10007, (1 << 62) - 57])
        m = rand_mat(rng, p, rng.randrange(1, 10), rng.randrange(1, 10), 0.7)
        e = rref(m)
        w = kernel_witness(m, e)
        if e.rank == m.ncols:
            assert w is None
        else:
            assert w is not None
            assert all(x == 0 for x in m.mul_vector(w))
            assert any(w)


def test_kernel_witness_duplicate_columns():
    p = 10007
    m = FieldMatrix.from_dense(p, [[1, 2, 2], [3, 4, 4], [5, 6, 6]])
    w = kernel_witness(m)
    assert w is not None
    assert all(x == 0 for x in m.mul_vector(w))


def test_empty_and_degenerate_shapes():
    m = FieldMatrix.from_rows(7, 5, [])
    assert rank(m) == 0
    assert kernel_witness(m) is not None  # zero map, e_0 is in the kernel
    z = FieldMatrix.from_rows(7, 4, [{}, {}])
    assert rank(z) == 0


def test_oracle_size_guard():
    m = FieldMatrix(10007, 4000, 3000, [dict() for _ in range(4000)])
    with pytest.raises(SizeGuardExceeded):
        dense_rank_oracle(m)


def test_dump_load_roundtrip(tmp_path):
    rng = random.Random(13)
    m = rand_mat(rng, 1048573, 6, 9, 0.4)
    path = tmp_path / "mat.txt"
    dump_matrix(m, path)
    m2 = load_matrix(path)
    assert (m2.p, m2.nrows, m2.ncols) == (m.p, m.nrows, m.ncols)
    assert m2.rows == m.rows


@pytest.mark.parametrize("text", [
    "",
    "2 2\n",
    "a 2 7\n",
    "2 2 7\n0 0 0\n",
    "2 2 7\n0 0 9\n",
    "2 2 7\n0 5 1\n",
    "2 2 7\n0 0 1\n0 0 2\n",
    "2 2 7\n0 0\n",
])
def test_load_rejects_corrupted(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(MatrixFormatError):
        load_matrix(path)
