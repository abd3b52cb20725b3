import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import bell_model, commutation_matrices, random_c
from stabneg import (
    CommutationMatrix,
    GuardError,
    ModelError,
    SectorTable,
    analyze,
    binegativity_fwht,
    binegativity_spectrum,
    boundary_reduced_spectrum,
    build_2d_torus,
    entanglement_negativity,
    fwht,
    model_tables,
    negativity_spectrum,
    ppt_report,
    realize_from_c,
    sign_psi,
    trace_norm,
)
from stabneg.spectrum import check_table_size, is_nonnegative, table_from_csv, table_from_dict, table_to_csv, table_to_dict

BELL_C = CommutationMatrix([[0, 1], [1, 0]])


def block_c(*blocks):
    k = sum(b.k for b in blocks)
    bits = np.zeros((k, k), dtype=np.uint8)
    off = 0
    for b in blocks:
        bits[off:off + b.k, off:off + b.k] = b.bits
        off += b.k
    return CommutationMatrix(bits)


def test_sign_psi_examples():
    assert sign_psi(0, BELL_C) == 1
    assert sign_psi(0b11, BELL_C) == -1
    path = CommutationMatrix([[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    assert sign_psi(0b111, path) == 1


def test_bell_negativity_table():
    f = negativity_spectrum(BELL_C, [1.0, 1.0], 2)
    assert np.array_equal(f.values, [2, 2, 2, -2])
    assert np.allclose(f.eigenvalues(), [-0.5, 0.5, 0.5, 0.5])


def test_naive_and_fast_negativity_agree():
    rng = np.random.default_rng(3)
    for k in (1, 4, 7):
        c = random_c(rng, k)
        t = rng.uniform(-1, 1, k)
        a = negativity_spectrum(c, t, k, method="naive").values
        b = negativity_spectrum(c, t, k, method="fwht").values
        assert np.allclose(a, b, rtol=0, atol=1e-12 * 2**k)


def test_zero_coupling_is_flat():
    c = random_c(np.random.default_rng(0), 6)
    assert np.array_equal(negativity_spectrum(c, np.zeros(6), 6).values, np.ones(64))


def test_coupling_out_of_range():
    with pytest.raises(ModelError):
        negativity_spectrum(BELL_C, [1.2, 0.0], 2)


def test_bell_binegativity():
    f_t = negativity_spectrum(BELL_C, [1, 1], 2)
    for b in (binegativity_spectrum(f_t, f_t), binegativity_fwht(f_t, f_t)):
        assert np.array_equal(b.values, [8, 8, 8, 8])
        assert np.allclose(b.physical(), 0.5)


def test_binegativity_infinite_temperature():
    c = random_c(np.random.default_rng(1), 5)
    f_0 = negativity_spectrum(c, np.zeros(5), 5)
    f_1 = negativity_spectrum(c, np.ones(5), 5)
    b = binegativity_fwht(f_0, f_1)
    assert np.allclose(b.values, 32)
    assert np.allclose(b.physical(), 2.0**-5)


def test_binegativity_shape_mismatch():
    with pytest.raises(ModelError):
        binegativity_spectrum(SectorTable(2, np.ones(4), 2), SectorTable(3, np.ones(8), 3))
    with pytest.raises(ModelError):
        binegativity_fwht(SectorTable(2, np.ones(4), 2), SectorTable(2, np.ones(4), 3))


def test_fwht_examples():
    assert np.array_equal(fwht([1, 0]), [1, 1])
    assert np.array_equal(fwht(np.eye(8)[0]), np.ones(8))
    x = np.random.default_rng(2).standard_normal(8)
    assert np.allclose(fwht(fwht(x)), 8 * x)
    with pytest.raises(ValueError):
        fwht(np.ones(6))


def test_fwht_delta_and_ones():
    rng = np.random.default_rng(4)
    f_t = SectorTable(5, rng.standard_normal(32), 5)
    delta = SectorTable(5, np.eye(32)[0], 5)
    assert np.allclose(binegativity_fwht(f_t, delta).values, np.abs(f_t.values))
    ones = SectorTable(5, np.ones(32), 5)
    assert np.allclose(binegativity_fwht(ones, ones).values, 32)


@pytest.mark.parametrize("k", [2, 6, 10, 14])
def test_fwht_matches_naive(k):
    rng = np.random.default_rng(k)
    f_t = SectorTable(k, rng.standard_normal(1 << k), k)
    f_1 = SectorTable(k, rng.standard_normal(1 << k), k)
    naive = binegativity_spectrum(f_t, f_1).values
    fast = binegativity_fwht(f_t, f_1).values
    assert np.max(np.abs(naive - fast)) <= 1e-9 * np.max(np.abs(naive))


def test_entanglement_negativity_examples():
    f = negativity_spectrum(BELL_C, [1, 1], 2)
    assert entanglement_negativity(f) == pytest.approx(1.0, abs=1e-15)
    assert entanglement_negativity(f, "e") == pytest.approx(math.log(2), abs=1e-15)
    c = random_c(np.random.default_rng(5), 4)
    assert entanglement_negativity(negativity_spectrum(c, np.zeros(4), 4)) == 0.0
    two = block_c(BELL_C, BELL_C)
    assert entanglement_negativity(negativity_spectrum(two, np.ones(4), 4)) == pytest.approx(2.0, abs=1e-14)


def test_bell_ppt_report():
    rep = analyze(bell_model())
    assert rep.e_n == pytest.approx(1.0, abs=1e-15)
    assert rep.lambda_min == pytest.approx(0.5, abs=1e-15)
    assert rep.log_z == pytest.approx(1.0, abs=1e-15)
    assert rep.cost_equals_negativity
    doc = json.loads(rep.to_json())
    assert doc["log_base"] == "2" and doc["schema_version"] == 1


def test_zero_coupling_report():
    rep = analyze(bell_model(0.0))
    assert rep.e_n == 0.0 and rep.log_z == 0.0 and rep.cost_equals_negativity


def test_report_negative_sector_raises_log_z():
    f_t, _, b = model_tables(build_2d_torus(2, 0.7, 0.7).model)
    bad = b.with_values(np.where(np.arange(b.values.size) == 3, -np.abs(b.values), b.values))
    rep = ppt_report(f_t, bad)
    assert rep.lambda_min < 0 and not rep.cost_equals_negativity
    assert rep.log_z > rep.e_n
    assert rep.z_rho == pytest.approx(rep.trace_norm + 2**8 * -rep.lambda_min, rel=1e-14)


def test_nonnegativity_tolerance_is_relative():
    b = SectorTable(1, [1e6, -1e-2], 1, "binegativity")
    assert is_nonnegative(b, 1e-9) is False
    assert is_nonnegative(b, 1e-4) is True


def test_full_table_guard():
    with pytest.raises(GuardError):
        check_table_size(27)


def test_boundary_reduction_examples(bell):
    red = boundary_reduced_spectrum(bell)
    f_t, _, b = model_tables(bell)
    assert red.bulk == () and np.array_equal(red.table.values, f_t.values)
    assert np.array_equal(red.binegativity.values, b.values)
    iso = realize_from_c(CommutationMatrix.zeros(3), couplings=[0.3, -0.2, 0.9])
    red0 = boundary_reduced_spectrum(iso)
    assert red0.table.k == 0 and red0.table.values.size == 1 and red0.nonnegative()


@pytest.mark.parametrize("L", [2, 3])
def test_boundary_reduction_torus(L):
    m = build_2d_torus(L, 0.6, 0.8).model
    f_t, _, b = model_tables(m)
    red = boundary_reduced_spectrum(m)
    assert np.allclose(red.expand_negativity(), f_t.values, atol=1e-12 * 2**m.k)
    assert np.allclose(red.expand_binegativity(), b.values, atol=1e-10 * np.max(np.abs(b.values)))
    assert np.array_equal(np.sign(np.round(red.expand_binegativity(), 6)), np.sign(np.round(b.values, 6)))


def test_table_csv_and_json_round_trip():
    f = negativity_spectrum(random_c(np.random.default_rng(7), 5), np.random.default_rng(8).uniform(-1, 1, 5), 9)
    back = table_from_csv(table_to_csv(f))
    assert back.k == 5 and back.n_qubits == 9 and np.array_equal(back.values, f.values)
    again = table_from_dict(json.loads(json.dumps(table_to_dict(f))))
    assert np.array_equal(again.values, f.values)
    assert table_to_csv(f).splitlines()[2].startswith("00000,")


# -- properties ---------------------------------------------------------------------------


@settings(max_examples=100, deadline=None)
@given(commutation_matrices(max_k=10), st.data())
def test_trace_invariant(c, data):
    t = data.draw(st.lists(st.floats(-1, 1), min_size=c.k, max_size=c.k))
    f = negativity_spectrum(c, t, c.k)
    assert abs(np.sum(f.values) - 2**c.k) <= 1e-12 * 2**c.k


@settings(max_examples=60, deadline=None)
@given(commutation_matrices(max_k=7), st.data())
def test_change_of_variables(c, data):
    t = data.draw(st.lists(st.floats(-1, 1), min_size=c.k, max_size=c.k))
    f_t = np.abs(negativity_spectrum(c, t, c.k).values)
    f_1 = negativity_spectrum(c, np.ones(c.k), c.k).values
    n = 1 << c.k
    idx = np.arange(n)
    lhs = np.array([np.sum(f_t[idx ^ g] * f_1) for g in range(n)])
    rhs = np.array([np.sum(f_t * f_1[idx ^ g]) for g in range(n)])
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-10 * max(1.0, np.max(np.abs(lhs))))


@settings(max_examples=60, deadline=None)
@given(commutation_matrices(max_k=7), st.data())
def test_permutation_invariance(c, data):
    k = c.k
    t = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=k, max_size=k)))
    perm = data.draw(st.permutations(range(k)))
    m = realize_from_c(c, couplings=t)
    f, _, b = model_tables(m)
    cp = c.permuted(perm)
    fp = negativity_spectrum(cp, t[list(perm)], m.n_qubits)
    # new index bit j <-> old generator perm[j]
    remap = np.zeros(1 << k, dtype=np.int64)
    for new in range(1 << k):
        old = 0
        for j, p in enumerate(perm):
            if new >> j & 1:
                old |= 1 << p
        remap[new] = old
    assert np.allclose(fp.values, f.values[remap], atol=1e-12 * 2**k)
    f1p = negativity_spectrum(cp, np.ones(k), m.n_qubits)
    bp = binegativity_fwht(fp, f1p)
    assert np.allclose(bp.values, b.values[remap], atol=1e-9 * max(1.0, np.max(np.abs(b.values))))
    assert trace_norm(fp) == pytest.approx(trace_norm(f), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(commutation_matrices(max_k=5), commutation_matrices(max_k=5), st.data())
def test_negativity_additive_over_blocks(c1, c2, data):
    t1 = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=c1.k, max_size=c1.k)))
    t2 = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=c2.k, max_size=c2.k)))
    e1 = entanglement_negativity(negativity_spectrum(c1, t1, c1.k))
    e2 = entanglement_negativity(negativity_spectrum(c2, t2, c2.k))
    e12 = entanglement_negativity(negativity_spectrum(block_c(c1, c2), np.concatenate([t1, t2]), c1.k + c2.k))
    assert e12 == pytest.approx(e1 + e2, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.data())
def test_zero_c_is_positive(k, data):
    t = data.draw(st.lists(st.floats(-1, 1), min_size=k, max_size=k))
    c = CommutationMatrix.zeros(k)
    f_t = negativity_spectrum(c, t, k)
    b = binegativity_fwht(f_t, negativity_spectrum(c, np.ones(k), k))
    assert np.all(f_t.values >= -1e-15) and np.all(b.values >= -1e-12 * np.max(np.abs(b.values)))
