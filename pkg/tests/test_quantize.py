"""Propagator and translation construction tests.

The decisive construction oracle is the exact intertwining of lattice
translations: it certifies the kernel formula and the basis phase
convention together, so most tests here lean on unitarity plus the
intertwining defect rather than on matrix entries. A small set of golden
entries freezes the phase convention itself.
"""

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catlab.arith import CatMatrix, matrix_power, quantum_period
from catlab.quantize import (
    CertificationError,
    Propagator,
    TrigPolynomial,
    build_propagator,
    egorov_defect,
    quantize_observable,
    read_matrix_binary,
    translation_matrix,
    write_matrix_csv,
    write_matrix_binary,
)

A = CatMatrix(2, 3, 1, 2)
A2 = CatMatrix(2, 1, 3, 2)


def test_golden_translation_phases():
    # frozen from the delta-comb derivation: basis vector j shifts to
    # (j+p) mod N with phase exp(i*pi*(p*q + 2*q*j)/N)
    T = translation_matrix(1, 1, 3).entries
    assert T[1, 0] == pytest.approx(np.exp(1j * np.pi / 3), abs=1e-14)
    assert T[2, 1] == pytest.approx(-1.0, abs=1e-14)
    assert T[0, 2] == pytest.approx(np.exp(-1j * np.pi / 3), abs=1e-14)


def test_golden_propagator_entries():
    M = build_propagator(A, 3).entries
    w = np.exp(2j * np.pi / 3)
    assert M[0, 0] == pytest.approx(1.0, abs=1e-13)
    assert M[1, 2] == pytest.approx(w, abs=1e-13)
    assert M[2, 1] == pytest.approx(w, abs=1e-13)
    assert abs(M[0, 1]) < 1e-13 and abs(M[1, 1]) < 1e-13


class TestTranslations:
    def test_zero_is_identity(self):
        assert np.allclose(translation_matrix(0, 0, 7).entries, np.eye(7))

    def test_full_lattice_shift_is_identity(self):
        for N in (3, 5, 8):
            assert np.allclose(translation_matrix(N, 0, N).entries, np.eye(N))
            assert np.allclose(translation_matrix(0, N, N).entries, np.eye(N))

    def test_diagonal_lattice_vector_sign(self):
        # translation by the integer vector (1, 1) acts as (-1)^N
        for N in (3, 4, 5, 8):
            expected = (-1.0) ** N * np.eye(N)
            assert np.allclose(translation_matrix(N, N, N).entries, expected)

    @pytest.mark.parametrize("N", [1, 2, 3, 5, 8, 13])
    def test_unitary_permutation_structure(self, N):
        T = translation_matrix(2, -3, N).entries
        assert np.abs(T.conj().T @ T - np.eye(N)).max() < 1e-12 * math.sqrt(N)
        moduli = np.abs(T)
        assert ((moduli > 1e-12).sum(axis=0) == 1).all()
        assert ((moduli > 1e-12).sum(axis=1) == 1).all()
        assert moduli.max() == pytest.approx(1.0, abs=1e-12)

    def test_commutator(self):
        for N in (3, 5, 8):
            left = translation_matrix(1, 0, N).entries @ translation_matrix(0, 1, N).entries
            right = translation_matrix(0, 1, N).entries @ translation_matrix(1, 0, N).entries
            assert np.allclose(left, np.exp(-2j * np.pi / N) * right, atol=1e-13)

    @given(
        st.integers(-7, 7),
        st.integers(-7, 7),
        st.integers(-7, 7),
        st.integers(-7, 7),
        st.integers(1, 12),
    )
    @settings(max_examples=80)
    def test_group_law(self, p, q, pp, qq, N):
        # composition picks up exp(i*pi*(q*pp - p*qq)/N)
        lhs = translation_matrix(p, q, N).entries @ translation_matrix(pp, qq, N).entries
        phase = np.exp(1j * np.pi * (q * pp - p * qq) / N)
        rhs = phase * translation_matrix(p + pp, q + qq, N).entries
        assert np.abs(lhs - rhs).max() < 1e-12

    def test_adjoint_is_inverse_translation(self):
        T = translation_matrix(3, 2, 7)
        assert np.allclose(T.entries.conj().T, translation_matrix(-3, -2, 7).entries)


class TestPropagator:
    @pytest.mark.parametrize("matrix", [A, A2])
    @pytest.mark.parametrize("N", [1, 3, 5, 7, 9, 15, 33])
    def test_certified_construction(self, matrix, N):
        prop = build_propagator(matrix, N)
        assert prop.unitarity_residual <= 1e-9 * math.sqrt(N)
        assert np.abs(prop.entries).max() <= math.sqrt(abs(matrix.b) / N) + 1e-9
        assert egorov_defect(prop) <= 1e-8

    def test_small_unitarity(self):
        M = build_propagator(A, 3).entries
        assert np.abs(M.conj().T @ M - np.eye(3)).max() < 1e-12

    def test_entry_bound_at_five(self):
        M = build_propagator(A, 5).entries
        assert np.abs(M).max() <= math.sqrt(3 / 5) + 1e-9
        assert math.sqrt(3 / 5) == pytest.approx(0.774597, abs=1e-6)

    @pytest.mark.parametrize("N,period", [(5, 3), (19, 5), (71, 7)])
    def test_short_period_scalar_power(self, N, period):
        prop = build_propagator(A, N)
        power = np.linalg.matrix_power(prop.entries, period)
        phase = power[0, 0] / abs(power[0, 0])
        assert abs(abs(power[0, 0]) - 1) < 1e-9
        assert np.abs(power - phase * np.eye(N)).max() < 1e-7

    def test_even_dimension_needs_override(self):
        with pytest.raises(ValueError, match="even"):
            build_propagator(A, 2)
        prop = build_propagator(A, 2, allow_even=True)
        assert prop.unitarity_residual <= 1e-9 * math.sqrt(2)

    def test_even_dimension_doubled_period(self):
        # at N=8 the order mod 8 is 4 but the quantum period is 8
        record = quantum_period(A, 8)
        prop = build_propagator(A, 8, allow_even=True)
        mid = np.linalg.matrix_power(prop.entries, record.T_N)
        assert np.abs(mid - mid[0, 0] * np.eye(8)).max() > 1e-3
        full = np.linalg.matrix_power(prop.entries, record.n_N)
        assert np.abs(full - full[0, 0] * np.eye(8)).max() < 1e-9

    def test_rejects_unquantizable(self):
        with pytest.raises(ValueError):
            build_propagator(CatMatrix(1, 0, 0, 1), 5)
        with pytest.raises(ValueError):
            build_propagator(CatMatrix(2, 1, 1, 1), 5)

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            build_propagator(A, 0)

    def test_certification_trips_on_impossible_tolerance(self):
        with pytest.raises(CertificationError, match="unitarity"):
            build_propagator(A, 5, unitarity_tol=1e-18)

    def test_h_matches_dimension(self):
        assert build_propagator(A, 5).h == pytest.approx(1 / (10 * math.pi))

    def test_defect_sensitive_to_perturbation(self):
        prop = build_propagator(A, 5)
        entries = prop.entries.copy()
        entries[2, 3] += 1e-3
        perturbed = Propagator(
            N=5, A=A, entries=entries, unitarity_residual=prop.unitarity_residual
        )
        assert egorov_defect(perturbed) > 1e-4

    def test_negative_b_matrix(self):
        # conjugate dynamics with b < 0: construction must still certify
        B = CatMatrix(2, -3, -1, 2)
        prop = build_propagator(B, 7)
        assert prop.unitarity_residual <= 1e-9 * math.sqrt(7)
        assert egorov_defect(prop) <= 1e-8

    def test_defect_at_figure_scale(self):
        prop = build_propagator(A, 989)
        assert egorov_defect(prop) <= 1e-8


class TestQuantizeObservable:
    def test_constant_is_identity(self):
        op = quantize_observable({(0, 0): 1.0}, 6)
        assert np.allclose(op, np.eye(6))

    def test_cosine_position(self):
        N = 7
        op = quantize_observable({(1, 0): 0.5, (-1, 0): 0.5}, N)
        expected = (
            translation_matrix(0, 1, N).entries + translation_matrix(0, -1, N).entries
        ) / 2
        assert np.allclose(op, expected)
        assert np.abs(op - op.conj().T).max() < 1e-14

    def test_real_polynomial_hermitian(self):
        coeffs = {
            (1, 2): 0.3 + 0.1j,
            (-1, -2): 0.3 - 0.1j,
            (2, -1): -0.2j,
            (-2, 1): 0.2j,
            (0, 0): 0.7,
        }
        op = quantize_observable(TrigPolynomial(coeffs, real=True), 9)
        assert np.abs(op - op.conj().T).max() < 1e-13

    def test_real_flag_validation(self):
        with pytest.raises(ValueError):
            TrigPolynomial({(1, 0): 1.0, (-1, 0): 0.5}, real=True)

    def test_linearity(self):
        rng = np.random.default_rng(7)
        N = 8
        keys = [(1, 0), (0, 1), (2, -1), (-1, 3)]
        f = {k: complex(*rng.normal(size=2)) for k in keys}
        g = {k: complex(*rng.normal(size=2)) for k in keys}
        alpha, beta = 1.7 - 0.3j, -0.8 + 2.1j
        combined = {k: alpha * f[k] + beta * g[k] for k in keys}
        direct = quantize_observable(combined, N)
        split = alpha * quantize_observable(f, N) + beta * quantize_observable(g, N)
        assert np.abs(direct - split).max() < 1e-12

    def test_norm_bounded_by_coefficient_mass(self):
        coeffs = {(1, 0): 0.5, (-1, 0): 0.5, (3, 2): 1.25j, (0, 1): -2.0}
        op = quantize_observable(coeffs, 11)
        mass = sum(abs(v) for v in coeffs.values())
        assert np.linalg.norm(op, 2) <= mass + 1e-12

    def test_exact_egorov_for_observables(self):
        # conjugation by the propagator composes the symbol with the map:
        # mode (m, n) goes to (a*m + c*n, b*m + d*n)
        N = 9
        prop = build_propagator(A, N)
        coeffs = {(1, 0): 0.8, (0, 1): -0.25j, (1, -2): 0.5 + 0.5j}
        op = quantize_observable(coeffs, N)
        composed = {
            (A.a * m + A.c * n, A.b * m + A.d * n): v for (m, n), v in coeffs.items()
        }
        lhs = prop.entries.conj().T @ op @ prop.entries
        rhs = quantize_observable(composed, N)
        assert np.abs(lhs - rhs).max() < 1e-12


class TestMatrixExport:
    def test_csv_layout(self):
        fh = io.StringIO()
        write_matrix_csv(np.array([[1 + 2j, 3j], [0.5, -1.0]]), fh)
        lines = fh.getvalue().splitlines()
        assert lines[0] == "1.0,2.0,0.0,3.0"
        assert lines[1] == "0.5,0.0,-1.0,0.0"

    def test_binary_round_trip(self):
        prop = build_propagator(A, 5)
        buf = io.BytesIO()
        write_matrix_binary(prop.entries, buf)
        raw = buf.getvalue()
        assert raw[:4] == b"CATM"
        assert int.from_bytes(raw[4:8], "little") == 5
        assert len(raw) == 16 + 16 * 25
        buf.seek(0)
        restored = read_matrix_binary(buf)
        assert np.array_equal(restored, prop.entries)

    def test_binary_rejects_bad_magic(self):
        with pytest.raises(ValueError):
            read_matrix_binary(io.BytesIO(b"NOPE" + b"\0" * 12))
