"""Scan driver tests: sweeps, profiles, dispersive decay, bound checks."""

import io
import math

import numpy as np
import pytest

from catlab.arith import CatMatrix, matrix_power, quantum_period, validate_catmap
from catlab.experiments import (
    DISPERSIVE_FIELDS,
    SCAN_FIELDS,
    ScanRecord,
    dispersive_scan,
    eigenfunction_profile,
    read_scan_csv,
    scan_supnorms,
    scan_records_to_json,
    short_period_set,
    verify_bounds,
    write_dispersive_csv,
    write_profile_csv,
    write_scan_csv,
)

A = CatMatrix(2, 3, 1, 2)
LAM = validate_catmap(2, 3, 1, 2).lam


@pytest.fixture(scope="module")
def records_3_31():
    return scan_supnorms(A, 3, 31)


class TestShortPeriodSet:
    def test_reference_set(self):
        assert short_period_set(A, 1000) == {5: 3, 19: 5, 71: 7, 265: 9, 989: 11}

    def test_empty_below_first(self):
        assert short_period_set(A, 4) == {}


class TestScan:
    def test_single_point(self):
        records = scan_supnorms(A, 5, 5)
        assert len(records) == 1
        record = records[0]
        assert record.N == 5
        assert record.n_N == 3
        assert record.is_bdb
        assert record.error is None
        assert record.max_supnorm >= math.sqrt(2 / 5) - 1e-12
        assert record.lower_env == pytest.approx((2 * math.log(5, LAM)) ** -0.5)
        assert record.upper_env == pytest.approx(math.log(5, LAM) ** -0.5)
        assert record.trivial_lb == pytest.approx(5**-0.5)

    def test_sweep_structure(self, records_3_31):
        records = records_3_31
        assert [r.N for r in records] == list(range(3, 32, 2))
        assert all(r.error is None for r in records)
        flagged = {r.N for r in records if r.is_bdb}
        assert flagged == {5, 19}
        for r in records:
            assert r.trivial_lb - 1e-12 <= r.max_supnorm <= 1.0 + 1e-12
            assert 0 <= r.witness_index < r.N
            assert 1 <= r.cluster_dim <= r.N
        envelopes = [(r.lower_env, r.upper_env) for r in records]
        assert all(x > y for (x, _), (y, _) in zip(envelopes, envelopes[1:]))
        assert all(x > y for (_, x), (_, y) in zip(envelopes, envelopes[1:]))

    def test_deterministic_and_job_independent(self, records_3_31):
        again = scan_supnorms(A, 3, 31)
        assert again == records_3_31
        threaded = scan_supnorms(A, 3, 31, jobs=3)
        assert threaded == records_3_31

    def test_short_period_lower_bound(self, records_3_31):
        for r in records_3_31:
            if r.is_bdb:
                assert r.max_supnorm >= (2 * math.log(r.N, LAM) + 1) ** -0.5 - 1e-9

    def test_even_dimension_error_row(self):
        records = scan_supnorms(A, 4, 4, odd_only=False)
        assert len(records) == 1
        assert records[0].error is not None
        assert records[0].max_supnorm is None
        assert records[0].N == 4

    def test_even_dimension_with_override(self):
        records = scan_supnorms(A, 4, 4, odd_only=False, allow_even=True)
        assert records[0].error is None
        assert records[0].n_N == quantum_period(A, 4).n_N

    def test_rejects_bad_ranges(self):
        with pytest.raises(ValueError):
            scan_supnorms(A, 9, 3)
        with pytest.raises(ValueError):
            scan_supnorms(A, 0, 3)
        with pytest.raises(ValueError):
            scan_supnorms(A, 3, 9, jobs=0)
        with pytest.raises(ValueError):
            scan_supnorms(CatMatrix(1, 0, 0, 1), 3, 9)

    def test_upper_envelope_mostly_holds(self, upper_surrogate_sweep):
        # beyond N = 50 the sweep stays under (log_lambda N)^-1/2 for at
        # least 95% of moduli; the short-period spikes are the exceptions
        points = [p for p in upper_surrogate_sweep.points if p.N <= 599]
        below = [p for p in points if p.max_supnorm <= p.upper_env]
        assert len(below) / len(points) >= 0.95


class TestProfile:
    def test_witness_profile(self):
        profile = eigenfunction_profile(A, 19)
        assert profile.shape == (19,)
        assert float(np.sum(profile**2)) == pytest.approx(1.0, abs=1e-10)
        assert profile.max() >= 19**-0.5

    def test_matches_scan_maximum(self):
        profile = eigenfunction_profile(A, 5)
        record = scan_supnorms(A, 5, 5)[0]
        assert float(profile.max()) == pytest.approx(record.max_supnorm, abs=1e-10)


class TestDispersive:
    def test_scalar_power_at_period(self):
        records = dispersive_scan(A, [5], 3)
        assert [r.j for r in records] == [1, 2, 3]
        last = records[-1]
        # the third power is a unit scalar, so its largest entry is 1
        assert last.norm_1_inf == pytest.approx(1.0, abs=1e-9)
        assert all(r.error is None for r in records)

    def test_bounds_hold(self):
        records = dispersive_scan(A, [15, 33], 12)
        for r in records:
            b_j = matrix_power(A, r.j).b
            assert r.bound == pytest.approx(math.sqrt(abs(b_j) / r.N))
            assert r.norm_1_inf <= r.bound + 1e-8

    def test_rejects_even_or_empty(self):
        with pytest.raises(ValueError):
            dispersive_scan(A, [4], 5)
        with pytest.raises(ValueError):
            dispersive_scan(A, [5], 0)


class TestVerifyBounds:
    def test_lower_bound_on_flagged_records(self, records_3_31):
        report = verify_bounds(records_3_31, eps=0.1)
        assert report.lower_testable
        assert {c.N for c in report.lower} == {5, 19}
        assert all(c.ok for c in report.lower)
        assert report.lower_onset == 5

    def test_upper_checks_cover_all_records(self, records_3_31):
        report = verify_bounds(records_3_31, eps=0.5)
        assert len(report.upper) == len(records_3_31)
        for check in report.upper:
            record = next(r for r in records_3_31 if r.N == check.N)
            assert check.threshold == pytest.approx(
                record.upper_env / math.sqrt(0.5)
            )
            assert check.ok == (check.value <= check.threshold)
        assert report.upper_first_half_pass is not None

    def test_not_testable_without_flagged_records(self):
        records = scan_supnorms(A, 7, 17)
        report = verify_bounds(records, eps=0.1)
        assert not report.lower_testable
        assert report.lower_onset is None

    def test_rejects_bad_eps(self, records_3_31):
        with pytest.raises(ValueError):
            verify_bounds(records_3_31, eps=0.0)
        with pytest.raises(ValueError):
            verify_bounds(records_3_31, eps=1.0)

    def test_onset_logic(self):
        def rec(N, value, bdb=False):
            return ScanRecord(
                N=N,
                n_N=1,
                max_supnorm=value,
                lower_env=0.5,
                upper_env=0.4,
                trivial_lb=0.1,
                is_bdb=bdb,
                witness_index=0,
                cluster_dim=1,
            )

        # upper threshold at eps=0.5: 0.4/sqrt(0.5) ~ 0.5657
        rows = [rec(3, 0.9), rec(5, 0.2), rec(7, 0.3), rec(9, 0.2)]
        report = verify_bounds(rows, eps=0.5)
        assert report.upper_onset == 5
        rows[-1] = rec(9, 0.99)
        report = verify_bounds(rows, eps=0.5)
        assert report.upper_onset is None


class TestSerialization:
    def test_scan_csv_header_and_rows(self, records_3_31):
        fh = io.StringIO()
        write_scan_csv(records_3_31, fh)
        lines = fh.getvalue().splitlines()
        assert lines[0] == ",".join(SCAN_FIELDS)
        assert lines[0] == (
            "N,n_N,max_supnorm,lower_env,upper_env,trivial_lb,"
            "is_bdb,witness_index,cluster_dim"
        )
        assert len(lines) == 1 + len(records_3_31)
        first = lines[1].split(",")
        assert first[0] == "3"
        assert first[6] in ("true", "false")

    def test_scan_csv_round_trip(self, records_3_31):
        fh = io.StringIO()
        write_scan_csv(records_3_31, fh)
        fh.seek(0)
        parsed = read_scan_csv(fh)
        assert parsed == list(records_3_31)

    def test_error_row_round_trip(self):
        records = scan_supnorms(A, 4, 4, odd_only=False)
        fh = io.StringIO()
        write_scan_csv(records, fh)
        fh.seek(0)
        parsed = read_scan_csv(fh)
        assert parsed[0].max_supnorm is None
        assert parsed[0].error is not None

    def test_scan_json_fields(self, records_3_31):
        payload = scan_records_to_json(records_3_31)
        assert set(payload[0]) == set(SCAN_FIELDS)
        assert payload[0]["N"] == 3

    def test_dispersive_csv(self):
        records = dispersive_scan(A, [5], 2)
        fh = io.StringIO()
        write_dispersive_csv(records, fh)
        lines = fh.getvalue().splitlines()
        assert lines[0] == ",".join(DISPERSIVE_FIELDS) == "N,j,norm_1_inf,bound"
        assert len(lines) == 3

    def test_profile_csv(self):
        fh = io.StringIO()
        write_profile_csv(np.array([0.5, 0.25]), fh)
        assert fh.getvalue() == "i,abs_u_i\n0,0.5\n1,0.25\n"

    def test_rejects_bad_header(self):
        with pytest.raises(ValueError):
            read_scan_csv(io.StringIO("bogus\n1,2\n"))
