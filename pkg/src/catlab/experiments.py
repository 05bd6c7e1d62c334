"""Scan drivers: sup-norm sweeps, eigenfunction profiles, dispersive decay.

Each driver produces plain records with fixed CSV/JSON schemas so runs
are reproducible byte for byte. Failures of individual N are recorded as
error rows rather than aborting a sweep.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .arith import (
    CatMatrix,
    matrix_power,
    period_modulus,
    quantum_period,
    require_quantizable,
)
from .quantize import build_propagator
from .spectral import cluster_eigenvalues, eigendecompose, supnorm_summary

__all__ = [
    "ScanRecord",
    "DispersiveRecord",
    "BoundCheck",
    "BoundsReport",
    "SCAN_FIELDS",
    "DISPERSIVE_FIELDS",
    "PROFILE_FIELDS",
    "short_period_set",
    "scan_supnorms",
    "eigenfunction_profile",
    "dispersive_scan",
    "verify_bounds",
    "write_scan_csv",
    "read_scan_csv",
    "scan_records_to_json",
    "write_dispersive_csv",
    "dispersive_records_to_json",
    "write_profile_csv",
    "profile_to_json",
]

SCAN_FIELDS = (
    "N",
    "n_N",
    "max_supnorm",
    "lower_env",
    "upper_env",
    "trivial_lb",
    "is_bdb",
    "witness_index",
    "cluster_dim",
)
DISPERSIVE_FIELDS = ("N", "j", "norm_1_inf", "bound")
PROFILE_FIELDS = ("i", "abs_u_i")


@dataclass(frozen=True)
class ScanRecord:
    """One row of a sup-norm sweep.

    lower_env and upper_env are the (2*log_lambda N)^-1/2 and
    (log_lambda N)^-1/2 envelopes, trivial_lb is N^-1/2. Error rows carry
    the exception text in `error` and None in the computed fields.
    """

    N: int
    n_N: int | None
    max_supnorm: float | None
    lower_env: float
    upper_env: float
    trivial_lb: float
    is_bdb: bool
    witness_index: int | None
    cluster_dim: int | None
    error: str | None = None

    def to_dict(self) -> dict:
        data = {
            "N": self.N,
            "n_N": self.n_N,
            "max_supnorm": self.max_supnorm,
            "lower_env": self.lower_env,
            "upper_env": self.upper_env,
            "trivial_lb": self.trivial_lb,
            "is_bdb": self.is_bdb,
            "witness_index": self.witness_index,
            "cluster_dim": self.cluster_dim,
        }
        if self.error is not None:
            data["error"] = self.error
        return data


@dataclass(frozen=True)
class DispersiveRecord:
    """Norm of one propagator power against its dispersive bound.

    bound is sqrt(|b_j|/N) where b_j is the upper-right entry of the j-th
    map power; absent (None) when b_j = 0.
    """

    N: int
    j: int
    norm_1_inf: float | None
    bound: float | None
    error: str | None = None

    def to_dict(self) -> dict:
        data = {
            "N": self.N,
            "j": self.j,
            "norm_1_inf": self.norm_1_inf,
            "bound": self.bound,
        }
        if self.error is not None:
            data["error"] = self.error
        return data


def _envelopes(N: int, lam: float) -> tuple[float, float, float]:
    trivial = N ** -0.5
    if N < 2:
        return math.inf, math.inf, trivial
    log_lam = math.log(N, lam)
    return (2.0 * log_lam) ** -0.5, log_lam ** -0.5, trivial


def short_period_set(A: CatMatrix, n_max: int) -> dict[int, int]:
    """All short-period moduli N_k <= n_max mapped to their periods t_k."""
    result: dict[int, int] = {}
    k = 1
    while True:
        modulus = period_modulus(A, 2 * k + 1)
        if modulus > n_max:
            return result
        result[modulus] = 2 * k + 1
        k += 1


def _scan_single(
    A: CatMatrix,
    N: int,
    lam: float,
    bdb: dict[int, int],
    cluster_tol: float,
    unitarity_tol: float,
    allow_even: bool,
) -> ScanRecord:
    lower, upper, trivial = _envelopes(N, lam)
    is_bdb = N in bdb
    try:
        record = quantum_period(A, N)
        prop = build_propagator(
            A, N, allow_even=allow_even, unitarity_tol=unitarity_tol
        )
        report = cluster_eigenvalues(
            eigendecompose(prop), n=record.n_N, lam=lam, tol=cluster_tol
        )
        result = supnorm_summary(report)
        return ScanRecord(
            N=N,
            n_N=record.n_N,
            max_supnorm=result.value,
            lower_env=lower,
            upper_env=upper,
            trivial_lb=trivial,
            is_bdb=is_bdb,
            witness_index=result.witness_index,
            cluster_dim=result.cluster_dim,
        )
    except Exception as exc:  # error rows instead of aborting the sweep
        return ScanRecord(
            N=N,
            n_N=None,
            max_supnorm=None,
            lower_env=lower,
            upper_env=upper,
            trivial_lb=trivial,
            is_bdb=is_bdb,
            witness_index=None,
            cluster_dim=None,
            error=str(exc),
        )


def scan_supnorms(
    A: CatMatrix,
    n_min: int,
    n_max: int,
    odd_only: bool = True,
    jobs: int = 1,
    cluster_tol: float = 1e-7,
    unitarity_tol: float = 1e-9,
    allow_even: bool = False,
) -> list[ScanRecord]:
    """Sup-norm sweep over N in [n_min, n_max], odd N only by default.

    One record per N, ordered by N; per-N failures become error rows.
    jobs > 1 distributes the per-N work over a thread pool (the heavy
    lifting happens inside LAPACK, which releases the GIL); results are
    merged in N order, so the output is independent of jobs.
    """
    report = require_quantizable(A)
    if A.b == 0:
        raise ValueError("sup-norm scan requires b != 0")
    if report.lam is None:
        raise ValueError("envelope bounds require trace > 2")
    if n_min > n_max:
        raise ValueError("empty range [%d, %d]" % (n_min, n_max))
    if n_min < 1:
        raise ValueError("range must start at 1 or above")
    if jobs < 1:
        raise ValueError("jobs must be positive")
    lam = report.lam
    values = [N for N in range(n_min, n_max + 1) if (N % 2 == 1 or not odd_only)]
    bdb = short_period_set(A, n_max)

    def work(N: int) -> ScanRecord:
        return _scan_single(A, N, lam, bdb, cluster_tol, unitarity_tol, allow_even)

    if jobs == 1 or len(values) <= 1:
        return [work(N) for N in values]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(work, values))


def eigenfunction_profile(
    A: CatMatrix,
    N: int,
    cluster_tol: float = 1e-7,
    unitarity_tol: float = 1e-9,
    allow_even: bool = False,
) -> np.ndarray:
    """Coordinate moduli |u_i| of a maximal-sup-norm witness eigenfunction."""
    report = require_quantizable(A)
    record = quantum_period(A, N)
    prop = build_propagator(A, N, allow_even=allow_even, unitarity_tol=unitarity_tol)
    spectrum = cluster_eigenvalues(
        eigendecompose(prop), n=record.n_N, lam=report.lam, tol=cluster_tol
    )
    result = supnorm_summary(spectrum)
    profile = np.abs(result.witness)
    total = float(np.sum(profile**2))
    if abs(total - 1.0) > 1e-10:
        raise AssertionError("witness normalization drifted: %r" % total)
    return profile


def dispersive_scan(
    A: CatMatrix,
    N_list: Sequence[int],
    j_max: int,
    drift_tol: float = 1e-7,
    unitarity_tol: float = 1e-9,
) -> list[DispersiveRecord]:
    """Largest entry modulus of propagator powers M^j for 1 <= j <= j_max.

    Powers are built by repeated multiplication with a unitarity drift
    check at every step (a drift violation aborts that N with an error
    row and moves on). The comparison bound sqrt(|b_j|/N) comes from the
    exact integer power of the map, keeping the two sides of the check
    independent.
    """
    require_quantizable(A)
    if j_max < 1:
        raise ValueError("j_max must be positive, got %d" % j_max)
    records: list[DispersiveRecord] = []
    for N in N_list:
        if N % 2 == 0:
            raise ValueError("dispersive scan expects odd N, got %d" % N)
        prop = build_propagator(A, N, unitarity_tol=unitarity_tol)
        identity = np.eye(N)
        power = prop.entries
        for j in range(1, j_max + 1):
            drift = float(np.abs(power.conj().T @ power - identity).max())
            if drift > drift_tol:
                records.append(
                    DispersiveRecord(
                        N=N,
                        j=j,
                        norm_1_inf=None,
                        bound=None,
                        error="unitarity drift %.3e at j=%d" % (drift, j),
                    )
                )
                break
            b_j = matrix_power(A, j).b
            if b_j != 0:
                try:
                    bound = math.sqrt(abs(b_j) / N)
                except OverflowError:
                    bound = math.inf
            else:
                bound = None
            records.append(
                DispersiveRecord(
                    N=N,
                    j=j,
                    norm_1_inf=float(np.abs(power).max()),
                    bound=bound,
                )
            )
            if j < j_max:
                power = power @ prop.entries
    return records


@dataclass(frozen=True)
class BoundCheck:
    N: int
    value: float
    threshold: float
    ok: bool

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "value": self.value,
            "threshold": self.threshold,
            "ok": self.ok,
        }


@dataclass(frozen=True)
class BoundsReport:
    """Evaluation of the sup-norm inequality chains on scan data.

    The lower check applies the short-period lower bound
    (1-eps)*(2*log_lambda N)^-1/2 to the flagged short-period rows; the
    upper check applies ((1-eps)*log_lambda N)^-1/2 to every row. Onsets
    are the smallest N in the data beyond which a check never fails
    again (the asymptotic threshold itself is non-effective, so only the
    empirical onset is reported).
    """

    eps: float
    lower: tuple[BoundCheck, ...]
    upper: tuple[BoundCheck, ...]
    lower_onset: int | None
    upper_onset: int | None
    lower_testable: bool
    upper_first_half_pass: float | None
    upper_second_half_pass: float | None

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "lower_testable": self.lower_testable,
            "lower_onset": self.lower_onset,
            "upper_onset": self.upper_onset,
            "upper_first_half_pass": self.upper_first_half_pass,
            "upper_second_half_pass": self.upper_second_half_pass,
            "lower": [check.to_dict() for check in self.lower],
            "upper": [check.to_dict() for check in self.upper],
        }


def _onset(checks: Sequence[BoundCheck]) -> int | None:
    onset = None
    for check in checks:
        if check.ok:
            if onset is None:
                onset = check.N
        else:
            onset = None
    return onset


def verify_bounds(records: Iterable[ScanRecord], eps: float = 0.1) -> BoundsReport:
    """Evaluate both sup-norm envelope inequalities on scan records.

    Both thresholds are derived from the stored envelopes, so records
    loaded back from CSV verify identically to freshly computed ones.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1), got %r" % eps)
    rows = [r for r in records if r.error is None and r.max_supnorm is not None]
    rows.sort(key=lambda r: r.N)
    if not rows:
        raise ValueError("no usable records to verify")
    lower = []
    upper = []
    for row in rows:
        if row.is_bdb:
            threshold = (1.0 - eps) * row.lower_env
            lower.append(
                BoundCheck(
                    N=row.N,
                    value=row.max_supnorm,
                    threshold=threshold,
                    ok=row.max_supnorm >= threshold,
                )
            )
        if math.isfinite(row.upper_env):
            threshold = row.upper_env / math.sqrt(1.0 - eps)
            upper.append(
                BoundCheck(
                    N=row.N,
                    value=row.max_supnorm,
                    threshold=threshold,
                    ok=row.max_supnorm <= threshold,
                )
            )
    half = len(upper) // 2
    first = upper[:half]
    second = upper[half:]

    def _rate(checks: Sequence[BoundCheck]) -> float | None:
        if not checks:
            return None
        return sum(1 for c in checks if c.ok) / len(checks)

    return BoundsReport(
        eps=eps,
        lower=tuple(lower),
        upper=tuple(upper),
        lower_onset=_onset(lower),
        upper_onset=_onset(upper),
        lower_testable=bool(lower),
        upper_first_half_pass=_rate(first),
        upper_second_half_pass=_rate(second),
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_scan_csv(records: Iterable[ScanRecord], fh: IO[str]) -> None:
    fh.write(",".join(SCAN_FIELDS) + "\n")
    for r in records:
        row = (
            r.N,
            r.n_N,
            r.max_supnorm,
            r.lower_env,
            r.upper_env,
            r.trivial_lb,
            r.is_bdb,
            r.witness_index,
            r.cluster_dim,
        )
        fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_scan_csv(fh: IO[str]) -> list[ScanRecord]:
    """Parse scan CSV back into records (error rows come back as errors)."""
    header = fh.readline().strip()
    if header != ",".join(SCAN_FIELDS):
        raise ValueError("unexpected scan CSV header: %r" % header)
    records = []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(SCAN_FIELDS):
            raise ValueError("malformed scan CSV row: %r" % line)
        blank = cells[2] == ""
        records.append(
            ScanRecord(
                N=int(cells[0]),
                n_N=None if cells[1] == "" else int(cells[1]),
                max_supnorm=None if blank else float(cells[2]),
                lower_env=float(cells[3]),
                upper_env=float(cells[4]),
                trivial_lb=float(cells[5]),
                is_bdb=cells[6] == "true",
                witness_index=None if cells[7] == "" else int(cells[7]),
                cluster_dim=None if cells[8] == "" else int(cells[8]),
                error="error row" if blank else None,
            )
        )
    return records


def scan_records_to_json(records: Iterable[ScanRecord]) -> list[dict]:
    return [r.to_dict() for r in records]


def write_dispersive_csv(records: Iterable[DispersiveRecord], fh: IO[str]) -> None:
    fh.write(",".join(DISPERSIVE_FIELDS) + "\n")
    for r in records:
        fh.write(
            ",".join(_fmt(v) for v in (r.N, r.j, r.norm_1_inf, r.bound)) + "\n"
        )


def dispersive_records_to_json(records: Iterable[DispersiveRecord]) -> list[dict]:
    return [r.to_dict() for r in records]


def write_profile_csv(profile: np.ndarray, fh: IO[str]) -> None:
    fh.write(",".join(PROFILE_FIELDS) + "\n")
    for i, value in enumerate(profile):
        fh.write("%d,%s\n" % (i, repr(float(value))))


def profile_to_json(profile: np.ndarray) -> list[dict]:
    return [{"i": i, "abs_u_i": float(v)} for i, v in enumerate(profile)]
