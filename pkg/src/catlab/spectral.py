"""Spectral analysis of propagator matrices.

Eigendecomposition with residual certification, clustering of unit-circle
eigenvalues into eigenspaces, extraction of the extremal sup norm of each
eigenspace through its orthogonal projector, and the averaging-operator
machinery behind the dispersive upper bound.

The projector identity doing the real work: for the orthogonal projector
P onto a subspace V, the largest l-infinity norm over l2-normalized
vectors of V equals max_j ||P e_j||, attained by P e_j / ||P e_j|| at the
maximizing coordinate j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .quantize import Propagator

__all__ = [
    "ResidualError",
    "AmbiguousClusterError",
    "EigenCluster",
    "SpectrumReport",
    "EigenspaceProjector",
    "SupnormResult",
    "eigendecompose",
    "cluster_eigenvalues",
    "projector",
    "extremal_supnorm",
    "supnorm_summary",
    "max_supnorm",
    "op_norm_1_inf",
    "op_norm_2_inf",
    "averaging_operator",
    "report_to_dict",
]

TWO_PI = 2.0 * math.pi


class ResidualError(RuntimeError):
    """Eigensystem residuals (or eigenvalue moduli) exceeded certification bounds."""


class AmbiguousClusterError(RuntimeError):
    """An eigenvalue sits too close to two different cluster representatives."""


@dataclass(frozen=True)
class EigenCluster:
    """One eigenvalue cluster: representative phase and member indices."""

    phase: float
    indices: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class SpectrumReport:
    """Certified eigensystem of one unitary, sorted by eigenvalue phase.

    eigenvectors holds one orthonormal eigenvector per column (Schur
    vectors, so orthonormality is exact to machine precision even inside
    degenerate clusters). clusters is empty until cluster_eigenvalues
    runs; global_phase is the phase of the scalar matrix M^n when the
    short quantum period n certifies one.
    """

    N: int
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    clusters: tuple[EigenCluster, ...] = ()
    global_phase: float | None = None


@dataclass(frozen=True)
class EigenspaceProjector:
    """Orthogonal projector onto one eigenvalue cluster's eigenspace.

    Stored through an orthonormal basis (columns of `basis`); the dense
    Hermitian idempotent matrix is materialized on demand.
    """

    cluster_id: int
    N: int
    dimension: int
    basis: np.ndarray

    def matrix(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


class SupnormResult(NamedTuple):
    value: float
    cluster_id: int
    witness_index: int
    witness: np.ndarray
    cluster_dim: int


def _as_matrix(M: Propagator | np.ndarray) -> tuple[np.ndarray, int]:
    if isinstance(M, Propagator):
        return M.entries, M.N
    matrix = np.asarray(M, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("expected a square matrix")
    return matrix, matrix.shape[0]


def eigendecompose(
    M: Propagator | np.ndarray, residual_tol: float = 1e-8
) -> SpectrumReport:
    """Full eigensystem of a unitary with residual certification.

    Uses the complex Schur form, whose basis is orthonormal by
    construction; for a unitary input the Schur factor is diagonal to
    machine precision, so its columns are eigenvectors. Raises
    ResidualError when per-pair residuals exceed residual_tol*sqrt(N) or
    any eigenvalue modulus strays from 1 by more than 1e-8; scipy's
    LinAlgError propagates on solver non-convergence.
    """
    matrix, n = _as_matrix(M)
    T, Z = scipy.linalg.schur(matrix, output="complex")
    values = np.diag(T).copy()
    phases = np.mod(np.angle(values), TWO_PI)
    order = np.argsort(phases, kind="stable")
    values = values[order]
    vectors = Z[:, order]

    residuals = np.linalg.norm(matrix @ vectors - vectors * values[None, :], axis=0)
    worst = float(residuals.max()) if n else 0.0
    if worst > residual_tol * math.sqrt(n):
        raise ResidualError(
            "eigenpair residual %.3e exceeds %.3e"
            % (worst, residual_tol * math.sqrt(n))
        )
    moduli = np.abs(values)
    if moduli.size and (moduli.max() > 1 + 1e-8 or moduli.min() < 1 - 1e-8):
        raise ResidualError("eigenvalue modulus strays from the unit circle")
    return SpectrumReport(
        N=n,
        matrix=matrix,
        eigenvalues=values,
        eigenvectors=vectors,
        residuals=residuals,
    )


def _circular_distance(x: np.ndarray | float, y: float) -> np.ndarray | float:
    d = np.mod(np.asarray(x) - y, TWO_PI)
    return np.minimum(d, TWO_PI - d)


def _snap_clusters(
    report: SpectrumReport, n: int, tol: float, scalar_tol: float
) -> SpectrumReport:
    power = np.linalg.matrix_power(report.matrix, n)
    scalar = power[0, 0]
    off = float(np.abs(power - scalar * np.eye(report.N)).max())
    if off > scalar_tol or abs(abs(scalar) - 1) > scalar_tol:
        raise ResidualError(
            "matrix power %d is not scalar (residual %.3e); wrong period?" % (n, off)
        )
    phi = float(np.angle(scalar))
    roots = np.mod((phi + TWO_PI * np.arange(n)) / n, TWO_PI)
    phases = np.mod(np.angle(report.eigenvalues), TWO_PI)

    members: dict[int, list[int]] = {}
    for i, theta in enumerate(phases):
        dist = _circular_distance(roots, float(theta))
        nearest = int(np.argmin(dist))
        runner_up = np.partition(dist, 1)[1] if n > 1 else math.inf
        if runner_up < 2 * tol:
            raise AmbiguousClusterError(
                "eigenvalue %d within 2*tol of two period-%d roots" % (i, n)
            )
        members.setdefault(nearest, []).append(i)

    order = sorted(members, key=lambda m: roots[m])
    clusters = tuple(
        EigenCluster(phase=float(roots[m]), indices=tuple(members[m])) for m in order
    )
    return replace(report, clusters=clusters, global_phase=phi)


def _gap_clusters(report: SpectrumReport, tol: float) -> SpectrumReport:
    n = report.N
    phases = np.mod(np.angle(report.eigenvalues), TWO_PI)
    groups: list[list[int]] = [[0]]
    for i in range(1, n):
        if phases[i] - phases[i - 1] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    # circular wrap: the first and last groups may be one cluster
    if len(groups) > 1 and (phases[groups[0][0]] + TWO_PI - phases[-1]) <= tol:
        groups[0] = groups.pop() + groups[0]
    clusters = []
    for members in groups:
        rep = complex(np.sum(report.eigenvalues[members]))
        clusters.append(
            EigenCluster(
                phase=float(np.mod(np.angle(rep), TWO_PI)), indices=tuple(members)
            )
        )
    clusters.sort(key=lambda cl: cl.phase)
    return replace(report, clusters=tuple(clusters), global_phase=None)


def cluster_eigenvalues(
    report: SpectrumReport,
    n: int | None = None,
    lam: float | None = None,
    tol: float = 1e-7,
    scalar_tol: float = 1e-7,
) -> SpectrumReport:
    """Group the eigenvalues of a report into eigenspace clusters.

    In the short-period regime (n <= 2*log_lambda(N) + 1, decidable when
    both n and lam are supplied) M^n is verified to be scalar and each
    eigenvalue is snapped to the nearest n-th root of its phase, so the
    clustering is exact. Otherwise eigenvalues are grouped by phase gaps
    at tolerance tol, merging near-degenerate neighbours; degeneracy away
    from the short-period regime is declared, never assumed.
    """
    if report.N == 0:
        return replace(report, clusters=())
    if tol <= 0:
        raise ValueError("cluster tolerance must be positive")
    if n is not None and n < 1:
        raise ValueError("quantum period must be positive")
    if (
        n is not None
        and lam is not None
        and report.N > 1
        and n <= 2 * math.log(report.N, lam) + 1 + 1e-12
    ):
        return _snap_clusters(report, n, tol, scalar_tol)
    if n == 1:
        # scalar matrix regardless of lam knowledge
        return _snap_clusters(report, 1, tol, scalar_tol)
    return _gap_clusters(report, tol)


def projector(report: SpectrumReport, cluster_id: int) -> EigenspaceProjector:
    """Orthogonal projector onto the eigenspace of one cluster.

    Member eigenvectors are re-orthonormalized (QR) before assembly so
    the projector is exactly Hermitian idempotent even when the solver
    returned slightly non-orthogonal vectors inside a degenerate cluster.
    """
    cluster = report.clusters[cluster_id]
    if cluster.dim == 0:
        raise ValueError("cluster %d is empty" % cluster_id)
    vectors = report.eigenvectors[:, list(cluster.indices)]
    basis, _ = np.linalg.qr(vectors)
    return EigenspaceProjector(
        cluster_id=cluster_id, N=report.N, dimension=cluster.dim, basis=basis
    )


def extremal_supnorm(proj: EigenspaceProjector) -> tuple[float, int, np.ndarray]:
    """Largest sup norm over l2-normalized vectors of the eigenspace.

    Returns (value, witness_index, witness): value = max_j ||P e_j||,
    computed as the largest row norm of the orthonormal basis, and the
    witness P e_j* / ||P e_j*|| attains it. Always >= sqrt(dim/N) by the
    trace pigeonhole.
    """
    if proj.dimension == 0:
        raise ValueError("projector has dimension 0")
    row_norms = np.linalg.norm(proj.basis, axis=1)
    index = int(np.argmax(row_norms))
    value = float(row_norms[index])
    witness = proj.basis @ proj.basis[index].conj()
    witness = witness / value
    return value, index, witness


def supnorm_summary(report: SpectrumReport) -> SupnormResult:
    """Maximum extremal sup norm over all clusters of a clustered report.

    Deterministic tie-breaking: the first cluster (by phase order)
    attaining the maximum wins, and within a cluster the smallest
    maximizing coordinate index is the witness.
    """
    if not report.clusters:
        raise ValueError("report has no clusters; run cluster_eigenvalues first")
    best: SupnormResult | None = None
    for cid in range(len(report.clusters)):
        value, index, witness = extremal_supnorm(projector(report, cid))
        if best is None or value > best.value:
            best = SupnormResult(
                value=value,
                cluster_id=cid,
                witness_index=index,
                witness=witness,
                cluster_dim=report.clusters[cid].dim,
            )
    assert best is not None
    return best


def max_supnorm(
    M: Propagator | np.ndarray,
    n: int | None = None,
    lam: float | None = None,
    tol: float = 1e-7,
) -> SupnormResult:
    """Eigendecompose, cluster, and extract the extremal sup norm of M."""
    report = cluster_eigenvalues(eigendecompose(M), n=n, lam=lam, tol=tol)
    return supnorm_summary(report)


def op_norm_1_inf(X: np.ndarray) -> float:
    """The l1 -> l-infinity operator norm: the largest entry modulus."""
    X = np.asarray(X)
    return float(np.abs(X).max()) if X.size else 0.0


def op_norm_2_inf(X: np.ndarray) -> float:
    """The l2 -> l-infinity operator norm: the largest row l2 norm (exact)."""
    X = np.asarray(X)
    if not X.size:
        return 0.0
    return float(np.linalg.norm(X, axis=1).max())


def averaging_operator(
    M: Propagator | np.ndarray, mu: complex, T: int
) -> np.ndarray:
    """Time average B = (1/T) * sum_{n<T} mu^-n M^n.

    For an eigenvector u of M with eigenvalue mu, B u = u; the largest
    row l2 norm of B therefore bounds ||u||_inf for every such unit
    eigenvector. mu must be unimodular.
    """
    if T < 1:
        raise ValueError("averaging window must be positive, got %d" % T)
    mu = complex(mu)
    if abs(abs(mu) - 1) > 1e-12:
        raise ValueError("eigenvalue must be unimodular, |mu| = %.15f" % abs(mu))
    matrix, n = _as_matrix(M)
    accum = np.zeros((n, n), dtype=np.complex128)
    power = np.eye(n, dtype=np.complex128)
    weight = 1.0 + 0.0j
    for step in range(T):
        accum += weight * power
        if step + 1 < T:
            power = matrix @ power
            weight /= mu
    return accum / T


def _cluster_supnorms(report: SpectrumReport) -> list[float]:
    values = []
    for cid in range(len(report.clusters)):
        value, _, _ = extremal_supnorm(projector(report, cid))
        values.append(value)
    return values


def report_to_dict(report: SpectrumReport) -> dict:
    """JSON-ready view of a clustered spectrum report."""
    supnorms = _cluster_supnorms(report)
    return {
        "N": report.N,
        "eigenvalues": [[float(v.real), float(v.imag)] for v in report.eigenvalues],
        "clusters": [
            {
                "phase": cluster.phase,
                "indices": list(cluster.indices),
                "dim": cluster.dim,
                "supnorm": supnorms[cid],
            }
            for cid, cluster in enumerate(report.clusters)
        ],
        "global_phase": report.global_phase,
        "residual_max": float(report.residuals.max()) if report.N else 0.0,
    }
