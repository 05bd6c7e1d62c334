"""Finite-dimensional quantization on the N-dimensional state space.

The state space for inverse Planck constant 2*pi*N is identified with C^N
through the delta-comb basis {e_j}. This module builds the propagator
matrix of a hyperbolic torus map, the lattice translation unitaries, and
Weyl quantizations of trigonometric polynomials, and certifies the
construction through unitarity, the entry bound sqrt(|b|/N), and the
exact intertwining of translations (the decisive oracle: it pins down
both the kernel formula and the basis phase convention at once).

Phase bookkeeping is exact: every phase below is exp(2*pi*i * v/L) with
integers v, L reduced mod L before any float conversion, so large
quadratic terms never cancel catastrophically.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import IO, Mapping

import numpy as np

from .arith import CatMatrix, require_quantizable

__all__ = [
    "CertificationError",
    "Propagator",
    "LatticeTranslation",
    "TrigPolynomial",
    "build_propagator",
    "translation_matrix",
    "quantize_observable",
    "egorov_defect",
    "write_matrix_csv",
    "write_matrix_binary",
    "read_matrix_binary",
]

MATRIX_MAGIC = b"CATM"
# magic, u32 N, u32 reserved, 4 zero-pad bytes -> 16 bytes total
_HEADER = struct.Struct("<4sII4x")


class CertificationError(RuntimeError):
    """A constructed matrix failed one of its certification bounds."""


@dataclass(frozen=True)
class Propagator:
    """Unitary N x N propagator of a torus map on the delta-comb basis.

    entries[k, j] is the coefficient of basis vector k in the image of
    basis vector j. The stored global phase is whatever the kernel
    formula produces; every quantity derived downstream is phase
    invariant.
    """

    N: int
    A: CatMatrix
    entries: np.ndarray
    unitarity_residual: float

    @property
    def h(self) -> float:
        return 1.0 / (2.0 * np.pi * self.N)


@dataclass(frozen=True)
class LatticeTranslation:
    """Quantum translation by (p/N, q/N) restricted to the N-dimensional space.

    A shift-and-modulate unitary: basis vector j maps to basis vector
    (j + p) mod N with phase exp(i*pi*(p*q + 2*q*j)/N).
    """

    p: int
    q: int
    N: int
    entries: np.ndarray


@dataclass(frozen=True)
class TrigPolynomial:
    """Trigonometric polynomial sum of coeffs[(m, n)] * exp(2*pi*i*(m*x + n*xi)).

    With real=True the coefficient symmetry of a real-valued function,
    coeffs[-m, -n] == conj(coeffs[m, n]), is checked at construction.
    """

    coeffs: Mapping[tuple[int, int], complex]
    real: bool = False

    def __post_init__(self):
        if self.real:
            for (m, n), value in self.coeffs.items():
                mirror = self.coeffs.get((-m, -n), 0.0)
                if abs(np.conj(complex(value)) - complex(mirror)) > 1e-12:
                    raise ValueError(
                        "coefficient at (%d, %d) breaks real-valuedness" % (m, n)
                    )


def _phase_grid(numerators: np.ndarray, L: int) -> np.ndarray:
    """exp(2*pi*i * numerators/L) with the integer numerators reduced mod L."""
    reduced = np.mod(numerators, L)
    return np.exp((2j * np.pi / L) * reduced)


def build_propagator(
    A: CatMatrix,
    N: int,
    allow_even: bool = False,
    unitarity_tol: float = 1e-9,
) -> Propagator:
    """Propagator matrix of the map A at dimension N.

    entries[k, j] = (N|b|)^(-1/2) * sum over r < |b| of
    exp((2*pi*i/b) * (a*N*r^2/2 + a*r*j + a*j^2/(2N) + d*k^2/(2N) - k*r - k*j/N)),
    evaluated with the rational phase reduced mod 1 in exact integers.
    The result is certified unitary (max-norm residual <= unitarity_tol *
    sqrt(N)), and for odd N every entry is checked against the dispersive
    bound sqrt(|b|/N).

    Even N is outside the regime of the spectral statements verified here
    and is rejected unless allow_even is set.
    """
    if N < 1:
        raise ValueError("dimension must be positive, got %d" % N)
    if unitarity_tol <= 0:
        raise ValueError("unitarity tolerance must be positive")
    require_quantizable(A)
    if A.b == 0:
        raise ValueError("kernel formula requires b != 0")
    if N % 2 == 0 and not allow_even:
        raise ValueError("even N=%d rejected (pass allow_even to explore)" % N)

    a, b, d = A.a, A.b, A.d
    absb = abs(b)
    sign = 1 if b > 0 else -1
    L = 2 * absb * N

    j = np.arange(N, dtype=np.int64)
    k = j[:, None]
    # Reduce coefficients mod L first so every int64 product below stays
    # far from overflow even for large map entries.
    aL = a % L
    dL = d % L
    jline = (aL * j * j) % L
    kline = (dL * k * k) % L
    matrix = np.zeros((N, N), dtype=np.complex128)
    for r in range(absb):
        const = (a * N * N * r * r) % L
        rj = ((2 * a * N * r) % L) * j
        rk = ((2 * N * r) % L) * k
        numer = const + rj + jline + kline - rk - 2 * k * j
        matrix += _phase_grid(sign * numer, L)
    matrix /= np.sqrt(N * absb)

    residual = float(np.abs(matrix.conj().T @ matrix - np.eye(N)).max())
    if residual > unitarity_tol * np.sqrt(N):
        raise CertificationError(
            "unitarity residual %.3e exceeds %.3e at N=%d"
            % (residual, unitarity_tol * np.sqrt(N), N)
        )
    if N % 2 == 1:
        bound = np.sqrt(absb / N) + 1e-9
        worst = float(np.abs(matrix).max())
        if worst > bound:
            raise CertificationError(
                "entry modulus %.12f exceeds sqrt(|b|/N) bound %.12f at N=%d"
                % (worst, bound, N)
            )
    return Propagator(N=N, A=A, entries=matrix, unitarity_residual=residual)


def translation_matrix(p: int, q: int, N: int) -> LatticeTranslation:
    """Quantum translation by the lattice vector (p/N, q/N).

    Derived once by applying the translation operator to the delta-comb
    basis: e_j picks up phase exp(i*pi*(p*q + 2*q*j)/N) and moves to
    e_{(j+p) mod N}. Golden tests freeze this convention.
    """
    if N < 1:
        raise ValueError("dimension must be positive, got %d" % N)
    L = 2 * N
    pq = (p * q) % L
    q2 = (2 * q) % L
    shift = p % N
    j = np.arange(N, dtype=np.int64)
    phases = _phase_grid(pq + q2 * j, L)
    entries = np.zeros((N, N), dtype=np.complex128)
    entries[(j + shift) % N, j] = phases
    return LatticeTranslation(p=p, q=q, N=N, entries=entries)


def _coefficients(a: TrigPolynomial | Mapping[tuple[int, int], complex]):
    if isinstance(a, TrigPolynomial):
        return a.coeffs
    return a


def quantize_observable(
    a: TrigPolynomial | Mapping[tuple[int, int], complex], N: int
) -> np.ndarray:
    """Weyl quantization of a trigonometric polynomial as an N x N matrix.

    The Fourier mode exp(2*pi*i*(m*x + n*xi)) quantizes to the lattice
    translation with (p, q) = (-n, m), so the operator is the coefficient-
    weighted sum of translation matrices. Linear in the coefficients and
    Hermitian for real-valued polynomials.
    """
    coeffs = _coefficients(a)
    result = np.zeros((N, N), dtype=np.complex128)
    for (m, n) in sorted(coeffs):
        value = complex(coeffs[(m, n)])
        if value == 0:
            continue
        result += value * translation_matrix(-n, m, N).entries
    return result


def egorov_defect(M: Propagator) -> float:
    """Max spectral-norm defect of the exact translation intertwining.

    For the generators w in {(1/N, 0), (0, 1/N)} compares M^-1 U_w M with
    the translation by A^-1 w, which stays on the lattice. Near machine
    precision certifies the propagator and the translation phase
    convention simultaneously.
    """
    A, N = M.A, M.N
    Minv = M.entries.conj().T
    worst = 0.0
    for (p, q) in ((1, 0), (0, 1)):
        U = translation_matrix(p, q, N).entries
        target = translation_matrix(A.d * p - A.b * q, -A.c * p + A.a * q, N).entries
        defect = float(np.linalg.norm(Minv @ U @ M.entries - target, 2))
        worst = max(worst, defect)
    return worst


def write_matrix_csv(matrix: np.ndarray, fh: IO[str]) -> None:
    """Dump a complex matrix as CSV rows of interleaved re,im pairs."""
    for row in np.asarray(matrix):
        cells: list[str] = []
        for value in row:
            cells.append(repr(float(value.real)))
            cells.append(repr(float(value.imag)))
        fh.write(",".join(cells))
        fh.write("\n")


def write_matrix_binary(matrix: np.ndarray, fh: IO[bytes]) -> None:
    """Dump a square complex matrix in the CATM binary format.

    16-byte header (magic "CATM", u32 N, u32 reserved, zero padding)
    followed by row-major little-endian float64 interleaved re/im.
    """
    matrix = np.asarray(matrix)
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise ValueError("binary dump expects a square matrix")
    fh.write(_HEADER.pack(MATRIX_MAGIC, n, 0))
    interleaved = np.empty((n, n, 2), dtype="<f8")
    interleaved[:, :, 0] = matrix.real
    interleaved[:, :, 1] = matrix.imag
    fh.write(interleaved.tobytes(order="C"))


def read_matrix_binary(fh: IO[bytes]) -> np.ndarray:
    """Read a matrix written by write_matrix_binary."""
    header = fh.read(_HEADER.size)
    magic, n, _reserved = _HEADER.unpack(header)
    if magic != MATRIX_MAGIC:
        raise ValueError("bad magic %r in matrix dump" % magic)
    raw = np.frombuffer(fh.read(16 * n * n), dtype="<f8").reshape(n, n, 2)
    return (raw[:, :, 0] + 1j * raw[:, :, 1]).astype(np.complex128)
