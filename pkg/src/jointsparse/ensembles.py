"""Measurement matrix families.

Random spherical, Gaussian and Bernoulli ensembles, the Dirac-Fourier union
``(I | F)`` and the Alltop Gabor frame of time-frequency shifts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as _io

__all__ = [
    "EnsembleTag",
    "MeasurementMatrix",
    "spherical_ensemble",
    "gaussian_ensemble",
    "bernoulli_ensemble",
    "dirac_fourier",
    "alltop_gabor",
    "custom_matrix",
    "make_ensemble",
    "is_prime",
]

_UNIT_NORM_TOL = 1e-10


class EnsembleTag(str, enum.Enum):
    SPHERICAL = "Spherical"
    GAUSSIAN = "Gaussian"
    BERNOULLI = "Bernoulli"
    DIRAC_FOURIER = "DiracFourier"
    ALLTOP_GABOR = "AlltopGabor"
    CUSTOM = "Custom"

    @property
    def is_random(self) -> bool:
        return self in (EnsembleTag.SPHERICAL, EnsembleTag.GAUSSIAN, EnsembleTag.BERNOULLI)


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """Complex ``n x N`` matrix with its ensemble tag.

    Columns have unit Euclidean norm, except for the Gaussian ensemble which
    keeps the raw ``N(0, 1/n)`` entries.
    """

    entries: np.ndarray
    ensemble_tag: EnsembleTag = EnsembleTag.CUSTOM
    seed: Optional[int] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        A = np.array(self.entries, dtype=complex, copy=True)
        if A.ndim != 2:
            raise ValueError("measurement matrix must be 2-D")
        n, N = A.shape
        if n < 1 or N < n:
            raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
        A.setflags(write=False)
        tag = EnsembleTag(self.ensemble_tag)
        object.__setattr__(self, "entries", A)
        object.__setattr__(self, "ensemble_tag", tag)
        if tag is not EnsembleTag.GAUSSIAN and tag is not EnsembleTag.CUSTOM:
            norms = np.linalg.norm(A, axis=0)
            if np.max(np.abs(norms - 1.0)) > _UNIT_NORM_TOL:
                raise ValueError("columns must have unit norm")

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def N(self) -> int:
        return self.entries.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.entries[:, j]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def to_csv(self, path) -> None:
        _io.save_matrix_csv(self.entries, path)

    @classmethod
    def from_csv(cls, path) -> "MeasurementMatrix":
        return cls(_io.load_matrix_csv(path), EnsembleTag.CUSTOM)


def as_matrix_array(A) -> np.ndarray:
    if isinstance(A, MeasurementMatrix):
        return A.entries
    return np.asarray(A)


def _check_dims(n: int, N: int) -> None:
    if not (1 <= n <= N):
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")


def spherical_ensemble(n: int, N: int, seed: int) -> MeasurementMatrix:
    """Real matrix with independent columns uniform on the unit sphere."""
    _check_dims(n, N)
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, N))
    G /= np.linalg.norm(G, axis=0)
    return MeasurementMatrix(G, EnsembleTag.SPHERICAL, seed)


def gaussian_ensemble(n: int, N: int, seed: int) -> MeasurementMatrix:
    """Real matrix with i.i.d. ``N(0, 1/n)`` entries (not renormalized)."""
    _check_dims(n, N)
    rng = np.random.default_rng(seed)
    return MeasurementMatrix(rng.standard_normal((n, N)) / np.sqrt(n), EnsembleTag.GAUSSIAN, seed)


def bernoulli_ensemble(n: int, N: int, seed: int) -> MeasurementMatrix:
    """Real matrix with i.i.d. ``+-1/sqrt(n)`` entries."""
    _check_dims(n, N)
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(n, N)) * 2.0 - 1.0
    return MeasurementMatrix(signs / np.sqrt(n), EnsembleTag.BERNOULLI, seed)


def dirac_fourier(n: int) -> MeasurementMatrix:
    """The ``n x 2n`` union ``(I | F)`` with the unitary DFT ``F``.

    ``F[j, k] = exp(-2 pi i j k / n) / sqrt(n)``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    j = np.arange(n)
    F = np.exp(-2j * np.pi * (np.outer(j, j) % n) / n) / np.sqrt(n)
    return MeasurementMatrix(np.hstack([np.eye(n), F]), EnsembleTag.DIRAC_FOURIER)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, int(np.sqrt(n)) + 1))


def alltop_gabor(n: int) -> MeasurementMatrix:
    """Time-frequency shifts of the Alltop window, an ``n x n**2`` frame.

    Column ``r * n + s`` is ``T_r M_s g`` with ``g[l] = exp(2 pi i l^3 / n) / sqrt(n)``,
    ``(M_s g)[l] = exp(2 pi i s l / n) g[l]`` and ``(T_r g)[l] = g[(l - r) mod n]``.
    Requires ``n`` prime and at least 5.
    """
    if n < 5 or not is_prime(n):
        raise ValueError(f"Alltop frame needs a prime n >= 5, got {n}")
    ell = np.arange(n)
    # reduce l^3 mod n in integers before forming the phase
    g = np.exp(2j * np.pi * ((ell**3) % n) / n) / np.sqrt(n)
    mod = np.exp(2j * np.pi * (np.outer(ell, ell) % n) / n)  # (l, s) -> e^{2 pi i s l / n}
    Mg = mod * g[:, None]
    A = np.empty((n, n * n), dtype=complex)
    for r in range(n):
        A[:, r * n:(r + 1) * n] = np.roll(Mg, r, axis=0)
    return MeasurementMatrix(A, EnsembleTag.ALLTOP_GABOR)


def custom_matrix(A) -> MeasurementMatrix:
    return MeasurementMatrix(A, EnsembleTag.CUSTOM)


def make_ensemble(tag, n: int, N: Optional[int] = None, seed: int = 0) -> MeasurementMatrix:
    """Build a matrix from an ensemble tag (``N`` is ignored for deterministic families)."""
    tag = EnsembleTag(tag)
    if tag is EnsembleTag.DIRAC_FOURIER:
        return dirac_fourier(n)
    if tag is EnsembleTag.ALLTOP_GABOR:
        return alltop_gabor(n)
    if N is None:
        raise ValueError(f"{tag.value} ensemble needs N")
    builders = {
        EnsembleTag.SPHERICAL: spherical_ensemble,
        EnsembleTag.GAUSSIAN: gaussian_ensemble,
        EnsembleTag.BERNOULLI: bernoulli_ensemble,
    }
    if tag not in builders:
        raise ValueError(f"cannot construct ensemble {tag.value}")
    return builders[tag](n, N, seed)


def load_matrix(path: str | Path) -> MeasurementMatrix:
    return MeasurementMatrix.from_csv(path)
