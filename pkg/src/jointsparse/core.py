"""Joint-sparse signal model: containers, mixed norms and random coefficients.

A joint signal is an ``N x L`` complex matrix whose columns (channels) share a
common row support.  Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "Support",
    "JointSignal",
    "CoefficientVariant",
    "CoefficientModel",
    "DimensionError",
    "as_signal_array",
    "mixed_norm_21",
    "row_sign",
    "support_of",
    "sample_coefficients",
    "stable_seed",
    "keyed_rng",
    "replicate_channels",
]


class DimensionError(ValueError):
    """Raised when array shapes or index sets are inconsistent."""


def stable_seed(*parts) -> int:
    """Deterministic 64-bit seed derived from a tuple of hashable parts.

    Uses BLAKE2b on the ``repr`` of the parts, so the value is stable across
    processes and interpreter runs (unlike :func:`hash`).
    """
    digest = hashlib.blake2b(repr(tuple(parts)).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def keyed_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, *key)``.

    Draws for different keys are independent of the order in which the keys
    are visited.
    """
    ss = np.random.SeedSequence([int(seed) % 2**64, *(int(k) for k in key)])
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Support:
    """Strictly increasing set of row indices."""

    indices: tuple[int, ...] = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(i < 0 for i in idx):
            raise DimensionError("support indices must be nonnegative")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise DimensionError("support indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_iterable(cls, indices: Iterable[int]) -> "Support":
        idx = [int(i) for i in indices]
        if len(set(idx)) != len(idx):
            raise DimensionError("support contains duplicate indices")
        return cls(tuple(sorted(idx)))

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, j) -> bool:
        return j in self.indices

    def complement(self, N: int) -> list[int]:
        inside = set(self.indices)
        return [j for j in range(N) if j not in inside]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)


def _as_support(S) -> Support:
    if isinstance(S, Support):
        return S
    return Support.from_iterable(S)


@dataclass(frozen=True, eq=False)
class JointSignal:
    """Complex ``N x L`` coefficient matrix with an optional declared support.

    The entries are stored as a read-only complex array.  When a support is
    declared, all rows outside it must be exactly zero.
    """

    entries: np.ndarray
    declared_support: Optional[Support] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.array(self.entries, dtype=complex, copy=True)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DimensionError(f"signal must be a nonempty N x L matrix, got {X.shape}")
        X.setflags(write=False)
        object.__setattr__(self, "entries", X)
        if self.declared_support is not None:
            S = _as_support(self.declared_support)
            if S.indices and S.indices[-1] >= X.shape[0]:
                raise DimensionError("declared support exceeds signal length")
            outside = np.ones(X.shape[0], dtype=bool)
            outside[S.as_array()] = False
            if np.any(X[outside] != 0):
                raise DimensionError("nonzero rows outside the declared support")
            object.__setattr__(self, "declared_support", S)

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    @property
    def L(self) -> int:
        return self.entries.shape[1]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def as_signal_array(X) -> np.ndarray:
    """Return the coefficient matrix of ``X`` as a 2-D array (no copy if possible)."""
    if isinstance(X, JointSignal):
        return X.entries
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[:, None]
    return X


def _row_norms(X) -> np.ndarray:
    return np.linalg.norm(as_signal_array(X), axis=1)


def mixed_norm_21(X) -> float:
    """Sum of the Euclidean norms of the rows of ``X``."""
    return float(np.sum(_row_norms(X)))


def row_sign(X, tol: float = 0.0) -> np.ndarray:
    """Row-wise normalization of ``X``.

    Row ``j`` becomes ``X[j] / ||X[j]||_2`` when its norm exceeds ``tol`` and
    zero otherwise.  For a single channel this is the ordinary sign function.
    """
    X = as_signal_array(X).astype(complex, copy=False)
    norms = _row_norms(X)
    out = np.zeros_like(X)
    keep = norms > tol
    out[keep] = X[keep] / norms[keep, None]
    return out


def support_of(X, tol: float = 0.0) -> Support:
    """Indices of rows whose Euclidean norm is strictly greater than ``tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return Support(tuple(int(j) for j in np.flatnonzero(_row_norms(X) > tol)))


class CoefficientVariant(str, enum.Enum):
    REAL_GAUSSIAN = "RealGaussian"
    REAL_SPHERICAL = "RealSpherical"
    COMPLEX_GAUSSIAN = "ComplexGaussian"
    COMPLEX_SPHERICAL = "ComplexSpherical"

    @property
    def is_complex(self) -> bool:
        return self in (CoefficientVariant.COMPLEX_GAUSSIAN, CoefficientVariant.COMPLEX_SPHERICAL)

    @property
    def is_spherical(self) -> bool:
        return self in (CoefficientVariant.REAL_SPHERICAL, CoefficientVariant.COMPLEX_SPHERICAL)


@dataclass(frozen=True)
class CoefficientModel:
    """Random model ``X^S = diag(sigma) @ Phi`` for the nonzero rows.

    ``sigma`` are the (positive) row scales; the rows of ``Phi`` are standard
    Gaussian or uniform on the real/complex unit sphere depending on
    ``variant``.
    """

    variant: CoefficientVariant
    sigma: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "variant", CoefficientVariant(self.variant))
        sigma = tuple(float(s) for s in np.ravel(self.sigma))
        if not all(s > 0 for s in sigma):
            raise ValueError("all sigma entries must be strictly positive")
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def identity(cls, variant, k: int) -> "CoefficientModel":
        return cls(variant, (1.0,) * k)

    @property
    def dynamic_range(self) -> float:
        """Ratio ``max sigma / min sigma`` (the ``R`` of the thresholding bound)."""
        return max(self.sigma) / min(self.sigma) if self.sigma else 1.0


def _draw_phi_row(rng: np.random.Generator, L: int, variant: CoefficientVariant) -> np.ndarray:
    if variant.is_complex:
        row = rng.standard_normal(L) + 1j * rng.standard_normal(L)
    else:
        row = rng.standard_normal(L) + 0j
    if variant.is_spherical:
        row = row / np.linalg.norm(row)
    return row


def sample_coefficients(
    model: CoefficientModel, S, N: int, L: int, seed: int
) -> JointSignal:
    """Draw a joint signal supported on ``S`` from ``model``.

    Row ``S[i]`` is ``model.sigma[i]`` times an independent draw of ``Phi``.
    Each row uses its own generator keyed by ``(seed, row index)``, so a row's
    value does not depend on the other rows in the support.
    """
    S = _as_support(S)
    if len(S) != len(model.sigma):
        raise DimensionError(
            f"support has {len(S)} indices but sigma has {len(model.sigma)} entries"
        )
    if L < 1 or N < 1:
        raise DimensionError("N and L must be positive")
    if S.indices and S.indices[-1] >= N:
        raise DimensionError("support index out of range for signal length N")
    X = np.zeros((N, L), dtype=complex)
    for s, j in zip(model.sigma, S):
        X[j] = s * _draw_phi_row(keyed_rng(seed, j), L, model.variant)
    return JointSignal(
        X, S, metadata={"variant": model.variant.value, "seed": int(seed)}
    )


def replicate_channels(x: Sequence[complex], L: int) -> np.ndarray:
    """The ``N x L`` matrix ``(x | x | ... | x)``."""
    x = np.asarray(x, dtype=complex).ravel()
    return np.repeat(x[:, None], L, axis=1)
