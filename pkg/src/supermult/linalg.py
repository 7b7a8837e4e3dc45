"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Pure states are
1-d unit vectors, density operators are 2-d Hermitian PSD unit-trace arrays;
``check_pure`` and ``check_density`` enforce those invariants where it
matters. Entropies are in bits.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import as_rng

HERMITIAN_TOL = 1e-8
VALIDITY_TOL = 1e-10
PSD_CLAMP = 1e-8


class DimensionError(ValueError):
    """Raised for zero or mismatched dimensions."""


class NotHermitianError(ValueError):
    pass


class NotPSDError(ValueError):
    pass


class UnsupportedExponentError(ValueError):
    pass


class ResourceError(RuntimeError):
    """A dimension guard refused to allocate."""


def _check_dim(d):
    if int(d) != d or d < 1:
        raise DimensionError(f"dimension must be a positive integer, got {d!r}")
    return int(d)


def is_hermitian(m, tol=HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.all(np.abs(m - m.conj().T) <= tol))


def check_pure(psi, tol=1e-12) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.size == 0:
        raise DimensionError(f"pure state must be a non-empty vector, got shape {psi.shape}")
    if not np.all(np.isfinite(psi)):
        raise ValueError("pure state has non-finite amplitudes")
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        raise ValueError(f"pure state not normalised (norm {np.linalg.norm(psi)!r})")
    return psi


def check_density(rho, tol=VALIDITY_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array after checking the density-operator invariants."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density operator must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("density operator has non-finite entries")
    if not is_hermitian(rho, tol):
        raise NotHermitianError("density operator is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValueError(f"density operator trace is {np.trace(rho).real!r}, expected 1")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise NotPSDError("density operator has a negative eigenvalue")
    return rho


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def haar_unitary(d, rng) -> np.ndarray:
    """Sample a ``d x d`` unitary from the Haar measure.

    QR of a standard complex Gaussian matrix, with the phases of ``R``'s
    diagonal moved into ``Q`` so the distribution is exactly Haar (Mezzadri's
    recipe).
    """
    d = _check_dim(d)
    gen = as_rng(rng)
    z = (gen.standard_normal((d, d)) + 1j * gen.standard_normal((d, d))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def random_pure_state(d, rng) -> np.ndarray:
    """Uniformly distributed unit vector in C^d."""
    d = _check_dim(d)
    gen = as_rng(rng)
    v = gen.standard_normal(d) + 1j * gen.standard_normal(d)
    return v / np.linalg.norm(v)


def random_density(d, rng, rank=None) -> np.ndarray:
    """Induced-measure random density operator of the given rank (full rank by default)."""
    d = _check_dim(d)
    gen = as_rng(rng)
    k = d if rank is None else int(rank)
    g = gen.standard_normal((d, k)) + 1j * gen.standard_normal((d, k))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def eig_hermitian(m):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.

    Returns ``(eigenvalues, eigenvectors)`` with ``m = V diag(w) V^dagger``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if not is_hermitian(m):
        raise NotHermitianError("matrix is not Hermitian within 1e-8")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return w[::-1].copy(), v[:, ::-1].copy()


def clamp_spectrum(w, tol=PSD_CLAMP) -> np.ndarray:
    """Zero out round-off negatives in ``[-tol, 0)``; anything lower is an error."""
    w = np.asarray(w, dtype=float)
    if w.size and w.min() < -tol:
        raise NotPSDError(f"eigenvalue {w.min()!r} below -{tol}")
    return np.clip(w, 0.0, None)


def _check_p(p):
    p = float(p)
    if not p > 1:
        raise UnsupportedExponentError(f"Schatten exponent must satisfy p > 1, got {p}")
    return p


def schatten_from_eigenvalues(w, p) -> float:
    """(sum w^p)^(1/p) of a clamped nonnegative spectrum; ``p = inf`` gives the max."""
    p = _check_p(p)
    w = clamp_spectrum(w)
    if math.isinf(p):
        return float(w.max())
    top = w.max()
    if top == 0.0:
        return 0.0
    # scale by the top eigenvalue so large p cannot underflow
    return float(top * np.sum((w / top) ** p) ** (1.0 / p))


def schatten_norm(m, p) -> float:
    """Schatten ``p``-norm of a Hermitian PSD matrix, ``p`` in ``(1, inf]``."""
    _check_p(p)
    w, _ = eig_hermitian(m)
    return schatten_from_eigenvalues(w, p)


def psd_power(m, a) -> np.ndarray:
    """``m**a`` (``a > 0``) for a Hermitian PSD ``m`` through its clamped spectrum."""
    if not a > 0:
        raise UnsupportedExponentError("psd_power needs a positive exponent")
    w, v = eig_hermitian(m)
    return (v * clamp_spectrum(w) ** a) @ v.conj().T


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def max_entangled_state(d) -> np.ndarray:
    """The vector ``sum_a |a>|a> / sqrt(d)`` in C^(d*d)."""
    d = _check_dim(d)
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0 / math.sqrt(d)
    return v


def partial_trace(rho, dims, keep):
    """Reduced state of a bipartite operator; ``keep`` is 0 or 1."""
    d1, d2 = dims
    r = np.asarray(rho).reshape(d1, d2, d1, d2)
    return np.einsum("ijkj->ik", r) if keep == 0 else np.einsum("ijil->jl", r)


def renyi_entropy(rho, p) -> float:
    """Renyi ``p``-entropy in bits, ``log2(tr rho^p) / (1 - p)``."""
    p = float(p)
    if p <= 0:
        raise UnsupportedExponentError("Renyi entropy needs p > 0")
    if p == 1:
        raise UnsupportedExponentError("p = 1 is the von Neumann entropy; use von_neumann_entropy")
    w = clamp_spectrum(eig_hermitian(check_density(rho))[0])
    w = w[w > 0]
    if math.isinf(p):
        return float(-math.log2(w.max()))
    return float(math.log2(np.sum(w ** p)) / (1.0 - p))


def von_neumann_entropy(rho) -> float:
    w = clamp_spectrum(eig_hermitian(check_density(rho))[0])
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w)))
