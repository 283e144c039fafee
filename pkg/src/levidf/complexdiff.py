"""Wirtinger derivatives from real jets, Hermitian forms and positivity tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hyperdual import Jet2

__all__ = [
    "WirtingerJet",
    "HermitianForm",
    "wirtinger",
    "realify",
    "min_eigenvalue",
    "min_eigenvalue_native",
    "positivity_margin",
    "is_positive_definite",
    "schur_blocks",
    "schur_positive",
    "max_asymmetry",
    "EPS_POS_REL",
]

EPS_POS_REL = 1e-9


@dataclass(frozen=True)
class WirtingerJet:
    """``value``, ``dz[j] = df/dz_j`` and ``levi[j, k] = d2f/dz_j dzbar_k``."""

    value: float
    dz: np.ndarray
    levi: np.ndarray

    @property
    def n(self) -> int:
        return self.dz.shape[0]


class HermitianForm:
    """A k-by-k complex Hermitian matrix.

    The constructor checks Hermitian symmetry (relative ``tol``) and stores the
    exactly symmetrised matrix.
    """

    def __init__(self, entries, tol: float = 1e-12):
        m = np.array(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"Hermitian form needs a non-empty square matrix, got shape {m.shape}")
        asym = max_asymmetry(m)
        if asym > tol * (1.0 + np.max(np.abs(m))):
            raise ValueError(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
        self.entries = 0.5 * (m + m.conj().T)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __repr__(self) -> str:
        return f"HermitianForm({self.entries.tolist()!r})"


def max_asymmetry(m) -> float:
    m = np.asarray(m, dtype=complex)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def wirtinger(jet: Jet2, n: int) -> WirtingerJet:
    """Convert a real jet in ``(x1, y1, ..., xn, yn)`` to Wirtinger form."""
    if jet.dim != 2 * n:
        raise ValueError(f"jet has {jet.dim} real coordinates, expected {2 * n}")
    g = jet.grad
    H = jet.hess
    gx, gy = g[0::2], g[1::2]
    dz = 0.5 * (gx - 1j * gy)
    Hxx = H[0::2, 0::2]
    Hyy = H[1::2, 1::2]
    Hxy = H[0::2, 1::2]  # [j, k] = d2f / dx_j dy_k
    levi = 0.25 * ((Hxx + Hyy) + 1j * (Hxy - Hxy.T))
    # exact Hermitian symmetry: real part symmetric, imaginary part antisymmetric
    levi = 0.5 * (levi + levi.conj().T)
    return WirtingerJet(jet.value, dz, levi)


def realify(m) -> np.ndarray:
    """Real symmetric ``2k x 2k`` matrix ``[[X, -Y], [Y, X]]`` of ``X + iY``."""
    m = np.asarray(m, dtype=complex)
    X, Y = m.real, m.imag
    return np.block([[X, -Y], [Y, X]])


def min_eigenvalue(form) -> float:
    """Smallest eigenvalue via the realified symmetric eigenproblem.

    Each eigenvalue of the Hermitian matrix appears twice in the realified
    spectrum, so the minimum carries over unchanged.
    """
    m = np.asarray(form, dtype=complex)
    R = realify(m)
    R = 0.5 * (R + R.T)
    return float(np.linalg.eigvalsh(R)[0])


def min_eigenvalue_native(form) -> float:
    """Same quantity from the complex Hermitian solver (cross-check route)."""
    return float(np.linalg.eigvalsh(np.asarray(form, dtype=complex))[0])


def positivity_margin(form) -> float:
    """``1e-9 * (1 + spectral radius)``, the numeric threshold for "> 0"."""
    m = np.asarray(form, dtype=complex)
    rho = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (m + m.conj().T))))) if m.size else 0.0
    return EPS_POS_REL * (1.0 + rho)


def is_positive_definite(form) -> bool:
    return min_eigenvalue(form) > positivity_margin(form)


def schur_blocks(form):
    """Split ``H`` into ``A`` (leading block), ``b`` (last column head), ``c`` (corner)."""
    m = np.asarray(form, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 2:
        raise ValueError("Schur test needs a Hermitian matrix of dimension >= 2")
    A = m[:-1, :-1]
    b = m[:-1, -1]
    c = float(m[-1, -1].real)
    return A, b, c


def schur_positive(form) -> bool:
    """``H > 0`` decided as ``c > 0`` and ``c*A - b b^* > 0``."""
    A, b, c = schur_blocks(form)
    if c <= 0.0:
        return False
    S = c * A - np.outer(b, b.conj())
    return min_eigenvalue(S) > 0.0
