"""Bosonic Bogoliubov diagonalization of the quadratic form.

In the ladder basis alpha = (c_1..c_N, c+_1..c+_N) the Hamiltonian reads
H = (1/2) alpha+ HH alpha with HH = [[A, B], [B, A]], A = diag(w) + G and
B = G for the x-x interaction matrix G of QuadraticHamiltonian. The
Heisenberg equations i d/dt alpha = Sigma HH alpha define the non-Hermitian
dynamical matrix

    M = [[A, B], [-B, -A]],   Sigma = diag(I, -I),

whose eigenvalues come in +/- omega pairs for a stable form. A polariton
annihilation operator p_k = sum_j X_kj c_j + Y_kj c+_j is read off a
positive-frequency right eigenvector (u, v) of M as X = conj(u), Y = -conj(v)
after normalizing the symplectic norm |u|^2 - |v|^2 to one, which makes the
per-mode weights |X_kj|^2 - |Y_kj|^2 sum to one branch by branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InstabilityError, NumericalError
from .model import RAD_PER_SEC_PER_THZ

# relative imaginary part above which an eigenvalue flags an unstable form
IMAG_TOL = 1e-9
# relative mismatch allowed between omega and its mirrored partner
PAIR_TOL = 1e-9
# relative frequency window treated as degenerate when ordering branches
DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class EigenSolution:
    """Positive-frequency normal modes of one quadratic form.

    frequencies are in THz, ascending; rows of hopfield_x / hopfield_y hold
    the annihilation / creation coefficients of one polariton branch, and
    fractions[k, j] = |X_kj|^2 - |Y_kj|^2 is the weight of bare mode j in
    branch k (photon modes first).
    """

    frequencies: np.ndarray
    hopfield_x: np.ndarray
    hopfield_y: np.ndarray
    fractions: np.ndarray
    n_photon: int

    def __post_init__(self):
        for name in ("frequencies", "hopfield_x", "hopfield_y", "fractions"):
            arr = np.array(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_modes(self):
        return len(self.frequencies)

    @property
    def photon_fractions(self):
        """Total photon weight of each branch."""
        return self.fractions[:, :self.n_photon].sum(axis=1)

    @property
    def matter_fractions(self):
        """Total matter weight of each branch."""
        return self.fractions[:, self.n_photon:].sum(axis=1)


def build_dynamical_matrix(ham):
    """2N x 2N dynamical matrix M = [[A, B], [-B, -A]] in rad/s."""
    a = np.diag(ham.diag_freqs) + ham.interaction
    b = ham.interaction
    return np.block([[a, b], [-b, -a]])


def _real_eigenvalues(evals, context=""):
    """Truncate eigenvalues to real, raising if an imaginary part survives."""
    bad = np.abs(evals.imag) > IMAG_TOL * np.abs(evals.real)
    if np.any(bad):
        worst = evals[np.flatnonzero(bad)[np.argmax(np.abs(evals.imag[bad]))]]
        raise InstabilityError(
            f"quadratic form is not positive definite{context}: eigenvalue "
            f"{worst:.6e} rad/s has a non-negligible imaginary part")
    return evals.real


def _check_pairing(lam, n):
    pos = np.sort(lam[lam > 0.0])
    neg = np.sort(-lam[lam < 0.0])
    if len(pos) != n or len(neg) != n:
        raise NumericalError(
            f"expected {n} positive/negative eigenvalue pairs, found "
            f"{len(pos)}/{len(neg)}")
    mismatch = np.abs(pos - neg) > PAIR_TOL * np.abs(pos)
    if np.any(mismatch):
        k = np.flatnonzero(mismatch)[0]
        raise NumericalError(
            f"eigenvalue {pos[k]:.6e} rad/s lacks a mirrored partner "
            f"(closest {neg[k]:.6e})")


def _branch_order(freqs, fractions, n_photon):
    """Ascending order; within degenerate groups photon-heavy branches come
    first, then lower dominant bare-mode index."""
    order = list(np.argsort(freqs, kind="stable"))
    i = 0
    while i < len(order):
        j = i + 1
        while (j < len(order)
               and freqs[order[j]] - freqs[order[i]]
               <= DEGENERACY_TOL * max(abs(freqs[order[i]]), abs(freqs[order[j]]))):
            j += 1
        if j - i > 1:
            group = order[i:j]
            photon = fractions[:, :n_photon].sum(axis=1)
            group.sort(key=lambda k: (-photon[k], int(np.argmax(fractions[k]))))
            order[i:j] = group
        i = j
    return np.array(order)


def diagonalize(ham):
    """Diagonalize a stable quadratic form into its polariton modes."""
    m = build_dynamical_matrix(ham)
    try:
        evals, evecs = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed to converge: {exc}") from exc

    lam = _real_eigenvalues(evals)
    n = ham.n_modes
    _check_pairing(lam, n)

    pos = np.flatnonzero(lam > 0.0)
    freqs = lam[pos]
    x = np.empty((n, n), dtype=complex)
    y = np.empty((n, n), dtype=complex)
    for row, k in enumerate(pos):
        u = evecs[:n, k]
        v = evecs[n:, k]
        norm = float(np.vdot(u, u).real - np.vdot(v, v).real)
        if norm <= 0.0:
            raise NumericalError(
                f"eigenvector at {freqs[row]:.6e} rad/s has non-positive "
                f"symplectic norm {norm:.3e}")
        scale = 1.0 / np.sqrt(norm)
        x[row] = np.conj(u) * scale
        y[row] = -np.conj(v) * scale

    fractions = np.abs(x) ** 2 - np.abs(y) ** 2
    order = _branch_order(freqs, fractions, ham.n_photon)
    return EigenSolution(frequencies=freqs[order] / RAD_PER_SEC_PER_THZ,
                         hopfield_x=x[order], hopfield_y=y[order],
                         fractions=fractions[order], n_photon=ham.n_photon)


def hopfield_fractions(solution):
    """Per-branch bare-mode weights |X|^2 - |Y|^2; rows sum to one."""
    fractions = (np.abs(solution.hopfield_x) ** 2
                 - np.abs(solution.hopfield_y) ** 2)
    sums = fractions.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-9):
        raise NumericalError(
            f"symplectic normalization violated: row sums {sums}")
    return fractions


def positive_frequencies(hams):
    """Positive eigenfrequencies (THz, sorted per row) of a batch of
    Hamiltonians of equal size; no eigenvectors. Fast path for fitting."""
    mats = np.stack([build_dynamical_matrix(h) for h in hams])
    evals = np.linalg.eigvals(mats)
    n = hams[0].n_modes
    out = np.empty((len(hams), n))
    for i, row in enumerate(evals):
        lam = _real_eigenvalues(row, context=f" (batch entry {i})")
        _check_pairing(lam, n)
        out[i] = np.sort(lam[lam > 0.0])
    return out / RAD_PER_SEC_PER_THZ
