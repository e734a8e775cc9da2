"""Magnetic-bias sweeps, branch bookkeeping, and spectrum synthesis.

A sweep diagonalizes the coupled system on a grid of cyclotron frequencies
and keeps branch columns continuous by nearest-frequency matching between
adjacent grid points. Feature detection classifies the matched columns into
flat photon lines, the bare cyclotron line, and the coupled polariton
branches, and extracts the quantities used to compare parameter sets:
anticrossing gaps, the inflection of the middle branch, and its asymptotes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bogoliubov import diagonalize
from .errors import InstabilityError
from .model import assemble_hamiltonian

# branch-classification thresholds (THz unless noted)
VARIATION_TOL = 0.02        # minimum total frequency variation of a coupled branch
MATTER_FRACTION_FLOOR = 1e-3  # minimum peak matter weight of a coupled branch
CR_LINE_TOL = 0.05          # maximum deviation from nu = nu_c for the bare line
JUMP_TOL = 0.05             # continuity bound between adjacent points at step <= 0.01
FRACTION_MATCH_WEIGHT = 0.05  # THz penalty per unit L1 fraction distance


@dataclass(frozen=True)
class SweepResult:
    """Branch frequencies and mode fractions over a cyclotron-frequency grid.

    branches[t, k] is the frequency (THz) of branch column k at
    nu_c_values[t]; fractions[t, k, j] the weight of bare mode j (photon
    modes first) in that branch."""

    nu_c_values: np.ndarray
    branches: np.ndarray
    fractions: np.ndarray
    n_photon: int

    def __post_init__(self):
        for name in ("nu_c_values", "branches", "fractions"):
            arr = np.array(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_branches(self):
        return self.branches.shape[1]

    def photon_fractions(self):
        """Total photon weight per point and branch."""
        return self.fractions[:, :, :self.n_photon].sum(axis=2)

    def matter_fractions(self):
        """Total matter weight per point and branch."""
        return self.fractions[:, :, self.n_photon:].sum(axis=2)


@dataclass(frozen=True)
class DispersionFeatures:
    """Summary of a swept dispersion.

    n_coupled_branches counts columns that both move with the bias and carry
    matter weight while not tracking the bare nu = nu_c line; columns that do
    track it are reported in n_cr_lines. gap_at_resonance holds the minimal
    branch spacing bracketing each bare photon frequency. The inflection and
    asymptotes describe the middle coupled branch and are None when there is
    no unique middle branch."""

    n_coupled_branches: int
    n_cr_lines: int
    gap_at_resonance: tuple
    inflection_nu_c: float | None
    asymptote_low: float | None
    asymptote_high: float | None


def _match_columns(prev_freqs, prev_fracs, freqs, fracs):
    """Permutation sigma with freqs[sigma[i]] continuing branch column i.

    The metric mixes frequency distance with the L1 distance of the Hopfield
    fraction rows. The fraction term decides ties at (near-)degenerate
    crossings, so a column follows its mode character diabatically through
    anticrossings narrower than the grid step instead of swapping identity;
    at genuine wide anticrossings the frequencies never approach and the
    metric reduces to nearest-frequency matching. Greedy assignment plus
    pairwise-swap refinement of the total cost."""
    n = len(freqs)
    dist = (np.abs(prev_freqs[:, None] - freqs[None, :])
            + FRACTION_MATCH_WEIGHT
            * np.abs(prev_fracs[:, None, :] - fracs[None, :, :]).sum(axis=2))
    sigma = np.full(n, -1)
    taken = np.zeros(n, dtype=bool)
    for flat in np.argsort(dist, axis=None):
        i, j = divmod(int(flat), n)
        if sigma[i] < 0 and not taken[j]:
            sigma[i] = j
            taken[j] = True
    improved = True
    while improved:
        improved = False
        for i in range(n):
            for k in range(i + 1, n):
                if (dist[i, sigma[k]] + dist[k, sigma[i]]
                        < dist[i, sigma[i]] + dist[k, sigma[k]]):
                    sigma[i], sigma[k] = sigma[k], sigma[i]
                    improved = True
    return sigma


def sweep(photons, coupling, nu_c_grid):
    """Diagonalize over a grid of cyclotron frequencies (THz, ascending)."""
    grid = np.asarray(nu_c_grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise ValueError("nu_c grid must contain at least two points")
    if np.any(grid < 0.0):
        raise ValueError("nu_c grid must be non-negative")
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("nu_c grid must be strictly ascending")

    n = 2 * coupling.n_photon
    branches = np.empty((len(grid), n))
    fractions = np.empty((len(grid), n, n))
    for t, nu_c in enumerate(grid):
        try:
            sol = diagonalize(assemble_hamiltonian(photons, nu_c, coupling))
        except InstabilityError as exc:
            raise InstabilityError(f"at nu_c = {nu_c:.6g} THz: {exc}") from exc
        if t == 0:
            order = np.arange(n)
        else:
            order = _match_columns(branches[t - 1], fractions[t - 1],
                                   sol.frequencies, sol.fractions)
        branches[t] = sol.frequencies[order]
        fractions[t] = sol.fractions[order]
    return SweepResult(nu_c_values=grid, branches=branches,
                       fractions=fractions, n_photon=coupling.n_photon)


def _middle_branch(result, coupled):
    """Index of the middle coupled branch, or None without a unique middle."""
    if len(coupled) == 0 or len(coupled) % 2 == 0:
        return None
    means = result.branches[:, coupled].mean(axis=0)
    return coupled[int(np.argsort(means)[len(coupled) // 2])]


def _inflection(nu_c, freqs):
    """nu_c of the sign change of the second difference nearest the point of
    steepest slope; None if the curvature never changes sign."""
    d2 = freqs[2:] - 2.0 * freqs[1:-1] + freqs[:-2]
    sign_changes = np.flatnonzero(np.sign(d2[:-1]) * np.sign(d2[1:]) < 0)
    if len(sign_changes) == 0:
        return None
    slope = np.abs(freqs[2:] - freqs[:-2])
    # d2[s] and d2[s+1] straddle zero between interior points s+1 and s+2
    best = sign_changes[np.argmax(np.minimum(slope[sign_changes],
                                             slope[sign_changes + 1]))]
    frac = d2[best] / (d2[best] - d2[best + 1])
    return float(nu_c[best + 1] + frac * (nu_c[best + 2] - nu_c[best + 1]))


def detect_features(result, photons):
    """Classify branch columns and extract dispersion features."""
    nu = result.nu_c_values
    if nu[0] > 0.05 + 1e-12 or nu[-1] < 2.0 - 1e-12:
        raise ValueError(
            f"sweep range [{nu[0]:.6g}, {nu[-1]:.6g}] THz too narrow for "
            f"feature detection; need it to span [0.05, 2.0]")

    variation = result.branches.max(axis=0) - result.branches.min(axis=0)
    # a coupled branch acquires matter weight somewhere along the sweep even
    # if it is photon-pure at the endpoints
    peak_matter = result.matter_fractions().max(axis=0)
    diag_dev = np.abs(result.branches - nu[:, None]).max(axis=0)

    cr_line = diag_dev <= CR_LINE_TOL
    coupled = np.flatnonzero((variation > VARIATION_TOL)
                             & (peak_matter > MATTER_FRACTION_FLOOR)
                             & ~cr_line)

    gaps = []
    for mode in photons:
        above = np.where(result.branches >= mode.frequency,
                         result.branches, np.inf).min(axis=1)
        below = np.where(result.branches < mode.frequency,
                         result.branches, -np.inf).max(axis=1)
        spread = above - below
        spread = spread[np.isfinite(spread)]
        gaps.append(float(spread.min()) if len(spread) else float("nan"))

    middle = _middle_branch(result, coupled)
    if middle is None:
        inflection = asym_low = asym_high = None
    else:
        freqs = result.branches[:, middle]
        inflection = _inflection(nu, freqs)
        asym_low = float(freqs[0])
        asym_high = float(freqs[-1])

    return DispersionFeatures(n_coupled_branches=len(coupled),
                              n_cr_lines=int(np.count_nonzero(cr_line)),
                              gap_at_resonance=tuple(gaps),
                              inflection_nu_c=inflection,
                              asymptote_low=asym_low,
                              asymptote_high=asym_high)


@dataclass(frozen=True)
class SpectrumConfig:
    """Transmission-proxy settings: probe grid (THz), half-width-at-half-max
    linewidths per branch (THz, scalar broadcasts), and how dips are weighted
    ("photon_fraction" or "equal")."""

    frequency_grid: np.ndarray
    linewidths: np.ndarray
    weight_mode: str = "photon_fraction"

    def __post_init__(self):
        grid = np.atleast_1d(np.array(self.frequency_grid, dtype=float))
        if len(grid) < 2 or np.any(np.diff(grid) <= 0.0):
            raise ValueError("frequency grid must be ascending with >= 2 points")
        widths = np.atleast_1d(np.array(self.linewidths, dtype=float))
        if np.any(widths <= 0.0):
            raise ValueError("linewidths must be positive")
        if self.weight_mode not in ("photon_fraction", "equal"):
            raise ValueError(f"unknown weight mode {self.weight_mode!r}")
        grid.flags.writeable = False
        widths.flags.writeable = False
        object.__setattr__(self, "frequency_grid", grid)
        object.__setattr__(self, "linewidths", widths)


def spectrum_from_branches(freqs, weights, config):
    """Transmission proxy 1 - sum_k w_k L(nu; nu_k, gamma_k), clipped to [0, 1].

    L is a unit-peak Lorentzian of HWHM gamma_k."""
    freqs = np.asarray(freqs, dtype=float)
    weights = np.clip(np.asarray(weights, dtype=float), 0.0, None)
    widths = np.broadcast_to(config.linewidths, freqs.shape)
    nu = config.frequency_grid[:, None]
    dips = weights * widths ** 2 / ((nu - freqs) ** 2 + widths ** 2)
    return np.clip(1.0 - dips.sum(axis=1), 0.0, 1.0)


def synthesize_spectrum(solution, config):
    """Transmission proxy of one diagonalized operating point."""
    if config.weight_mode == "photon_fraction":
        weights = solution.photon_fractions
    else:
        weights = np.full(solution.n_modes, 1.0 / solution.n_modes)
    return spectrum_from_branches(solution.frequencies, weights, config)


def write_branch_csv(result, stream):
    """Branch CSV: one row per (nu_c, branch), 9 significant digits."""
    n_ph = result.n_photon
    n_mat = result.fractions.shape[2] - n_ph
    header = ["nu_c_THz", "branch", "freq_THz"]
    header += [f"photon_frac_{j + 1}" for j in range(n_ph)]
    header += [f"matter_frac_{j + 1}" for j in range(n_mat)]
    stream.write(",".join(header) + "\n")
    for t, nu_c in enumerate(result.nu_c_values):
        for k in range(result.n_branches):
            row = [f"{nu_c:.9g}", str(k + 1), f"{result.branches[t, k]:.9g}"]
            row += [f"{result.fractions[t, k, j]:.9g}"
                    for j in range(result.fractions.shape[2])]
            stream.write(",".join(row) + "\n")
