"""Peak-to-branch assignment, residual behavior, and parameter recovery."""

import numpy as np
import pytest

import mmhopfield as mm
from mmhopfield.fit import _assignment_cost

TRUE_RATIO_11 = 0.37
TRUE_RATIO_2 = 0.2124026
TRUE_ETA = 0.15


def _truth_params(photon_pair):
    return mm.FitParams(omega_r_11=TRUE_RATIO_11 * photon_pair[0].omega,
                        omega_r_2_tilde=TRUE_RATIO_2 * photon_pair[1].omega,
                        eta=TRUE_ETA)


def _synthetic_dataset(photon_pair, n_points=40, noise=0.0, seed=0,
                       keep=slice(None)):
    grid = np.linspace(0.1, 2.15, n_points)
    coupling = mm.couplings_from_ratios(photon_pair, TRUE_RATIO_11,
                                        TRUE_RATIO_2, TRUE_ETA)
    res = mm.sweep(photon_pair, coupling, grid)
    rng = np.random.default_rng(seed)
    records = []
    for t, nu_c in enumerate(grid):
        peaks = np.sort(res.branches[t])[keep]
        if noise > 0.0:
            peaks = np.sort(peaks + rng.normal(0.0, noise, size=len(peaks)))
        records.append(mm.PeakRecord(nu_c=float(nu_c),
                                     peaks=tuple(float(p) for p in peaks)))
    return mm.PeakDataset(records=tuple(records), source_label="synthetic")


def test_assignment_prefers_nearest_branch():
    assert _assignment_cost((1.0,), np.array([0.9, 2.0])) == pytest.approx(
        0.01, rel=1e-12)


def test_assignment_is_order_preserving():
    cost = _assignment_cost((1.0, 2.0), np.array([0.5, 1.1, 1.9, 3.0]))
    assert cost == pytest.approx(0.01 + 0.01, rel=1e-12)


def test_assignment_exact_match_costs_nothing():
    freqs = np.array([0.4, 0.9, 1.7, 2.3])
    assert _assignment_cost((0.9, 2.3), freqs) == 0.0


def test_assignment_rejects_surplus_peaks():
    with pytest.raises(ValueError, match="cannot be assigned"):
        _assignment_cost((0.1, 0.2, 0.3), np.array([1.0, 2.0]))
    with pytest.raises(ValueError, match="not supported"):
        _assignment_cost(tuple(np.linspace(0.1, 0.6, 6)), np.arange(1.0, 9.0))


def test_residual_vanishes_at_truth(photon_pair):
    data = _synthetic_dataset(photon_pair)
    rms = mm.residual(_truth_params(photon_pair), data, photon_pair)
    assert rms < 1e-10


def test_residual_grows_under_perturbation(photon_pair):
    data = _synthetic_dataset(photon_pair)
    truth = _truth_params(photon_pair)
    bumped = mm.FitParams(omega_r_11=1.1 * truth.omega_r_11,
                          omega_r_2_tilde=truth.omega_r_2_tilde,
                          eta=truth.eta)
    assert mm.residual(bumped, data, photon_pair) > mm.residual(
        truth, data, photon_pair)


def test_residual_handles_partial_peak_lists(photon_pair):
    # records keep only the two outermost branches; truth still fits exactly
    data = _synthetic_dataset(photon_pair, keep=slice(0, 4, 3))
    assert mm.residual(_truth_params(photon_pair), data, photon_pair) < 1e-10


def test_coverage_requires_enough_records(photon_pair):
    records = (mm.PeakRecord(nu_c=0.4, peaks=(0.5,)),
               mm.PeakRecord(nu_c=1.8, peaks=(1.7,)))
    with pytest.raises(mm.DataCoverageError, match="at least 3"):
        mm.fit(mm.PeakDataset(records=records), photon_pair)


def test_coverage_requires_bracketing_each_mode(photon_pair):
    # all records below the second photon frequency
    records = tuple(mm.PeakRecord(nu_c=nu, peaks=(0.5,))
                    for nu in (0.2, 0.5, 0.7, 1.0))
    with pytest.raises(mm.DataCoverageError, match="mode 2"):
        mm.fit(mm.PeakDataset(records=records), photon_pair)


def test_fit_recovers_noiseless_parameters(photon_pair):
    data = _synthetic_dataset(photon_pair)
    config = mm.FitConfig(ratio_11_bounds=(0.0, 0.8),
                          ratio_2_bounds=(0.0, 0.8),
                          eta_fixed=TRUE_ETA, restarts=3, seed=1)
    result = mm.fit(data, photon_pair, config)
    truth = _truth_params(photon_pair)
    assert result.converged
    assert result.residual_rms < 1e-6
    assert abs(result.omega_r_11 - truth.omega_r_11) < 5e-3 * truth.omega_r_11
    assert abs(result.omega_r_2_tilde
               - truth.omega_r_2_tilde) < 5e-3 * truth.omega_r_2_tilde
    assert result.n_evaluations > 0


def test_fit_recovers_eta_when_free(photon_pair):
    data = _synthetic_dataset(photon_pair)
    config = mm.FitConfig(ratio_11_bounds=(0.1, 0.6),
                          ratio_2_bounds=(0.05, 0.5),
                          fit_eta=True, eta_bounds=(0.0, 0.6),
                          restarts=3, seed=3)
    result = mm.fit(data, photon_pair, config)
    truth = _truth_params(photon_pair)
    assert abs(result.omega_r_11 - truth.omega_r_11) < 1e-2 * truth.omega_r_11
    assert abs(result.omega_r_2_tilde
               - truth.omega_r_2_tilde) < 1e-2 * truth.omega_r_2_tilde
    assert abs(result.eta - TRUE_ETA) < 0.05


def test_fit_reports_failure_on_starved_budget(photon_pair):
    data = _synthetic_dataset(photon_pair, n_points=8)
    config = mm.FitConfig(restarts=1, seed=0, max_evaluations=5,
                          eta_fixed=TRUE_ETA)
    result = mm.fit(data, photon_pair, config)
    assert not result.converged


def test_fit_config_validation():
    with pytest.raises(ValueError):
        mm.FitConfig(ratio_11_bounds=(0.5, 0.5))
    with pytest.raises(ValueError):
        mm.FitConfig(eta_fixed=1.5)
    with pytest.raises(ValueError):
        mm.FitConfig(restarts=0)


def test_peak_record_validation():
    with pytest.raises(ValueError):
        mm.PeakRecord(nu_c=0.5, peaks=())
    with pytest.raises(ValueError):
        mm.PeakRecord(nu_c=0.5, peaks=(0.4, 0.4))
    with pytest.raises(ValueError):
        mm.PeakRecord(nu_c=0.5, peaks=(-0.1,))
    with pytest.raises(ValueError):
        mm.PeakRecord(nu_c=-0.5, peaks=(0.4,))


def test_peaks_file_round_trip(tmp_path, photon_pair):
    data = _synthetic_dataset(photon_pair, n_points=7, keep=slice(0, 3))
    path = tmp_path / "peaks.csv"
    mm.save_peaks(path, data)
    back = mm.load_peaks(path)
    assert len(back.records) == len(data.records)
    for a, b in zip(back.records, data.records):
        assert a.nu_c == pytest.approx(b.nu_c, rel=1e-8)
        assert a.peaks == pytest.approx(b.peaks, rel=1e-8)


def test_peaks_file_ragged_rows(tmp_path):
    path = tmp_path / "peaks.csv"
    path.write_text("nu_c_THz,peak1_THz,peak2_THz\n"
                    "0.4,0.5,\n"
                    "1.0,0.6,1.7\n"
                    "2.1,0.9,\n")
    data = mm.load_peaks(path)
    assert [len(r.peaks) for r in data.records] == [1, 2, 1]


def test_peaks_file_bad_header(tmp_path):
    path = tmp_path / "peaks.csv"
    path.write_text("bias,peak\n0.4,0.5\n")
    with pytest.raises(mm.ProfileFormatError) as err:
        mm.load_peaks(path)
    assert f"{path}:1" in str(err.value)


def test_peaks_file_bad_cell_reports_line(tmp_path):
    path = tmp_path / "peaks.csv"
    path.write_text("nu_c_THz,peak1_THz\n0.4,0.5\n0.6,oops\n")
    with pytest.raises(mm.ProfileFormatError) as err:
        mm.load_peaks(path)
    assert f"{path}:3" in str(err.value)
