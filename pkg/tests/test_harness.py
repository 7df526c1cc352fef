"""Tests for the experiment campaigns, fits, CSV output, config, and CLI."""

import math
import os

import numpy as np
import pytest

from qrps.cli import main as cli_main
from qrps.deliberation import grover_success, optimal_k
from qrps.harness import (
    BASELINE_DD_NOISE,
    DEFAULT_EPSILONS,
    ConfigError,
    HarnessConfig,
    classical_csv,
    dd_check,
    dd_curves_csv,
    dd_windows_csv,
    fit_linear,
    fit_power_law,
    load_config,
    ratio_csv,
    ratio_experiment,
    scaling_csv,
    scaling_experiment,
)
from qrps.noise import NoiseModel

# Measured success probabilities for the seven grid points (k = 1..7) and
# the measured ratio rows at one diffusion step, used as fit fixtures.
MEASURED_EPS_TILDE = (0.89, 0.70, 0.77, 0.76, 0.74, 0.76, 0.66)
MEASURED_RATIO_K1 = (
    (0.01, 0.075, 0.009),
    (0.36, 0.50, 0.03),
    (0.71, 0.89, 0.04),
    (1.06, 1.25, 0.06),
    (1.41, 1.48, 0.06),
    (1.76, 1.85, 0.10),
    (1.00, 1.17, 0.06),
)


# ----------------------------------------------------------------------- fits

def test_fit_power_law_recovers_exact_exponents():
    eps = np.array(DEFAULT_EPSILONS)
    for exponent in (0.5, 1.0):
        pts = [(e, e**-exponent) for e in eps]
        fit = fit_power_law(pts)
        assert abs(fit.exponent - exponent) < 1e-9
        assert fit.residual_rms < 1e-12


def test_fit_power_law_validation():
    with pytest.raises(ValueError):
        fit_power_law([(0.1, 1.0), (0.2, 2.0)])
    with pytest.raises(ValueError):
        fit_power_law([(0.1, 1.0), (0.1, 2.0), (0.1, 3.0)])
    with pytest.raises(ValueError):
        fit_power_law([(0.1, 1.0), (0.2, -2.0), (0.3, 3.0)])


def test_fit_power_law_on_measured_costs():
    pts = [
        (eps, (2 * k + 1) / et)
        for (eps, k), et in zip(
            ((e, optimal_k(e)) for e in DEFAULT_EPSILONS), MEASURED_EPS_TILDE
        )
    ]
    fit = fit_power_law(pts)
    assert abs(fit.exponent - 0.57) < 0.05 + fit.exponent_err


def test_fit_linear_exact_recovery():
    x = np.linspace(0.0, 2.0, 9)
    fit = fit_linear(list(zip(x, 1.1 * x + 0.05)))
    assert abs(fit.slope - 1.1) < 1e-9
    assert abs(fit.intercept - 0.05) < 1e-9
    fit_w = fit_linear(list(zip(x, x)), errors=[0.1] * len(x))
    assert abs(fit_w.slope - 1.0) < 1e-9
    assert abs(fit_w.intercept) < 1e-9


def test_fit_linear_validation():
    with pytest.raises(ValueError):
        fit_linear([(1.0, 1.0)])
    with pytest.raises(ValueError):
        fit_linear([(1.0, 1.0), (1.0, 2.0)])


def test_fit_linear_on_measured_ratios_slope_above_one():
    pts = [(r_in, r_out) for r_in, r_out, _ in MEASURED_RATIO_K1]
    errs = [e for _, _, e in MEASURED_RATIO_K1]
    fit = fit_linear(pts, errs)
    assert fit.slope > 1.0


# ------------------------------------------------------------------- scaling

IDEAL_EPS_TILDE = (0.9932, 0.9993, 0.9998, 1.0000, 1.0000, 1.0000, 1.0000)


def test_scaling_ideal_matches_theory_column():
    result = scaling_experiment(HarnessConfig(ideal=True))
    for row, expected in zip(result.rows, IDEAL_EPS_TILDE):
        assert abs(row.eps_tilde - expected) < 5e-4
        assert abs(row.b00 - row.b01) < 1e-12
        assert sum(row.counts) == row.shots
        assert abs(row.cost - (2 * row.k + 1) / row.eps_tilde) < 1e-12
    assert [row.k for row in result.rows] == [1, 2, 3, 4, 5, 6, 7]


def test_scaling_ideal_exponents():
    result = scaling_experiment(HarnessConfig(ideal=True))
    assert 0.45 <= result.fit.exponent <= 0.55
    assert 0.95 <= result.classical_fit.exponent <= 1.05


def test_scaling_noisy_rows_satisfy_identities():
    cfg = HarnessConfig(noise=NoiseModel(dephasing_exponent=1 / 14), seed=5, shots=400)
    result = scaling_experiment(cfg)
    for row in result.rows:
        assert sum(row.counts) == 400
        assert abs(row.eps_tilde - (row.b00 + row.b01)) < 1e-12
        assert abs(row.cost - (2 * row.k + 1) / row.eps_tilde) < 1e-12
        expected_err = math.sqrt(row.eps_tilde * (1 - row.eps_tilde) / 400)
        assert abs(row.err_eps_tilde - expected_err) < 1e-12


# --------------------------------------------------------------------- ratio

def test_ratio_ideal_preserves_every_row():
    result = ratio_experiment(HarnessConfig(ideal=True))
    assert len(result.rows) == 13
    for row in result.rows:
        assert abs(row.r_out - row.r_in) < 1e-6
    for fit in result.fits.values():
        assert abs(fit.slope - 1.0) < 1e-6
        assert abs(fit.intercept) < 1e-6


def test_ratio_input_ratios_match_design_values():
    result = ratio_experiment(HarnessConfig(ideal=True))
    r_by_pair = {(row.k, row.a00): row.r_in for row in result.rows}
    assert abs(r_by_pair[(3, 0.03357)] - 2.00) < 1e-3
    assert abs(r_by_pair[(1, 0.00271)] - 0.01) < 2e-5


def test_ratio_rejects_zero_a01():
    cfg = HarnessConfig(ideal=True, ratio_rows=((1, 0.1, 0.0),))
    with pytest.raises(ConfigError):
        ratio_experiment(cfg)


# ------------------------------------------------------------------ dd check

def test_dd_check_zero_detuning_matches_ideal():
    cfg = HarnessConfig(
        noise=NoiseModel(), detunings=(0.0,), epsilons=(0.2742, 0.0504)
    )
    result = dd_check(cfg)
    for point in result.curves:
        k = optimal_k(point.epsilon)
        assert abs(point.eps_tilde - grover_success(point.epsilon, k)) < 1e-9


def test_dd_check_cost_ordering_and_anchor():
    cfg = HarnessConfig(noise=BASELINE_DD_NOISE, detunings=(0.0, -0.04, -0.08))
    result = dd_check(cfg)
    by_delta = {}
    for p in result.curves:
        by_delta.setdefault(p.detuning, []).append(p)
    for a, b in ((-0.08, -0.04), (-0.04, 0.0)):
        for pa, pb in zip(by_delta[a], by_delta[b]):
            assert pa.cost >= pb.cost, (a, b, pa.epsilon)
    anchor = [p for p in by_delta[-0.04] if p.k == 6]
    assert abs(anchor[0].eps_tilde - 0.77) < 0.05
    assert len(result.windows) == 2
    for w in result.windows:
        assert w.infidelity_ur14 < w.infidelity_cpmg
        assert w.infidelity_ur14 < w.infidelity_none


# ----------------------------------------------------------------- CSV output

def test_scaling_csv_layout_and_determinism():
    cfg = HarnessConfig(noise=NoiseModel(dephasing_exponent=1 / 14), seed=3, shots=200)
    a = scaling_csv(scaling_experiment(cfg))
    b = scaling_csv(scaling_experiment(cfg))
    assert a == b
    lines = a.splitlines()
    assert lines[0] == "k,epsilon,a00,a01,shots,c00,c01,c10,c11,b00,b01,eps_tilde,err_eps_tilde,cost,err_cost"
    assert len(lines) == 8
    assert a.endswith("\n")
    first = lines[1].split(",")
    assert first[0] == "1" and first[1] == "0.2742"


def test_ratio_csv_layout():
    text = ratio_csv(ratio_experiment(HarnessConfig(ideal=True)))
    lines = text.splitlines()
    assert lines[0] == "k,a00,a01,r_in,b00,b01,r_out,err_r_out"
    assert len(lines) == 14
    # floats carry six significant digits
    assert lines[1].split(",")[3] == "0.00998379"


def test_dd_csv_layouts():
    cfg = HarnessConfig(noise=BASELINE_DD_NOISE, detunings=(0.0, -0.04), epsilons=(0.2742,))
    result = dd_check(cfg)
    curves = dd_curves_csv(result)
    windows = dd_windows_csv(result)
    assert curves.splitlines()[0] == "detuning,k,epsilon,eps_tilde,cost"
    assert windows.splitlines()[0] == "detuning,infidelity_ur14,infidelity_cpmg,infidelity_none"


def test_classical_csv_layout():
    result = scaling_experiment(HarnessConfig(ideal=True, epsilons=(0.5, 0.25, 0.125)))
    text = classical_csv(result, 1600)
    assert text.splitlines()[0] == "epsilon,runs,mean_cost"
    assert len(text.splitlines()) == 4


# -------------------------------------------------------------------- config

def test_load_config_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "[noise]\n"
        "detuning_ratio = -0.04\n"
        "dephasing_exponent = 0.0714\n"
        "[experiment]\n"
        "epsilons = 0.2742, 0.0504\n"
        "shots = 200\n"
        "seed = 9\n"
        "fidelity = gate\n"
        "[pulses]\n"
        "rabi_hz = 20920\n"
        "dd_sets = 5\n"
    )
    cfg = load_config(str(path))
    assert cfg.noise.detuning_ratio == -0.04
    assert cfg.epsilons == (0.2742, 0.0504)
    assert cfg.shots == 200 and cfg.seed == 9 and cfg.fidelity == "gate"
    assert abs(cfg.pulses.rabi - 2 * math.pi * 20920) < 1e-9
    assert cfg.pulses.dd_sets == 5


def test_load_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("[noise]\ndetuning = -0.04\n")
    with pytest.raises(ConfigError) as err:
        load_config(str(path))
    assert "detuning" in str(err.value) and "[noise]" in str(err.value)


def test_load_config_rejects_unknown_section(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("[lasers]\npower = 3\n")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_load_config_rejects_bad_value(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("[experiment]\nshots = many\n")
    with pytest.raises(ConfigError) as err:
        load_config(str(path))
    assert "shots" in str(err.value)


# ----------------------------------------------------------------------- CLI

def test_cli_scaling_ideal_round_trip(tmp_path):
    out = str(tmp_path / "scaling.csv")
    assert cli_main(["scaling", "--ideal", "--out", out]) == 0
    text = open(out).read()
    assert text.startswith("k,epsilon,")
    assert os.path.exists(str(tmp_path / "scaling_classical.csv"))
    # byte-identical rerun
    out2 = str(tmp_path / "scaling2.csv")
    assert cli_main(["scaling", "--ideal", "--out", out2]) == 0
    assert open(out2).read() == text


def test_cli_ratio_and_fit(tmp_path, capsys):
    out = str(tmp_path / "ratio.csv")
    assert cli_main(["ratio", "--ideal", "--out", out]) == 0
    assert cli_main(["fit", "--kind", "linear", "--input", out]) == 0
    captured = capsys.readouterr().out
    assert "slope 1.000000" in captured


def test_cli_learn_demo(tmp_path, capsys):
    out = str(tmp_path / "learn.csv")
    code = cli_main(
        ["learn-demo", "--actions", "20", "--rewarded", "3", "--runs", "20",
         "--seed", "1", "--out", out]
    )
    assert code == 0
    assert "quantum" in capsys.readouterr().out
    assert len(open(out).read().splitlines()) == 41


def test_cli_exit_codes(tmp_path):
    assert cli_main(["scaling", "--bogus-flag"]) == 1
    assert cli_main(["fit", "--input", str(tmp_path / "missing.csv")]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("epsilon,cost\n0.1,-1\n0.2,2\n0.3,3\n")
    assert cli_main(["fit", "--input", str(bad)]) == 2
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[noise]\nwibble = 1\n")
    assert cli_main(["scaling", "--ideal", "--config", str(cfg)]) == 1


def test_cli_plot_stub(tmp_path):
    out = str(tmp_path / "scaling.csv")
    assert cli_main(["scaling", "--ideal", "--out", out, "--plot-stub"]) == 0
    stub = tmp_path / "scaling_plot.py"
    assert stub.exists()
    assert "matplotlib" in stub.read_text()
