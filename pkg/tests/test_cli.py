import filecmp

import numpy as np
import pytest

from esdlab import acceptance, cli
from esdlab.esd import UNIT_CIRCLE, radial_transport_distance
from esdlab.experiments import (
    CHI2_8BIN_CRIT, ConfigError, ExperimentConfig, angular_chi2, block_trials, resolve_b,
    run_experiment,
)
from esdlab.matrix import load_matrix


def run(argv):
    return cli.main(argv)


def read_summary(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config-sha256=")
    head = lines[1].split(",")
    return [dict(zip(head, ln.split(","))) for ln in lines[2:]]


# ----------------------------------------------------------------- config

def test_resolve_b_rules():
    assert resolve_b("n-minus-1", 10) == 9
    assert resolve_b("sqrt-n", 512) == 22
    assert resolve_b("loglog-n", 512) == 1
    assert resolve_b("fixed:3", 10) == 3
    for rule in ("fixed:x", "cubic", "fixed:10"):
        with pytest.raises(ValueError):
            resolve_b(rule, 10)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig.build("figure1", {"n": (10, 5)})
    with pytest.raises(ConfigError):
        ExperimentConfig.build("replacement", {"ensembles": ("cgauss",)})
    with pytest.raises(ConfigError):
        ExperimentConfig.build("stability", {"z_grid": (1j,)})
    with pytest.raises(ConfigError):
        ExperimentConfig.parse_pairs("colour = red")
    cfg = ExperimentConfig.build("figure1")
    assert cfg.n == (50, 500) and cfg.gamma == 10.0 and cfg.seeds == 5
    assert cfg.sha256() == ExperimentConfig.build("figure1", {"jobs": 4}).sha256()
    assert cfg.sha256() != ExperimentConfig.build("figure1", {"seed_base": 1}).sha256()


def test_exit_codes(tmp_path, capsys):
    assert run(["figure1", "--n", "10,5", "--out", str(tmp_path)]) == 2
    assert run(["replacement", "--ensemble", "cgauss", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("experiment=figure1\nwidth=3\n")
    assert run(["figure1", "--config", str(bad)]) == 2
    other = tmp_path / "other.cfg"
    other.write_text("experiment=stability\n")
    assert run(["figure1", "--config", str(other)]) == 2
    assert run(["figure1", "--config", str(tmp_path / "none.cfg")]) == 2
    assert run(["selftest", "--only", "nope"]) == 2
    err = capsys.readouterr().err
    assert "config error" in err


def test_selftest_codes(monkeypatch, capsys):
    assert run(["selftest", "--only", "10"]) == 0
    assert run(["selftest", "--only", "2b"]) == 0  # documented failure does not gate
    assert "[FAIL (documented)]" in capsys.readouterr().out

    def broken(jobs=1):
        return acceptance.CriterionResult("10", "broken", False, "forced", 0.0)

    monkeypatch.setitem(acceptance.CRITERIA, "10", lambda: broken())
    assert run(["selftest", "--only", "10"]) == 3


# ------------------------------------------------------------ experiments

def test_figure1_outputs_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["figure1", "--n", "20,40", "--seeds", "2", "--gamma", "3"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b), "--jobs", "2"]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    assert "figure1_n20_cgauss.svg" in names and "figure1_summary.csv" in names
    match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    assert not mismatch and not errors
    rows = read_summary(a / "figure1_summary.csv")
    assert [r["n"] for r in rows] == ["20", "40"]


def test_config_file_equals_flags(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("experiment = manystable  # comment\nn = 32\nseeds = 2\nz-grid = 0,2\n")
    assert run(["manystable", "--config", str(cfgfile), "--out", str(tmp_path / "c")]) == 0
    assert run(["manystable", "--n", "32", "--seeds", "2", "--z-grid", "0,2",
                "--out", str(tmp_path / "f")]) == 0
    a = (tmp_path / "c" / "manystable_trials.csv").read_text().splitlines()
    b = (tmp_path / "f" / "manystable_trials.csv").read_text().splitlines()
    assert a == b


def test_dump_matrix(tmp_path):
    p = tmp_path / "m.txt"
    assert run(["small-blocks", "--n", "12", "--seeds", "1", "--out", str(tmp_path),
                "--dump-matrix", str(p)]) == 0
    with p.open() as fh:
        M = load_matrix(fh)
    assert M.n == 12 and abs(M.entries[0, 1] - 1) < 1e-2 and abs(M.entries[2, 3]) < 1e-2


def test_zero_noise_control(tmp_path):
    assert run(["small-blocks", "--n", "16,32", "--b", "fixed:2", "--gamma", "inf", "--seeds", "2",
                "--out", str(tmp_path)]) == 0
    for r in read_summary(tmp_path / "small_blocks_summary.csv"):
        assert float(r["median_radial_cdf"]) == 0.0 and float(r["median_radial_transport"]) == 0.0


def test_stability_outputs(tmp_path):
    assert run(["stability", "--n", "12", "--b", "fixed:3", "--z-grid", "0.5,2",
                "--out", str(tmp_path)]) == 0
    rows = read_summary(tmp_path / "stability_summary.csv")
    for r in rows:
        assert float(r["superdiag_eps_numeric"]) == pytest.approx(float(r["superdiag_eps_exact"]), abs=1e-9)
        assert float(r["superdiag_eps_numeric"]) >= float(r["superdiag_eps_bound"]) - 1e-12
        assert float(r["all_eps_numeric"]) == pytest.approx(float(r["all_eps_exact"]), abs=1e-9)
    sd = (tmp_path / "stability_superdiag_n12_b3_z+0.5000+0.0000i.csv").read_text().splitlines()
    assert sd[-1].startswith("epsilon,") and sd[-1].endswith("method,numeric")
    assert len(read_summary(tmp_path / "stability_mainthm.csv")) == 2


def test_replacement_labels_regime(tmp_path, capsys):
    assert run(["replacement", "--n", "20,40", "--seeds", "2", "--gamma", "1",
                "--z-grid", "0.5", "--out", str(tmp_path)]) == 0
    assert "outside theorem hypotheses" in capsys.readouterr().out
    rows = read_summary(tmp_path / "replacement_summary.csv")
    assert rows[0]["regime"] == "outside theorem hypotheses"


def test_small_blocks_warns_for_wrong_rule(tmp_path, capsys):
    assert run(["small-blocks", "--n", "16", "--b", "n-minus-1", "--seeds", "1",
                "--out", str(tmp_path)]) == 0
    assert "warning" in capsys.readouterr().err


# ------------------------------------------------------- regime behaviour

def _medians(tmp_path, exp, b, ens, ns, seeds=5):
    cfg = ExperimentConfig.build(exp, dict(n=ns, b=b, ensembles=(ens,), seeds=seeds,
                                           output=str(tmp_path), gamma=2.0))
    return run_experiment(cfg).summary


@pytest.mark.slow
def test_small_blocks_shrink_to_origin(tmp_path):
    s = _medians(tmp_path, "small-blocks", "fixed:2", "cgauss", (128, 256, 512))
    w1 = [r["median_radial_transport"] for r in s]
    assert w1[0] > w1[1] > w1[2]


@pytest.mark.slow
def test_large_blocks_approach_circle(tmp_path):
    s = _medians(tmp_path, "large-blocks", "n-minus-1", "bern", (128, 256, 512))
    w1 = [r["median_radial_transport"] for r in s]
    assert w1[0] > w1[1] > w1[2]
    assert s[-1]["chi2_pass"] >= 3


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="sup-distance on a radius grid saturates at 1 for these clouds")
def test_small_blocks_radial_cdf_decreases(tmp_path):
    s = _medians(tmp_path, "small-blocks", "fixed:2", "cgauss", (128, 256, 512))
    ks = [r["median_radial_cdf"] for r in s]
    assert ks[0] > ks[1] > ks[2]


@pytest.mark.slow
def test_sqrt_blocks_universal():
    n, seeds = 256, range(10)
    vals = {}
    for e in ("cgauss", "bern"):
        trials = block_trials([n], "sqrt-n", 2.0, [e], seeds)
        vals[e] = np.array([radial_transport_distance(t.esd, UNIT_CIRCLE) for t in trials])
    spread = max(np.ptp(v) for v in vals.values())
    assert abs(np.median(vals["cgauss"]) - np.median(vals["bern"])) <= spread


def test_angular_chi2():
    assert angular_chi2(np.exp(2j * np.pi * (np.arange(64) + 0.5) / 64)) == 0.0
    assert angular_chi2(np.ones(64)) == pytest.approx(7 * 64)
    assert CHI2_8BIN_CRIT == pytest.approx(24.322)
