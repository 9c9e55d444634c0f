import csv
import io
import json
import math
import subprocess
import sys

import pytest

from exchange_cutoff.errors import ConfigError
from exchange_cutoff.harness import ExperimentConfig, read_config_text, render, run_experiment
from exchange_cutoff.harness.cli import EXIT_BUDGET, EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from exchange_cutoff.harness.experiments import COLUMNS
from exchange_cutoff.laws import PointHalf
from exchange_cutoff.oracle import theorem_profile

HEADER = "command,model,law,n,t,beta,gamma,statistic,value,stderr,bias_bound,samples,seed,wallclock_ms"


def cfg(**kw):
    base = dict(replicas=20, samples=2000)
    base.update(kw)
    return ExperimentConfig(**base)


def strip_wallclock(text):
    rows = list(csv.reader(io.StringIO(text)))
    return [r[:-1] for r in rows]


def test_header_exact():
    assert ",".join(COLUMNS) == HEADER
    text = render(run_experiment(cfg(command="constants", law="beta:1", n=1024)))
    assert text.splitlines()[0] == HEADER
    assert "\r" not in text


def test_constants_rows():
    res = run_experiment(cfg(command="constants", law="beta:1", n=1024))
    get = {r.statistic: r.value for r in res.rows}
    assert get["h"] == pytest.approx(0.5, abs=1e-12)
    assert get["s2"] == pytest.approx(0.25, abs=1e-12)
    assert get["r"] == pytest.approx(1.0, abs=1e-12)
    assert get["t_ent"] == pytest.approx(1024 * math.log(1024), rel=1e-12)
    assert abs(get["h_mc"] - 0.5) < 0.05


def test_profile_gam_targets():
    res = run_experiment(cfg(command="profile", model="gam", law="point-half", n=64,
                             betas=[-2, -1, 0, 1, 2]))
    targets = res.find("theorem_profile")
    assert len(targets) == 5
    assert [r.beta for r in targets] == [-2, -1, 0, 1, 2]
    assert res.find("theorem_profile", beta=0)[0].value == 1.0
    for r in targets:
        assert r.value == pytest.approx(theorem_profile(r.beta, PointHalf()))
    assert len(res.find("l1_to_flat")) == 5


@pytest.mark.parametrize("command,extra", [
    ("simulate", dict(times=[5, 50])),
    ("piles", dict(n=20, times=[30], thetas=[0.01], gamma=0.3)),
    ("identity", dict(n=20, times=[30], thetas=[0.01, 0.5])),
    ("contraction", dict(n=10, times=[1, 10])),
    ("stationary", dict(n=10, model="sem")),
    ("profile", dict(n=32, betas=[0.0, 1.0], gamma=0.3)),
    ("monotonicity", dict(n=32, model="gam")),
])
def test_determinism_and_thread_independence(command, extra):
    a = render(run_experiment(cfg(command=command, **extra)))
    b = render(run_experiment(cfg(command=command, **extra)))
    c = render(run_experiment(cfg(command=command, workers=3, **extra)))
    assert strip_wallclock(a) == strip_wallclock(b) == strip_wallclock(c)
    assert len(strip_wallclock(a)) > 1


def test_seed_changes_output():
    a = render(run_experiment(cfg(command="simulate", times=[50], seed=1)))
    b = render(run_experiment(cfg(command="simulate", times=[50], seed=2)))
    assert strip_wallclock(a) != strip_wallclock(b)


def test_empty_fields_and_precision():
    text = render(run_experiment(cfg(command="constants", law="point-half", n=16)))
    rows = list(csv.DictReader(io.StringIO(text)))
    h = next(r for r in rows if r["statistic"] == "h")
    assert h["t"] == "" and h["beta"] == "" and h["gamma"] == ""
    assert float(h["value"]) == math.log(2)
    assert h["value"] == format(math.log(2), ".17g")


def test_json_metadata():
    res = run_experiment(cfg(command="constants", law="beta:2", n=50))
    doc = json.loads(render(res, "json"))
    assert doc["metadata"]["rng"].startswith("philox")
    assert doc["metadata"]["config"]["law"] == "beta:2"
    assert doc["metadata"]["columns"] == list(COLUMNS)
    assert len(doc["rows"]) == len(res.rows)


def test_config_text():
    c = read_config_text("""
        # comment line
        model = gam
        law = two-point:0.25   # trailing comment
        n = 64
        t = 10, 20
        beta = -1, 0
        seed = 18446744073709551615
    """)
    assert c.model == "gam" and c.n == 64 and c.times == [10, 20]
    assert c.betas == [-1.0, 0.0] and c.seed == 2**64 - 1


def test_config_errors_carry_location():
    with pytest.raises(ConfigError) as e:
        read_config_text("n = 10\nbogus = 3\n")
    assert e.value.line == 2 and e.value.field == "bogus"
    with pytest.raises(ConfigError) as e:
        read_config_text("n = ten\n")
    assert e.value.line == 1 and "line 1" in str(e.value)
    with pytest.raises(ConfigError) as e:
        read_config_text("just words\n")
    with pytest.raises(ConfigError) as e:
        cfg(command="profile").validate()
    assert e.value.field == "beta"
    for bad in (dict(n=1), dict(replicas=0), dict(seed=-1), dict(seed=2**64), dict(format="xml"),
                dict(model="kmp"), dict(law="beta:-1"), dict(command="nope")):
        with pytest.raises(ConfigError):
            cfg(**bad).validate()


def test_cli_flags_override_config(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("law = beta:2\nn = 30\nseed = 5\n")
    out = tmp_path / "out.csv"
    assert main(["constants", "--config", str(conf), "--n", "40", "--out", str(out),
                 "--samples", "100"]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert {r["n"] for r in rows} == {"40"}
    assert {r["law"] for r in rows} == {"beta:2"}
    assert {r["seed"] for r in rows} == {"5"}


def test_cli_negative_beta_list(capsys):
    assert main(["profile", "--model", "gam", "--law", "point-half", "--n", "16", "--beta", "-1,0",
                 "--replicas", "5"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == HEADER and len(lines) == 5


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["profile", "--n", "16"]) == EXIT_CONFIG
    assert main(["constants", "--law", "gauss:1"]) == EXIT_CONFIG
    assert main(["simulate", "--t", "1000000", "--replicas", "100000"]) == EXIT_BUDGET
    assert main(["constants", "--out", str(tmp_path / "missing" / "x.csv"), "--samples", "10"]) == EXIT_IO
    assert main(["constants", "--config", str(tmp_path / "nope.conf")]) == EXIT_IO
    with pytest.raises(SystemExit) as e:
        main(["bogus-command"])
    assert e.value.code == EXIT_CONFIG


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "exchange_cutoff.harness.cli", "constants",
                           "--law", "point-half", "--n", "8", "--samples", "10", "--format", "json"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["rows"][0]["statistic"] == "h"
