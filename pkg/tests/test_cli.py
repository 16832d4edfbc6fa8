import csv
import json

import pytest

from hegrad import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def dr_file(tmp_path, capsys):
    path = tmp_path / "dr.json"
    assert run(capsys, "build-dr", "--network", "path", "--size", "3", "--out", str(path))[0] == 0
    return path


@pytest.fixture
def opf_file(tmp_path, capsys):
    path = tmp_path / "opf.json"
    assert run(capsys, "build-opf", "--network", "path", "--size", "3", "--out", str(path))[0] == 0
    return path


@pytest.mark.parametrize("which", ["alg1", "alg2"])
def test_golden_is_deterministic(capsys, which):
    first = run(capsys, "golden", which)
    second = run(capsys, "golden", which)
    assert first[0] == cli.EXIT_OK and first == second
    assert "all values match" in first[1]


def test_golden_values_printed(capsys):
    _, out, _ = run(capsys, "golden", "alg1")
    assert "1612852152286627752945361608571" in out and "13.425213" in out


def test_run_writes_outputs(tmp_path, capsys, dr_file):
    out = tmp_path / "out"
    code, text, _ = run(capsys, "run", "--problem", str(dr_file), "--scheme", "alg1", "--bits", "384",
                        "--iters", "4", "--out", str(out), "--seed", "3")
    assert code == cli.EXIT_OK
    rows = list(csv.reader((out / "trajectory.csv").open()))
    assert rows[0] == ["step", "participant", "coordinate", "value"]
    assert (out / "transcript.jsonl").read_text().count("\n") > 0
    dev = (out / "deviation.csv").read_text().splitlines()
    assert len(dev) == 1 + 5 and all(line.split(",")[1] == "0" for line in dev[1:])
    assert (out / "timing.csv").exists()


def test_run_is_seed_deterministic(tmp_path, capsys, opf_file, monkeypatch):
    outs = []
    for name, seed in (("a", "5"), ("b", None)):
        argv = ["run", "--problem", str(opf_file), "--scheme", "alg2", "--bits", "128", "--iters", "2",
                "--out", str(tmp_path / name)]
        if seed:
            argv += ["--seed", seed]
        else:
            monkeypatch.setenv("HEGRAD_SEED", "5")
        assert run(capsys, *argv)[0] == 0
        outs.append((tmp_path / name / "transcript.jsonl").read_text())
    assert outs[0] == outs[1]


def test_exit_codes(tmp_path, capsys, dr_file, opf_file):
    # gate: polynomial problem under the public-key scheme
    assert run(capsys, "run", "--problem", str(dr_file), "--scheme", "alg2", "--bits", "64",
               "--out", str(tmp_path / "x"))[0] == cli.EXIT_GATE
    # abort: key too small even for the coefficients
    code, _, err = run(capsys, "run", "--problem", str(dr_file), "--scheme", "alg1", "--bits", "16",
                       "--iters", "2", "--out", str(tmp_path / "y"))
    assert code == cli.EXIT_ABORT and "setup" in err
    # validation: missing file, bad env seed, bad ladder
    assert run(capsys, "run", "--problem", str(tmp_path / "missing.json"))[0] == cli.EXIT_VALIDATION
    assert run(capsys, "bench", "--problem", str(opf_file), "--scheme", "alg2", "--ladder", "8")[0] == cli.EXIT_VALIDATION
    with pytest.raises(SystemExit):
        cli.main(["run", "--problem", str(opf_file), "--bits", "9000"])


def test_bad_env_seed(capsys, opf_file, monkeypatch, tmp_path):
    monkeypatch.setenv("HEGRAD_SEED", "abc")
    code = run(capsys, "run", "--problem", str(opf_file), "--out", str(tmp_path / "z"))[0]
    assert code == cli.EXIT_VALIDATION


@pytest.mark.parametrize("fmt", ["text", "csv", "json"])
def test_bench_shape(capsys, opf_file, fmt):
    code, out, _ = run(capsys, "bench", "--problem", str(opf_file), "--scheme", "alg2",
                       "--ladder", "64,96", "--iters", "1", "--format", fmt)
    assert code == 0
    if fmt == "json":
        rows = json.loads(out)
        assert [r["bits"] for r in rows] == [64, 96]
    elif fmt == "csv":
        lines = out.splitlines()
        assert lines[0] == "bits,average_s,maximum_s,samples,keygen_s" and len(lines) == 3
    else:
        assert len(out.splitlines()) == 3


def test_ioi_subcommand(capsys):
    from importlib.resources import files

    path = files("hegrad") / "data" / "three_agent.json"
    code, out, _ = run(capsys, "ioi", str(path), "--adversary", "1")
    assert code == 0 and "no guarantee" in out and "unique" in out
    path = files("hegrad") / "data" / "planted_quadratic.json"
    code, out, _ = run(capsys, "ioi", str(path), "--format", "json")
    report = json.loads(out)["report"]
    assert report["guaranteed"] and all(r["verified"] for r in report["rungs"])


def test_keygen_and_key_file(tmp_path, capsys, dr_file):
    key = tmp_path / "key.json"
    assert run(capsys, "keygen", "--scheme", "alg1", "--bits", "384", "--out", str(key))[0] == 0
    code = run(capsys, "run", "--problem", str(dr_file), "--scheme", "alg1", "--key-file", str(key),
               "--iters", "2", "--out", str(tmp_path / "o"))[0]
    assert code == 0
    # wrong kind of key material
    pk = tmp_path / "pk.json"
    run(capsys, "keygen", "--scheme", "alg2", "--bits", "64", "--agents", "2", "--out", str(pk))
    assert run(capsys, "run", "--problem", str(dr_file), "--scheme", "alg1", "--key-file", str(pk),
               "--out", str(tmp_path / "p"))[0] == cli.EXIT_VALIDATION


def test_build_config_roundtrip(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    run(capsys, "build-opf", "--network", "star", "--size", "4", "--write-config", str(cfg), "--out", str(first))
    run(capsys, "build-opf", "--config", str(cfg), "--out", str(second))
    assert first.read_text() == second.read_text()
    assert run(capsys, "build-dr", "--config", str(cfg))[0] == cli.EXIT_VALIDATION
