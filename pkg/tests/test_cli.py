import io
import json
import math
import subprocess
import sys
from fractions import Fraction

import pytest

from rrtcut import cli
from rrtcut.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, EXPERIMENTS, ExperimentConfig, UsageError, main
from rrtcut.oracle import exact_isolation_law


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def run_to_file(tmp_path, argv, name="out.csv"):
    path = tmp_path / name
    code, _, err = run_cli(argv + ["--output", str(path)])
    assert code == EXIT_OK, err
    return path.read_bytes(), err


def test_subcommands_are_complete():
    expected = {
        "isolate-root", "isolate-multi", "random-targets", "last-targets", "disconnect",
        "first-targets-disconnect", "component-tree", "cut-tree", "ordered", "coalescent",
        "percolation", "urn", "yule", "walk",
    }
    assert set(EXPERIMENTS) == expected
    assert set(cli.SUBCOMMANDS) == expected | {"oracle", "sweep"}


def test_list():
    code, out, _ = run_cli(["--list"])
    assert code == EXIT_OK
    for name in cli.SUBCOMMANDS:
        assert name in out


def test_same_seed_same_bytes(tmp_path):
    argv = ["isolate-root", "--n", "1000", "--trials", "100", "--seed", "7"]
    a, _ = run_to_file(tmp_path, argv, "a.csv")
    b, _ = run_to_file(tmp_path, argv, "b.csv")
    assert a == b
    lines = a.decode().splitlines()
    assert lines[0] == ",".join(cli.COLUMNS)
    assert b"\r" not in a


@pytest.mark.parametrize("experiment", sorted(EXPERIMENTS))
def test_thread_count_gives_identical_bytes(tmp_path, experiment):
    extra = {"percolation": ["--t", "1.0"], "urn": ["--p", "0.5"], "yule": ["--p", "0.5"]}.get(experiment, [])
    base = [experiment, "--n", "500", "--trials", "40", "--seed", "3"] + extra
    ref, _ = run_to_file(tmp_path, base + ["--threads", "1"], "t1.csv")
    for th in ("4", "16"):
        got, _ = run_to_file(tmp_path, base + ["--threads", th], f"t{th}.csv")
        assert got == ref


def test_rows_and_summary(tmp_path):
    data, err = run_to_file(tmp_path, ["random-targets", "--n", "300", "--trials", "5", "--ell", "2"])
    rows = data.decode().splitlines()[1:]
    assert len(rows) == 5 * 2
    keys = [(r.split(",")[2], r.split(",")[3]) for r in rows]
    assert len(set(keys)) == len(keys)
    assert "# summary experiment=random-targets n=300" in err
    assert "ks=" in err and "verdict=" in err


def test_jsonl_mirrors_csv(tmp_path):
    argv = ["walk", "--n", "1000", "--trials", "10", "--seed", "2"]
    csv_bytes, _ = run_to_file(tmp_path, argv)
    js, _ = run_to_file(tmp_path, argv + ["--format", "jsonl"], "out.jsonl")
    records = [json.loads(line) for line in js.decode().splitlines()]
    rows = csv_bytes.decode().splitlines()[1:]
    assert len(records) == len(rows)
    for rec, row in zip(records, rows):
        assert list(rec) == list(cli.COLUMNS)
        fields = row.split(",")
        assert [rec["experiment"], str(rec["n"]), str(rec["trial"]), rec["stat"]] == fields[:4]
        assert float(fields[4]) == rec["raw"]


def test_oracle_prints_exact_law():
    code, out, _ = run_cli(["oracle", "--n", "4", "--statistic", "X"])
    assert code == EXIT_OK
    body = [line.split("\t") for line in out.splitlines() if line and not line.startswith("#")][1:]
    law = exact_isolation_law(4)
    assert [(int(v), Fraction(p)) for v, p in body] == list(zip(law.support, law.probs))


def test_oracle_other_statistic():
    code, out, _ = run_cli(["oracle", "--n", "3", "--statistic", "A", "--ell", "2", "--k", "2"])
    assert code == EXIT_OK and "# mean" in out


def test_percolation_summary_near_inverse_e(tmp_path):
    _, err = run_to_file(tmp_path, ["percolation", "--n", "100000", "--t", "1.0", "--trials", "200", "--seed", "1"])
    line = next(x for x in err.splitlines() if "stat=C0 " in x)
    mean = float(line.split("mean=")[1].split()[0])
    var = float(line.split("var=")[1].split()[0])
    # documented tolerance: four standard errors of the sample mean
    assert abs(mean - math.exp(-1)) <= 4 * math.sqrt(var / 200)


def test_sweep_report():
    code, out, err = run_cli(["sweep", "--experiment", "walk", "--n", "1000", "10000", "--trials", "50"])
    assert code == EXIT_OK
    assert out.splitlines()[0] == "stat\tn\tks"
    assert "verdict=" in err


def test_sweep_unknown_stat():
    code, _, err = run_cli(["sweep", "--experiment", "walk", "--n", "100", "1000", "--stat", "nope"])
    assert code == EXIT_USAGE and "error" in err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["no-such-command"],
        ["isolate-root"],
        ["isolate-root", "--n", "100", "--trials", "0"],
        ["isolate-root", "--n", "100", "--seed", "-1"],
        ["isolate-root", "--n", "100", "--threads", "0"],
        ["isolate-root", "--n", "100", "--format", "xml"],
        ["percolation", "--n", "10", "--t", "5"],
        ["sweep", "--experiment", "isolate-root", "--n", "1000"],
    ],
)
def test_usage_errors(argv):
    assert run_cli(argv)[0] == EXIT_USAGE


def test_io_error(tmp_path):
    bad = tmp_path / "missing" / "out.csv"
    code, _, err = run_cli(["walk", "--n", "100", "--trials", "3", "--output", str(bad)])
    assert code == EXIT_IO and "error" in err


def test_config_validation():
    with pytest.raises(UsageError):
        ExperimentConfig("isolate-root", (100,), trials=0)
    with pytest.raises(UsageError):
        ExperimentConfig("nope", (100,))


def test_entry_point_stdout():
    proc = subprocess.run(
        [sys.executable, "-m", "rrtcut.cli", "walk", "--n", "100", "--trials", "3"],
        capture_output=True,
        check=False,
    )
    assert proc.returncode == EXIT_OK
    assert proc.stdout.splitlines()[0] == b"experiment,n,trial,stat,raw,normalized,ref_cdf"
    assert len(proc.stdout.splitlines()) == 1 + 3 * 2
