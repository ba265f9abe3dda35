import json
import subprocess
import sys

import pytest

from dyadmax import scalars
from dyadmax.cli import main
from dyadmax.extremizer import SHARPNESS_COLUMNS, sharpness_report
from dyadmax.verify import VerificationPlan, run_plan


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("argv, expected", [
    (["eval", "omega", "--p", "2", "--tau", "0.75"], "1.5"),
    (["eval", "bellman2", "--p", "2", "--f", "1", "--F", "1"], "1"),
    (["eval", "H", "--p", "2", "--z", "1.5"], "0.75"),
])
def test_eval_examples(capsys, argv, expected):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out.strip() == expected


def test_eval_prints_fifteen_digits(capsys):
    _, out, _ = run(capsys, "eval", "bellman2", "--p", "2", "--f", "1", "--F", "2")
    assert out.strip() == f"{scalars.bellman_two(2, 1, 2):.15g}" == "5.82842712474619"


@pytest.mark.parametrize("quantity, flags, fn", [
    ("bellman3", dict(p=2, q=1.5, f=1, A=1.2), lambda: scalars.bellman_three_on_surface(2, 1.5, 1, 1.2)),
    ("surfaceF", dict(p=2, q=1.5, f=1, A=1.2), lambda: scalars.F_of_surface(2, 1.5, 1, 1.2)),
    ("beta", dict(p=2, q=1.5, f=1, F=2), lambda: scalars.beta_from_fF(2, 1.5, 1, 2)),
    ("bound3", dict(p=3, q=2, f=1, A=1.5, F=2), lambda: scalars.upper_bound_three(3, 2, 1, 1.5, 2)),
])
def test_eval_json_matches_library(capsys, quantity, flags, fn):
    argv = ["eval", quantity, "--format", "json"]
    for k, v in flags.items():
        argv += [f"--{k}", str(v)]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert json.loads(out)["value"] == fn()


def test_eval_domain_error(capsys):
    code, _, err = run(capsys, "eval", "bellman2", "--p", "2", "--f", "1", "--F", "0.5")
    assert code == 2
    assert "requires f^p <= F" in err


def test_eval_missing_flag(capsys):
    code, _, err = run(capsys, "eval", "omega", "--p", "2")
    assert code == 2 and "--tau" in err


def test_usage_error(capsys):
    code, _, _ = run(capsys, "eval", "nonsense")
    assert code == 2


def test_verify_zero_samples(capsys):
    code, _, err = run(capsys, "verify", "--samples", "0")
    assert code == 2 and "sample count" in err


def test_verify_matches_library(capsys):
    code, out, _ = run(capsys, "verify", "--samples", "15", "--seed", "4")
    assert code == 0
    assert out == run_plan(VerificationPlan(seed=4, samples=15)).to_json()


def test_verify_same_seed_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["verify", "--samples", "20", "--seed", "3", "--tree", "mixed",
                     "--depth", "4-8", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_failure_exit_code(capsys, monkeypatch):
    from dyadmax.verify import VerificationReport

    monkeypatch.setattr(VerificationReport, "ok", property(lambda self: False))
    code, _, _ = run(capsys, "verify", "--samples", "2")
    assert code == 1


def test_extremize_rows(capsys):
    code, out, _ = run(capsys, "extremize", "--p", "2", "--q", "1.5", "--f", "1", "--A", "1.2",
                       "--ks", "4,16,64,256")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == ",".join(SHARPNESS_COLUMNS)
    assert len(lines) == 5
    rows = sharpness_report(2, 1.5, 1, 1.2, [4, 16, 64, 256])
    assert lines[1].split(",")[2] == repr(rows[0]["z"])
    errs = [float(l.split(",")[SHARPNESS_COLUMNS.index("abs_err_z")]) for l in lines[1:]]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_extremize_deterministic_and_svg(tmp_path, capsys):
    svg = tmp_path / "plot.svg"
    _, a, _ = run(capsys, "extremize", "--p", "2", "--q", "1.5", "--f", "1", "--A", "1.2",
                  "--ks", "4", "--svg", str(svg))
    _, b, _ = run(capsys, "extremize", "--p", "2", "--q", "1.5", "--f", "1", "--A", "1.2", "--ks", "4")
    assert a == b
    text = svg.read_text()
    assert text.startswith("<svg") and "polyline" in text


def test_extremize_domain_error(capsys):
    code, _, err = run(capsys, "extremize", "--p", "2", "--q", "1.5", "--f", "1", "--A", "0.9")
    assert code == 2 and "requires f^q < A" in err


def test_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--q", "1.5", "--tau", "0.5", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    gaps = [r["abs_gap"] for r in rows]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert rows[0]["z"] == scalars.solve_z(1.5, 0.1, 0.5)


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("p: 2\ntau: 0.75\nformat: json\n")
    _, out, _ = run(capsys, "eval", "omega", "--config", str(cfg))
    assert json.loads(out)["value"] == 1.5
    _, out, _ = run(capsys, "eval", "omega", "--config", str(cfg), "--tau", "0", "--format", "text")
    assert out.strip() == "2"


def test_config_must_be_flat(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("p:\n  nested: 1\n")
    code, _, err = run(capsys, "eval", "omega", "--config", str(cfg))
    assert code == 2 and "flat" in err


def test_out_dir_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DYADMAX_OUT_DIR", str(tmp_path))
    assert main(["eval", "omega", "--p", "2", "--tau", "0.75", "--out", "sub/x.txt"]) == 0
    assert (tmp_path / "sub" / "x.txt").read_text().strip() == "1.5"


def test_io_error_exit_code(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(capsys, "eval", "omega", "--p", "2", "--tau", "0.5",
                       "--out", str(blocker / "x.txt"))
    assert code == 3 and "I/O" in err
    code, _, _ = run(capsys, "eval", "omega", "--config", str(tmp_path / "missing.yaml"))
    assert code == 3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "dyadmax", "eval", "omega", "--p", "2", "--tau", "0.75"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "1.5"
