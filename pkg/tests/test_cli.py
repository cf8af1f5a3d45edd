import csv
import io
import math
import shutil
import subprocess
import sys

import pytest

from hypspec import cli, fuchsian


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def body(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.reader(io.StringIO("\n".join(lines))))


def header(text):
    return [ln[2:] for ln in text.splitlines() if ln.startswith("# ")]


def test_lattice_ball_csv(capsys):
    code, out, _ = run(["lattice-ball", "--surface", fuchsian.bundled_surface_path(), "--r", "3.0"], capsys)
    assert code == 0
    rows = body(out)
    assert rows[0] == ["word", "a", "b", "c", "d", "distance"]
    assert all(float(r[5]) <= 3.0 for r in rows[1:])
    G = fuchsian.load_surface_spec(fuchsian.bundled_surface_path())
    assert len(rows) - 1 == fuchsian.enumerate_ball(G, G.base_point, G.base_point, 3.0).count
    h = header(out)
    assert h[0].startswith("hypspec ") and "subcommand=lattice-ball" in h and "r=3.0" in h


def test_missing_surface_exit_2(capsys):
    code, _, err = run(["lattice-ball", "--surface", "/nonexistent.surface"], capsys)
    assert code == 2 and "configuration error" in err


def test_bad_grid_exit_2(capsys):
    assert run(["selberg", "--grid", "1:x:2"], capsys)[0] == 2


def test_regime_mismatch_exit_2(capsys):
    assert run(["lp-bound", "--regime", "untempered", "--lambda", "1.0"], capsys)[0] == 2


def test_budget_exit_3(capsys):
    code, _, err = run(["lattice-ball", "--r", "4.0", "--budget", "10"], capsys)
    assert code == 3 and "numerical failure" in err


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nr = 2.0\nbudget=500000\n")
    code, out, _ = run(["lattice-ball", "--config", str(cfg)], capsys)
    assert code == 0 and "r=2.0" in header(out) and "budget=500000" in header(out)
    code, out, _ = run(["lattice-ball", "--config", str(cfg), "--r", "1.0"], capsys)
    assert code == 0 and "r=1.0" in header(out)


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("radius = 2.0\n")
    code, _, err = run(["lattice-ball", "--config", str(cfg)], capsys)
    assert code == 2 and "unknown key" in err


def test_repeated_runs_byte_identical(tmp_path, capsys):
    outs = []
    p = tmp_path / "o.csv"
    for _ in range(2):
        code, _, _ = run(["certify-growth", "--R", "2.0", "--random-points", "2", "--seed", "7", "--n-angular", "2",
                          "--output", str(p)], capsys)
        assert code == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    a, b = (body(o.decode()) for o in outs)
    assert a == b and len(a) > 1


def test_seed_changes_random_points(tmp_path, capsys):
    texts = []
    for seed in ("1", "2"):
        p = tmp_path / f"s{seed}.csv"
        assert run(["certify-growth", "--R", "1.0", "--random-points", "1", "--seed", seed, "--n-angular", "2",
                    "--output", str(p)], capsys)[0] == 0
        texts.append(body(p.read_text()))
    assert texts[0] != texts[1]


def test_workers_env(monkeypatch, capsys):
    monkeypatch.setenv(cli.WORKERS_ENV, "3")
    code, out, _ = run(["lp-bound", "--output", "-"], capsys)
    assert code == 0
    monkeypatch.setenv(cli.WORKERS_ENV, "x")
    assert run(["lp-bound"], capsys)[0] == 2


def test_kernel_check_default_grid(capsys):
    code, out, _ = run(["kernel-check", "--t-grid", "1:8:1", "--workers", "4"], capsys)
    assert code == 0
    rows = body(out)
    assert rows[0] == ["t", "sup", "tail", "sup_ratio", "tail_ratio"]
    assert [float(r[0]) for r in rows[1:]] == [float(t) for t in range(1, 9)]


def test_kernel_check_drift_exit_4(capsys):
    code, _, err = run(["kernel-check", "--t-grid", "1,3", "--max-drift", "1.01"], capsys)
    assert code == 4 and "witness" in err


def test_kernel_check_empty_grid(capsys):
    code, out, _ = run(["kernel-check", "--t-grid", ","], capsys)
    assert code == 0 and body(out) == [["t", "sup", "tail", "sup_ratio", "tail_ratio"]]


def test_kernel_check_linearisation(capsys):
    code, out, _ = run(["kernel-check", "--check", "linearisation", "--t-grid", "0,0.7,1.3,2,5"], capsys)
    assert code == 0
    rows = body(out)[1:]
    assert len(rows) == 5 * 5 * 8
    assert max(float(r[4]) for r in rows) <= 1e-12


def test_selberg_roundtrip(capsys):
    code, out, _ = run(["selberg", "--t", "1.0", "--grid", "0:10:1"], capsys)
    assert code == 0
    note = next(h for h in header(out) if h.startswith("max_abs_diff="))
    assert float(note.split("=")[1]) <= 1e-6


def test_selberg_ball(capsys):
    code, out, _ = run(["selberg", "--kernel", "ball", "--direction", "forward", "--t", "2", "--grid", "0,1,4"], capsys)
    assert code == 0
    assert all(float(r[3]) <= 1e-8 for r in body(out)[1:])
    assert run(["selberg", "--kernel", "ball", "--direction", "inverse"], capsys)[0] == 2


def test_loop_census(capsys):
    code, out, _ = run(["loop-census", "--L", "3.1"], capsys)
    assert code == 0 and "primitive_loops=4" in header(out)


def test_wp_check(capsys):
    code, out, _ = run(["wp-check"], capsys)
    assert code == 0
    assert "v11_convention=pi^2/12" in header(out)
    assert all(r[6] == "1" for r in body(out)[1:])


def test_wp_check_violation_exit_4(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("g,n,value_log\n0,3,0.0\n1,1,0.0\n1,2,0.0\n2,0,0.0\npoly,1,1,0=1.0,1=10.0\n")
    code, _, err = run(["wp-check", "--table", str(bad)], capsys)
    assert code == 4 and "length estimate fails" in err


def test_multicurve_prob(capsys):
    code, out, _ = run(["multicurve-prob"], capsys)
    assert code == 0
    rows = body(out)[1:]
    assert all(float(r[2]) <= float(r[3]) for r in rows)
    probs = [float(r[5]) for r in rows]
    assert all(b < a for a, b in zip(probs, probs[1:]))


def test_multicurve_prob_violation(capsys):
    code, _, _ = run(["multicurve-prob", "--c", "1.0", "--d", "1.0", "--delta", "1e-6", "--g-grid", "3,4"], capsys)
    assert code == 4


def test_lp_bound_text_and_csv(tmp_path, capsys):
    p = tmp_path / "lp.csv"
    code, out, _ = run(["lp-bound", "--R", "64", "--output", str(p)], capsys)
    assert code == 0
    assert out.startswith("tempered bound")
    rows = body(p.read_text())
    assert rows[0] == ["factor", "value", "source"]
    prod = math.prod(float(r[1]) for r in rows[1:])
    bv = next(h for h in header(p.read_text()) if h.startswith("bound_value="))
    assert prod == pytest.approx(float(bv.split("=")[1]), rel=1e-12)


def test_lp_bound_random_surface(capsys):
    code, out, _ = run(["lp-bound", "--regime", "untempered", "--lambda", "0", "--g", "10000000000",
                        "--c", "0.2", "--delta-univ", "0.5"], capsys)
    assert code == 0 and "failure probability" in out


@pytest.mark.skipif(shutil.which("hypspec") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["hypspec", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("hypspec ")


def test_module_entry():
    res = subprocess.run([sys.executable, "-m", "hypspec.cli", "lp-bound", "--p", "6"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "tempered bound" in res.stdout
