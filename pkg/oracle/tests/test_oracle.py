"""Self-contained checks of the reference integrator: exact zero-mode decay,
identity at t_end = 0, second-order self-consistency, and error exits."""

import subprocess
import sys
from pathlib import Path

import numpy as np

SCRIPT = Path(__file__).resolve().parent.parent / "oracle_run.py"


def write_snapshot(path, data, length, t=0.0):
    data = np.asarray(data, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(f"MNCS1 {data.shape[0]} {data.shape[1]} {length!r} {float(t)!r}\n".encode())
        fh.write(data.tobytes())


def read_snapshot(path):
    with open(path, "rb") as fh:
        parts = fh.readline().split()
        comps, n = int(parts[1]), int(parts[2])
        data = np.frombuffer(fh.read(), dtype="<f8").reshape(comps, n, n)
    return data, float(parts[3]), float(parts[4])


def read_csv(path):
    lines = Path(path).read_text().strip().splitlines()
    names = lines[0].split(",")
    table = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return names, table


def run_oracle(config_text, ic_path, out_dir, expect=0):
    cfg = Path(out_dir) / "oracle.cfg"
    cfg.write_text(config_text)
    proc = subprocess.run(
        [sys.executable, str(SCRIPT), "--config", str(cfg), "--ic", str(ic_path),
         "--out", str(out_dir)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == expect, proc.stderr
    return proc


def test_zero_reaction_mean_decays_exactly(tmp_path):
    n, length, c, gamma = 16, 8.0, 2.5, 0.7
    ic = tmp_path / "ic.mncs1"
    write_snapshot(ic, np.full((2, n, n), c), length)
    run_oracle(
        f"n = {n}\nlength = {length}\ndt = 0.05\nt_end = 5.0\n"
        f"gamma = {gamma}\nreaction = none\n",
        ic,
        tmp_path,
    )
    names, table = read_csv(tmp_path / "series.csv")
    t = table[:, names.index("t")]
    mean_u = table[:, names.index("mean_u")]
    expected = c * np.exp(-gamma * t)
    assert np.abs(mean_u - expected).max() <= 1e-12 * c


def test_t_end_zero_is_byte_identity(tmp_path):
    rng = np.random.default_rng(0)
    ic = tmp_path / "ic.mncs1"
    write_snapshot(ic, rng.standard_normal((2, 8, 8)), 4.0, t=0.0)
    run_oracle("n = 8\nlength = 4.0\nt_end = 0.0\n", ic, tmp_path)
    assert (tmp_path / "final.mncs1").read_bytes() == ic.read_bytes()
    names, table = read_csv(tmp_path / "series.csv")
    assert table.size == 0  # header only


def test_halving_dt_quarters_self_error(tmp_path):
    rng = np.random.default_rng(5)
    n, length = 16, 64.0
    ic = tmp_path / "ic.mncs1"
    write_snapshot(ic, 0.1 * rng.standard_normal((2, n, n)), length)

    def final_at(dt, tag):
        out = tmp_path / tag
        out.mkdir()
        run_oracle(
            f"n = {n}\nlength = {length}\ndt = {dt}\nt_end = 1.0\ngamma = 0.0\n",
            ic,
            out,
        )
        return read_snapshot(out / "final.mncs1")[0]

    ref = final_at(0.00625, "ref")
    errors = [
        float(np.sqrt(((final_at(dt, f"d{i}") - ref) ** 2).mean()))
        for i, dt in enumerate((0.1, 0.05, 0.025))
    ]
    ratios = [a / b for a, b in zip(errors, errors[1:])]
    for r in ratios:
        assert 3.0 <= r <= 5.2


def test_grid_mismatch_exits_2(tmp_path):
    ic = tmp_path / "ic.mncs1"
    write_snapshot(ic, np.zeros((2, 8, 8)), 4.0)
    run_oracle("n = 16\nlength = 4.0\n", ic, tmp_path, expect=2)


def test_unknown_key_exits_2(tmp_path):
    ic = tmp_path / "ic.mncs1"
    write_snapshot(ic, np.zeros((2, 8, 8)), 4.0)
    run_oracle("n = 8\nlength = 4.0\nwhatever = 1\n", ic, tmp_path, expect=2)


def test_nonfinite_ic_exits_1(tmp_path):
    ic = tmp_path / "ic.mncs1"
    data = np.zeros((2, 8, 8))
    data[0, 0, 0] = np.inf
    write_snapshot(ic, data, 4.0)
    proc = run_oracle("n = 8\nlength = 4.0\nt_end = 0.5\n", ic, tmp_path, expect=1)
    assert "finite" in proc.stderr
