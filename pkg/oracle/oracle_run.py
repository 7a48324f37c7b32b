#!/usr/bin/env python3
"""Reduced-scale reference integrator for cross-implementation regression.

Re-implements the cosine-spectral exponential scheme directly: DCT-II
(orthonormal) transforms, per-mode exponentials exp((-d k^2 - gamma) h),
phi-function guards at |z| < 1e-6, a first-order bootstrap step, the +-5
soft clamp inside the reaction, and records every 10 steps plus a final
row. It reads and writes the same MNCS1 snapshot and series-CSV formats as
the main package but shares no code with it, so any disagreement between
the two localizes a defect. The clock starts at the initial snapshot's
timestamp, so a zero-length run reproduces its input byte for byte.

Usage: oracle_run.py --config PATH --ic PATH --out DIR
Exit codes: 0 ok, 1 numerical failure, 2 config error.
"""

import argparse
import sys
from pathlib import Path

import numpy as np
from scipy.fft import dctn, idctn

RECORD_STRIDE = 10

DEFAULTS = {
    "n": 32,
    "length": 64.0,
    "dt": 0.05,
    "t_end": 10.0,
    "eps": 0.2,
    "beta_kin": 0.0,
    "gamma_kin": 0.5,
    "du": 1.0,
    "dv": 0.0,
    "gamma": 0.0,
    "clamp": 5.0,
    "reaction": "fhn",  # fhn | none
}


class OracleConfigError(ValueError):
    pass


def parse_config(text: str) -> dict:
    cfg = dict(DEFAULTS)
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise OracleConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in DEFAULTS:
            raise OracleConfigError(f"line {lineno}: unknown key '{key}'")
        if key == "n":
            cfg[key] = int(raw)
        elif key == "reaction":
            if raw not in ("fhn", "none"):
                raise OracleConfigError(f"line {lineno}: reaction must be fhn or none")
            cfg[key] = raw
        else:
            cfg[key] = float(raw)
    if cfg["dt"] <= 0 or cfg["t_end"] < 0:
        raise OracleConfigError("need dt > 0 and t_end >= 0")
    return cfg


def load_snapshot(path):
    with open(path, "rb") as fh:
        parts = fh.readline().decode("ascii").split()
        if len(parts) != 5 or parts[0] != "MNCS1":
            raise OracleConfigError(f"{path}: not an MNCS1 snapshot")
        comps, n = int(parts[1]), int(parts[2])
        length, t = float(parts[3]), float(parts[4])
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != comps * n * n:
        raise OracleConfigError(f"{path}: truncated payload")
    return data.reshape(comps, n, n).copy(), n, length, t


def save_snapshot(path, data, length, t):
    with open(path, "wb") as fh:
        fh.write(f"MNCS1 {data.shape[0]} {data.shape[1]} {length!r} {float(t)!r}\n".encode())
        fh.write(np.ascontiguousarray(data, dtype="<f8").tobytes())


def phi1(z):
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        res = (np.exp(z) - 1) / z
    res[np.abs(z) < 1e-6] = 1.0
    return res


def phi2(z):
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        res = (np.exp(z) - 1 - z) / z**2
    res[np.abs(z) < 1e-6] = 0.5
    return res


def make_tables(cfg):
    n, length, h = cfg["n"], cfg["length"], cfg["dt"]
    k = np.pi * np.arange(n) / length
    kx, ky = np.meshgrid(k, k)
    k2 = kx**2 + ky**2
    lu = -cfg["du"] * k2 - cfg["gamma"]
    lv = -cfg["dv"] * k2 - cfg["gamma"]
    e = np.array([np.exp(lu * h), np.exp(lv * h)])
    q1 = np.array([h * phi1(lu * h), h * phi1(lv * h)])
    q2 = np.array([h * phi2(lu * h), h * phi2(lv * h)])
    return e, q1, q2


def make_reaction(cfg):
    if cfg["reaction"] == "none":
        return lambda u_real: np.zeros_like(u_real)
    eps, beta, gk, clamp = cfg["eps"], cfg["beta_kin"], cfg["gamma_kin"], cfg["clamp"]

    def reaction(u_real):
        u = np.clip(u_real[0], -clamp, clamp)
        v = np.clip(u_real[1], -clamp, clamp)
        fu = (u - u**3 / 3 - v) / eps
        fv = eps * (u + beta - gk * v)
        return np.array([fu, fv])

    return reaction


def observables(t, u_real, cell_area):
    row = [t]
    flat = u_real.reshape(u_real.shape[0], -1)
    row += [float(np.var(c)) for c in flat]
    row += [float(np.mean(c)) for c in flat]
    row += [float(np.sqrt(cell_area * (c * c).sum())) for c in flat]
    row += [float(np.abs(c).max()) for c in flat]
    return row


def run(cfg, ic_path, out_dir):
    u, n_ic, length_ic, t0 = load_snapshot(ic_path)
    if u.shape[0] != 2:
        raise OracleConfigError("reference scheme expects a 2-component state")
    if n_ic != cfg["n"] or length_ic != cfg["length"]:
        raise OracleConfigError(
            f"grid mismatch: config ({cfg['n']}, {cfg['length']}) vs "
            f"snapshot ({n_ic}, {length_ic})"
        )
    if not np.isfinite(u).all():
        raise FloatingPointError("initial state is not finite")

    e, q1, q2 = make_tables(cfg)
    reaction = make_reaction(cfg)
    h = cfg["dt"]
    steps = int(round(cfg["t_end"] / h))
    cell_area = (cfg["length"] / cfg["n"]) ** 2

    u_hat = dctn(u, axes=(1, 2), type=2, norm="ortho")
    nu_prev = None
    rows = []
    for k in range(steps):
        u_real = idctn(u_hat, axes=(1, 2), type=2, norm="ortho")
        if k % RECORD_STRIDE == 0:
            rows.append(observables(t0 + k * h, u_real, cell_area))
        nu_hat = dctn(reaction(u_real), axes=(1, 2), type=2, norm="ortho")
        if nu_prev is None:
            u_hat = e * u_hat + q1 * nu_hat
        else:
            u_hat = e * u_hat + q1 * nu_hat + q2 * (nu_hat - nu_prev)
        nu_prev = nu_hat
        if not np.isfinite(u_hat).all():
            raise FloatingPointError(f"state became non-finite at step {k}")
    if steps > 0:
        u = idctn(u_hat, axes=(1, 2), type=2, norm="ortho")
        rows.append(observables(t0 + steps * h, u, cell_area))

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_snapshot(out_dir / "final.mncs1", u, cfg["length"], t0 + steps * h)
    header = "t,var_u,var_v,mean_u,mean_v,l2_u,l2_v,linf_u,linf_v"
    lines = [header] + [",".join(f"{x:.17g}" for x in row) for row in rows]
    (out_dir / "series.csv").write_text("\n".join(lines) + "\n", encoding="ascii")
    return out_dir / "final.mncs1", out_dir / "series.csv"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", required=True)
    parser.add_argument("--ic", required=True, help="shared initial-state snapshot")
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
        run(cfg, args.ic, args.out)
    except (OracleConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
