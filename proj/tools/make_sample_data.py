"""Regenerates the sample inputs under data/. Output is deterministic."""
import datetime as dt
import json
import math
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"


def weekdays(start, count):
    d, out = start, []
    while len(out) < count:
        if d.weekday() < 5:
            out.append(d.isoformat())
        d += dt.timedelta(days=1)
    return out


def garch_bars(asset_seed, days, spot):
    rng = random.Random(asset_seed)
    a0, a1, b1 = 2e-6, 0.08, 0.9
    s2, a, close = a0 / (1 - a1 - b1), 0.0, spot
    rows = []
    for _ in range(days):
        s2 = a0 + a1 * a * a + b1 * s2
        sigma, steps = math.sqrt(s2), 48
        o = close * math.exp(rng.gauss(0.0, 0.2 * sigma))
        path, x = [o], o
        for _ in range(steps):
            x *= math.exp(rng.gauss(0.0, sigma / math.sqrt(steps)))
            path.append(x)
        a = math.log(path[-1] / close)
        close = path[-1]
        rows.append((o, max(path), min(path), close))
    return rows


def write_ohlc(name, dates, rows):
    with open(OUT / name, "w") as f:
        f.write("date,open,high,low,close\n")
        for d, (o, h, l, c) in zip(dates, rows):
            f.write(f"{d},{o:.4f},{h:.4f},{l:.4f},{c:.4f}\n")


def main():
    dates = weekdays(dt.date(2019, 1, 2), 756)
    with open(OUT / "flat.csv", "w") as f:
        f.write("date,open,high,low,close\n")
        for d in dates[:30]:
            f.write(f"{d},100,100,100,100\n")
    write_ohlc("spx_like.csv", dates, garch_bars(11, len(dates), 3000.0))
    write_ohlc("ndx_like.csv", dates, garch_bars(12, len(dates), 9000.0))

    rng = random.Random(7)
    with open(OUT / "strikes.csv", "w") as f:
        f.write("date,kvar,alpha,nu\n")
        alpha = 0.18
        for d in dates:
            alpha = min(0.45, max(0.08, alpha * math.exp(rng.gauss(0.0, 0.03))))
            nu, T = 0.8, 21 / 252
            x = nu * nu * T
            kvar = alpha * alpha * math.expm1(x) / x * 1.1
            f.write(f"{d},{kvar:.8f},{alpha:.6f},{nu}\n")

    vol = 0.2
    with open(OUT / "chain_flat20.csv", "w") as f:
        f.write("#forward=100\n#rate=0\n#maturity_years=0.0833333333333333\nside,strike_pct,implied_vol\n")
        for i in range(10, 31):
            k = i * 0.05
            if k <= 1.0:
                f.write(f"put,{k:.2f},{vol}\n")
            if k >= 1.0:
                f.write(f"call,{k:.2f},{vol}\n")

    params = {
        "sabr.json": {"alpha": 0.2, "nu": 0.5, "rho": 0.0, "T": 1.0},
        "sabr_invert.json": {"alpha": 0.2, "kvar": 0.0454425, "T": 1.0},
        "heston.json": {"v0": 0.04, "kappa": 2.0, "theta": 0.09, "nu": 0.3, "rho": -0.5, "T": 1.0},
        "stein.json": {"sigma0": 0.25, "kappa": 3.0, "theta": 0.2, "nu": 0.1, "rho": 0.0, "T": 1.0},
        "lambda_sabr.json": {"alpha": 0.2, "kappa": 2.0, "theta": 0.2, "nu": 0.3, "rho": 0.0, "T": 1.0},
        "gbm.json": {"sigma": 0.2, "T": 1.0},
    }
    for name, p in params.items():
        (OUT / name).write_text(json.dumps(p, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
