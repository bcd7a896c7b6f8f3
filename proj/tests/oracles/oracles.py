"""Independent numpy oracles for values frozen in the C++ unit tests.

Run: python3 tests/oracles/oracles.py  (prints JSON)
"""
import json
import math

import numpy as np


def theta_sequence(count):
    out, prev = [], 1.0
    for _ in range(count):
        prev = prev / 2.0 * (math.sqrt(prev * prev + 4.0) - prev)
        out.append(prev)
    return out


def leaky_rho_grid():
    # 1-D leaky-ReLU GLM with three fixed points; rho-hat over a 10^4 grid on [-5, 5].
    alpha, w_star = 0.5, 0.7
    x = np.array([0.5, -1.2, 2.0])
    sig = lambda z: np.where(z >= 0, z, alpha * z)
    dsig = lambda z: np.where(z > 0, 1.0, np.where(z < 0, alpha, alpha))
    y = sig(w_star * x)
    ratios = []
    for w in np.linspace(-5, 5, 10000):
        r = sig(w * x) - y
        f = 0.5 * np.mean(r ** 2)
        if f <= 1e-12:
            continue
        g = np.mean(r * dsig(w * x) * x)
        ratios.append(g * (w - w_star) / f)
    return max(0.0, min(ratios)), len(ratios)


def grid_counts(q_lo, q_hi, rhos=3):
    vals = sorted(v for q in range(q_lo, q_hi + 1) for v in (10.0 ** q, 5 * 10.0 ** q))
    pairs = [(L, m) for L in vals for m in vals if L > m]
    return len(vals), len(pairs), len(pairs) * rhos


def strong_params(rho, mu, L, dT):
    e = math.exp(-(1 + rho) * math.sqrt(mu / L) * dT)
    return [(1 - e) / (1 + rho), rho * (1 - e) / (rho + e), 1 / L, 1 / math.sqrt(mu * L)]


def relax_closed_form(w0, z0, eta, t):
    return w0 * math.exp(-eta * t) + z0 * (1 - math.exp(-eta * t))


def gaussian_moments(samples=10 ** 6, seed=0):
    x = np.random.default_rng(seed).standard_normal(samples)
    return float(np.mean(x ** 4) / np.mean(x ** 2)), float(np.mean((2 * x) ** 2 * x ** 2))


def line_search_scan(f, df, w, z, b, c, eps, lo, hi, points=10 ** 5):
    # Smallest alpha in [lo, hi] meeting the exit inequality, by grid scan.
    p = b * (w - z) ** 2
    g = lambda a: f(a * w + (1 - a) * z)
    dg = lambda a: df(a * w + (1 - a) * z) * (w - z)
    rhs = c * g(1.0) + eps
    for a in np.linspace(lo, hi, points):
        if c * g(a) + a * (dg(a) - a * p) <= rhs:
            return float(a)
    return None


if __name__ == "__main__":
    rho_hat, used = leaky_rho_grid()
    print(json.dumps({
        "theta": theta_sequence(5),
        "theta_decreasing_to_1e4": all(a > b > 0 for a, b in zip(theta_sequence(10 ** 4), theta_sequence(10 ** 4)[1:])),
        "leaky_rho_hat": rho_hat,
        "leaky_rho_points": used,
        "grid_default": grid_counts(-2, 4),
        "grid_0_0": grid_counts(0, 0),
        "grid_m1_0": grid_counts(-1, 0),
        "strong_params_example": strong_params(1, 1, 4, math.log(2)),
        "relax_closed_form": relax_closed_form(1.0, -1.0, 0.5, 2.0),
        "gaussian_R2_and_CR": gaussian_moments(),
    }, indent=2))
