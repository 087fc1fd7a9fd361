"""Smoke tests for the _mshom python module (run under ctest)."""
import math
import sys

import _mshom as m


def check(name, cond):
    print(("ok" if cond else "FAIL"), name)
    if not cond:
        sys.exit(1)


def main():
    # cell constants: series and quadrature routes agree
    series = m.bessel_series(1.0, 1e-15)
    cell = m.cell_constants(1.0, 1.0, 0.2)
    check("bessel series value", abs(series - 1.2660658777520083) < 1e-12)
    check("K dual route", abs(cell["K"] - 1.0 / series**2) < 1e-10)
    check("K frozen value", abs(cell["K"] - 0.623860360432069) < 1e-9)

    # estimator inversion identity
    theta = 0.7
    sigma_eff = 0.45
    v = m.char_fn_mu(theta, sigma_eff)
    theta_hat, boundary = m.mde_estimate(complex(v, 0.0), sigma_eff)
    check("mde inversion", abs(theta_hat - theta) < 1e-12 and not boundary)

    # delta-method scale vs finite difference
    scale = m.delta_method_std(theta, sigma_eff, 1.0)
    v0 = math.exp(-0.5 * sigma_eff / theta)
    g = lambda x: -sigma_eff / (2.0 * math.log(x))
    fd = (g(v0 + 1e-6) - g(v0 - 1e-6)) / 2e-6
    check("delta method", abs(scale - abs(fd)) / abs(fd) < 1e-5)

    # simulation determinism and the contractive complex channel
    a = m.simulate(1.0, 1.0, 0.2, 0.0, 2.0, 0.002, 7, 3)
    b = m.simulate(1.0, 1.0, 0.2, 0.0, 2.0, 0.002, 7, 3)
    check("simulate deterministic", a["c_hat"] == b["c_hat"] and a["last_state"] == b["last_state"])
    check("unit modulus channel", abs(a["c_hat"]) <= 1.0 + 1e-12)

    # poisson cos channel: variance positive, audit gap small
    p = m.poisson_cos(1.0, 1.0, 0.2)
    check("tau_sq positive", p["tau_sq_cos"] > 0.0)
    check("dirichlet gap", p["dirichlet_gap"] <= 1e-5 * (1.0 + p["tau_sq_cos"]))

    # KS self-test on a frozen uniform grid mapped through the normal quantile
    # stand-in: a plainly non-normal sample must score high
    bad = [0.0] * 100
    check("ks degenerate", abs(m.ks_statistic(bad) - 0.5) < 1e-12)

    # harness round trip through config text
    rep = m.run_experiment("experiment = coeff\neps = 0.4\n")
    check("coeff experiment passes", rep["passed"])

    print("smoke tests passed")


if __name__ == "__main__":
    main()
