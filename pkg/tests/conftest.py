"""Shared fixtures and independent oracle helpers for the test suite."""

import math

import numpy as np
import pytest

from rislabel.channel import RadioConfig, evenly_spaced_indices, triangular_array
from rislabel.mnomp import Grid


@pytest.fixture(scope="session")
def radio_small():
    """32-tone variant of the default numerology; keeps unit tests fast."""
    return RadioConfig(subcarrier_indices=evenly_spaced_indices(32, 833))


@pytest.fixture(scope="session")
def rx_triangle():
    return triangular_array()


@pytest.fixture(scope="session")
def grid_small(radio_small, rx_triangle):
    return Grid.build(radio_small, rx_triangle, delay_max=1.6e-7)


def oracle_atom(config, array, theta, tau):
    """Direct evaluation of the stacked response, independent of the package
    dictionary helpers: entry (n, r) = exp(-j2pi f_n tau) * exp(-j2pi p_r.u)."""
    u = np.array([math.cos(theta), math.sin(theta)])
    a = np.exp(-2j * math.pi * (array.world_positions @ u))
    b = np.exp(-2j * math.pi * config.frequencies * tau)
    return (b[:, None] * a[None, :]).reshape(-1)


def oracle_metric(data_map, config, array, theta, tau):
    """Summed squared correlation magnitude via the oracle atom."""
    v = oracle_atom(config, array, theta, tau)
    return sum(abs(np.vdot(v, y)) ** 2 for y in data_map.values())


def golden_max(f, lo, hi, iters=90):
    """Golden-section maximization of a unimodal scalar function on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def oracle_fit(data_map, config, array, theta_window, tau_window, refine_rounds=4):
    """Dense-grid search plus golden-section coordinate polish.

    Independent of the package's Newton refinement: correlations are
    evaluated with oracle_atom only.
    """
    thetas = np.linspace(*theta_window, 160)
    taus = np.linspace(*tau_window, 160)
    best = None
    for th in thetas:
        for ta in taus:
            m = oracle_metric(data_map, config, array, th, ta)
            if best is None or m > best[0]:
                best = (m, th, ta)
    _, th, ta = best
    dth = (theta_window[1] - theta_window[0]) / 159
    dta = (tau_window[1] - tau_window[0]) / 159
    for _ in range(refine_rounds):
        th = golden_max(lambda x: oracle_metric(data_map, config, array, x, ta),
                        th - 2 * dth, th + 2 * dth)
        ta = golden_max(lambda x: oracle_metric(data_map, config, array, th, x),
                        ta - 2 * dta, ta + 2 * dta)
        dth /= 16.0
        dta /= 16.0
    return th, ta
