"""Closed-form reference solutions used only by the tests."""
import numpy as np
from scipy.special import log_ndtr


def cole_hopf_point_source(m, eps, x, t):
    """Viscous Burgers ``u_t + u u_x = eps u_xx`` with data ``m delta``.

    ``theta = 1 + (e^R - 1) Phi(-x / s)`` with ``R = m / 2 eps`` and
    ``s = sqrt(2 eps t)``; ``u = -2 eps theta_x / theta`` evaluated in
    log space so that small ``eps`` does not overflow.
    """
    x = np.asarray(x, dtype=float)
    R = m / (2 * eps)
    s = np.sqrt(2 * eps * t)
    log_a = np.log(np.expm1(R))
    log_phi = -0.5 * (x / s) ** 2 - 0.5 * np.log(2 * np.pi) - np.log(s)
    log_theta = np.logaddexp(0.0, log_a + log_ndtr(-x / s))
    return 2 * eps * np.exp(log_a + log_phi - log_theta)


def gaussian(m, t, x, x0=0.0):
    x = np.asarray(x, dtype=float)
    return m * np.exp(-(x - x0) ** 2 / (4 * t)) / np.sqrt(4 * np.pi * t)
