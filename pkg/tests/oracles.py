"""Independent reference routes used by the test suite.

Everything here is deliberately dumb: dense log-grid trapezoid sums and
closed-form expressions, with no reliance on the package's adaptive
quadrature.  Tests compare package results against these routes so that a
bug in the tuned integrator cannot hide behind itself.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def log_trapezoid(fn, lo, hi, n=200_000):
    """Trapezoid sum of ``fn`` on a dense log-spaced grid over [lo, hi]."""
    w = np.geomspace(lo, hi, int(n))
    return float(np.trapezoid(fn(w), w))


def chi_pair_trapezoid(evaluate, tau, delta_t, lo, hi, n=400_000):
    """Dense-grid (chi_minus, chi_plus) for a spectrum callable.

    Uses the raw filter-function integrands; the grid must resolve the
    fastest oscillation, i.e. n large enough that hi * max(tau, delta_t)
    periods are sampled many times per period in the top decade.
    """
    w = np.geomspace(lo, hi, int(n))
    base = (16.0 / math.pi) * evaluate(w) * np.sin(0.5 * w * tau) ** 2 / w**2
    cm = float(np.trapezoid(base * np.sin(0.5 * w * delta_t) ** 2, w))
    cp = float(np.trapezoid(base * np.cos(0.5 * w * delta_t) ** 2, w))
    return cm, cp


def phase_variance_trapezoid(evaluate, tau, lo, hi, n=400_000):
    """Dense-grid single-window phase variance for a spectrum callable."""
    w = np.geomspace(lo, hi, int(n))
    f = (4.0 / math.pi) * evaluate(w) * np.sin(0.5 * w * tau) ** 2 / w**2
    return float(np.trapezoid(f, w))


def autocorrelation_trapezoid(evaluate, delta, lo, hi, n=400_000):
    """Dense-grid field autocorrelation at lag ``delta``."""
    w = np.geomspace(lo, hi, int(n))
    f = evaluate(w) * np.cos(w * delta) / math.pi
    return float(np.trapezoid(f, w))


def white_chi_closed(level, tau, delta_t):
    """Wide-band white noise: chi_minus = chi_plus = 2 * level * min(tau, dt)."""
    return 2.0 * level * min(tau, delta_t)


def white_phase_variance_banded(level, omega_high, tau):
    """Exact single-window phase variance for a sharp-cutoff white band.

    (4 level / pi) * [ (tau/2) Si(omega_h tau) - (1 - cos(omega_h tau)) / (2 omega_h) ].
    """
    import scipy.special

    si = float(scipy.special.sici(omega_high * tau)[0])
    return (
        (2.0 * level / math.pi)
        * (tau * si - (1.0 - math.cos(omega_high * tau)) / omega_high)
    )


def lorentzian_variance_closed(coupling_c, s0, omega_l):
    """Exact variance of a pure Lorentzian line: c^2 s0 omega_l / 2."""
    return coupling_c**2 * s0 * omega_l / 2.0


def lorentzian_autocorr_closed(coupling_c, s0, omega_l, delta):
    """Exact autocorrelation of a pure Lorentzian line (exponential decay)."""
    return lorentzian_variance_closed(coupling_c, s0, omega_l) * math.exp(
        -omega_l * abs(delta)
    )


def oneoverf_shape_closed(rho):
    """Closed-form shape G(rho) of the pure-1/f pair decoherence exponent.

    chi_minus(tau, delta_t) = A * tau^2 * G(delta_t / tau) for S = A / omega
    with infinitely wide cutoffs.  Derived by elementary integration of the
    filter function against 1/omega^3; finite at rho = 1 with value
    4 ln 2 / pi, and grows like (2/pi) (ln rho + 3/2) for rho >> 1.
    """
    rho = float(rho)
    if rho <= 0.0:
        return 0.0
    if rho == 1.0:
        return 4.0 * math.log(2.0) / math.pi
    return (2.0 / math.pi) * (
        -(rho**2) * math.log(rho)
        + 0.5 * (rho - 1.0) ** 2 * math.log(abs(rho - 1.0))
        + 0.5 * (rho + 1.0) ** 2 * math.log(rho + 1.0)
    )


def overhauser_evaluate(omega, coupling_c, s0, omega_l, omega_e, gamma):
    """Raw formula for the working-model spectrum, vectorised over omega."""
    omega = np.asarray(omega, dtype=float)
    lor = coupling_c**2 * s0 / (1.0 + (omega / omega_l) ** 2)
    if omega_e is None or math.isinf(omega_e):
        return lor
    return lor * np.exp(-((omega / omega_e) ** gamma))


def quasistatic_correlation(tau, delta_t, rms_phase_rate, n=200_001):
    """Gauss-Hermite average of the exact pair correlation for a frozen field.

    For noise frozen within each record, beta is a single Gaussian of
    standard deviation ``rms_phase_rate`` (units rad/s) and the pair
    correlation is <cos(beta tau)^2> averaged over beta, independent of
    delta_t.  Used to sanity-check long-correlation-time limits.
    """
    x, wts = np.polynomial.hermite_e.hermegauss(63)
    beta = x * rms_phase_rate
    vals = np.cos(beta * tau) ** 2
    return float(np.sum(wts * vals) / np.sum(wts))
