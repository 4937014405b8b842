"""Modified Bessel functions of the second kind and the associated kernels.

Orders are restricted to ``beta = (n + 1)/2`` for integer ``n >= 0``.  For
half-odd orders (``n`` even) the closed form

    K_{k+1/2}(s) = sqrt(pi/(2s)) e^{-s} sum_j (k+j)! / (j! (k-j)!) (2s)^{-j}

is used.  Integer orders, and every order on request, go through one of two
integral representations:

* ``"heat"``:  K_b(s) = s^b / 2^{b+1} int_0^inf exp(-t - s^2/(4t)) t^{-b-1} dt
* ``"laplace"``: K_b(s) = sqrt(pi)/Gamma(b+1/2) (s/2)^b int_1^inf e^{-st} (t^2-1)^{b-1/2} dt
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .quadrature import QuadSpec, integrate, integrate_semi_infinite

__all__ = [
    "KernelParams",
    "BesselUnderflowWarning",
    "bessel_k_half",
    "bessel_k_heat",
    "bessel_k_laplace",
    "bessel_k_derivative",
    "theta_kernel",
    "decay_ratio",
    "shift_inequality",
]

UNDERFLOW_ARGUMENT = 700.0

_TIGHT = QuadSpec(abs_tol=0.0, rel_tol=1e-13, max_subdivisions=2000)


class BesselUnderflowWarning(RuntimeWarning):
    """Issued when K_beta(s) is replaced by zero because e^{-s} underflows."""


@dataclass(frozen=True)
class KernelParams:
    """Dimension and scale of the kernel theta_nu.

    Parameters
    ----------
    d : int
        Space dimension, at least 1.
    nu : float
        Positive scale (the mass over the semiclassical parameter).
    """

    d: int
    nu: float = 1.0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("d must be an integer >= 1")
        if not self.nu > 0:
            raise ValueError("nu must be positive")


def _check_order(n: int) -> float:
    if int(n) != n or n < 0:
        raise ValueError("order numerator n must be a nonnegative integer")
    return 0.5 * (n + 1)


def _underflow_threshold(beta: float) -> float:
    return UNDERFLOW_ARGUMENT + 10.0 * beta


def _closed_form(k: int, s: np.ndarray) -> np.ndarray:
    """K_{k+1/2}(s) from the terminating polynomial in 1/s."""
    inv = 1.0 / (2.0 * s)
    poly = np.zeros_like(s)
    for j in range(k, -1, -1):
        coeff = math.factorial(k + j) / (math.factorial(j) * math.factorial(k - j))
        poly = poly * inv + coeff
    return np.sqrt(np.pi / (2.0 * s)) * np.exp(-s) * poly


def bessel_k_heat(beta: float, s: float, spec: QuadSpec | None = None) -> float:
    """K_beta(s) by quadrature of the heat-kernel (Gaussian) representation.

    With ``t = (s/2) e^x`` the integral becomes
    ``int_0^inf exp(-s cosh x) cosh(beta x) dx``; the factor ``e^{-s}`` is
    pulled out so that large ``s`` does not underflow inside the integrand.
    """
    if not s > 0:
        raise ValueError("s must be positive")
    spec = spec or _TIGHT

    # exp(-s(cosh x - 1)) cosh(beta x) is negligible once s(cosh x - 1) - beta x > 745.
    upper = 1.0
    while s * (math.cosh(upper) - 1.0) - beta * upper < 745.0:
        upper *= 1.5
    value, _ = integrate(lambda x: np.exp(-s * (np.cosh(x) - 1.0)) * np.cosh(beta * x), 0.0, upper, spec)
    return value * math.exp(-s)


def bessel_k_laplace(beta: float, s: float, spec: QuadSpec | None = None) -> float:
    """K_beta(s) by quadrature of the Laplace-type representation on [1, inf).

    Uses ``t = 1 + u/s`` and, on ``u < 1``, ``u = w^2`` to remove the
    algebraic endpoint behaviour of ``(t^2-1)^{beta-1/2}``.
    """
    if not s > 0:
        raise ValueError("s must be positive")
    if not beta > -0.5:
        raise ValueError("representation needs beta > -1/2")
    spec = spec or _TIGHT
    p = beta - 0.5

    def g(u):
        return np.power(u / s * (2.0 + u / s), p)

    head, _ = integrate(lambda w: 2.0 * w * np.exp(-w * w) * g(w * w), 0.0, 1.0, spec)
    tail, _ = integrate_semi_infinite(lambda u: np.exp(-u) * g(u), 1.0,
                                      QuadSpec(abs_tol=0.0, rel_tol=spec.rel_tol,
                                               max_subdivisions=spec.max_subdivisions,
                                               decay="exponential"))
    prefactor = math.sqrt(math.pi) / math.gamma(beta + 0.5) * (s / 2.0) ** beta / s
    return prefactor * math.exp(-s) * (head + tail)


def bessel_k_half(n: int, s, method: str = "auto", return_flag: bool = False):
    """Modified Bessel function K_{(n+1)/2}(s).

    Parameters
    ----------
    n : int
        Order numerator; the order is ``(n + 1)/2``.
    s : float or array_like
        Positive argument.  Arrays are supported by the closed form only.
    method : {"auto", "closed", "heat", "laplace"}
        ``"auto"`` uses the closed form for half-odd orders and the heat
        representation for integer orders.
    return_flag : bool
        If true, return ``(value, underflowed)``.

    Returns
    -------
    float or ndarray
        ``K_{(n+1)/2}(s)``; exactly zero (with a :class:`BesselUnderflowWarning`)
        when ``s`` exceeds the underflow threshold.
    """
    beta = _check_order(n)
    s_arr = np.asarray(s, dtype=float)
    if np.any(~(s_arr > 0)):
        raise ValueError("s must be positive")
    threshold = _underflow_threshold(beta)
    under = s_arr > threshold
    if method == "auto":
        method = "closed" if n % 2 == 0 else "heat"
    if method == "closed":
        if n % 2:
            raise ValueError("closed form exists only for half-odd orders (n even)")
        safe = np.where(under, 1.0, s_arr)
        value = np.where(under, 0.0, _closed_form(n // 2, safe))
    elif method in ("heat", "laplace"):
        fn = bessel_k_heat if method == "heat" else bessel_k_laplace
        flat = [0.0 if x > threshold else fn(beta, float(x)) for x in s_arr.ravel()]
        value = np.array(flat).reshape(s_arr.shape)
    else:
        raise ValueError(f"unknown method {method!r}")
    if np.any(under):
        warnings.warn(f"K_{beta}(s) underflows for s > {threshold}; returning 0", BesselUnderflowWarning,
                      stacklevel=2)
    if value.ndim == 0:
        value = float(value)
    if return_flag:
        return value, bool(np.any(under))
    return value


def bessel_k_derivative(n: int, s, method: str = "auto"):
    """Derivative dK_beta/ds = (beta/s) K_beta(s) - K_{beta+1}(s), beta = (n+1)/2."""
    beta = _check_order(n)
    s_arr = np.asarray(s, dtype=float)
    out = beta / s_arr * bessel_k_half(n, s_arr, method) - bessel_k_half(n + 2, s_arr, method)
    return float(out) if np.ndim(out) == 0 else out


def theta_kernel(p: KernelParams, t, method: str = "auto"):
    """Kernel theta_nu(t) = nu^{d+1} (2 pi nu t)^{-(d+1)/2} K_{(d+1)/2}(nu t).

    Positive and strictly decreasing in ``t``.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr > 0)):
        raise ValueError("t must be positive")
    x = p.nu * t_arr
    order = 0.5 * (p.d + 1)
    out = p.nu ** (p.d + 1) * (2.0 * np.pi * x) ** (-order) * bessel_k_half(p.d, x, method)
    return float(out) if np.ndim(out) == 0 else out


def decay_ratio(n: int, s):
    """Ratio K_{(n+1)/2}(s) / (s^{-(n+1)/2} e^{-s/2}); bounded above uniformly in s."""
    beta = _check_order(n)
    s_arr = np.asarray(s, dtype=float)
    out = bessel_k_half(n, s_arr) * s_arr**beta * np.exp(0.5 * s_arr)
    return float(out) if np.ndim(out) == 0 else out


def shift_inequality(d: int, s):
    """Both sides of ``s K_{(d+3)/2}(s) <= 2 K_{(d+1)/2}(s/sqrt 2)``.

    Returns
    -------
    lhs, rhs : float or ndarray
    """
    s_arr = np.asarray(s, dtype=float)
    lhs = s_arr * bessel_k_half(d + 2, s_arr)
    rhs = 2.0 * bessel_k_half(d, s_arr / math.sqrt(2.0))
    if np.ndim(lhs) == 0:
        return float(lhs), float(rhs)
    return lhs, rhs
