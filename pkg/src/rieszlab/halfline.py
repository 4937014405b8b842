"""Half-line model operator with symbol psi_omega(xi^2 + 1) and its spectral data.

For the relative mass ``omega >= 0`` write ``c = sqrt(1 + omega^2)``.  The
generalized eigenfunctions of the Dirichlet half-line operator are

    F_{omega,lam}(t) = sin(lam t + theta_omega(lam)) - G_{omega,lam}(t),

where ``theta`` is the phase shift and ``G`` is completely monotone with
``G(0+) = sin theta`` (so that ``F(0+) = 0``).  Everything depends on
``omega`` only through the rescaling ``lam -> lam / c``, ``t -> c t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import nnls

from .quadrature import QuadSpec, composite_gauss, gauss_legendre, integrate, \
    integrate_semi_infinite

__all__ = [
    "ModelParams",
    "GCorrection",
    "HalflineEigenfunction",
    "GFitError",
    "psi",
    "bernstein_f",
    "ltilde",
    "ltilde_log",
    "phase_shift_derivative",
    "phase_shift_second_derivative",
    "phase_shift",
    "phase_shift_compact",
    "phase_shift_limit",
    "varphi",
    "log_varphi",
    "varphi_prime_zero",
    "g_laplace",
    "g_zero_moment",
    "g_first_moment",
    "fit_g",
    "make_eigenfunction",
    "eigenfunction_F",
    "pi_transform",
]

PHASE_LIMIT = math.pi / 8.0


def phase_shift_limit() -> float:
    """Limit of the phase shift as lam -> infinity (pi/8, for every omega)."""
    return PHASE_LIMIT


@dataclass(frozen=True)
class ModelParams:
    """Relative mass of the half-line model."""

    omega: float = 0.0

    def __post_init__(self):
        if not self.omega >= 0:
            raise ValueError("omega must be nonnegative")

    @property
    def c(self) -> float:
        return math.sqrt(1.0 + self.omega**2)


def _check_omega(omega: float) -> float:
    if not omega >= 0:
        raise ValueError("omega must be nonnegative")
    return math.sqrt(1.0 + omega * omega)


def _positive(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError(f"{name} must be positive")
    return arr


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def psi(omega: float, t):
    """Symbol psi_omega(t) = sqrt(t + omega^2) - omega, written without cancellation."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    if omega < 0:
        raise ValueError("omega must be nonnegative")
    return _out(t_arr / (np.sqrt(t_arr + omega * omega) + omega) if omega > 0 else np.sqrt(t_arr))


def bernstein_f(omega: float, t):
    """f_omega(t) = psi_omega(t + 1) - psi_omega(1) = sqrt(t + c^2) - c."""
    c = _check_omega(omega)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    return _out(t_arr / (np.sqrt(t_arr + c * c) + c))


def ltilde(omega: float, lam):
    """l~_omega(lam); equals asinh(lam / sqrt(1 + omega^2))."""
    c = _check_omega(omega)
    lam = _positive(lam, "lam")
    return _out(np.arcsinh(lam / c))


def ltilde_log(omega: float, lam):
    """l~_omega(lam) from its defining logarithm (reference form)."""
    c = _check_omega(omega)
    lam = _positive(lam, "lam")
    root = np.sqrt(lam * lam + c * c)
    return _out(np.log((root + c + lam) / (root + c - lam)))


def _asinh_over(x: np.ndarray) -> np.ndarray:
    """asinh(x)/x with the removable point at 0."""
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    series = 1.0 - x * x / 6.0 + 3.0 * x**4 / 40.0
    return np.where(small, series, np.arcsinh(safe) / safe)


def phase_shift_derivative(omega: float, lam):
    """theta'_omega(lam) = c^{-1} theta'_0(lam/c), theta'_0(x) = asinh(x) / (pi x (x^2+1)).

    Accurate down to tiny ``lam``, where it tends to ``1/(pi c)``.
    """
    c = _check_omega(omega)
    lam = _positive(lam, "lam")
    x = lam / c
    return _out(_asinh_over(x) / (math.pi * (x * x + 1.0)) / c)


def phase_shift_second_derivative(omega: float, lam):
    """theta''_omega(lam) from the closed form of theta''_0 and the scaling."""
    c = _check_omega(omega)
    lam = _positive(lam, "lam")
    x = lam / c
    second0 = -((3.0 * x * x + 1.0) * _asinh_over(x) - np.sqrt(x * x + 1.0)) / (math.pi * x * (x * x + 1.0) ** 2)
    # Near x = 0 the bracket cancels to O(x^2); use the series of theta''_0 there.
    small = x < 1e-3
    series = -(7.0 / (3.0 * math.pi)) * x
    return _out(np.where(small, series, second0) / (c * c))


# Phase shift via w = 2 asinh(x): theta_0(x) = (1/(2 pi)) int_0^{2 asinh x} w / sinh(w) dw.
_PANEL = 4.0
_PANEL_NODES = 24
_W_MAX = 48.0


def _w_over_sinh(w: np.ndarray) -> np.ndarray:
    small = np.abs(w) < 1e-6
    safe = np.where(small, 1.0, w)
    return np.where(small, 1.0 - w * w / 6.0, safe / np.sinh(safe))


@lru_cache(maxsize=1)
def _phase_panels() -> np.ndarray:
    x, wts = gauss_legendre(_PANEL_NODES, 0.0, _PANEL)
    n = int(_W_MAX / _PANEL)
    pieces = [math.fsum(wts * _w_over_sinh(x + k * _PANEL)) for k in range(n)]
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    cum.flags.writeable = False
    return cum


def phase_shift(omega: float, lam):
    """Phase shift theta_omega(lam), integrating theta' from 0.

    The substitution ``lam = c sinh(w/2)`` turns theta' into the entire,
    exponentially decaying density ``w / (2 pi sinh w)``, integrated here by
    Gauss-Legendre panels of width 4 (relative accuracy near 1e-16).
    """
    c = _check_omega(omega)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("lam must be nonnegative")
    upper = np.minimum(2.0 * np.arcsinh(lam / c), _W_MAX)
    cum = _phase_panels()
    k = np.minimum(np.floor(upper / _PANEL).astype(int), len(cum) - 1)
    lo = k * _PANEL
    x, wts = gauss_legendre(_PANEL_NODES, 0.0, 1.0)
    span = (upper - lo)[..., None]
    partial = np.sum(wts * span * _w_over_sinh(lo[..., None] + span * x), axis=-1)
    return _out((cum[k] + partial) / (2.0 * math.pi))


def phase_shift_compact(omega: float, lam, spec: QuadSpec | None = None) -> float:
    """Phase shift from the compact-interval representation on (0, 1).

    theta_0(x) = (1/pi) int_0^1 (1 - t^2)^{-1}
                 ln[(1 + sqrt((x^2/t^2 + 1)/(x^2+1))) / (1 + sqrt((x^2 t^2 + 1)/(x^2+1)))] dt,
    with ``x = lam / c``.  The factor ``1 - t^2`` is cancelled analytically
    so the integrand is bounded near ``t = 1``.
    """
    c = _check_omega(omega)
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if lam == 0:
        return 0.0
    x = lam / c
    x2 = x * x
    root = math.sqrt(x2 + 1.0)
    spec = spec or QuadSpec(abs_tol=1e-15, rel_tol=1e-12)

    def integrand(t):
        t2 = t * t
        big = np.sqrt(x2 / t2 + 1.0)
        little = np.sqrt(x2 * t2 + 1.0)
        b = little / root
        r = x2 * (1.0 + t2) / (t2 * (big + little) * root * (1.0 + b))
        z = (1.0 - t2) * r
        ratio = np.where(np.abs(z) < 1e-8, 1.0 - 0.5 * z, np.log1p(z) / np.where(z == 0, 1.0, z))
        return r * ratio

    value, _ = integrate(integrand, 0.0, 1.0, spec)
    return value / math.pi


def _log_ratio(omega: float, lam: float, s):
    """ln[(1 - s^2/lam^2) / (1 - f(s^2)/f(lam^2))] in its simplified, singularity-free form."""
    c = math.sqrt(1.0 + omega * omega)
    big = math.sqrt(lam * lam + c * c)
    return np.log((big + np.sqrt(np.asarray(s) ** 2 + c * c)) / (big + c))


def varphi(omega: float, lam: float, t, spec: QuadSpec | None = None):
    """phi_{omega,lam}(t) by adaptive quadrature of its defining exponent.

    The logarithm of ``(1 - s^2/lam^2)/(1 - f(s^2)/f(lam^2))`` simplifies to
    ``ln[(sqrt(lam^2+c^2) + sqrt(s^2+c^2)) / (sqrt(lam^2+c^2) + c)]``, so the
    point ``s = lam`` needs no special treatment.
    """
    _check_omega(omega)
    if not lam > 0:
        raise ValueError("lam must be positive")
    spec = spec or QuadSpec(abs_tol=1e-14, rel_tol=1e-12, decay="algebraic")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    out = np.empty(t_arr.shape)
    for idx, tv in np.ndenumerate(t_arr):
        if tv == 0:
            out[idx] = 1.0
            continue
        value, _ = integrate_semi_infinite(lambda u: _log_ratio(omega, lam, tv * u) / (1.0 + u * u), 0.0, spec)
        out[idx] = math.exp(value / math.pi)
    return _out(out)


def _log_varphi_nodes(c: float, big: float, t: float):
    """Panels for the smooth form of ln phi at one t (see log_varphi)."""
    tau = math.asinh(t / c)
    breaks = [0.0]
    edge = min(tau, 1.0)
    if edge < 1.0:
        # Geometric panels resolve the scale tau near v = 0.
        breaks.append(edge)
        while breaks[-1] < 1.0:
            breaks.append(min(2.0 * breaks[-1], 1.0))
    stop = max(tau, 1.0) + 40.0
    while breaks[-1] < stop:
        breaks.append(min(breaks[-1] + 2.0, stop))
    return composite_gauss(np.array(breaks), 16)


def log_varphi(omega: float, lam: float, t) -> np.ndarray:
    """ln phi_{omega,lam}(t), vectorized over ``t``.

    Integrating the defining exponent by parts gives

        ln phi(t) = (1/pi) int_0^inf arctan(t / (c sinh v)) c sinh v / (A + c cosh v) dv,

    with ``A = sqrt(lam^2 + c^2)``; the integrand is smooth and decays like
    ``e^{-v}``, so fixed composite Gauss rules reach rounding accuracy.
    """
    c = _check_omega(omega)
    big = math.sqrt(lam * lam + c * c)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(t_arr.shape)
    for idx, tv in np.ndenumerate(t_arr):
        if tv <= 0:
            continue
        v, w = _log_varphi_nodes(c, big, tv)
        sh = c * np.sinh(v)
        out[idx] = np.dot(w, np.arctan2(tv, sh) * sh / (big + c * np.cosh(v))) / math.pi
    return out.reshape(np.shape(t)) if np.ndim(t) else out[0]


def varphi_prime_zero(omega: float, lam):
    """phi'_{omega,lam}(0) = ((lam^2 + c^2)/c^2) theta'_omega(lam)."""
    c = _check_omega(omega)
    lam = _positive(lam, "lam")
    return _out((lam * lam + c * c) / (c * c) * np.asarray(phase_shift_derivative(omega, lam)))


def _sqrt_fprime_over_f(c: float, lam: float) -> float:
    """sqrt(f'(lam^2)/f(lam^2)) = sqrt((A + c)/(2A)) / lam with A = sqrt(lam^2+c^2)."""
    big = math.sqrt(lam * lam + c * c)
    return math.sqrt((big + c) / (2.0 * big)) / lam


def g_laplace(omega: float, lam: float, u):
    """Closed-form Laplace transform of G_{omega,lam} at ``u >= 0``.

    L[G](u) = (lam cos th + u sin th)/(lam^2 + u^2)
              - lam^2/(lam^2 + u^2) sqrt(f'(lam^2)/f(lam^2)) phi(u).
    """
    c = _check_omega(omega)
    if not lam > 0:
        raise ValueError("lam must be positive")
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < 0):
        raise ValueError("u must be nonnegative")
    th = float(phase_shift(omega, lam))
    root = _sqrt_fprime_over_f(c, lam)
    phi = np.exp(log_varphi(omega, lam, u_arr))
    denom = lam * lam + u_arr * u_arr
    return _out((lam * math.cos(th) + u_arr * math.sin(th) - lam * lam * root * phi) / denom)


def g_zero_moment(omega: float, lam: float) -> float:
    """int_0^inf G dt = cos(theta)/lam - sqrt(f'/f)."""
    c = _check_omega(omega)
    return math.cos(float(phase_shift(omega, lam))) / lam - _sqrt_fprime_over_f(c, lam)


def g_first_moment(omega: float, lam: float) -> float:
    """int_0^inf t G dt = (1/lam) (l~(lam)/pi sqrt(f'/f) - sin(theta)/lam)."""
    c = _check_omega(omega)
    return (float(ltilde(omega, lam)) / math.pi * _sqrt_fprime_over_f(c, lam)
            - math.sin(float(phase_shift(omega, lam))) / lam) / lam


class GFitError(RuntimeError):
    """Raised when the exponential-sum fit misses the hard residual ceiling."""

    def __init__(self, message: str, best: "GCorrection"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class GCorrection:
    """Nonnegative exponential sum G(t) ~ sum_i w_i exp(-s_i t).

    Attributes
    ----------
    omega, lam : float
        Model parameters.
    rates, weights : ndarray
        Decay rates ``s_i > 0`` and weights ``w_i >= 0`` (zeros pruned).
    fit_residual : float
        Maximum relative error of the fitted Laplace transform at the
        validation points.
    """

    omega: float
    lam: float
    rates: np.ndarray
    weights: np.ndarray
    fit_residual: float

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        vals = np.exp(-np.multiply.outer(t_arr, self.rates)) @ self.weights
        return _out(vals)

    def laplace(self, u):
        u_arr = np.asarray(u, dtype=float)
        return _out((1.0 / np.add.outer(u_arr, self.rates)) @ self.weights)

    @property
    def at_zero(self) -> float:
        return float(self.weights.sum())

    def moment(self, k: int) -> float:
        """int_0^inf t^k G(t) dt = k! sum w_i / s_i^{k+1}."""
        return math.factorial(k) * float(np.sum(self.weights / self.rates ** (k + 1)))

    def sine_product_integral(self, lam: float, theta: float) -> float:
        """int_0^inf sin(lam t + theta) G(t) dt = sum w_i Im[e^{i theta}/(s_i - i lam)]."""
        s = self.rates
        return float(np.sum(self.weights * (lam * math.cos(theta) + s * math.sin(theta)) / (s * s + lam * lam)))

    def square_integral(self) -> float:
        """int_0^inf G(t)^2 dt = sum_ij w_i w_j / (s_i + s_j)."""
        return float(self.weights @ (np.add.outer(self.rates, self.rates) ** -1.0) @ self.weights)


def _fit_scale(c: float, lam: float) -> tuple[float, float]:
    x = lam / c
    return c * min(x, 1.0), c * max(x, 1.0)


def fit_g(omega: float, lam: float, n_terms: int = 120, validation_points: int = 20,
          target: float = 1e-5, ceiling: float = 1e-3) -> GCorrection:
    """Fit G_{omega,lam} by a nonnegative exponential sum.

    Rates are log-spaced over roughly thirteen decades around the natural
    scales of the problem; the weights solve a nonnegative least-squares
    problem that matches ``g_laplace`` in relative terms on a denser
    log-spaced ``u`` grid (plus ``u = 0``).  The reported residual is the
    maximum relative error at ``validation_points`` log-spaced points in
    ``[1e-2, 1e2]``, none of which belong to the training grid.

    Raises
    ------
    GFitError
        If the validation residual exceeds ``ceiling``.
    """
    c = _check_omega(omega)
    if not lam > 0:
        raise ValueError("lam must be positive")
    if n_terms < 4:
        raise ValueError("n_terms must be at least 4")
    lo, hi = _fit_scale(c, lam)
    rates = np.geomspace(lo * 1e-4, hi * 1e9, n_terms)
    u_train = np.concatenate([[0.0], np.geomspace(lo * 1e-5, hi * 1e8, 3 * n_terms)])
    g_train = np.asarray(g_laplace(omega, lam, u_train))
    design = 1.0 / np.add.outer(u_train, rates)
    row = 1.0 / g_train
    col = 1.0 / np.linalg.norm(design * row[:, None], axis=0)
    coef, _ = nnls(design * row[:, None] * col[None, :], np.ones_like(g_train), maxiter=50 * n_terms)
    weights = coef * col
    keep = weights > 0
    u_val = np.geomspace(1e-2, 1e2, validation_points) * (1.0 + 1e-3 / math.pi)
    g_val = np.asarray(g_laplace(omega, lam, u_val))
    approx = (1.0 / np.add.outer(u_val, rates[keep])) @ weights[keep]
    residual = float(np.max(np.abs(approx / g_val - 1.0)))
    result = GCorrection(omega=float(omega), lam=float(lam), rates=rates[keep], weights=weights[keep],
                         fit_residual=residual)
    if residual > ceiling:
        raise GFitError(f"G fit residual {residual:.3e} exceeds {ceiling:.1e}", result)
    return result


@dataclass(frozen=True)
class HalflineEigenfunction:
    """Generalized eigenfunction F_{omega,lam} of the half-line model."""

    params: ModelParams
    lam: float
    theta: float
    correction: GCorrection

    def __call__(self, t):
        return eigenfunction_F(self, t)


def make_eigenfunction(omega: float, lam: float, n_terms: int = 120) -> HalflineEigenfunction:
    """Phase shift and fitted correction bundled into an evaluator."""
    return HalflineEigenfunction(ModelParams(omega), float(lam), float(phase_shift(omega, lam)),
                                 fit_g(omega, lam, n_terms))


def eigenfunction_F(ef: HalflineEigenfunction, t):
    """F(t) = sin(lam t + theta) - G(t)."""
    t_arr = np.asarray(t, dtype=float)
    return _out(np.sin(ef.lam * t_arr + ef.theta) - np.asarray(ef.correction(t_arr)))


def pi_transform(omega: float, phi: Callable, lam_grid, t_max: float = 60.0, panel_nodes: int = 16,
                 n_terms: int = 120) -> np.ndarray:
    """Generalized Fourier transform (Pi phi)(lam) = sqrt(2/pi) int_0^inf F_lam(t) phi(t) dt.

    ``phi`` must accept arrays and be negligible beyond ``t_max``.  The
    oscillating part sin(lam t + theta) uses composite Gauss-Legendre panels
    short enough to resolve the largest frequency in ``lam_grid``; the
    smooth correction G uses a geometrically graded grid that follows its
    boundary layer at t = 0.
    """
    lam_grid = np.asarray(lam_grid, dtype=float)
    if np.any(lam_grid <= 0):
        raise ValueError("lam_grid must be positive")
    width = min(1.0, math.pi / max(lam_grid.max(), 1e-12))
    n_panels = int(math.ceil(t_max / width))
    t_osc, w_osc = composite_gauss(np.concatenate([[0.0], width * np.arange(1, n_panels + 1)]), panel_nodes)
    wphi_osc = w_osc * np.asarray(phi(t_osc), dtype=float)
    t_g, w_g = composite_gauss(np.concatenate([[0.0], np.geomspace(1e-10, t_max, 80)]), 12)
    wphi_g = w_g * np.asarray(phi(t_g), dtype=float)
    theta = np.asarray(phase_shift(omega, lam_grid), dtype=float).reshape(lam_grid.shape)
    out = np.empty(lam_grid.shape)
    for i, lam in enumerate(lam_grid):
        wave = np.dot(wphi_osc, np.sin(lam * t_osc + theta[i]))
        corr = np.dot(wphi_g, fit_g(omega, lam, n_terms)(t_g))
        out[i] = math.sqrt(2.0 / math.pi) * (wave - corr)
    return out
