"""Spectral statistics and their two-term predictions.

For a spectrum ``lam_1 <= lam_2 <= ...`` of the Dirichlet operator with
mass ``m`` on a domain with volume ``|Omega|`` and boundary measure
``|dOmega|`` the Riesz mean behaves like

    R(lam) = Lambda1 |Omega| lam^{d+1} - B lam^d + o(lam^d),
    B = Lambda2 |dOmega| - C_d |Omega| m,

with the massless coefficients ``Lambda1 = Lambda1_0`` and
``Lambda2 = Lambda2_0``.  The heat trace and the Cesaro means follow from
this by the Laplace and Legendre transforms respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaincc

from . import constants
from .domains import Domain
from .galerkin import Spectrum

__all__ = [
    "RELIABLE_FRACTION",
    "StatisticsError",
    "AsymptoticPrediction",
    "HeatTrace",
    "BoundaryFit",
    "BerezinReport",
    "counting",
    "riesz_mean",
    "cesaro_mean",
    "heat_trace",
    "predict_riesz",
    "predict_cesaro",
    "predict_heat_trace",
    "extract_boundary_coefficient",
    "synthetic_spectrum",
    "berezin_check",
]

RELIABLE_FRACTION = 0.6


class StatisticsError(RuntimeError):
    """Request outside the range the spectrum supports."""


def _eigs(spec) -> np.ndarray:
    ev = spec.eigenvalues if isinstance(spec, Spectrum) else np.asarray(spec, dtype=float)
    return np.sort(np.asarray(ev, dtype=float))


def reliable_threshold(spec, fraction: float = RELIABLE_FRACTION) -> float:
    """lam_K with K = floor(fraction * count); statistics stop there."""
    ev = _eigs(spec)
    k = int(math.floor(fraction * ev.size))
    if k < 1:
        raise StatisticsError("spectrum too short for the reliable fraction")
    return float(ev[k - 1])


def counting(spec, lam):
    """N(lam) = #{n : lam_n < lam} (ties excluded)."""
    ev = _eigs(spec)
    out = np.searchsorted(ev, np.asarray(lam, dtype=float), side="left")
    return int(out) if np.ndim(lam) == 0 else out


def riesz_mean(spec, lam, fraction: float = RELIABLE_FRACTION):
    """R(lam) = sum_n max(lam - lam_n, 0), for lam up to the reliable threshold."""
    ev = _eigs(spec)
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr > reliable_threshold(ev, fraction)):
        raise StatisticsError("lam beyond the reliable part of the truncated spectrum")
    csum = np.concatenate([[0.0], np.cumsum(ev)])
    n = np.searchsorted(ev, lam_arr, side="left")
    out = n * lam_arr - csum[n]
    return float(out) if np.ndim(lam) == 0 else out


def cesaro_mean(spec, n: int) -> float:
    """(1/N) sum_{k <= N} lam_k."""
    ev = _eigs(spec)
    if not 1 <= n <= ev.size:
        raise StatisticsError(f"N must lie in [1, {ev.size}]")
    return math.fsum(ev[:n]) / n


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Two-term law ``leading * x^{p} + subleading * x^{q}``.

    ``x`` is ``lam`` for riesz/counting, ``1/t`` for heat_trace and ``N``
    for cesaro (where ``subleading_power`` is 0).
    """

    leading_coeff: float
    leading_power: float
    subleading_coeff: float
    subleading_power: float
    remainder_exponent: tuple
    statistic: str

    def __post_init__(self):
        if self.statistic not in ("riesz", "cesaro", "heat_trace", "counting"):
            raise ValueError(f"unknown statistic {self.statistic!r}")
        if not self.leading_power > self.subleading_power:
            raise ValueError("leading power must exceed the subleading power")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self.leading_coeff * x**self.leading_power + self.subleading_coeff * x**self.subleading_power
        return float(out) if out.ndim == 0 else out

    def leading(self, x):
        x = np.asarray(x, dtype=float)
        out = self.leading_coeff * x**self.leading_power
        return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def _lambda2_0(d: int) -> float:
    return constants.lambda2(d, 0.0).value


def boundary_coefficient(d: int, m: float, dom: Domain) -> float:
    """B = Lambda2_0 |dOmega| - C_d |Omega| m."""
    return _lambda2_0(d) * dom.boundary_measure - constants.c_d(d) * dom.volume * m


def _check(d: int, dom: Domain):
    if d not in (2, 3):
        raise ValueError("predictions need d in {2, 3}")
    if dom.dim != d:
        raise ValueError("domain dimension does not match d")


def predict_riesz(d: int, m: float, dom: Domain, gamma: float = 1.0) -> AsymptoticPrediction:
    """Riesz mean law; the remainder exponent range (0, gamma/(gamma+2)) is metadata."""
    _check(d, dom)
    return AsymptoticPrediction(constants.lambda1(d, 0.0) * dom.volume, d + 1.0,
                                -boundary_coefficient(d, m, dom), float(d),
                                (0.0, gamma / (gamma + 2.0)), "riesz")


def cesaro_constants(d: int) -> tuple[float, float]:
    """(C1, C2) of the Cesaro law, from the Legendre transform of the Riesz law.

    C1 = d (d+1)^{-1-1/d} Lambda1^{-1/d},  C2 = 1 / ((d+1) Lambda1).
    """
    lam1 = constants.lambda1(d, 0.0)
    return d * (d + 1.0) ** (-1.0 - 1.0 / d) * lam1 ** (-1.0 / d), 1.0 / ((d + 1.0) * lam1)


def predict_cesaro(d: int, m: float, dom: Domain, n) -> float:
    """C1 |Omega|^{-1/d} N^{1/d} + C2 B |Omega|^{-1}."""
    _check(d, dom)
    c1, c2 = cesaro_constants(d)
    n = np.asarray(n, dtype=float)
    out = c1 * dom.volume ** (-1.0 / d) * n ** (1.0 / d) + c2 * boundary_coefficient(d, m, dom) / dom.volume
    return float(out) if out.ndim == 0 else out


def heat_constants(d: int) -> tuple[float, float, float]:
    """(D1, D2, D3) from t^2 int e^{-t lam} R(lam) dlam = Z(t)."""
    return (constants.lambda1(d, 0.0) * math.gamma(d + 2), _lambda2_0(d) * math.gamma(d + 1),
            constants.c_d(d) * math.gamma(d + 1))


def predict_heat_trace(d: int, m: float, dom: Domain, t=None):
    """D1 |Omega| t^{-d} - (D2 |dOmega| - D3 |Omega| m) t^{-d+1}.

    Returns the prediction object, or its value at ``t`` when given.
    """
    _check(d, dom)
    d1, d2, d3 = heat_constants(d)
    pred = AsymptoticPrediction(d1 * dom.volume, float(d),
                                -(d2 * dom.boundary_measure - d3 * dom.volume * m), d - 1.0,
                                (0.0, 1.0), "heat_trace")
    if t is None:
        return pred
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    return pred(1.0 / t)


@dataclass(frozen=True)
class HeatTrace:
    """Heat trace with its tail accounting.

    ``head`` sums the computed eigenvalues; ``tail`` estimates the missing
    ones from the two-term counting law above the largest eigenvalue.
    ``value`` is ``head`` or ``head + tail`` depending on the mode.
    """

    t: float
    value: float
    head: float
    tail: float


def _weyl_tail(d: int, m: float, dom: Domain, lam_max: float, t: float) -> float:
    """int_{lam_max}^inf e^{-t lam} dN(lam) with N the two-term law in lam + m."""
    lam1 = constants.lambda1(d, 0.0) * dom.volume
    b = boundary_coefficient(d, m, dom) + constants.c_d(d) * dom.volume * m  # = Lambda2 |dOmega|
    # N(lam) ~ (d+1) lam1 (lam+m)^d - d b (lam+m)^{d-1}; integrate e^{-t lam} dN exactly.
    x = t * (lam_max + m)

    def moment(k):  # int_{lam_max}^inf e^{-t lam} k (lam+m)^{k-1} dlam
        return math.exp(t * m) * k * math.gamma(k) * gammaincc(k, x) / t**k if k > 0 else 0.0

    value = (d + 1) * lam1 * moment(d) - d * b * moment(d - 1)
    return max(value, 0.0)


def heat_trace(spec, t: float, dom: Domain | None = None, m: float | None = None,
               tail: str = "strict", tolerance: float = 1e-6) -> HeatTrace:
    """Z(t) = sum_n e^{-t lam_n}.

    Parameters
    ----------
    tail : {"strict", "weyl"}
        ``strict`` refuses ``t`` for which the estimated contribution of the
        missing eigenvalues exceeds ``tolerance`` times the head.  ``weyl``
        adds that estimate to the value instead.
    dom, m : optional
        Needed for the tail estimate; taken from ``spec`` when it is a
        :class:`Spectrum`.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    ev = _eigs(spec)
    if isinstance(spec, Spectrum):
        dom = dom or spec.domain
        m = spec.m if m is None else m
    head = math.fsum(np.exp(-t * ev))
    if dom is None or dom.dim not in (2, 3):
        est = 0.0 if dom is None else ev.size * math.exp(-t * ev[-1])
    else:
        est = _weyl_tail(dom.dim, float(m or 0.0), dom, float(ev[-1]), t)
    if tail == "strict":
        if est > tolerance * head:
            raise StatisticsError(f"t={t} is too small: the missing tail (~{est:.3g}) dominates the tolerance")
        return HeatTrace(t, head, head, est)
    if tail == "weyl":
        return HeatTrace(t, head + est, head, est)
    raise ValueError(f"unknown tail mode {tail!r}")


@dataclass(frozen=True)
class BoundaryFit:
    estimate: float
    stderr: float
    nuisance: float
    n_points: int


def extract_boundary_coefficient(spec, dom: Domain, d: int, m: float, window: tuple,
                                 n_points: int = 64, n_boot: int = 400, seed: int = 12345,
                                 fraction: float = RELIABLE_FRACTION) -> BoundaryFit:
    """Estimate B from (Lambda1 |Omega| lam^{d+1} - R(lam)) / lam^d ~ B + c / lam.

    Least squares on ``n_points`` equally spaced points of ``window``; the
    standard error comes from a residual bootstrap with a fixed seed.
    """
    lo, hi = map(float, window)
    if not (0 < lo < hi):
        raise ValueError("window must satisfy 0 < lo < hi")
    if n_points < 20:
        raise ValueError("need at least 20 sample points")
    if hi > reliable_threshold(spec, fraction) * (1 + 1e-12):
        raise StatisticsError("window extends beyond the reliable part of the spectrum")
    lam = np.linspace(lo, hi, n_points)
    lam1 = constants.lambda1(d, 0.0) * dom.volume
    y = (lam1 * lam ** (d + 1) - riesz_mean(spec, lam, fraction)) / lam**d
    design = np.stack([np.ones_like(lam), 1.0 / lam], axis=1)
    if np.linalg.cond(design) > 1e8:
        raise StatisticsError("ill-conditioned fit; widen the window")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coef
    resid = y - fitted
    rng = np.random.default_rng(seed)
    boots = np.empty(n_boot)
    for i in range(n_boot):
        yb = fitted + rng.choice(resid, size=resid.size, replace=True)
        boots[i] = np.linalg.lstsq(design, yb, rcond=None)[0][0]
    return BoundaryFit(float(coef[0]), float(np.std(boots, ddof=1)), float(coef[1]), n_points)


def synthetic_spectrum(d: int, volume: float, coefficient: float, count: int, start: int = 5) -> np.ndarray:
    """Eigenvalues whose Riesz mean follows R(lam) = Lambda1 V lam^{d+1} - B lam^d.

    Between consecutive eigenvalues the discrete Riesz mean is a chord of
    the law, which lies above it by Delta^2 R''/12 on average over the gap
    (Delta ~ 1/R'').  The eigenvalues are therefore placed so that the
    discrete Riesz mean equals ``R - 1/(12 R'')`` at every eigenvalue:

        R~(lam_{n+1}) - R~(lam_n) = n (lam_{n+1} - lam_n),   R~ = R - 1/(12 R'').

    The first ``start`` eigenvalues solve R'(lam) = n - 1/2 and are shifted
    together so that the discrete Riesz mean meets ``R~`` at ``lam_start``.
    The result follows the law with no constant offset and a zero-mean
    sawtooth of size O(1/R'') between eigenvalues.
    """
    a = constants.lambda1(d, 0.0) * volume
    b = float(coefficient)
    if count < start + 1:
        raise ValueError(f"count must exceed start={start}")

    def target(x):
        curvature = (d + 1) * d * a * x ** (d - 1) - d * (d - 1) * b * x ** (d - 2)
        return a * x ** (d + 1) - b * x**d - 1.0 / (12.0 * curvature)

    def counting_law(x, level):
        return (d + 1) * a * x**d - d * b * x ** (d - 1) - level

    def chord(x, lo, n):
        return (target(x) - target(lo)) / (x - lo) - n

    eps = 4 * np.finfo(float).eps
    out = np.empty(count)
    # Beyond the critical point of R' the law is increasing; start the bracket there.
    floor = max((d - 1) * b / ((d + 1) * a), 0.0) if b > 0 else 0.0
    for n in range(1, start + 1):
        hi = max(floor, 1.0)
        while counting_law(hi, n - 0.5) < 0:
            hi *= 2.0
        out[n - 1] = brentq(counting_law, floor, hi, args=(n - 0.5,), xtol=1e-15, rtol=eps)
    top = out[start - 1]
    shift = (target(top) - math.fsum(top - out[: start - 1])) / (start - 1)
    out[: start - 1] -= shift
    if out[0] <= 0 or out[start - 2] > top:
        raise ValueError("start too small for this law")
    scale = a ** (-1.0 / (d + 1))
    for n in range(start, count):
        lo = out[n - 1]
        left = lo * (1.0 + 1e-9)
        hi = lo + scale
        while chord(hi, lo, n) < 0:
            hi = lo + 2.0 * (hi - lo)
        out[n] = brentq(chord, left, hi, args=(lo, n), xtol=1e-15, rtol=eps)
    return out


@dataclass(frozen=True)
class BerezinReport:
    h: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    margins: np.ndarray
    passed: bool


def berezin_check(spec, dom: Domain, d: int, m: float, h_grid, raise_on_violation: bool = True) -> BerezinReport:
    """Check sum_n (h lam_n - 1)_- <= Lambda1_{hm} |Omega| h^{-d} for every h.

    Only eigenvalues with ``h lam_n < 1`` enter the left side, so the check
    is exact as long as the computed spectrum reaches ``1/h``; otherwise the
    partial sum is still a lower estimate of the full one and is reported.
    """
    ev = _eigs(spec)
    hs = np.asarray(h_grid, dtype=float)
    if np.any(hs <= 0):
        raise ValueError("h must be positive")
    lhs = np.array([math.fsum(np.maximum(1.0 - h * ev, 0.0)) for h in hs])
    rhs = np.array([constants.lambda1(d, h * m) * dom.volume * h ** (-d) for h in hs])
    margins = rhs - lhs
    ok = bool(np.all(margins >= 0))
    if not ok and raise_on_violation:
        bad = hs[margins < 0]
        raise AssertionError(f"Berezin bound violated at h = {bad.tolist()}")
    return BerezinReport(hs, lhs, rhs, margins, ok)
