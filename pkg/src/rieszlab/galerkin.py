"""Rayleigh-Ritz eigenvalues of the Dirichlet operator sqrt(-Delta + m^2) - m.

The quadratic form of a zero-extended trial function u is

    q_m(u) = int psi_m(|2 pi xi|^2) |u_hat(xi)|^2 dxi,   psi_m(t) = sqrt(t + m^2) - m,

and is evaluated as a Riemann sum over the frequency lattice of an
embedding torus of period L (i.e. with the periodized kernel).  Two trial
spaces are available:

* ``tensor_sine``: products of sin(j pi x / W) on intervals, rectangles and
  boxes.  The lattice is truncated at ``cutoff_factor`` times the largest
  basis frequency and the remaining tail is added from a one-dimensional
  sum with a second-order correction in the transverse frequencies.
* ``tent_grid``: bilinear hats on a uniform grid over the bounding box of a
  planar domain, keeping only nodes whose four cells lie inside the domain.
  The form is translation invariant on the grid, so a single kernel table is
  computed by FFT with alias sums.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import zeta

from . import __version__
from .domains import Domain, contains, parse_domain

__all__ = [
    "SpectralParams",
    "BasisSpec",
    "Spectrum",
    "GalerkinError",
    "psi_m",
    "sine_transform",
    "assemble_form",
    "solve_spectrum",
    "spectrum_for",
    "extrapolated_spectrum",
]

MAX_BASIS = 4000
MAX_CONDITION = 1e12


class GalerkinError(RuntimeError):
    """Invalid basis, empty trial space or an unusable mass matrix."""


@dataclass(frozen=True)
class SpectralParams:
    """Dimension, mass and semiclassical parameter (mu = h m)."""

    d: int
    m: float = 0.0
    h: float = 1.0

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError("d must be 1, 2 or 3")
        if not self.m >= 0:
            raise ValueError("m must be nonnegative")
        if not self.h > 0:
            raise ValueError("h must be positive")

    @property
    def mu(self) -> float:
        return self.h * self.m


@dataclass(frozen=True)
class BasisSpec:
    """Trial space description.

    Parameters
    ----------
    kind : {"tensor_sine", "tent_grid"}
    counts : tuple of int
        Sine modes per axis, or grid intervals per axis for tents.
    torus_period : float or None
        Embedding period L; defaults to three times the domain diameter.
    cutoff_factor : float
        Lattice truncation in units of the largest basis frequency (sine).
    alias_terms : int
        Alias images per side in the tent-grid kernel sum.
    """

    kind: str
    counts: tuple
    torus_period: float | None = None
    cutoff_factor: float = 8.0
    alias_terms: int = 16

    def __post_init__(self):
        if self.kind not in ("tensor_sine", "tent_grid"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        counts = tuple(int(c) for c in self.counts)
        if not counts or any(c < 1 for c in counts):
            raise ValueError("counts must be positive integers")
        object.__setattr__(self, "counts", counts)
        if self.torus_period is not None and not self.torus_period > 0:
            raise ValueError("torus_period must be positive")
        if self.cutoff_factor < 8.0:
            raise ValueError("cutoff_factor must be at least 8")

    def period_for(self, dom: Domain) -> float:
        period = 3.0 * dom.diameter if self.torus_period is None else float(self.torus_period)
        if period < 3.0 * dom.diameter * (1.0 - 1e-12):
            raise GalerkinError("torus period must be at least 3 times the domain diameter")
        return period

    def to_dict(self) -> dict:
        return {"kind": self.kind, "counts": list(self.counts), "torus": self.torus_period}


@dataclass(frozen=True)
class Spectrum:
    """Sorted Rayleigh-Ritz eigenvalue approximations."""

    eigenvalues: np.ndarray
    domain: Domain
    m: float
    basis: BasisSpec
    method: str = "rayleigh-ritz"
    count: int = field(init=False)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if ev.ndim != 1 or ev.size == 0:
            raise ValueError("eigenvalues must be a nonempty vector")
        if np.any(ev <= 0) or np.any(np.diff(ev) < 0):
            raise ValueError("eigenvalues must be positive and nondecreasing")
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "count", int(ev.size))

    def to_json(self) -> str:
        """Serialize with 17 significant digits; byte-stable for equal data."""
        basis = self.basis.to_dict()
        torus = "null" if basis["torus"] is None else _num(basis["torus"])
        values = ",\n    ".join(_num(v) for v in self.eigenvalues)
        return (
            "{\n"
            f'  "domain_spec": {json.dumps(self.domain.spec())},\n'
            f'  "m": {_num(self.m)},\n'
            f'  "basis": {{"kind": {json.dumps(basis["kind"])}, "counts": {json.dumps(basis["counts"])}, '
            f'"torus": {torus}}},\n'
            f'  "eigenvalues": [\n    {values}\n  ],\n'
            f'  "generated_by": {json.dumps("rieszlab.galerkin:" + self.method)},\n'
            f'  "version": {json.dumps(__version__)}\n'
            "}\n"
        )

    @classmethod
    def from_json(cls, text: str) -> "Spectrum":
        data = json.loads(text)
        try:
            b = data["basis"]
            basis = BasisSpec(b["kind"], tuple(b["counts"]), b.get("torus"))
            method = str(data.get("generated_by", "")).partition(":")[2] or "rayleigh-ritz"
            return cls(np.array(data["eigenvalues"], dtype=float), parse_domain(data["domain_spec"]),
                       float(data["m"]), basis, method)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed spectrum JSON: {exc}") from exc


def _num(x: float) -> str:
    return format(float(x), ".17g")


def psi_m(m: float, t):
    """psi_m(t) = sqrt(t + m^2) - m without cancellation."""
    t = np.asarray(t, dtype=float)
    if m == 0:
        return np.sqrt(t)
    return t / (np.sqrt(t + m * m) + m)


def _psi_prime(m: float, t):
    return 0.5 / np.sqrt(np.asarray(t, dtype=float) + m * m)


def sine_transform(j, width: float, omega):
    """Fourier transform int_0^W sqrt(2/W) sin(j pi x/W) e^{-i omega x} dx.

    Uses ``1 - (-1)^j e^{-i omega W} = 2i e^{-i delta W/2} sin(delta W/2)``
    with ``delta = omega - a`` so the removable singularity at ``omega = a``
    causes no cancellation; negative frequencies follow from conjugate
    symmetry.
    """
    j = np.asarray(j, dtype=float)[..., None]
    omega = np.asarray(omega, dtype=float)
    w = np.abs(omega)
    a = j * math.pi / width
    delta = w - a
    val = -1j * a * width * np.exp(-0.5j * delta * width) * np.sinc(delta * width / (2 * math.pi)) / (a + w)
    val = np.where(omega < 0, np.conj(val), val)
    return math.sqrt(2.0 / width) * val


def _pair_products(counts: int, width: float, omega: np.ndarray) -> np.ndarray:
    """Re(s_j(omega) conj s_j'(omega)) as an array (counts, counts, n_omega)."""
    s = sine_transform(np.arange(1, counts + 1), width, omega)
    return (s.real[:, None, :] * s.real[None, :, :] + s.imag[:, None, :] * s.imag[None, :, :])


def _axis_tail(counts: int, width: float, m: float, period: float, start: int):
    """Tail sums over |n| > start of psi and psi' against the pair products.

    Returns two (counts, counts) arrays.  The explicit sum runs to 64 times
    ``start``; beyond that the non-oscillating leading term is summed with
    the Hurwitz zeta function.
    """
    stop = 64 * start
    tail0 = np.zeros((counts, counts))
    tail1 = np.zeros((counts, counts))
    for lo in range(start + 1, stop + 1, 8192):
        n = np.arange(lo, min(lo + 8192, stop + 1), dtype=float)
        omega = 2.0 * math.pi * n / period
        prod = _pair_products(counts, width, omega)
        w = 2.0 / period
        tail0 += prod @ (w * psi_m(m, omega**2))
        tail1 += prod @ (w * _psi_prime(m, omega**2))
    # Remainder: prod ~ (2/W) a a' (1 + (-1)^{j+j'}) / omega^4 and psi ~ omega.
    a = np.arange(1, counts + 1) * math.pi / width
    parity = 1.0 + (-1.0) ** np.add.outer(np.arange(1, counts + 1), np.arange(1, counts + 1))
    lead = (2.0 / width) * np.outer(a, a) * parity
    scale = (period / (2.0 * math.pi))
    tail0 += lead * (2.0 / period) * scale**3 * zeta(3.0, stop + 1)
    tail1 += lead * (2.0 / period) * 0.5 * scale**5 * zeta(5.0, stop + 1)
    return tail0, tail1


def _sine_form(dom: Domain, m: float, basis: BasisSpec) -> tuple[np.ndarray, np.ndarray]:
    widths = [hi - lo for lo, hi in dom.bounding_box]
    counts = basis.counts
    if len(counts) != dom.dim:
        raise GalerkinError(f"{dom.kind} needs {dom.dim} basis counts")
    period = basis.period_for(dom)
    a_max = max(n * math.pi / w for n, w in zip(counts, widths))
    top = int(math.ceil(basis.cutoff_factor * a_max * period / (2.0 * math.pi)))
    n = np.arange(top + 1, dtype=float)
    omega = 2.0 * math.pi * n / period
    weights = np.where(n == 0, 1.0, 2.0) / period
    pairs = [(_pair_products(c, w, omega) * weights).reshape(c * c, -1) for c, w in zip(counts, widths)]
    dim = dom.dim
    grids = np.meshgrid(*([omega**2] * dim), indexing="ij")
    mult = psi_m(m, sum(grids))

    # Contract one axis at a time: result indexed by (j1 j1', j2 j2', ...).
    if dim == 1:
        form = pairs[0] @ mult
    elif dim == 2:
        form = (pairs[0] @ mult) @ pairs[1].T
    else:
        stage = (pairs[0] @ mult.reshape(top + 1, -1)).reshape(-1, top + 1, top + 1)
        stage = np.einsum("anm,bn->abm", stage, pairs[1])
        form = stage.reshape(-1, top + 1) @ pairs[2].T
    shape = []
    for c in counts:
        shape += [c, c]
    form = form.reshape(shape)

    # Lattice tail beyond the truncation on each axis, other axes summed in full.
    a_sq = [(np.arange(1, c + 1) * math.pi / w) ** 2 for c, w in zip(counts, widths)]
    eyes = [np.eye(c) for c in counts]
    for axis in range(dim):
        t0, t1 = _axis_tail(counts[axis], widths[axis], m, period, top)
        transverse = sum(np.meshgrid(*[a_sq[k] for k in range(dim) if k != axis], indexing="ij")) \
            if dim > 1 else np.zeros(())
        term = np.multiply.outer(t0, np.ones(transverse.shape)) + np.multiply.outer(t1, transverse)
        # term axes: (j, j', other axes...); expand the other axes to diagonal pairs.
        others = [k for k in range(dim) if k != axis]
        for k in others:
            term = np.expand_dims(term, -1)
        # Now axes (j, j', o1, 1, o2, 1, ...) -> multiply by identities.
        full = term
        idx = 2
        for k in others:
            full = full * eyes[k].reshape((1, 1) + (1,) * (idx - 2) + eyes[k].shape + (1,) * (full.ndim - idx - 2))
            idx += 2
        # full has axes (j, j', o1, o1', o2, o2', ...): move (j, j') into place.
        order = list(range(2, full.ndim))
        order[2 * axis:2 * axis] = [0, 1]
        form = form + np.transpose(full, np.argsort(order))

    # (j1, j1', j2, j2', ...) -> ((j1, j2, ...), (j1', j2', ...))
    perm = [2 * k for k in range(dim)] + [2 * k + 1 for k in range(dim)]
    size = int(np.prod(counts))
    form = np.transpose(form, perm).reshape(size, size)
    form = 0.5 * (form + form.T)
    return form, np.eye(size)


def _hat_transform_sq(omega: np.ndarray, h: float) -> np.ndarray:
    return (h * np.sinc(omega * h / (2.0 * math.pi)) ** 2) ** 2


def _tent_nodes(dom: Domain, counts: tuple) -> tuple[np.ndarray, np.ndarray, tuple]:
    """Grid indices of admissible hat nodes and the grid spacings."""
    if dom.dim != 2:
        raise GalerkinError("tent_grid supports planar domains only")
    (x0, x1), (y0, y1) = dom.bounding_box
    nx, ny = counts
    hx, hy = (x1 - x0) / nx, (y1 - y0) / ny
    gx, gy = np.meshgrid(x0 + hx * np.arange(nx + 1), y0 + hy * np.arange(ny + 1), indexing="ij")
    corner_in = contains(dom, np.stack([gx, gy], axis=-1))
    cell_in = corner_in[:-1, :-1] & corner_in[1:, :-1] & corner_in[:-1, 1:] & corner_in[1:, 1:]
    if dom.kind == "polygon":
        # A reflex vertex strictly inside a cell means the cell leaves the domain.
        for vx, vy in dom.params:
            i, j = (vx - x0) / hx, (vy - y0) / hy
            fi, fj = math.floor(i), math.floor(j)
            if 0 <= fi < nx and 0 <= fj < ny and i > fi and j > fj:
                cell_in[fi, fj] = False
    elif dom.kind == "disk":
        pass  # convex: corners inside imply the cell is inside
    ok = np.zeros((nx + 1, ny + 1), dtype=bool)
    ok[1:nx, 1:ny] = cell_in[:-1, :-1] & cell_in[1:, :-1] & cell_in[:-1, 1:] & cell_in[1:, 1:]
    ii, jj = np.nonzero(ok)
    return ii, jj, (hx, hy)


def _tent_form(dom: Domain, m: float, basis: BasisSpec) -> tuple[np.ndarray, np.ndarray]:
    if len(basis.counts) != 2:
        raise GalerkinError("tent_grid needs two counts")
    ii, jj, (hx, hy) = _tent_nodes(dom, basis.counts)
    if ii.size == 0:
        raise GalerkinError("tent grid has no interior nodes; refine the grid")
    if ii.size > MAX_BASIS:
        raise GalerkinError(f"basis size {ii.size} exceeds {MAX_BASIS}")
    period = basis.period_for(dom)
    px = int(math.ceil(period / hx))
    py = int(math.ceil(period / hy))
    lx, ly = px * hx, py * hy
    kx = np.fft.fftfreq(px, 1.0 / px)
    ky = np.fft.fftfreq(py, 1.0 / py)
    folded = np.zeros((px, py))
    J = basis.alias_terms
    for a in range(-J, J + 1):
        wx = 2.0 * math.pi * (kx + a * px) / lx
        hxsq = _hat_transform_sq(wx, hx)
        for b in range(-J, J + 1):
            wy = 2.0 * math.pi * (ky + b * py) / ly
            folded += psi_m(m, np.add.outer(wx**2, wy**2)) * np.outer(hxsq, _hat_transform_sq(wy, hy))
    kernel = np.fft.fft2(folded).real / (lx * ly)
    di = np.subtract.outer(ii, ii) % px
    dj = np.subtract.outer(jj, jj) % py
    form = kernel[di, dj]
    form = 0.5 * (form + form.T)
    mass_x = np.select([np.abs(np.subtract.outer(ii, ii)) == 0, np.abs(np.subtract.outer(ii, ii)) == 1],
                       [2.0 * hx / 3.0, hx / 6.0], 0.0)
    mass_y = np.select([np.abs(np.subtract.outer(jj, jj)) == 0, np.abs(np.subtract.outer(jj, jj)) == 1],
                       [2.0 * hy / 3.0, hy / 6.0], 0.0)
    return form, mass_x * mass_y


def assemble_form(dom: Domain, m: float, basis: BasisSpec) -> tuple[np.ndarray, np.ndarray]:
    """Form and mass matrices of the operator on the trial space.

    Returns
    -------
    form, mass : ndarray
        Symmetric matrices; for the sine basis the mass matrix is the
        identity because the basis is L2-orthonormal.
    """
    if not m >= 0:
        raise ValueError("m must be nonnegative")
    if basis.kind == "tensor_sine":
        if dom.kind not in ("interval", "rectangle", "box"):
            raise GalerkinError("tensor_sine basis needs an interval, rectangle or box")
        if int(np.prod(basis.counts)) > MAX_BASIS:
            raise GalerkinError(f"basis size exceeds {MAX_BASIS}")
        return _sine_form(dom, m, basis)
    return _tent_form(dom, m, basis)


def solve_spectrum(form: np.ndarray, mass: np.ndarray, k: int) -> np.ndarray:
    """The k smallest generalized eigenvalues of (form, mass), ascending."""
    n = form.shape[0]
    if form.shape != (n, n) or mass.shape != (n, n):
        raise GalerkinError("form and mass must be square and of equal size")
    if n == 0:
        raise GalerkinError("empty basis")
    if not 1 <= k <= n:
        raise GalerkinError(f"k must lie in [1, {n}]")
    mass_eigs = scipy.linalg.eigvalsh(mass)
    if mass_eigs[0] <= 0 or mass_eigs[-1] / mass_eigs[0] > MAX_CONDITION:
        raise GalerkinError("mass matrix is numerically singular; change the basis")
    if k < n:
        values = scipy.linalg.eigh(form, mass, eigvals_only=True, subset_by_index=[0, k - 1], driver="gvx")
    else:
        values = scipy.linalg.eigh(form, mass, eigvals_only=True, driver="gv")
    return np.sort(values)


def spectrum_for(dom: Domain, params: SpectralParams, basis: BasisSpec, k: int) -> Spectrum:
    """Eigenvalue approximations of the operator with mass ``params.m`` on ``dom``."""
    if params.d != dom.dim:
        raise GalerkinError("parameter dimension does not match the domain")
    form, mass = assemble_form(dom, params.m, basis)
    return Spectrum(solve_spectrum(form, mass, k), dom, params.m, basis)


def extrapolated_spectrum(dom: Domain, params: SpectralParams, ladder, k: int) -> Spectrum:
    """Basis-size extrapolation of the sorted sine-basis eigenvalues.

    The Rayleigh-Ritz error of the sine basis decays like ``(a log N + b)/N``
    in the number of modes per axis (eigenfunctions behave like the square
    root of the boundary distance).  Each sorted eigenvalue is fitted to
    ``lam_inf + (a log N + b)/N`` over the ``ladder`` of per-axis counts
    and the limits are returned.  The result is no longer a set of upper
    bounds; use the raw spectra for the Berezin check.
    """
    ladder = sorted(int(n) for n in ladder)
    if len(ladder) < 3:
        raise GalerkinError("extrapolation needs at least three basis sizes")
    rows = []
    for n in ladder:
        basis = BasisSpec("tensor_sine", (n,) * dom.dim)
        rows.append(spectrum_for(dom, params, basis, k).eigenvalues)
    sizes = np.array(ladder, dtype=float)
    design = np.stack([np.ones_like(sizes), np.log(sizes) / sizes, 1.0 / sizes], axis=1)
    coef, *_ = np.linalg.lstsq(design, np.stack(rows), rcond=None)
    return Spectrum(np.sort(coef[0]), dom, params.m, BasisSpec("tensor_sine", (ladder[-1],) * dom.dim),
                    "extrapolated")
