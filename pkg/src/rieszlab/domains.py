"""Bounded test domains with exact volume and boundary measure."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Domain", "DomainError", "make_domain", "parse_domain", "contains"]

KINDS = ("interval", "rectangle", "box", "disk", "polygon")


class DomainError(ValueError):
    """Degenerate or malformed geometry."""


@dataclass(frozen=True)
class Domain:
    """An immutable bounded domain.

    Attributes
    ----------
    kind : str
        One of ``interval``, ``rectangle``, ``box``, ``disk``, ``polygon``.
    params : tuple
        Side lengths for interval/rectangle/box (anchored at the origin),
        ``(radius,)`` for a disk centred at the origin, and the vertex list
        for a polygon.
    volume, boundary_measure : float
        Computed from ``params`` at construction.
    bounding_box : tuple of (lo, hi) pairs, one per axis
    """

    kind: str
    params: tuple
    volume: float
    boundary_measure: float
    bounding_box: tuple

    @property
    def dim(self) -> int:
        return len(self.bounding_box)

    @property
    def diameter(self) -> float:
        if self.kind == "disk":
            return 2.0 * self.params[0]
        if self.kind == "polygon":
            pts = np.asarray(self.params)
            diff = pts[:, None, :] - pts[None, :, :]
            return float(np.sqrt((diff**2).sum(-1)).max())
        return math.sqrt(sum((hi - lo) ** 2 for lo, hi in self.bounding_box))

    def scaled(self, s: float) -> "Domain":
        """The image of the domain under x -> s x."""
        if not s > 0:
            raise DomainError("scale must be positive")
        if self.kind == "polygon":
            return make_domain("polygon", vertices=[(s * x, s * y) for x, y in self.params])
        return make_domain(self.kind, *(s * p for p in self.params))

    def spec(self) -> str:
        """Canonical spec string (inverse of :func:`parse_domain`)."""
        fmt = lambda v: repr(float(v))
        if self.kind == "interval":
            return f"interval:{fmt(self.params[0])}"
        if self.kind == "rectangle":
            return "rect:" + "x".join(fmt(p) for p in self.params)
        if self.kind == "box":
            return "box:" + "x".join(fmt(p) for p in self.params)
        if self.kind == "disk":
            return f"disk:{fmt(self.params[0])}"
        return "poly:" + ";".join(f"{fmt(x)},{fmt(y)}" for x, y in self.params)

    def contains(self, point) -> np.ndarray | bool:
        return contains(self, point)


def _positive(values, what):
    vals = tuple(float(v) for v in values)
    if not all(math.isfinite(v) and v > 0 for v in vals):
        raise DomainError(f"{what} must be positive and finite")
    return vals


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and d1 != 0 and d2 != 0 and ((d3 > 0) != (d4 > 0)) and d3 != 0 and d4 != 0:
        return True
    return False


def _polygon(vertices) -> tuple:
    pts = [tuple(float(c) for c in v) for v in vertices]
    if len(pts) < 3 or any(len(p) != 2 for p in pts):
        raise DomainError("polygon needs at least 3 planar vertices")
    if not all(math.isfinite(c) for p in pts for c in p):
        raise DomainError("polygon vertices must be finite")
    n = len(pts)
    if len(set(pts)) != n:
        raise DomainError("polygon has repeated vertices")
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]):
                raise DomainError("polygon is self-intersecting")
    area2 = sum(pts[i][0] * pts[(i + 1) % n][1] - pts[(i + 1) % n][0] * pts[i][1] for i in range(n))
    if area2 == 0:
        raise DomainError("polygon has zero area")
    if area2 < 0:
        pts.reverse()
    return tuple(pts)


def make_domain(kind: str, *dims: float, vertices=None) -> Domain:
    """Construct a domain, computing its measures from the geometry.

    Examples
    --------
    >>> make_domain("rectangle", 1.0, 1.0).boundary_measure
    4.0
    """
    if kind == "rect":
        kind = "rectangle"
    if kind == "interval":
        if len(dims) != 1:
            raise DomainError("interval takes one length")
        (length,) = _positive(dims, "length")
        return Domain(kind, (length,), length, 2.0, ((0.0, length),))
    if kind == "rectangle":
        if len(dims) != 2:
            raise DomainError("rectangle takes width and height")
        w, h = _positive(dims, "side lengths")
        return Domain(kind, (w, h), w * h, 2.0 * (w + h), ((0.0, w), (0.0, h)))
    if kind == "box":
        if len(dims) != 3:
            raise DomainError("box takes three side lengths")
        a, b, c = _positive(dims, "side lengths")
        return Domain(kind, (a, b, c), a * b * c, 2.0 * (a * b + b * c + a * c), ((0.0, a), (0.0, b), (0.0, c)))
    if kind == "disk":
        if len(dims) != 1:
            raise DomainError("disk takes one radius")
        (r,) = _positive(dims, "radius")
        return Domain(kind, (r,), math.pi * r * r, 2.0 * math.pi * r, ((-r, r), (-r, r)))
    if kind == "polygon":
        if vertices is None:
            raise DomainError("polygon needs vertices")
        pts = _polygon(vertices)
        n = len(pts)
        area = 0.5 * math.fsum(pts[i][0] * pts[(i + 1) % n][1] - pts[(i + 1) % n][0] * pts[i][1] for i in range(n))
        perimeter = math.fsum(math.dist(pts[i], pts[(i + 1) % n]) for i in range(n))
        xs, ys = zip(*pts)
        return Domain(kind, pts, area, perimeter, ((min(xs), max(xs)), (min(ys), max(ys))))
    raise DomainError(f"unknown domain kind {kind!r}")


def parse_domain(text: str) -> Domain:
    """Parse ``interval:L``, ``rect:WxH``, ``box:WxHxD``, ``disk:R`` or ``poly:x0,y0;x1,y1;...``."""
    kind, sep, body = text.strip().partition(":")
    if not sep:
        raise DomainError(f"malformed domain spec {text!r}")
    try:
        if kind == "poly":
            verts = [tuple(float(c) for c in item.split(",")) for item in body.split(";") if item.strip()]
            return make_domain("polygon", vertices=verts)
        if kind in ("interval", "disk"):
            return make_domain(kind, float(body))
        if kind in ("rect", "box"):
            return make_domain(kind, *(float(p) for p in body.split("x")))
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed domain spec {text!r}") from exc
    raise DomainError(f"unknown domain kind {kind!r}")


def contains(dom: Domain, point) -> np.ndarray | bool:
    """Membership test; boundary points count as inside.

    ``point`` may be a single point or an array of shape ``(..., dim)``.
    Polygons use the even-odd rule, with points on an edge accepted.
    """
    p = np.asarray(point, dtype=float)
    single = p.ndim == 1 or (dom.dim == 1 and p.ndim == 0)
    if dom.dim == 1:
        p = p.reshape(-1, 1) if p.ndim <= 1 else p
    p = np.atleast_2d(p)
    if p.shape[-1] != dom.dim:
        raise ValueError(f"points must have {dom.dim} coordinates")
    if dom.kind in ("interval", "rectangle", "box"):
        inside = np.ones(p.shape[:-1], dtype=bool)
        for k, (lo, hi) in enumerate(dom.bounding_box):
            inside &= (p[..., k] >= lo) & (p[..., k] <= hi)
    elif dom.kind == "disk":
        inside = (p**2).sum(-1) <= dom.params[0] ** 2
    else:
        inside = _polygon_contains(np.asarray(dom.params), p)
    return bool(inside.reshape(-1)[0]) if single else inside


def _polygon_contains(verts: np.ndarray, p: np.ndarray) -> np.ndarray:
    x, y = p[..., 0], p[..., 1]
    inside = np.zeros(x.shape, dtype=bool)
    on_edge = np.zeros(x.shape, dtype=bool)
    n = len(verts)
    for i in range(n):
        (x1, y1), (x2, y2) = verts[i], verts[(i + 1) % n]
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        within = (np.minimum(x1, x2) <= x) & (x <= np.maximum(x1, x2)) & \
                 (np.minimum(y1, y2) <= y) & (y <= np.maximum(y1, y2))
        on_edge |= (np.abs(cross) <= 1e-12 * max(1.0, abs(x2 - x1) + abs(y2 - y1))) & within
        straddle = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= straddle & (x < x_cross)
    return inside | on_edge
