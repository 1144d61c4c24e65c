"""Constructive planar domains: disks and rectangles combined by union/difference.

A domain is a small expression tree with a text descriptor, e.g.
``diff(disk(0,0,1),disk(-0.75,0,0.7))``. Membership tests are exact
comparisons (closed set, no tolerance), so clipping decisions are
deterministic. Boundary samplers emit points lying analytically on the
primitive arcs/edges that make up the composite boundary.
"""
from __future__ import annotations

import numpy as np

from .errors import ParseError


class Domain:
    """Base class; subclasses implement the closed/open membership tests."""

    descriptor: str

    def contains(self, pts):
        """Closed membership x in closure(Omega), vectorized over (n, 2) points."""
        raise NotImplementedError

    def strictly_inside(self, pts):
        """Open membership x in interior(Omega), vectorized over (n, 2) points."""
        raise NotImplementedError

    def bounding_box(self):
        """((xmin, ymin), (xmax, ymax)) enclosing the domain."""
        raise NotImplementedError

    def boundary_points(self, spacing):
        """Sample the composite boundary with arclength spacing <= `spacing`.

        Every returned point lies on the boundary arc/edge of one of the
        primitives, filtered down to the part that belongs to the composite
        boundary. Returns an (n, 2) array.
        """
        raise NotImplementedError

    def diameter_bound(self):
        """Upper bound for diam(Omega): the bounding-box diagonal."""
        (x0, y0), (x1, y1) = self.bounding_box()
        return float(np.hypot(x1 - x0, y1 - y0))

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor!r})"


class Disk(Domain):
    def __init__(self, cx, cy, r):
        if r <= 0:
            raise ValueError("disk radius must be positive")
        self.center = np.array([cx, cy], dtype=float)
        self.radius = float(r)
        self.descriptor = f"disk({_fmt(cx)},{_fmt(cy)},{_fmt(r)})"

    def contains(self, pts):
        pts = np.atleast_2d(pts)
        d2 = np.sum((pts - self.center) ** 2, axis=1)
        return d2 <= self.radius**2

    def strictly_inside(self, pts):
        pts = np.atleast_2d(pts)
        d2 = np.sum((pts - self.center) ** 2, axis=1)
        return d2 < self.radius**2

    def bounding_box(self):
        c, r = self.center, self.radius
        return (c[0] - r, c[1] - r), (c[0] + r, c[1] + r)

    def boundary_points(self, spacing):
        n = max(8, int(np.ceil(2.0 * np.pi * self.radius / spacing)))
        theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        return self.center + self.radius * np.column_stack([np.cos(theta), np.sin(theta)])


class Rect(Domain):
    def __init__(self, x0, y0, x1, y1):
        if not (x0 < x1 and y0 < y1):
            raise ValueError("rectangle corners must satisfy x0 < x1 and y0 < y1")
        self.lo = np.array([x0, y0], dtype=float)
        self.hi = np.array([x1, y1], dtype=float)
        self.descriptor = f"rect({_fmt(x0)},{_fmt(y0)},{_fmt(x1)},{_fmt(y1)})"

    def contains(self, pts):
        pts = np.atleast_2d(pts)
        return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)

    def strictly_inside(self, pts):
        pts = np.atleast_2d(pts)
        return np.all((pts > self.lo) & (pts < self.hi), axis=1)

    def bounding_box(self):
        return tuple(self.lo), tuple(self.hi)

    def boundary_points(self, spacing):
        (x0, y0), (x1, y1) = self.lo, self.hi
        out = []
        for (ax, ay), (bx, by) in [((x0, y0), (x1, y0)), ((x1, y0), (x1, y1)),
                                   ((x1, y1), (x0, y1)), ((x0, y1), (x0, y0))]:
            length = np.hypot(bx - ax, by - ay)
            n = max(2, int(np.ceil(length / spacing)))
            t = np.linspace(0.0, 1.0, n, endpoint=False)  # omit b: next edge starts there
            out.append(np.column_stack([ax + t * (bx - ax), ay + t * (by - ay)]))
        return np.vstack(out)


class Union(Domain):
    def __init__(self, a: Domain, b: Domain):
        self.a, self.b = a, b
        self.descriptor = f"union({a.descriptor},{b.descriptor})"

    def contains(self, pts):
        return self.a.contains(pts) | self.b.contains(pts)

    def strictly_inside(self, pts):
        return self.a.strictly_inside(pts) | self.b.strictly_inside(pts)

    def bounding_box(self):
        (ax0, ay0), (ax1, ay1) = self.a.bounding_box()
        (bx0, by0), (bx1, by1) = self.b.bounding_box()
        return (min(ax0, bx0), min(ay0, by0)), (max(ax1, bx1), max(ay1, by1))

    def boundary_points(self, spacing):
        pa = self.a.boundary_points(spacing)
        pb = self.b.boundary_points(spacing)
        keep_a = ~self.b.strictly_inside(pa)
        keep_b = ~self.a.strictly_inside(pb)
        return np.vstack([pa[keep_a], pb[keep_b]])


class Difference(Domain):
    """Closure of a minus b: points on the carved boundary count as inside."""

    def __init__(self, a: Domain, b: Domain):
        self.a, self.b = a, b
        self.descriptor = f"diff({a.descriptor},{b.descriptor})"

    def contains(self, pts):
        return self.a.contains(pts) & ~self.b.strictly_inside(pts)

    def strictly_inside(self, pts):
        return self.a.strictly_inside(pts) & ~self.b.contains(pts)

    def bounding_box(self):
        return self.a.bounding_box()

    def boundary_points(self, spacing):
        pa = self.a.boundary_points(spacing)
        pb = self.b.boundary_points(spacing)
        keep_a = ~self.b.strictly_inside(pa)
        keep_b = self.a.contains(pb)
        return np.vstack([pa[keep_a], pb[keep_b]])


def _fmt(x):
    x = float(x)
    return repr(int(x)) if x == int(x) else repr(x)


def disk(cx, cy, r) -> Disk:
    return Disk(cx, cy, r)


def rect(x0, y0, x1, y1) -> Rect:
    return Rect(x0, y0, x1, y1)


def union(a, b) -> Union:
    return Union(a, b)


def diff(a, b) -> Difference:
    return Difference(a, b)


def parse_domain(text: str) -> Domain:
    """Parse a descriptor like ``diff(disk(0,0,1),rect(-0.4,-0.4,0.4,0.4))``."""
    s = "".join(text.split())
    expr, rest = _parse_expr(s, 0)
    if rest != len(s):
        raise ParseError(f"trailing characters in domain descriptor: {s[rest:]!r}")
    return expr


def _parse_expr(s, i):
    for name in ("disk", "rect", "union", "diff"):
        if s.startswith(name + "(", i):
            i += len(name) + 1
            args = []
            if name in ("union", "diff"):
                a, i = _parse_expr(s, i)
                if i >= len(s) or s[i] != ",":
                    raise ParseError("expected ',' between domain arguments")
                b, i = _parse_expr(s, i + 1)
                args = [a, b]
            else:
                nargs = 3 if name == "disk" else 4
                for k in range(nargs):
                    j = i
                    while j < len(s) and s[j] not in ",)":
                        j += 1
                    try:
                        args.append(float(s[i:j]))
                    except ValueError:
                        raise ParseError(f"bad number {s[i:j]!r} in domain descriptor")
                    i = j
                    if k < nargs - 1:
                        if i >= len(s) or s[i] != ",":
                            raise ParseError("expected ',' between numbers")
                        i += 1
            if i >= len(s) or s[i] != ")":
                raise ParseError("expected ')' in domain descriptor")
            ctor = {"disk": Disk, "rect": Rect, "union": Union, "diff": Difference}[name]
            return ctor(*args), i + 1
    raise ParseError(f"unknown domain primitive at {s[i:i + 12]!r}")


def sample_points(domain: Domain, n: int, rng) -> np.ndarray:
    """Draw `n` points uniformly from the closed domain by bbox rejection."""
    (x0, y0), (x1, y1) = domain.bounding_box()
    out = np.empty((0, 2))
    while out.shape[0] < n:
        cand = rng.uniform([x0, y0], [x1, y1], size=(4 * n, 2))
        cand = cand[domain.contains(cand)]
        out = np.vstack([out, cand])
    return out[:n]


# Benchmark domains used throughout the tests and bundled configs.
def annulus_offset() -> Difference:
    """Unit disk minus the off-center disk B((-0.75,0), 0.7)."""
    return Difference(Disk(0, 0, 1), Disk(-0.75, 0, 0.7))


def channel_with_notches() -> Difference:
    """(-2,2)x(-1.5,1.5) minus two rectangular notches."""
    base = Rect(-2, -1.5, 2, 1.5)
    top = Rect(-0.75, 0.5, 0.75, 1.5)
    bottom = Rect(-0.75, -1.5, 0.75, -0.5)
    return Difference(Difference(base, top), bottom)


def unit_disk() -> Disk:
    return Disk(0, 0, 1)


def disk_with_square_hole() -> Difference:
    """Unit disk minus the square [-0.4,0.4]^2."""
    return Difference(Disk(0, 0, 1), Rect(-0.4, -0.4, 0.4, 0.4))
