"""Quadrature over coordinate spheres and ellipsoids, plus metric normals and areas.

Sphere rules are product Gauss rules built recursively: Gauss-Jacobi nodes in
the polar cosine against the weight ``(1 - t^2)^((n-3)/2)``, times a rule on
the equatorial sphere one dimension down, bottoming out at a uniform rule on
the circle.  Ellipsoid rules reuse the unit-sphere nodes through the linear
map ``u -> a * u``, with weights scaled by ``prod(a) * |u / a|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .curvature import metric_inverse
from .errors import DomainError
from .metric_field import Array, MetricJet2

DEFAULT_ORDER = 24


def unit_sphere_area(n: int) -> float:
    """Area of the unit sphere in R^n (``4 pi`` for n=3, ``2 pi^2`` for n=4)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class QuadSurface:
    """Weighted quadrature nodes on a closed surface.

    ``points[p]`` are node coordinates, ``normals[p]`` the Euclidean unit
    outward normals and ``weights[p]`` the Euclidean area weights, so that
    ``sum(weights)`` approximates the surface area.  ``nominal_radius`` is the
    distance from the origin to the closest surface point.
    """

    dim: int
    points: Array
    normals: Array
    weights: Array
    label: str
    nominal_radius: float

    def __len__(self) -> int:
        return len(self.weights)

    def area(self) -> float:
        return math.fsum(self.weights.tolist())


def unit_sphere_rule(n: int, order: int) -> tuple[Array, Array]:
    """Nodes and weights on the unit sphere in R^n, exact for spherical
    polynomials of degree well above ``order``."""
    if n == 2:
        m = 2 * (order + 1)
        ang = 2.0 * math.pi * np.arange(m) / m
        pts = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        return pts, np.full(m, 2.0 * math.pi / m)
    a = (n - 3) / 2.0
    t, wt = roots_jacobi(order + 1, a, a)
    sub_pts, sub_w = unit_sphere_rule(n - 1, order)
    s = np.sqrt(1.0 - t**2)
    pts = np.concatenate(
        [
            s[:, None, None] * sub_pts[None, :, :],
            np.broadcast_to(t[:, None, None], (len(t), len(sub_pts), 1)).copy(),
        ],
        axis=2,
    )
    w = wt[:, None] * sub_w[None, :]
    return pts.reshape(-1, n), w.reshape(-1)


def sphere_quadrature(n: int, r: float, order: int = DEFAULT_ORDER) -> QuadSurface:
    """Quadrature on the coordinate sphere of radius ``r`` in R^n.

    Outward normals are ``x / r`` and weights sum to the sphere area
    ``unit_sphere_area(n) * r^(n-1)``.
    """
    if n < 3:
        raise ValueError(f"sphere_quadrature requires dimension >= 3, got {n}")
    if r <= 0:
        raise ValueError(f"sphere radius must be positive, got {r}")
    if order < 2:
        raise ValueError(f"quadrature order must be >= 2, got {order}")
    pts, w = unit_sphere_rule(n, order)
    return QuadSurface(
        dim=n,
        points=r * pts,
        normals=pts,
        weights=w * r ** (n - 1),
        label=f"sphere(r={r:g})",
        nominal_radius=float(r),
    )


def ellipsoid_quadrature(semi_axes, order: int = DEFAULT_ORDER) -> QuadSurface:
    """Quadrature on the ellipsoid ``sum (x_i / a_i)^2 = 1``.

    Nodes are the unit-sphere nodes mapped by ``u -> a * u``; the area weight
    picks up the factor ``prod(a) * |u / a|`` (the cofactor stretch of the
    linear map), and normals are the exact outward ellipsoid normals,
    proportional to ``x_i / a_i^2``.
    """
    a = np.asarray(semi_axes, dtype=float)
    n = a.size
    if n < 3:
        raise ValueError(f"ellipsoid_quadrature requires dimension >= 3, got {n}")
    if np.any(a <= 0):
        raise ValueError(f"semi-axes must be positive, got {a.tolist()}")
    u, wu = unit_sphere_rule(n, order)
    covec = u / a
    stretch = np.linalg.norm(covec, axis=1)
    axes = ",".join(f"{v:g}" for v in a)
    return QuadSurface(
        dim=n,
        points=u * a,
        normals=covec / stretch[:, None],
        weights=wu * float(np.prod(a)) * stretch,
        label=f"ellipsoid({axes})",
        nominal_radius=float(np.min(a)),
    )


def g_normals_and_areas(
    g: Array, nu_e: Array, w_e: Array, ginv: Array | None = None
) -> tuple[Array, Array]:
    """Batched metric normals and area weights from Euclidean ones.

    Given the Euclidean unit conormal ``nu_e`` of a surface, the unit outward
    normal vector with respect to ``g`` is ``ginv nu_e / sqrt(nu_e ginv nu_e)``
    and the induced area element is
    ``w_g = w_e * sqrt(det g) * sqrt(nu_e ginv nu_e)``.
    """
    if ginv is None:
        ginv = metric_inverse(g)
    q = np.einsum("pkl,pk,pl->p", ginv, nu_e, nu_e)
    nu_g = np.einsum("pij,pj->pi", ginv, nu_e) / np.sqrt(q)[:, None]
    w_g = np.asarray(w_e) * np.sqrt(np.linalg.det(g)) * np.sqrt(q)
    return nu_g, w_g


def g_normal_and_area(jet: MetricJet2, x, nu_e, w_e: float) -> tuple[Array, float]:
    """Metric normal and area weight at a single surface point.

    ``x`` is accepted alongside the jet for interface symmetry with the
    surface node tuple; only the jet enters the formulas.
    """
    del x
    nu = np.asarray(nu_e, dtype=float)
    nu_g, w_g = g_normals_and_areas(jet.g[None], nu[None], np.array([w_e]))
    return nu_g[0], float(w_g[0])


def check_surface_in_domain(field_inner_radius: float, surf: QuadSurface) -> None:
    """Raise :class:`DomainError` when any node lies inside the excluded ball."""
    low = float(np.min(np.linalg.norm(surf.points, axis=1)))
    if low < field_inner_radius * (1 - 1e-12):
        raise DomainError(
            f"surface {surf.label} reaches radius {low:.6g}, inside inner_radius "
            f"{field_inner_radius:.6g}"
        )
