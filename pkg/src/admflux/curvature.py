"""Pointwise tensor calculus: Christoffel symbols, Ricci, scalar and Einstein tensors.

All formulas are the full nonlinear ones; :func:`linearized_scalar` exposes the
second-derivative truncation of the scalar curvature separately, as a
cross-check quantity.  Array-level helpers accept a leading batch axis so that
surface integrals can evaluate curvature at all quadrature nodes at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMetricError
from .metric_field import Array, MetricJet2

#: Metrics with condition number above this are rejected instead of inverted.
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class CurvatureBundle:
    """Curvature data at one point (or a batch of points, with a leading axis).

    ``gamma[k, i, j]`` holds the connection coefficients with upper index
    first, ``dgamma[l, k, i, j]`` their partials with the derivative index
    first.  ``einstein`` is ``ricci - scalar/2 * g`` and ``ginv`` the inverse
    metric.
    """

    gamma: Array
    dgamma: Array
    ricci: Array
    scalar: Array
    einstein: Array
    ginv: Array


def metric_inverse(g: Array) -> Array:
    """Inverse metric with a condition-number guard (batched over leading axes)."""
    cond = np.linalg.cond(g)
    worst = float(np.max(cond))
    if not np.isfinite(worst) or worst > CONDITION_LIMIT:
        raise SingularMetricError(
            f"metric condition number {worst:.3e} exceeds limit {CONDITION_LIMIT:.0e}"
        )
    return np.linalg.inv(g)


def curvature_arrays(g: Array, dg: Array, ddg: Array) -> CurvatureBundle:
    """Full curvature bundle from batched jet arrays ``(p, ...)`` index layout.

    Connection: ``gamma[k,i,j] = ginv[k,s] (dg[j,i,s] + dg[i,j,s] - dg[s,i,j]) / 2``.
    Ricci:  ``R_ij = d_k gamma[k,j,i] - d_j gamma[k,k,i]
    + gamma[k,k,l] gamma[l,j,i] - gamma[k,j,l] gamma[l,k,i]``.
    """
    ginv = metric_inverse(g)
    # T[s,i,j] = g_is,j + g_js,i - g_ij,s
    T = np.einsum("pjis->psij", dg) + np.einsum("pijs->psij", dg) - dg
    gamma = 0.5 * np.einsum("pks,psij->pkij", ginv, T)
    dginv = -np.einsum("pab,plbc,pcd->plad", ginv, dg, ginv)
    dT = np.einsum("pljis->plsij", ddg) + np.einsum("plijs->plsij", ddg) - ddg
    dgamma = 0.5 * (
        np.einsum("plks,psij->plkij", dginv, T) + np.einsum("pks,plsij->plkij", ginv, dT)
    )
    ric = (
        np.einsum("pkkji->pij", dgamma)
        - np.einsum("pjkki->pij", dgamma)
        + np.einsum("pkkl,plji->pij", gamma, gamma)
        - np.einsum("pkjl,plki->pij", gamma, gamma)
    )
    ric = 0.5 * (ric + ric.swapaxes(-1, -2))
    scalar = np.einsum("pij,pij->p", ginv, ric)
    einstein_ = ric - 0.5 * scalar[:, None, None] * g
    return CurvatureBundle(
        gamma=gamma, dgamma=dgamma, ricci=ric, scalar=scalar, einstein=einstein_, ginv=ginv
    )


def curvature_bundle(jet: MetricJet2) -> CurvatureBundle:
    """Curvature bundle at a single point."""
    b = curvature_arrays(jet.g[None], jet.dg[None], jet.ddg[None])
    return CurvatureBundle(
        gamma=b.gamma[0],
        dgamma=b.dgamma[0],
        ricci=b.ricci[0],
        scalar=float(b.scalar[0]),
        einstein=b.einstein[0],
        ginv=b.ginv[0],
    )


def christoffel(jet: MetricJet2) -> tuple[Array, Array]:
    """Connection coefficients and their first partials, ``(gamma, dgamma)``."""
    b = curvature_bundle(jet)
    return b.gamma, b.dgamma


def ricci(jet: MetricJet2) -> Array:
    """Ricci tensor from the full nonlinear formula."""
    return curvature_bundle(jet).ricci


def scalar_curvature(jet: MetricJet2) -> float:
    """Scalar curvature ``ginv[i,j] R_ij``."""
    return curvature_bundle(jet).scalar


def einstein(jet: MetricJet2) -> Array:
    """Einstein tensor ``Ric - R/2 * g``."""
    return curvature_bundle(jet).einstein


def linearized_scalar(jet: MetricJet2) -> float:
    """Second-derivative truncation of the scalar curvature.

    Returns ``sum_{i,k} (d_i d_k g_ik - d_i d_i g_kk)``, which agrees with the
    full scalar curvature up to terms quadratic in the metric deviation.
    """
    return float(linearized_scalar_arrays(jet.ddg[None])[0])


def linearized_scalar_arrays(ddg: Array) -> Array:
    """Batched version of :func:`linearized_scalar` on a ``(p, k, l, i, j)`` array."""
    return np.einsum("pikik->p", ddg) - np.einsum("piikk->p", ddg)
