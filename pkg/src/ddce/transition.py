"""Geometric transitions: deform a decorated spherical or hyperbolic
metric toward a Euclidean one along its fundamental invariant.

Scaling the decoration weights of the invariant surface by ``t >= 1``
traces a family of heights ``h^t = omega_inverse(t * omega_map(h^1))``
whose induced metrics all share the same lambda-lengths and the same
weighted Delaunay combinatorics.  As ``t`` grows every height diverges,
edge lengths shrink, face angle sums approach pi, and the decorated
cotan weights converge to their Euclidean values: the family limits to
a decorated piecewise Euclidean metric.

The limit is parametrized by cusp heights ``hh_i``, the heights of the
convex polyhedral cusp over the invariant surface, defined up to a
common constant and pinned here by ``hh = 0`` at the first vertex.
They are the limits of ``h_i^t - h_{v0}^t``, explicitly
``ln tau(h^1_i) - ln tau(h^1_{v0})`` with the tau-sign of the origin
background, and determine the Euclidean metric through
``r = exp(-hh)`` and the shared lambda-lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import delaunay
from .metric import (
    DecoratedMetric,
    Heights,
    Invariant,
    decoration_from_heights,
    default_reference_radius,
    heights_from_decoration,
    lambda_lengths,
    omega_inverse,
    omega_map,
    tau,
)
from .trig import Background


def scale_family(h1: Heights, t: float) -> Heights:
    """Heights of the weight-scaled decoration, ``t >= 1``.  Increasing
    componentwise in ``t``; the gauge radius cancels."""
    if t < 1.0:
        raise ValueError("scale parameter must be >= 1")
    if h1.background is Background.EUCLIDEAN:
        raise ValueError("scale families start from a curved background")
    return omega_inverse(
        h1.background,
        h1.reference_radius,
        t * omega_map(h1.background, h1.reference_radius, h1),
        h1.eps,
    )


def cusp_heights(h1: Heights) -> np.ndarray:
    """Euclidean-limit cusp heights, gauged to zero at vertex 0."""
    if h1.eps is None:
        raise ValueError("heights carry no eps flags")
    sign = 1 if h1.background is Background.HYPERBOLIC else -1
    logs = np.array(
        [math.log(tau(sign * e, hv)) for e, hv in zip(h1.eps, h1.h)]
    )
    return logs - logs[0]


def euclidean_limit(
    triangulation, invariant: Invariant, h1: Heights
) -> tuple[DecoratedMetric, np.ndarray]:
    """Limit decorated Euclidean metric of the scale family, together
    with its cusp heights."""
    hh = cusp_heights(h1)
    metric = decoration_from_heights(
        triangulation, invariant, Heights(hh, Background.EUCLIDEAN, 0.0, invariant.eps)
    )
    return metric, hh


@dataclass(frozen=True)
class DiagnosticsRow:
    t: float
    max_angle_defect: float
    max_weight_deviation: float


@dataclass
class TransitionPath:
    """A sampled transition family: the shared invariant, the heights and
    induced metrics per parameter, and the Euclidean limit data."""

    invariant: Invariant
    background: Background
    ts: list = field(default_factory=list)
    heights: list = field(default_factory=list)
    metrics: list = field(default_factory=list)
    cusp_heights: np.ndarray | None = None
    euclidean_metric: DecoratedMetric | None = None
    rows: list = field(default_factory=list)


def build_transition(m: DecoratedMetric, ts, threads: int | None = None) -> TransitionPath:
    """Evaluate the scale family of a curved decorated metric at the
    given parameters (each >= 1, strictly increasing) and compare
    against the Euclidean limit.

    The metric is flipped to weighted Delaunay first; weight scaling
    preserves the weighted Delaunay property, so one triangulation
    serves the whole family.  Per row the diagnostics report the
    largest face angle-sum defect |anglesum - pi| and the largest
    deviation of the decorated cotan weights from the Euclidean weights
    of the limit metric.
    """
    bg = m.background
    if bg is Background.EUCLIDEAN:
        raise ValueError("transition families start from a curved background")
    ts = [float(t) for t in ts]
    if any(t < 1.0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("parameters must be >= 1 and strictly increasing")

    m_del, _ = delaunay.flip_to_delaunay(m, threads=threads)
    tri = m_del.triangulation
    h1 = heights_from_decoration(m_del)
    inv = lambda_lengths(m_del)
    path = TransitionPath(invariant=inv, background=bg)
    m_euc, hh = euclidean_limit(tri, inv, h1)
    path.cusp_heights = hh
    path.euclidean_metric = m_euc
    w_euc = delaunay.edge_weights(m_euc)

    for t in ts:
        ht = scale_family(h1, t)
        mt = decoration_from_heights(tri, inv, ht)
        geoms = delaunay.face_geometries(mt, threads)
        defect = max(abs(g.angle_sum - math.pi) for g in geoms)
        wdev = float(np.max(np.abs(delaunay.edge_weights(mt, geoms) - w_euc)))
        path.ts.append(t)
        path.heights.append(ht)
        path.metrics.append(mt)
        path.rows.append(DiagnosticsRow(t, defect, wdev))
    return path


def transition_diagnostics(m: DecoratedMetric, ts, threads: int | None = None) -> list:
    """DiagnosticsRow per parameter; see build_transition."""
    return build_transition(m, ts, threads=threads).rows
