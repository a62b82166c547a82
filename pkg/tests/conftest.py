"""Shared fixtures: stock triangulations and random decorated metrics."""

import math

import numpy as np
import pytest

from ddce import Background, DecoratedMetric, Triangulation
from ddce import delaunay, metric as me


def from_face_vertices(faces):
    """Triangulation from vertex-indexed triangles (simplicial complexes
    only; directed vertex pairs must be unique)."""
    by_pair = {}
    for f, tri in enumerate(faces):
        for s in range(3):
            key = (tri[s], tri[(s + 1) % 3])
            assert key not in by_pair, f"duplicate directed edge {key}"
            by_pair[key] = (f, s)
    pairs = [(h, by_pair[(v, u)]) for (u, v), h in by_pair.items() if u < v]
    return Triangulation.build_from_gluing(len(faces), pairs)


def octahedron():
    return from_face_vertices(
        [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 1), (5, 2, 1), (5, 3, 2), (5, 4, 3), (5, 1, 4)]
    )


def grid_torus(n=3):
    """n x n grid torus, each square split by a diagonal; simplicial for n >= 3."""
    faces = []
    for i in range(n):
        for j in range(n):
            v00 = i * n + j
            v10 = ((i + 1) % n) * n + j
            v01 = i * n + (j + 1) % n
            v11 = ((i + 1) % n) * n + (j + 1) % n
            faces.append((v00, v10, v11))
            faces.append((v00, v11, v01))
    return from_face_vertices(faces)


def isosceles_sphere():
    """Sphere built from two triangles, each glued to itself along an
    edge; exercises self-glued faces."""
    return Triangulation.build_from_gluing(
        2, [((0, 0), (0, 1)), ((0, 2), (1, 0)), ((1, 1), (1, 2))]
    )


ALL_BACKGROUNDS = (Background.SPHERICAL, Background.EUCLIDEAN, Background.HYPERBOLIC)


def random_metric(triangulation, background, rng, ideal_fraction=0.0, max_tries=400):
    """Random valid decorated metric built through the heights chart."""
    n_v = triangulation.vertex_count
    n_e = triangulation.edge_count
    for _ in range(max_tries):
        eps = np.ones(n_v, dtype=int)
        if ideal_fraction > 0 and background is not Background.EUCLIDEAN:
            eps = (rng.random(n_v) >= ideal_fraction).astype(int)
        lam = rng.uniform(0.15, 0.9, size=n_e)
        if background is Background.SPHERICAL:
            h = rng.uniform(1.0, 1.5, size=n_v)
        elif background is Background.HYPERBOLIC:
            h = np.where(eps == 1, rng.uniform(0.7, 1.4, size=n_v), rng.uniform(-0.3, 0.4, size=n_v))
        else:
            h = rng.uniform(-0.4, 0.4, size=n_v)
        if background is Background.EUCLIDEAN:
            eps = np.ones(n_v, dtype=int)
        inv = me.Invariant(triangulation, lam, eps)
        ref = (
            me.default_reference_radius(background)
            if background is not Background.EUCLIDEAN
            else 0.0
        )
        try:
            m = me.decoration_from_heights(
                triangulation, inv, me.Heights(h, background, ref, eps)
            )
        except me.HeightsOutOfDomain:
            continue
        if not me.validate(m):
            return m
    raise RuntimeError("could not sample a valid metric")


def scrambled_metric(triangulation, background, rng, flips=4, **kw):
    """Valid metric that is typically not weighted Delaunay: sample one,
    flip to Delaunay, then undo random legal flips."""
    m = random_metric(triangulation, background, rng, **kw)
    m, _ = delaunay.flip_to_delaunay(m)
    for _ in range(flips):
        weights = delaunay.edge_weights(m)
        candidates = [
            e
            for e in range(m.triangulation.edge_count)
            if weights[e] > 1e-6 and not m.triangulation.is_self_glued_quad(e)
        ]
        if not candidates:
            break
        e = int(candidates[rng.integers(len(candidates))])
        try:
            m, _, _ = delaunay.flip_edge(m, e)
        except Exception:
            continue
    return m


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def double_triangle():
    return Triangulation.double_triangle()


@pytest.fixture
def square_torus():
    return Triangulation.square_torus()


@pytest.fixture
def genus2():
    return Triangulation.genus_two_octagon()
