"""Adversary instance families and the metrics behind them.

Four families cover the interesting regimes: the star (where greedy pays
2k-1 against an optimum of one), the nested uniform space (server and
request sets sharing all but one point, unshared request first), random
Euclidean point clouds, and random points on a line.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric import FiniteMetric, Instance, ensure_valid_metric

__all__ = [
    "FAMILIES",
    "GeneratorSpec",
    "star_metric",
    "uniform_metric",
    "euclidean_metric",
    "line_metric",
    "generate_instance",
]

FAMILIES = ("star", "nested-uniform", "euclidean", "line")


@dataclass(frozen=True)
class GeneratorSpec:
    """Family name, size, seed, and the per-family knobs that apply."""

    family: str
    n: int
    seed: int
    dim: int = 2
    coord_range: float = 100.0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if not self.coord_range > 0:
            raise ValueError("coord_range must be positive")


def star_metric(k: int) -> FiniteMetric:
    """Center plus k spoke endpoints; spokes weigh one, tips are two apart."""
    if k < 1:
        raise ValueError("star needs at least one spoke")
    d = np.full((k + 1, k + 1), 2.0)
    d[0, :] = 1.0
    d[:, 0] = 1.0
    np.fill_diagonal(d, 0.0)
    labels = ("center",) + tuple(f"leaf{i}" for i in range(1, k + 1))
    return ensure_valid_metric(FiniteMetric(points=labels, dist=d))


def uniform_metric(u: int) -> FiniteMetric:
    """All distinct points exactly one apart."""
    if u < 1:
        raise ValueError("need at least one point")
    d = np.ones((u, u)) - np.eye(u)
    return ensure_valid_metric(FiniteMetric.from_matrix(d))


def euclidean_metric(coords) -> FiniteMetric:
    """Pairwise Euclidean distances of a (n, dim) coordinate array."""
    pts = np.atleast_2d(np.asarray(coords, dtype=float))
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=-1))
    np.fill_diagonal(d, 0.0)
    return ensure_valid_metric(FiniteMetric.from_matrix(d))


def line_metric(coords) -> FiniteMetric:
    """Absolute coordinate differences of points on a line."""
    xs = np.asarray(coords, dtype=float).ravel()
    d = np.abs(xs[:, None] - xs[None, :])
    labels = tuple(repr(float(x)) for x in xs)
    return ensure_valid_metric(FiniteMetric(points=labels, dist=d))


def generate_instance(spec: GeneratorSpec) -> Instance:
    """Build one instance; deterministic in the spec (seed included).

    star:            servers on the k tips, requests = center then the
                     first k-1 tips, so greedy cascades around the star.
    nested-uniform:  uniform space on n+1 points, servers on points 1..n,
                     requests start at the server-free point 0 and then
                     walk the shared points 1..n-1.
    euclidean/line:  2n random points; a random half serves, the other
                     half arrives in random order.
    """
    if spec.family == "star":
        k = spec.n
        metric = star_metric(k)
        servers = tuple(range(1, k + 1))
        requests = (0,) + tuple(range(1, k))
        return Instance(metric=metric, servers=servers, requests=requests)

    if spec.family == "nested-uniform":
        q = spec.n
        metric = uniform_metric(q + 1)
        servers = tuple(range(1, q + 1))
        requests = (0,) + tuple(range(1, q))
        return Instance(metric=metric, servers=servers, requests=requests)

    rng = np.random.default_rng(spec.seed)
    if spec.family == "euclidean":
        coords = rng.random((2 * spec.n, spec.dim))
        metric = euclidean_metric(coords)
    else:  # line
        coords = rng.uniform(0.0, spec.coord_range, size=2 * spec.n)
        metric = line_metric(coords)
    perm = rng.permutation(2 * spec.n)
    servers = tuple(sorted(int(p) for p in perm[: spec.n]))
    requests = tuple(int(p) for p in perm[spec.n :])
    return Instance(metric=metric, servers=servers, requests=requests)
