"""Per-slot graph states and observations built from user geometry.

The MA system uses one graph over all users: an edge exists when users are
close in distance OR in direction angle seen from the BS. The PA system
builds one graph per waveguide region, clustering the region's users with
K-means (one cluster per activated antenna) and scoping edges to clusters,
with direction angles measured from the cluster centroid.

Vertex features concatenate the normalized user position with the user's
channel magnitudes from the slot preceding the action (callers pass a zero
matrix at the first slot).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from flexrank.pa_channel import PaLayout
from flexrank.scenario import AreaConfig, angular_direction, bs_position


@dataclass(frozen=True)
class GraphThresholds:
    d_threshold: float = 20.0      # meters
    theta_threshold: float = 0.3   # radians

    def __post_init__(self):
        if self.d_threshold <= 0 or self.theta_threshold <= 0:
            raise ValueError("thresholds must be positive")


@dataclass(frozen=True)
class GraphObservation:
    """Vertex features plus symmetric binary adjacency (self-loops included).

    ``user_index[v]`` maps vertex v back to its user index in the slot.
    """

    features: np.ndarray    # (V, F) float
    adjacency: np.ndarray   # (V, V) binary, symmetric, ones on the diagonal
    user_index: np.ndarray  # (V,) int

    @property
    def n_vertices(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class ClusterAssignment:
    """K-means result: per-point labels plus (k, 2) centroids.

    Centroid rows that received no points are NaN-marked.
    """

    labels: np.ndarray     # (n_points,) int
    centroids: np.ndarray  # (k, 2) float, NaN rows mark empty clusters


def build_ma_graph(users: np.ndarray, H_prev: np.ndarray, area: AreaConfig,
                   thresholds: GraphThresholds) -> GraphObservation:
    """Graph state of the MA system for one slot.

    ``H_prev`` is the (M, N) channel realized by the previous slot's
    placement (all zeros at the first slot). Feature rows are
    [position / d_area || channel magnitudes / slot max].
    """
    n = users.shape[0]
    bs_xy = bs_position(area)[:2]
    d = np.linalg.norm(users[:, None, :] - users[None, :, :], axis=2)
    theta = np.array([angular_direction(u[:2], bs_xy) for u in users])
    dtheta = np.abs(theta[:, None] - theta[None, :])
    adj = ((d <= thresholds.d_threshold) | (dtheta <= thresholds.theta_threshold))
    adj = adj.astype(float)
    np.fill_diagonal(adj, 1.0)
    feats = np.hstack([users / area.d_area, _magnitude_rows(H_prev)])
    return GraphObservation(features=feats, adjacency=adj, user_index=np.arange(n))


def kmeans(points: np.ndarray, k: int, rng: np.random.Generator,
           max_iter: int = 100) -> ClusterAssignment:
    """Lloyd iteration with farthest-point seeding, deterministic per rng.

    Fewer points than k: each point becomes its own cluster and the remaining
    centroids are NaN. Zero points: empty labels, all centroids NaN.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    n = points.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if n == 0:
        return ClusterAssignment(labels=np.zeros(0, dtype=int),
                                 centroids=np.full((k, 2), np.nan))
    if n <= k:
        centroids = np.full((k, 2), np.nan)
        centroids[:n] = points
        return ClusterAssignment(labels=np.arange(n), centroids=centroids)

    centroids = _farthest_point_seed(points, k, rng)
    labels = np.full(n, -1, dtype=int)
    for _ in range(max_iter):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)   # ties resolve to the lowest index
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            mask = labels == j
            if mask.any():
                centroids[j] = points[mask].mean(axis=0)
    return ClusterAssignment(labels=labels, centroids=centroids)


def region_members(users: np.ndarray, layout: PaLayout, k: int) -> np.ndarray:
    """User indices inside waveguide k's region.

    The region spans the y-band between the neighboring waveguides; the first
    and last regions extend to the area edges (y = 0 and y = d_area). Regions
    of adjacent waveguides overlap by construction.
    """
    y = users[:, 1]
    lo = 0.0 if k == 0 else layout.waveguide_y(k - 1)
    hi = layout.d_area if k == layout.k_wav - 1 else layout.waveguide_y(k + 1)
    if k == 0:
        mask = (y >= lo) & (y <= hi)
    else:
        mask = (y > lo) & (y <= hi)
    return np.nonzero(mask)[0]


def build_pa_observations(users: np.ndarray, H_prev: np.ndarray,
                          layout: PaLayout, area: AreaConfig,
                          thresholds: GraphThresholds,
                          rng: np.random.Generator) -> list[GraphObservation]:
    """One observation per waveguide: cluster-scoped distance/angle edges.

    Each region's users are K-means clustered into m_pa groups; edges connect
    same-cluster users that are close in distance or in direction angle seen
    from the cluster centroid. ``H_prev`` is the previous slot's (K, N)
    channel (all zeros at the first slot).
    """
    mag_rows = _magnitude_rows(H_prev)
    obs = []
    for k in range(layout.k_wav):
        members = region_members(users, layout, k)
        v = members.shape[0]
        if v == 0:
            obs.append(GraphObservation(features=np.zeros((0, 3 + layout.k_wav)),
                                        adjacency=np.zeros((0, 0)),
                                        user_index=members))
            continue
        pts = users[members][:, :2]
        clusters = kmeans(pts, layout.m_pa, rng)
        adj = np.zeros((v, v))
        for j in range(layout.m_pa):
            in_c = np.nonzero(clusters.labels == j)[0]
            if in_c.size == 0:
                continue
            c = clusters.centroids[j]
            sub = pts[in_c]
            d = np.linalg.norm(sub[:, None, :] - sub[None, :, :], axis=2)
            theta = np.arctan2(sub[:, 0] - c[0], sub[:, 1] - c[1])
            dtheta = np.abs(theta[:, None] - theta[None, :])
            e = (d <= thresholds.d_threshold) | (dtheta <= thresholds.theta_threshold)
            adj[np.ix_(in_c, in_c)] = np.maximum(adj[np.ix_(in_c, in_c)], e.astype(float))
        np.fill_diagonal(adj, 1.0)
        feats = np.hstack([users[members] / area.d_area, mag_rows[members]])
        obs.append(GraphObservation(features=feats, adjacency=adj, user_index=members))
    return obs


def _magnitude_rows(H: np.ndarray) -> np.ndarray:
    """(N, M) channel magnitude rows scaled by the slot maximum.

    Raw coefficients span many orders of magnitude; an all-zero matrix (first
    slot) passes through as zeros.
    """
    mag = np.abs(np.asarray(H)).T
    peak = mag.max() if mag.size else 0.0
    return mag / peak if peak > 0 else mag


def _farthest_point_seed(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    first = int(rng.integers(n))
    chosen = [first]
    d2 = ((points - points[first]) ** 2).sum(axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(d2))   # argmax ties resolve to the lowest index
        chosen.append(nxt)
        d2 = np.minimum(d2, ((points - points[nxt]) ** 2).sum(axis=1))
    return points[chosen].copy()
