"""Attribute-driven grouping of interest nodes.

Numeric attributes go through density clustering on min-max-normalized values
(noise points become singleton clusters); text attributes are embedded and
K-means clustered with an elbow-selected k. Cluster ordering is produced here
because downstream arc placement consumes it: ascending mean for numeric sets,
greedy nearest-neighbor seriation on centroids for text sets.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field, replace
from typing import Mapping, Protocol, Sequence

import numpy as np

from .llm import CompletionError, LanguageModelClient, Prompt, load_prompt_template
from .model import NUMERIC, TEXT

LABEL_PROMPT_FILE = "cluster_label_v1.txt"

DEFAULT_EPS = 0.05
DEFAULT_MIN_PTS = 2
DEFAULT_KMAX = 8
DEFAULT_SEED = 0


class EmbeddingProvider(Protocol):
    dimension: int

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


class HashedTfEmbedding:
    """Offline default embedder: hashed term-frequency vectors, l2-normalized.

    Token buckets come from md5 so identical text maps to an identical vector on
    every platform and run.
    """

    def __init__(self, dimension: int = 256):
        self.dimension = dimension

    def _bucket(self, token: str) -> int:
        digest = hashlib.md5(token.encode("utf-8")).digest()
        return int.from_bytes(digest[:4], "big") % self.dimension

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dimension))
        for i, text in enumerate(texts):
            for token in re.findall(r"\w+", text.lower()):
                out[i, self._bucket(token)] += 1.0
            norm = np.linalg.norm(out[i])
            if norm > 0:
                out[i] /= norm
        return out


@dataclass(frozen=True)
class Cluster:
    id: int
    member_ids: tuple[str, ...]
    label: str
    centroid_feature: float | tuple[float, ...] | None


@dataclass(frozen=True)
class ClusterSet:
    """A partition of the interest node set, ordered for arc placement."""

    clusters: tuple[Cluster, ...]
    attribute: str
    kind: str
    values: Mapping[str, float | str] = field(default_factory=dict)

    def member_map(self) -> dict[int, tuple[str, ...]]:
        return {c.id: c.member_ids for c in self.clusters}

    def cluster_of(self) -> dict[str, int]:
        return {m: c.id for c in self.clusters for m in c.member_ids}

    def sizes(self) -> list[int]:
        return [len(c.member_ids) for c in self.clusters]

    def restrict(self, keep_ids: set[str]) -> "ClusterSet":
        """Drop members outside keep_ids and any cluster left empty; order preserved."""
        kept = []
        for c in self.clusters:
            members = tuple(m for m in c.member_ids if m in keep_ids)
            if members:
                kept.append(replace(c, member_ids=members))
        return ClusterSet(
            clusters=tuple(kept),
            attribute=self.attribute,
            kind=self.kind,
            values={k: v for k, v in self.values.items() if k in keep_ids},
        )


def _dbscan_1d(values: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    """DBSCAN over scalars; returns labels with -1 for noise.

    Works on a sorted copy: neighborhoods are contiguous ranges, cores chain
    when consecutive cores sit within eps, and border points attach to the
    nearest core (ties toward the smaller value) so results do not depend on
    input order.
    """
    n = len(values)
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    lo = np.searchsorted(sorted_vals, sorted_vals - eps, side="left")
    hi = np.searchsorted(sorted_vals, sorted_vals + eps, side="right")
    core = (hi - lo) >= min_pts

    labels_sorted = np.full(n, -1, dtype=int)
    cluster = -1
    prev_core_val = None
    for i in range(n):
        if not core[i]:
            continue
        if prev_core_val is None or sorted_vals[i] - prev_core_val > eps:
            cluster += 1
        labels_sorted[i] = cluster
        prev_core_val = sorted_vals[i]
    for i in range(n):
        if core[i] or labels_sorted[i] != -1:
            continue
        best = None
        for j in range(n):
            if not core[j]:
                continue
            gap = abs(sorted_vals[j] - sorted_vals[i])
            if gap <= eps and (best is None or gap < best[0] - 1e-15):
                best = (gap, labels_sorted[j])
        if best is not None:
            labels_sorted[i] = best[1]

    labels = np.full(n, -1, dtype=int)
    labels[order] = labels_sorted
    return labels


def cluster_numeric(
    values: Sequence[tuple[str, float]],
    *,
    eps: float = DEFAULT_EPS,
    min_pts: int = DEFAULT_MIN_PTS,
    attribute: str = "",
) -> ClusterSet:
    """Density-cluster (node id, value) pairs; clusters ordered by ascending mean."""
    if not values:
        raise ValueError("cluster_numeric requires at least one value")
    ids = [v[0] for v in values]
    raw = np.array([float(v[1]) for v in values])
    if not np.all(np.isfinite(raw)):
        raise ValueError("values must be finite")
    value_map: dict[str, float] = {i: float(v) for i, v in zip(ids, raw)}

    span = raw.max() - raw.min()
    if span == 0.0:
        members = tuple(sorted(ids))
        cluster = Cluster(id=0, member_ids=members, label="", centroid_feature=float(raw.mean()))
        return ClusterSet((cluster,), attribute=attribute, kind=NUMERIC, values=value_map)

    normalized = (raw - raw.min()) / span
    labels = _dbscan_1d(normalized, eps, min_pts)

    groups: dict[int, list[str]] = {}
    next_singleton = labels.max() + 1 if labels.max() >= 0 else 0
    for node_id, label in zip(ids, labels):
        if label == -1:
            groups[next_singleton] = [node_id]
            next_singleton += 1
        else:
            groups.setdefault(label, []).append(node_id)

    ordered = sorted(
        groups.values(),
        key=lambda members: (float(np.mean([value_map[m] for m in members])), min(members)),
    )
    clusters = tuple(
        Cluster(
            id=i,
            member_ids=tuple(sorted(members)),
            label="",
            centroid_feature=float(np.mean([value_map[m] for m in members])),
        )
        for i, members in enumerate(ordered)
    )
    return ClusterSet(clusters, attribute=attribute, kind=NUMERIC, values=value_map)


def _kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    first = int(rng.integers(n))
    centers[0] = X[first]
    closest = np.sum((X - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        total = closest.sum()
        if total <= 0:
            centers[i] = X[int(rng.integers(n))]
            continue
        r = rng.random() * total
        idx = int(np.searchsorted(np.cumsum(closest), r))
        idx = min(idx, n - 1)
        centers[i] = X[idx]
        closest = np.minimum(closest, np.sum((X - centers[i]) ** 2, axis=1))
    return centers


def kmeans(
    X: np.ndarray,
    k: int,
    *,
    seed: int = DEFAULT_SEED,
    max_iter: int = 100,
    tol: float = 1e-4,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Lloyd iterations with k-means++ seeding from a fixed seed.

    Stops on max_iter or when the relative inertia improvement drops below tol.
    Returns (labels, centers, inertia).
    """
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(X, k, rng)
    prev_inertia = np.inf
    labels = np.zeros(X.shape[0], dtype=int)
    for _ in range(max_iter):
        d2 = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        labels = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(X.shape[0]), labels].sum())
        for c in range(k):
            mask = labels == c
            if mask.any():
                centers[c] = X[mask].mean(axis=0)
            else:
                # Re-seed an empty cluster at the point farthest from its center.
                farthest = int(np.argmax(d2[np.arange(X.shape[0]), labels]))
                centers[c] = X[farthest]
        if prev_inertia - inertia < tol * max(prev_inertia, 1e-12):
            prev_inertia = inertia
            break
        prev_inertia = inertia
    d2 = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(X.shape[0]), labels].sum())
    return labels, centers, inertia


def select_k_wcss(embeddings: np.ndarray, k_max: int, *, seed: int = DEFAULT_SEED) -> int:
    """Elbow selection: k maximizing WCSS(k-1) - 2 WCSS(k) + WCSS(k+1), ties toward smaller k.

    Evaluates k = 1..min(k_max, n-1); with no interior candidate (n <= 3) falls
    back to the smallest meaningful k.
    """
    n = embeddings.shape[0]
    if n < 3:
        raise ValueError("select_k_wcss requires at least 3 vectors")
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    upper = min(k_max, n - 1)
    wcss: dict[int, float] = {}
    for k in range(1, upper + 1):
        if k == 1:
            center = embeddings.mean(axis=0)
            wcss[k] = float(np.sum((embeddings - center) ** 2))
        else:
            _, _, inertia = kmeans(embeddings, k, seed=seed)
            wcss[k] = inertia
    candidates = range(2, upper)
    best_k, best_score = None, -np.inf
    for k in candidates:
        score = wcss[k - 1] - 2.0 * wcss[k] + wcss[k + 1]
        if score > best_score + 1e-12:
            best_k, best_score = k, score
    if best_k is None:
        return min(2, upper)
    return best_k


def _seriate(centers: np.ndarray, member_groups: list[list[str]]) -> list[int]:
    """Greedy nearest-neighbor chain over centroids, starting from the group
    holding the smallest member id; deterministic and order-independent."""
    k = len(member_groups)
    start = min(range(k), key=lambda i: min(member_groups[i]))
    orderings = [start]
    remaining = set(range(k)) - {start}
    while remaining:
        last = orderings[-1]
        nxt = min(
            remaining,
            key=lambda i: (float(np.linalg.norm(centers[i] - centers[last])), min(member_groups[i])),
        )
        orderings.append(nxt)
        remaining.remove(nxt)
    return orderings


def cluster_text(
    texts: Sequence[tuple[str, str]],
    embedder: EmbeddingProvider,
    *,
    k_max: int = DEFAULT_KMAX,
    seed: int = DEFAULT_SEED,
    attribute: str = "",
) -> ClusterSet:
    """Embed and K-means-cluster (node id, text) pairs.

    Degenerate inputs short-circuit: one text is one cluster, identical
    embeddings collapse to one cluster before k-selection, and two distinct
    texts split without an elbow sweep.
    """
    if not texts:
        raise ValueError("cluster_text requires at least one text")
    ids = [t[0] for t in texts]
    value_map: dict[str, str] = {i: t for i, t in texts}
    X = embedder.embed([t[1] for t in texts])

    def one_cluster() -> ClusterSet:
        members = tuple(sorted(ids))
        return ClusterSet(
            (Cluster(id=0, member_ids=members, label="", centroid_feature=tuple(X.mean(axis=0))),),
            attribute=attribute,
            kind=TEXT,
            values=value_map,
        )

    if len(ids) == 1 or np.allclose(X, X[0]):
        return one_cluster()
    if len(ids) == 2:
        k = 2
    else:
        k = select_k_wcss(X, k_max, seed=seed)

    labels, centers, _ = kmeans(X, k, seed=seed)
    groups: dict[int, list[str]] = {}
    for node_id, label in zip(ids, labels):
        groups.setdefault(int(label), []).append(node_id)
    raw_ids = sorted(groups)
    member_groups = [sorted(groups[c]) for c in raw_ids]
    group_centers = np.array([centers[c] for c in raw_ids])
    order = _seriate(group_centers, member_groups)
    clusters = tuple(
        Cluster(
            id=i,
            member_ids=tuple(member_groups[g]),
            label="",
            centroid_feature=tuple(float(x) for x in group_centers[g]),
        )
        for i, g in enumerate(order)
    )
    return ClusterSet(clusters, attribute=attribute, kind=TEXT, values=value_map)


def _decimals(value: float) -> int:
    text = canonical_float_repr(value)
    if "." in text:
        return len(text.split(".")[1])
    return 0


def canonical_float_repr(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return str(float(value))


def _top_terms(texts: Sequence[str], count: int = 3) -> str:
    freq: dict[str, int] = {}
    for text in texts:
        for token in re.findall(r"\w+", text.lower()):
            freq[token] = freq.get(token, 0) + 1
    ranked = sorted(freq.items(), key=lambda item: (-item[1], item[0]))
    return "/".join(token for token, _ in ranked[:count])


def label_clusters(cluster_set: ClusterSet, client: LanguageModelClient | None = None) -> ClusterSet:
    """Label every cluster; total (never fails).

    Numeric clusters get the member mean at the attribute's observed precision.
    Text clusters get a client topic (at most 4 words) when a client is present,
    else the 3 most frequent member-text tokens joined by "/".
    """
    labeled = []
    for cluster in cluster_set.clusters:
        if cluster_set.kind == NUMERIC:
            member_values = [float(cluster_set.values[m]) for m in cluster.member_ids]
            precision = max((_decimals(v) for v in member_values), default=0)
            mean = float(np.mean(member_values))
            label = f"{mean:.{precision}f}" if precision else str(int(round(mean)))
        else:
            member_texts = [str(cluster_set.values[m]) for m in cluster.member_ids]
            label = ""
            if client is not None:
                try:
                    raw = client.complete(
                        Prompt(
                            system=load_prompt_template(LABEL_PROMPT_FILE),
                            user="Texts:\n" + "\n".join(f"- {t}" for t in member_texts),
                        )
                    )
                    label = " ".join(raw.strip().split()[:4])
                except CompletionError:
                    label = ""
            if not label:
                label = _top_terms(member_texts)
        labeled.append(replace(cluster, label=label))
    return ClusterSet(tuple(labeled), cluster_set.attribute, cluster_set.kind, cluster_set.values)
