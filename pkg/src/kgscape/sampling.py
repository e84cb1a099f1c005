"""Diversity-controlled selection of interest nodes for display.

Answer nodes are always taken first. The remaining budget is split between a
focus component aimed at the preferred cluster and a proportional component
spread over all clusters, mixed by the diversity setting sigma: quota weights
are (1 - sigma) * [c is preferred] + sigma * size share. Budget that cannot fit
in the preferred cluster spills to the other clusters with geometric decay
0.5^rank by arc-position distance from the preferred cluster, so low diversity
emphasizes the preferred cluster and then its neighbors. sigma = 1 reduces to
exact largest-remainder proportional allocation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .clustering import ClusterSet
from .model import NUMERIC


@dataclass(frozen=True)
class SamplePlan:
    budget: int
    sigma: float
    preferred_cluster_id: int
    quotas: Mapping[int, int]
    seed: int


@dataclass(frozen=True)
class SampleResult:
    ids: tuple[str, ...]
    truncated: bool
    plan: SamplePlan


def preferred_cluster_index(
    cluster_set: ClusterSet,
    answer_ids: set[str],
    attribute_value: str | None = None,
) -> int:
    """Position of the cluster holding the preferred attribute value.

    The cluster with the most answer nodes wins (ties toward the earlier
    position). Without answers, numeric sets fall back to the cluster whose
    mean is closest to the requested value; otherwise the first cluster.
    """
    best, best_count = None, 0
    for i, cluster in enumerate(cluster_set.clusters):
        count = sum(1 for m in cluster.member_ids if m in answer_ids)
        if count > best_count:
            best, best_count = i, count
    if best is not None:
        return best
    if cluster_set.kind == NUMERIC and attribute_value is not None:
        try:
            target = float(attribute_value)
        except ValueError:
            return 0
        return min(
            range(len(cluster_set.clusters)),
            key=lambda i: (abs(float(cluster_set.clusters[i].centroid_feature) - target), i),
        )
    return 0


def _largest_remainder(amount: int, weights: Sequence[float], ranks: Sequence[int]) -> list[int]:
    total = sum(weights)
    if total <= 0 or amount <= 0:
        return [0] * len(weights)
    shares = [amount * w / total for w in weights]
    quotas = [int(s) for s in shares]
    leftover = amount - sum(quotas)
    order = sorted(
        range(len(weights)),
        key=lambda i: (-(shares[i] - quotas[i]), ranks[i], i),
    )
    for i in order[:leftover]:
        quotas[i] += 1
    return quotas


def allocate_quotas(
    sizes: Sequence[int],
    preferred_index: int,
    budget: int,
    sigma: float,
) -> list[int]:
    """Integer quotas per cluster, capped by cluster sizes; sum equals min(budget, total)."""
    k = len(sizes)
    total = sum(sizes)
    if total == 0:
        return [0] * k
    budget = min(budget, total)
    ranks = [abs(i - preferred_index) for i in range(k)]
    quotas = [0] * k
    remaining = budget

    def caps() -> list[int]:
        return [sizes[i] - quotas[i] for i in range(k)]

    # Stage 1: focus/proportional mixture.
    weights = [
        (1.0 - sigma) * (1.0 if i == preferred_index else 0.0) + sigma * sizes[i] / total
        for i in range(k)
    ]
    stage = _largest_remainder(remaining, weights, ranks)
    for i in range(k):
        grant = min(stage[i], caps()[i])
        quotas[i] += grant
        remaining -= grant

    # Spill: anything the preferred cluster could not hold flows outward with
    # geometric decay by rank, repeatedly until the budget is placed.
    while remaining > 0:
        open_idx = [i for i in range(k) if quotas[i] < sizes[i]]
        if not open_idx:
            break
        spill_weights = [
            (1.0 - sigma) * 0.5 ** ranks[i] + sigma * sizes[i] / total for i in open_idx
        ]
        stage = _largest_remainder(remaining, spill_weights, [ranks[i] for i in open_idx])
        progressed = False
        for pos, i in enumerate(open_idx):
            grant = min(stage[pos], sizes[i] - quotas[i])
            if grant > 0:
                quotas[i] += grant
                remaining -= grant
                progressed = True
        if not progressed:
            # Rounding placed everything on saturated entries; hand out singly.
            for i in sorted(open_idx, key=lambda i: (ranks[i], i)):
                if remaining == 0:
                    break
                quotas[i] += 1
                remaining -= 1
    return quotas


def plan_sample(
    cluster_set: ClusterSet,
    answer_ids: set[str],
    budget: int,
    sigma: float,
    seed: int,
    attribute_value: str | None = None,
) -> SamplePlan:
    """Quota plan: answers reserved per cluster first, remaining budget mixed by sigma."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if not 0.0 <= sigma <= 1.0:
        raise ValueError("sigma must lie in [0, 1]")
    if not cluster_set.clusters:
        raise ValueError("cluster set is empty")

    preferred = preferred_cluster_index(cluster_set, answer_ids, attribute_value)
    answers_per = [sum(1 for m in c.member_ids if m in answer_ids) for c in cluster_set.clusters]
    total_answers = sum(answers_per)
    sizes = cluster_set.sizes()

    if budget <= total_answers:
        quotas = list(answers_per)
    else:
        free_sizes = [sizes[i] - answers_per[i] for i in range(len(sizes))]
        extra = allocate_quotas(free_sizes, preferred, budget - total_answers, sigma)
        quotas = [answers_per[i] + extra[i] for i in range(len(sizes))]
    return SamplePlan(
        budget=budget,
        sigma=sigma,
        preferred_cluster_id=cluster_set.clusters[preferred].id,
        quotas={c.id: q for c, q in zip(cluster_set.clusters, quotas)},
        seed=seed,
    )


def sample_interest_nodes(
    cluster_set: ClusterSet,
    answer_ids: set[str],
    degrees: Mapping[str, int],
    budget: int,
    sigma: float,
    seed: int,
    attribute_value: str | None = None,
) -> SampleResult:
    """Pick nodes per the quota plan.

    All answer nodes are included even when they exceed the budget (the result
    is then flagged truncated). Within a cluster the remaining picks go by
    descending degree with ties by ascending id. Deterministic for identical
    inputs and seed.
    """
    plan = plan_sample(cluster_set, answer_ids, budget, sigma, seed, attribute_value)
    picked: list[str] = []
    total_answers = 0
    for cluster in cluster_set.clusters:
        answers = sorted(m for m in cluster.member_ids if m in answer_ids)
        total_answers += len(answers)
        rest = sorted(
            (m for m in cluster.member_ids if m not in answer_ids),
            key=lambda m: (-degrees.get(m, 0), m),
        )
        quota = plan.quotas[cluster.id]
        take = answers + rest[: max(0, quota - len(answers))]
        picked.extend(take)
    truncated = budget < total_answers
    return SampleResult(ids=tuple(picked), truncated=truncated, plan=plan)
