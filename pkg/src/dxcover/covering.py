"""Set-covering layer: differentials, clustering enumeration, candidates.

Clusterings are enumerated by walking every set partition of the positive
findings (restricted-growth-string order, symptoms sorted by ordinal) and
keeping the partitions whose blocks all have a non-empty differential and
whose differentials are pairwise disjoint.  The differential of a block is
always the full intersection of the Causes-of sets; partitions whose full
intersections overlap are discarded rather than split.
"""

from __future__ import annotations

from itertools import combinations, product
from typing import Iterable, Iterator, Sequence

from .errors import CapExceededError, UncoverableSymptomError, ValidationError
from .model import Candidate, Case, Clustering, KnowledgeBase, Task

PARTITION_CAP = 10  # Bell(10) = 115,975 partitions
SUBSET_SCAN_CAP = 1 << 20

__all__ = [
    "PARTITION_CAP",
    "SUBSET_SCAN_CAP",
    "differential",
    "enumerate_clusterings",
    "expand_candidates",
    "is_candidate",
    "is_minimal",
    "minimal_candidates",
]


def differential(kb: KnowledgeBase, cluster: Iterable[str]) -> frozenset[str]:
    """Disorders able to cause every symptom in the cluster: the intersection
    of the per-symptom cause sets.  May be empty."""
    ords = kb.symptom_ordinals(cluster)
    if not ords:
        raise ValidationError("differential of an empty cluster is undefined")
    mask = kb.cause_masks[ords[0]]
    for s in ords[1:]:
        mask &= kb.cause_masks[s]
    return frozenset(kb.disorder_names[d] for d in _bits(mask))


def enumerate_clusterings(
    kb: KnowledgeBase, case: Case, *, cap: int = PARTITION_CAP
) -> list[Clustering]:
    """All clusterings of the case's positive findings.

    One clustering per set partition of P whose every block has a non-empty
    differential and whose differentials are pairwise disjoint.  Output order
    is deterministic: partitions in restricted-growth-string order over the
    ordinal-sorted symptoms, tasks in block order.
    """
    pos = kb.symptom_ordinals(case.positive)
    if not pos:
        raise ValidationError("cannot enumerate clusterings of an empty positive set")
    if len(pos) > cap:
        raise CapExceededError(
            f"{len(pos)} positive findings exceed the partition cap of {cap}"
        )
    out: list[Clustering] = []
    for blocks in _set_partitions(pos):
        tasks = []
        used = 0
        ok = True
        for block in blocks:
            dmask = kb.cause_masks[block[0]]
            for s in block[1:]:
                dmask &= kb.cause_masks[s]
            if dmask == 0 or dmask & used:
                ok = False
                break
            used |= dmask
            tasks.append(
                Task(
                    frozenset(kb.symptom_names[s] for s in block),
                    frozenset(kb.disorder_names[d] for d in _bits(dmask)),
                )
            )
        if ok:
            out.append(Clustering(tuple(tasks)))
    return out


def expand_candidates(kb: KnowledgeBase, clustering: Clustering) -> list[Candidate]:
    """The candidates a clustering stands for: one disorder per task, i.e.
    the cartesian product of the differentials.

    Assumes a valid clustering (disjoint differentials make the candidates
    distinct).  Order is deterministic: the product cycles the last task
    fastest, each differential sorted by disorder ordinal.
    """
    pools = [
        [kb.disorder_names[o] for o in kb.disorder_ordinals(task.differential)]
        for task in clustering.tasks
    ]
    return [Candidate(frozenset(combo)) for combo in product(*pools)]


def is_candidate(kb: KnowledgeBase, candidate: Candidate, positive: Iterable[str]) -> bool:
    """True iff every symptom in `positive` is an effect of some member."""
    need = 0
    for s in kb.symptom_ordinals(positive):
        need |= 1 << s
    cover = 0
    for d in kb.disorder_ordinals(candidate.disorders):
        cover |= kb.effect_masks[d]
    return need & ~cover == 0


def is_minimal(kb: KnowledgeBase, candidate: Candidate, positive: Iterable[str]) -> bool:
    """True iff no proper subset still covers `positive`.

    For covers, deleting one disorder at a time is enough: any covering
    proper subset would survive some single deletion.  Requires that
    `candidate` itself covers."""
    pos = frozenset(positive)
    if not is_candidate(kb, candidate, pos):
        raise ValidationError("is_minimal requires a covering candidate")
    if len(candidate.disorders) == 1:
        return True  # the only proper subset is empty, which is not a candidate
    for d in candidate.disorders:
        rest = candidate.disorders - {d}
        if is_candidate(kb, Candidate(rest), pos):
            return False
    return True


def minimal_candidates(
    kb: KnowledgeBase,
    positive: Iterable[str],
    *,
    cap: int = PARTITION_CAP,
    max_subsets: int = SUBSET_SCAN_CAP,
) -> list[Candidate]:
    """The complete set of minimal covers of `positive`.

    Brute force over subsets of the union of the cause sets, ascending by
    size so minimality is a subset check against earlier finds.  Output
    order: size, then lexicographic disorder ordinals.  Empty input gives an
    empty list (the empty set is not a candidate).
    """
    pos = kb.symptom_ordinals(positive)
    if not pos:
        return []
    if len(pos) > cap:
        raise CapExceededError(
            f"{len(pos)} positive findings exceed the cap of {cap}"
        )
    universe: set[int] = set()
    need = 0
    for s in pos:
        cmask = kb.cause_masks[s]
        if cmask == 0:
            raise UncoverableSymptomError(kb.symptom_names[s])
        need |= 1 << s
        universe.update(_bits(cmask))
    pool = sorted(universe)
    if 1 << len(pool) > max_subsets:
        raise CapExceededError(
            f"union of causes has {len(pool)} disorders; "
            f"2^{len(pool)} subsets exceed the scan bound of {max_subsets}"
        )
    found: list[tuple[int, Candidate]] = []
    for size in range(1, len(pool) + 1):
        for combo in combinations(pool, size):
            dmask = 0
            cover = 0
            for d in combo:
                dmask |= 1 << d
                cover |= kb.effect_masks[d]
            if any(fm & dmask == fm for fm, _ in found):
                continue  # contains a smaller minimal cover
            if need & ~cover == 0:
                found.append(
                    (dmask, Candidate(frozenset(kb.disorder_names[d] for d in combo)))
                )
    return [cand for _, cand in found]


# ---------------------------------------------------------------------------
# internals
# ---------------------------------------------------------------------------

def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _set_partitions(items: Sequence) -> Iterator[list[list]]:
    """Set partitions in restricted-growth-string order.

    A partition of n items is encoded by labels a[0..n-1] with a[0] = 0 and
    a[i] <= max(a[0..i-1]) + 1; successive strings are generated in
    lexicographic order and decoded to blocks indexed by label.
    """
    n = len(items)
    if n == 0:
        return
    labels = [0] * n
    maxes = [0] * n
    while True:
        nblocks = maxes[n - 1] + 1
        blocks: list[list] = [[] for _ in range(nblocks)]
        for item, label in zip(items, labels):
            blocks[label].append(item)
        yield blocks
        i = n - 1
        while i > 0 and labels[i] > maxes[i - 1]:
            i -= 1
        if i == 0:
            return
        labels[i] += 1
        maxes[i] = max(maxes[i - 1], labels[i])
        for j in range(i + 1, n):
            labels[j] = 0
            maxes[j] = maxes[j - 1]
