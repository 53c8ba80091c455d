"""Brute-force verifier: probabilities computed from the definition.

Enumerates every presence/absence assignment over the whole disorder set and
sums prior times observation likelihood under the leak-free noisy-OR model.
Deliberately the opposite of the engine module: plain sequential summation in
interpretation-index order, no incremental state, no compensation.  Agreement
between the two paths is then evidence of correctness rather than shared
bias.  Exact or it refuses: enumeration is capped at 20 disorders.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .errors import CapExceededError, ImpossibleEvidenceError, ValidationError
from .model import Case, Clustering, KnowledgeBase, make_case

MAX_ENUM_DISORDERS = 20

__all__ = [
    "MAX_ENUM_DISORDERS",
    "CandidatePresent",
    "OnlyCandidate",
    "ClusteringSatisfied",
    "Event",
    "state_prior",
    "case_likelihood",
    "event_holds",
    "evidence",
    "joint",
    "posterior",
    "only_positive_case",
]


@dataclass(frozen=True)
class CandidatePresent:
    """Every disorder of the set is present; others may be anything."""

    disorders: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "disorders", frozenset(self.disorders))


@dataclass(frozen=True)
class OnlyCandidate:
    """Exactly the disorders of the set are present, nothing else."""

    disorders: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "disorders", frozenset(self.disorders))


@dataclass(frozen=True)
class ClusteringSatisfied:
    """Each task differential contributes at least one present disorder."""

    clustering: Clustering


Event = Union[CandidatePresent, OnlyCandidate, ClusteringSatisfied]


def state_prior(kb: KnowledgeBase, present: Iterable[str]) -> float:
    """Prior of a full interpretation: product of p(present) over listed
    disorders times p(absent) over the rest."""
    mask = _present_mask(kb, present)
    return _state_prior_mask(kb, mask)


def case_likelihood(kb: KnowledgeBase, present: Iterable[str], case: Case) -> float:
    """Probability of the observed findings given the interpretation: each
    positive symptom is caused by at least one present disorder, each
    negative symptom by none."""
    mask = _present_mask(kb, present)
    return _likelihood_mask(
        kb,
        mask,
        kb.symptom_ordinals(case.positive),
        kb.symptom_ordinals(case.negative),
    )


def event_holds(kb: KnowledgeBase, present: Iterable[str], event: Event) -> bool:
    mask = _present_mask(kb, present)
    return _event_test(kb, event)(mask)


def evidence(kb: KnowledgeBase, case: Case) -> float:
    """Marginal probability of the case findings, by full enumeration."""
    return joint(kb, None, case)


def joint(kb: KnowledgeBase, event: Event | None, case: Case) -> float:
    """Unnormalized probability of `event` and the case findings together
    (event None means the findings alone)."""
    n = kb.n_disorders
    if n > MAX_ENUM_DISORDERS:
        raise CapExceededError(
            f"{n} disorders exceed the enumeration cap of {MAX_ENUM_DISORDERS}"
        )
    pos = kb.symptom_ordinals(case.positive)
    neg = kb.symptom_ordinals(case.negative)
    test = _event_test(kb, event) if event is not None else None
    total = 0.0
    for mask in range(1 << n):
        if test is not None and not test(mask):
            continue
        total += _state_prior_mask(kb, mask) * _likelihood_mask(kb, mask, pos, neg)
    return total


def posterior(kb: KnowledgeBase, event: Event, case: Case) -> float:
    """p(event | findings) by enumeration; refuses on zero evidence."""
    denom = evidence(kb, case)
    if denom <= 0.0:
        raise ImpossibleEvidenceError("case findings have zero probability")
    return joint(kb, event, case) / denom


def only_positive_case(kb: KnowledgeBase, positive: Iterable[str]) -> Case:
    """Case where `positive` is present and every other symptom is negative."""
    pos = frozenset(positive)
    return make_case(kb, pos, frozenset(kb.symptom_names) - pos)


# ---------------------------------------------------------------------------
# internals (interpretations are disorder-ordinal bitmasks)
# ---------------------------------------------------------------------------

def _present_mask(kb: KnowledgeBase, present: Iterable[str]) -> int:
    mask = 0
    for name in present:
        mask |= 1 << kb.disorder_ordinal(name)
    return mask


def _state_prior_mask(kb: KnowledgeBase, mask: int) -> float:
    p = 1.0
    for d in range(kb.n_disorders):
        p *= kb.priors[d] if mask >> d & 1 else kb.pminus[d]
    return p


def _likelihood_mask(
    kb: KnowledgeBase, mask: int, pos: list[int], neg: list[int]
) -> float:
    lik = 1.0
    for s in pos:
        miss = 1.0
        for d, _, one_minus in kb.causes[s]:
            if mask >> d & 1:
                miss *= one_minus
        lik *= 1.0 - miss
    for s in neg:
        for d, _, one_minus in kb.causes[s]:
            if mask >> d & 1:
                lik *= one_minus
    return lik


def _event_test(kb: KnowledgeBase, event: Event):
    if isinstance(event, CandidatePresent):
        need = _present_mask(kb, event.disorders)
        return lambda mask: mask & need == need
    if isinstance(event, OnlyCandidate):
        need = _present_mask(kb, event.disorders)
        return lambda mask: mask == need
    if isinstance(event, ClusteringSatisfied):
        diff_masks = [
            _present_mask(kb, task.differential) for task in event.clustering.tasks
        ]
        return lambda mask: all(mask & m for m in diff_masks)
    raise ValidationError(f"unknown event type {type(event).__name__}")
