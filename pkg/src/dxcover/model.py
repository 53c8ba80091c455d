"""Domain model: knowledge bases, cases, clusterings, and their JSON formats.

A knowledge base is a bipartite causal model.  Disorders carry a prior
probability of being present; each disorder is linked to the symptoms it can
cause with a causal strength in (0, 1].  An absent link means strength
exactly 0, so `strength()` of an unlisted pair returns 0.0 and a link with an
explicit 0 strength is rejected at parse time (one representation per fact).

A case records the observed findings: a set of positive symptoms and a
disjoint set of negative symptoms.  Anything else is unknown.

A clustering partitions the positive findings into clusters, each paired with
a differential (the disorders hypothesized to explain that cluster); the
differentials of distinct tasks must be disjoint.

Names are interned to dense ordinals in file order; hot paths in the other
modules work on ordinals and bitmasks, so every structure here is immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ParseError, ValidationError

__all__ = [
    "KnowledgeBase",
    "Case",
    "Candidate",
    "Task",
    "Clustering",
    "EvalResult",
    "parse_kb",
    "serialize_kb",
    "parse_case",
    "make_case",
    "parse_clustering",
    "serialize_clustering",
    "validate_clustering",
    "candidate_signature",
    "clustering_signature",
    "render_candidate",
    "render_clustering",
]


def _check_probability(value: object, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{what} must be a number, got {value!r}")
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{what} {value!r} outside [0, 1]")
    return value


class KnowledgeBase:
    """Immutable bipartite causal model.

    Construct from `(name, prior)` pairs, symptom names, and
    `(disorder, symptom, strength)` links; names are interned to dense
    ordinals in the given order.  All containers exposed as attributes are
    read-only tuples/dicts by convention; never mutate them.
    """

    __slots__ = (
        "disorder_names",
        "symptom_names",
        "priors",
        "disorder_index",
        "symptom_index",
        "pminus",
        "causes",
        "effect_strengths",
        "cause_masks",
        "effect_masks",
    )

    def __init__(
        self,
        disorders: Iterable[tuple[str, float]],
        symptoms: Iterable[str],
        links: Iterable[tuple[str, str, float]],
    ):
        d_names: list[str] = []
        priors: list[float] = []
        d_index: dict[str, int] = {}
        for name, prior in disorders:
            _check_token(name, "disorder id")
            if name in d_index:
                raise ValidationError(f"duplicate disorder id {name!r}")
            d_index[name] = len(d_names)
            d_names.append(name)
            priors.append(_check_probability(prior, f"prior of {name!r}"))

        s_names: list[str] = []
        s_index: dict[str, int] = {}
        for name in symptoms:
            _check_token(name, "symptom id")
            if name in s_index:
                raise ValidationError(f"duplicate symptom id {name!r}")
            if name in d_index:
                raise ValidationError(
                    f"{name!r} declared as both a disorder and a symptom"
                )
            s_index[name] = len(s_names)
            s_names.append(name)

        # per-symptom cause lists as (disorder ordinal, strength, 1 - strength)
        causes: list[list[tuple[int, float, float]]] = [[] for _ in s_names]
        effect_strengths: list[dict[int, float]] = [{} for _ in d_names]
        for d_name, s_name, strength in links:
            if d_name not in d_index:
                raise ValidationError(f"link references unknown disorder {d_name!r}")
            if s_name not in s_index:
                raise ValidationError(f"link references unknown symptom {s_name!r}")
            strength = _check_probability(
                strength, f"strength of {d_name!r} -> {s_name!r}"
            )
            if strength == 0.0:
                raise ValidationError(
                    f"link {d_name!r} -> {s_name!r} has strength 0; "
                    "omit the link instead"
                )
            d, s = d_index[d_name], s_index[s_name]
            if s in effect_strengths[d]:
                raise ValidationError(f"duplicate link {d_name!r} -> {s_name!r}")
            effect_strengths[d][s] = strength
            causes[s].append((d, strength, 1.0 - strength))

        self.disorder_names = tuple(d_names)
        self.symptom_names = tuple(s_names)
        self.priors = tuple(priors)
        self.pminus = tuple(1.0 - p for p in priors)
        self.disorder_index = d_index
        self.symptom_index = s_index
        self.causes = tuple(tuple(row) for row in causes)
        self.effect_strengths = tuple(effect_strengths)
        self.cause_masks = tuple(
            _mask(d for d, _, _ in row) for row in self.causes
        )
        self.effect_masks = tuple(_mask(m.keys()) for m in effect_strengths)

    @property
    def n_disorders(self) -> int:
        return len(self.disorder_names)

    @property
    def n_symptoms(self) -> int:
        return len(self.symptom_names)

    def prior(self, disorder: str) -> float:
        return self.priors[self.disorder_ordinal(disorder)]

    def strength(self, disorder: str, symptom: str) -> float:
        """Causal strength of the pair; exactly 0.0 when unlinked."""
        d = self.disorder_ordinal(disorder)
        s = self.symptom_ordinal(symptom)
        return self.effect_strengths[d].get(s, 0.0)

    def causes_of(self, symptom: str) -> frozenset[str]:
        """All disorders with a positive-strength link to `symptom`."""
        s = self.symptom_ordinal(symptom)
        return frozenset(self.disorder_names[d] for d, _, _ in self.causes[s])

    def effects_of(self, disorder: str) -> frozenset[str]:
        """All symptoms `disorder` can cause (positive-strength links)."""
        d = self.disorder_ordinal(disorder)
        return frozenset(self.symptom_names[s] for s in self.effect_strengths[d])

    def disorder_ordinal(self, name: str) -> int:
        try:
            return self.disorder_index[name]
        except KeyError:
            raise ValidationError(f"unknown disorder {name!r}") from None

    def symptom_ordinal(self, name: str) -> int:
        try:
            return self.symptom_index[name]
        except KeyError:
            raise ValidationError(f"unknown symptom {name!r}") from None

    def symptom_ordinals(self, names: Iterable[str]) -> list[int]:
        """Sorted ordinals for a collection of symptom names."""
        return sorted(self.symptom_ordinal(n) for n in names)

    def disorder_ordinals(self, names: Iterable[str]) -> list[int]:
        """Sorted ordinals for a collection of disorder names."""
        return sorted(self.disorder_ordinal(n) for n in names)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        return (
            self.disorder_names == other.disorder_names
            and self.symptom_names == other.symptom_names
            and self.priors == other.priors
            and self.effect_strengths == other.effect_strengths
        )

    def __hash__(self):  # pragma: no cover - identity hashing is enough
        return id(self)

    def __repr__(self):
        return (
            f"KnowledgeBase({self.n_disorders} disorders, "
            f"{self.n_symptoms} symptoms, "
            f"{sum(len(m) for m in self.effect_strengths)} links)"
        )


def _check_token(name: object, what: str) -> None:
    if not isinstance(name, str) or not name:
        raise ValidationError(f"{what} must be a non-empty string, got {name!r}")


def _mask(ordinals: Iterable[int]) -> int:
    m = 0
    for o in ordinals:
        m |= 1 << o
    return m


@dataclass(frozen=True)
class Case:
    """Observed findings: positive and negative symptom sets, disjoint.

    Symptoms in neither set are unknown.  Build through `make_case` or
    `parse_case` so membership and disjointness are checked against a KB.
    """

    positive: frozenset[str]
    negative: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "positive", frozenset(self.positive))
        object.__setattr__(self, "negative", frozenset(self.negative))


@dataclass(frozen=True)
class Candidate:
    """A non-empty set of disorders hypothesized to be jointly present."""

    disorders: frozenset[str]

    def __post_init__(self):
        ds = frozenset(self.disorders)
        if not ds:
            raise ValidationError("a candidate needs at least one disorder")
        object.__setattr__(self, "disorders", ds)


@dataclass(frozen=True)
class Task:
    """One problem area: a symptom cluster and its differential disorders."""

    cluster: frozenset[str]
    differential: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "cluster", frozenset(self.cluster))
        object.__setattr__(self, "differential", frozenset(self.differential))


@dataclass(frozen=True)
class Clustering:
    """An ordered list of tasks whose clusters partition the positive findings."""

    tasks: tuple[Task, ...]

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))


@dataclass(frozen=True)
class EvalResult:
    """Outcome of one posterior evaluation.

    `numerator` and `denominator` are the raw alternating sums (a numerator
    may sit a hair below zero, never beyond the clamp epsilon used for the
    run); `posterior` is their ratio clamped into [0, 1], with `clamped`
    recording whether clamping fired.  `subset_terms` counts the
    inclusion-exclusion terms evaluated: always 2**|positive findings|.
    """

    numerator: float
    denominator: float
    posterior: float
    subset_terms: int
    clamped: bool

    def to_dict(self) -> dict:
        return {
            "numerator": self.numerator,
            "denominator": self.denominator,
            "posterior": self.posterior,
            "subset_terms": self.subset_terms,
            "clamped": self.clamped,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def _load_json(text: str, what: str) -> object:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{what}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None


def _require_object(value: object, keys: Sequence[str], where: str) -> Mapping:
    if not isinstance(value, dict):
        raise ParseError(f"{where} must be a JSON object, got {type(value).__name__}")
    unknown = set(value) - set(keys)
    if unknown:
        raise ParseError(
            f"{where} has unknown key(s) {sorted(unknown)!r}; expected {sorted(keys)!r}"
        )
    missing = set(keys) - set(value)
    if missing:
        raise ParseError(f"{where} is missing key(s) {sorted(missing)!r}")
    return value


def _require_list(value: object, where: str) -> list:
    if not isinstance(value, list):
        raise ParseError(f"{where} must be a JSON array, got {type(value).__name__}")
    return value


def parse_kb(text: str) -> KnowledgeBase:
    """Parse KB-file JSON into a validated KnowledgeBase.

    Format: `{"disorders": [{"id": str, "prior": num}...],
    "symptoms": [str...], "links": [{"disorder": str, "symptom": str,
    "strength": num}...]}`.  Unknown keys anywhere are an error.
    """
    doc = _require_object(_load_json(text, "KB file"), ("disorders", "symptoms", "links"), "KB file")
    disorders = []
    for i, entry in enumerate(_require_list(doc["disorders"], '"disorders"')):
        obj = _require_object(entry, ("id", "prior"), f"disorders[{i}]")
        disorders.append((obj["id"], obj["prior"]))
    symptoms = _require_list(doc["symptoms"], '"symptoms"')
    links = []
    for i, entry in enumerate(_require_list(doc["links"], '"links"')):
        obj = _require_object(entry, ("disorder", "symptom", "strength"), f"links[{i}]")
        links.append((obj["disorder"], obj["symptom"], obj["strength"]))
    return KnowledgeBase(disorders, symptoms, links)


def serialize_kb(kb: KnowledgeBase) -> str:
    """Canonical KB-file JSON: declaration order preserved, links sorted by
    (disorder ordinal, symptom ordinal).  Round-trips through parse_kb to an
    equal KB."""
    links = [
        {
            "disorder": kb.disorder_names[d],
            "symptom": kb.symptom_names[s],
            "strength": c,
        }
        for d in range(kb.n_disorders)
        for s, c in sorted(kb.effect_strengths[d].items())
    ]
    doc = {
        "disorders": [
            {"id": name, "prior": prior}
            for name, prior in zip(kb.disorder_names, kb.priors)
        ],
        "symptoms": list(kb.symptom_names),
        "links": links,
    }
    return json.dumps(doc, indent=2)


def make_case(
    kb: KnowledgeBase, positive: Iterable[str], negative: Iterable[str] = ()
) -> Case:
    """Build a Case, checking membership and disjointness against `kb`."""
    pos, neg = frozenset(positive), frozenset(negative)
    for name in sorted(pos | neg):
        if name not in kb.symptom_index:
            if name in kb.disorder_index:
                raise ValidationError(
                    f"{name!r} is a disorder, not a symptom; findings must be symptoms"
                )
            raise ValidationError(f"unknown symptom {name!r} in case")
    both = pos & neg
    if both:
        raise ValidationError(
            f"symptom(s) {sorted(both)!r} listed as both positive and negative"
        )
    return Case(pos, neg)


def parse_case(text: str, kb: KnowledgeBase) -> Case:
    """Parse case-file JSON: `{"positive": [str...], "negative": [str...]}`."""
    doc = _require_object(_load_json(text, "case file"), ("positive", "negative"), "case file")
    pos = _require_list(doc["positive"], '"positive"')
    neg = _require_list(doc["negative"], '"negative"')
    for name in pos + neg:
        _check_token(name, "finding")
    return make_case(kb, pos, neg)


def serialize_case(kb: KnowledgeBase, case: Case) -> str:
    return json.dumps(
        {
            "positive": [kb.symptom_names[o] for o in kb.symptom_ordinals(case.positive)],
            "negative": [kb.symptom_names[o] for o in kb.symptom_ordinals(case.negative)],
        }
    )


def parse_clustering(text: str, kb: KnowledgeBase) -> Clustering:
    """Parse clustering-file JSON:
    `{"tasks": [{"cluster": [str...], "differential": [str...]}...]}`.

    Names must be declared in `kb`; deeper invariants (partition,
    disjointness, causal support) are `validate_clustering`'s job.
    """
    doc = _require_object(_load_json(text, "clustering file"), ("tasks",), "clustering file")
    tasks = []
    for i, entry in enumerate(_require_list(doc["tasks"], '"tasks"')):
        obj = _require_object(entry, ("cluster", "differential"), f"tasks[{i}]")
        cluster = _require_list(obj["cluster"], f"tasks[{i}].cluster")
        diff = _require_list(obj["differential"], f"tasks[{i}].differential")
        for name in cluster:
            _check_token(name, "symptom")
            kb.symptom_ordinal(name)
        for name in diff:
            _check_token(name, "disorder")
            kb.disorder_ordinal(name)
        tasks.append(Task(frozenset(cluster), frozenset(diff)))
    return Clustering(tuple(tasks))


def serialize_clustering(kb: KnowledgeBase, clustering: Clustering) -> str:
    doc = {
        "tasks": [
            {
                "cluster": [kb.symptom_names[o] for o in kb.symptom_ordinals(t.cluster)],
                "differential": [
                    kb.disorder_names[o] for o in kb.disorder_ordinals(t.differential)
                ],
            }
            for t in clustering.tasks
        ]
    }
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# clustering validation
# ---------------------------------------------------------------------------

def clustering_violations(
    kb: KnowledgeBase, clustering: Clustering, case: Case | None = None
) -> tuple[list[str], list[str]]:
    """Collect every invariant violation of a clustering.

    Returns `(general, overlap)`: all violations except differential overlap
    in the first list, differential-overlap violations in the second (so
    callers can downgrade only that class).  With `case=None`, the
    partition-of-positive-findings checks are skipped; everything else is
    case-independent.
    """
    general: list[str] = []
    overlap: list[str] = []
    seen_symptoms: dict[str, int] = {}
    seen_disorders: dict[str, int] = {}

    for i, task in enumerate(clustering.tasks):
        where = f"task {i}"
        if not task.cluster:
            general.append(f"{where}: empty cluster")
        if not task.differential:
            general.append(f"{where}: empty differential")
        unknown_s = {n for n in task.cluster if n not in kb.symptom_index}
        unknown_d = {n for n in task.differential if n not in kb.disorder_index}
        for n in sorted(unknown_s):
            general.append(f"{where}: unknown symptom {n!r}")
        for n in sorted(unknown_d):
            general.append(f"{where}: unknown disorder {n!r}")
        for n in sorted(task.cluster - unknown_s):
            if n in seen_symptoms:
                general.append(
                    f"{where}: symptom {n!r} already in cluster of task {seen_symptoms[n]}"
                )
            else:
                seen_symptoms[n] = i
            if case is not None and n not in case.positive:
                general.append(
                    f"{where}: symptom {n!r} is not a positive finding of the case"
                )
        for n in sorted(task.differential - unknown_d):
            if n in seen_disorders:
                overlap.append(
                    f"{where}: disorder {n!r} already in differential of task "
                    f"{seen_disorders[n]}"
                )
            else:
                seen_disorders[n] = i
        # every differential member must be able to cause every cluster symptom
        for d in sorted(task.differential - unknown_d):
            for s in sorted(task.cluster - unknown_s):
                if kb.strength(d, s) == 0.0:
                    general.append(
                        f"{where}: disorder {d!r} cannot cause cluster symptom {s!r}"
                    )

    if case is not None:
        for n in sorted(case.positive - set(seen_symptoms)):
            general.append(f"positive finding {n!r} is in no cluster")

    return general, overlap


def validate_clustering(
    kb: KnowledgeBase,
    clustering: Clustering,
    case: Case,
    *,
    permissive: bool = False,
) -> list[str]:
    """Check every clustering invariant against `kb` and `case`.

    Returns the complete list of violations (empty means valid), not just
    the first.  With `permissive=True`, differential-overlap violations are
    dropped from the list (exploratory use); probability evaluations always
    validate strictly.
    """
    general, overlap = clustering_violations(kb, clustering, case)
    if not permissive:
        general.extend(overlap)
    return general


# ---------------------------------------------------------------------------
# signatures and rendering
# ---------------------------------------------------------------------------

def candidate_signature(kb: KnowledgeBase, candidate: Candidate) -> tuple[int, ...]:
    """Sorted disorder ordinals; the deterministic ranking tie-break key."""
    return tuple(kb.disorder_ordinals(candidate.disorders))


def clustering_signature(kb: KnowledgeBase, clustering: Clustering):
    """Canonical nested-tuple key: tasks sorted by smallest cluster ordinal,
    each task as (cluster ordinals, differential ordinals)."""
    tasks = [
        (tuple(kb.symptom_ordinals(t.cluster)), tuple(kb.disorder_ordinals(t.differential)))
        for t in clustering.tasks
    ]
    return tuple(sorted(tasks))


def render_candidate(kb: KnowledgeBase, candidate: Candidate) -> str:
    return "+".join(kb.disorder_names[o] for o in candidate_signature(kb, candidate))


def render_clustering(kb: KnowledgeBase, clustering: Clustering) -> str:
    parts = []
    for cluster, diff in clustering_signature(kb, clustering):
        cs = ",".join(kb.symptom_names[o] for o in cluster)
        ds = ",".join(kb.disorder_names[o] for o in diff)
        parts.append(f"{cs}<-{ds}")
    return "|".join(parts)
