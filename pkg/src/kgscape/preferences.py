"""Preference and context-directive extraction from natural-language input.

Two routes exist for each operation: a live route through a LanguageModelClient
with a strict JSON completion contract and one repair retry, and a deterministic
offline route (template grammar / keyword rules) used in CI and offline mode.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .llm import CompletionError, LanguageModelClient, Prompt, extract_json_object, load_prompt_template
from .model import Ontology, canonical_value

EXTRACT_PROMPT_FILE = "preference_extraction_v1.txt"
CLASSIFY_PROMPT_FILE = "context_classification_v1.txt"

NEIGHBOR = "neighbor"
EDGE = "edge"
PATH = "path"

SHORTEST = "shortest"
HOMOGENEOUS = "homogeneous"
DISJOINT = "disjoint"


class PreferenceError(ValueError):
    """Extracted elements failed ontology validation."""


class ExtractionError(ValueError):
    """The question could not be turned into a valid preference."""

    def __init__(self, message: str, repair_log: Sequence[str] = ()):
        super().__init__(message)
        self.repair_log = list(repair_log)


class ClassificationError(ValueError):
    """The context description could not be turned into a directive."""


@dataclass(frozen=True)
class UserPreference:
    """The four intent elements plus the diversity setting."""

    interest_type: str
    attribute: str
    attribute_value: str
    connected_types: tuple[str, ...]
    diversity: float = 0.5

    def as_dict(self) -> dict:
        return {
            "interest_type": self.interest_type,
            "attribute": self.attribute,
            "attribute_value": self.attribute_value,
            "connected_types": list(self.connected_types),
            "diversity": self.diversity,
        }


@dataclass(frozen=True)
class ContextDirective:
    """A classified refinement request. Exactly one kind; kind-specific fields filled."""

    kind: str
    neighbor_metric: str | None = None
    target_type: str | None = None
    edge_relation: str | None = None
    edge_attribute: tuple[str, str] | None = None
    path_source: str | None = None
    path_target: str | None = None
    path_criterion: str | None = None

    def __post_init__(self):
        if self.kind == NEIGHBOR and not self.neighbor_metric:
            raise ClassificationError("neighbor directive requires a metric")
        if self.kind == EDGE and not (self.edge_relation or self.edge_attribute):
            raise ClassificationError("edge directive requires a predicate")
        if self.kind == PATH and not (self.path_source and self.path_target and self.path_criterion):
            raise ClassificationError("path directive requires source, target and criterion")
        if self.kind not in (NEIGHBOR, EDGE, PATH):
            raise ClassificationError(f"unknown directive kind {self.kind!r}")


def validate_preference(
    pref: UserPreference,
    ontology: Ontology,
    attributes: Mapping[str, Sequence[str]] | None = None,
) -> UserPreference:
    """Check existence and adjacency of every extracted element; raise PreferenceError."""
    if pref.interest_type not in ontology.types:
        raise PreferenceError(f"interest type {pref.interest_type!r} not in ontology")
    if attributes is not None and pref.attribute not in attributes.get(pref.interest_type, ()):
        raise PreferenceError(
            f"attribute {pref.attribute!r} not found on type {pref.interest_type!r}"
        )
    adjacent = ontology.adjacent_types(pref.interest_type)
    seen: set[str] = set()
    for ct in pref.connected_types:
        if ct == pref.interest_type:
            raise PreferenceError("connected types must not repeat the interest type")
        if ct in seen:
            raise PreferenceError(f"duplicate connected type {ct!r}")
        seen.add(ct)
        if ct not in ontology.types:
            raise PreferenceError(f"connected type {ct!r} not in ontology")
        if ct not in adjacent:
            raise PreferenceError(
                f"connected type {ct!r} is not adjacent to {pref.interest_type!r} in the ontology"
            )
    if not 0.0 <= pref.diversity <= 1.0:
        raise PreferenceError("diversity must lie in [0, 1]")
    return pref


def schema_summary(ontology: Ontology, attributes: Mapping[str, Sequence[str]] | None = None) -> str:
    """Compact schema description included in prompts."""
    lines = []
    for t in ontology.types:
        attrs = ", ".join((attributes or {}).get(t, ())) or "(none listed)"
        lines.append(f"- {t}: attributes {attrs}")
    rels = ", ".join(f"{s}-{r}->{t}" for s, t, r in ontology.relations) or "(none)"
    return "Node types:\n" + "\n".join(lines) + f"\nRelations: {rels}"


def _preference_from_payload(
    payload: Mapping,
    ontology: Ontology,
    attributes: Mapping[str, Sequence[str]] | None,
    diversity: float,
) -> UserPreference:
    try:
        pref = UserPreference(
            interest_type=str(payload["interest_type"]),
            attribute=str(payload["attribute"]),
            attribute_value=canonical_value(payload["attribute_value"]),
            connected_types=tuple(str(t) for t in payload["connected_types"]),
            diversity=diversity,
        )
    except (KeyError, TypeError) as exc:
        raise PreferenceError(f"completion missing required field: {exc}") from exc
    return validate_preference(pref, ontology, attributes)


def extract_preferences(
    question: str,
    ontology: Ontology,
    client: LanguageModelClient,
    *,
    attributes: Mapping[str, Sequence[str]] | None = None,
    diversity: float = 0.5,
) -> UserPreference:
    """Extract the four intent elements via the client; one repair round-trip on failure."""
    if not question.strip():
        raise ExtractionError("question is empty")
    if not ontology.types:
        raise ExtractionError("ontology is empty")
    template = load_prompt_template(EXTRACT_PROMPT_FILE)
    prompt = Prompt(
        system=template,
        user=f"Schema:\n{schema_summary(ontology, attributes)}\n\nQuestion: {question}",
    )
    repair_log: list[str] = []
    completion = client.complete(prompt)
    for attempt in range(2):
        try:
            payload = extract_json_object(completion)
            return _preference_from_payload(payload, ontology, attributes, diversity)
        except (ValueError, PreferenceError) as exc:
            repair_log.append(f"attempt {attempt + 1}: {exc}")
            if attempt == 1:
                break
            repair = Prompt(
                system=template,
                user=(
                    f"Schema:\n{schema_summary(ontology, attributes)}\n\nQuestion: {question}\n\n"
                    f"Your previous answer was rejected ({exc}). Previous answer:\n{completion}\n"
                    "Reply again with only the JSON object."
                ),
            )
            try:
                completion = client.complete(repair)
            except CompletionError as exc2:
                repair_log.append(f"repair call failed: {exc2}")
                break
    raise ExtractionError(f"could not extract a valid preference from {question!r}", repair_log)


# Offline template grammar. Family A: find/show <interest> with|whose|where <attr> (is)? <value>
# and their <connected...>. Family B: find/show <interest> published in <value> and their
# <connected...> (attribute resolves to "year" when the interest type carries it).
_CLAUSE = re.compile(
    r"^(?:find|show|list)(?: me)?(?: the| all)? (?P<subject>.+?)"
    r"(?: (?:with|whose|where) (?P<attr>[\w ]+?)(?: is| equals| =)? (?P<value>[\w .-]+?)"
    r"| published in (?P<year>[\w.-]+?))"
    r"(?:,| and) (?:their |the )?(?P<connected>.+)$"
)


def _normalize_question(question: str) -> str:
    text = question.strip().lower()
    text = re.sub(r"[?!.]+$", "", text)
    return re.sub(r"\s+", " ", text)


def _match_type(token: str, ontology: Ontology) -> str | None:
    token = token.strip().lower()
    for t in ontology.types:
        low = t.lower()
        if token in (low, low + "s", low + "es"):
            return t
    return None


def _match_attribute(token: str, interest_type: str, attributes: Mapping[str, Sequence[str]] | None) -> str | None:
    token = token.strip().lower().replace(" ", "_")
    if attributes is None:
        return token
    for attr in attributes.get(interest_type, ()):
        if attr.lower() in (token, token.replace("_", "")):
            return attr
    return None


def extract_preferences_offline(
    question: str,
    ontology: Ontology,
    *,
    attributes: Mapping[str, Sequence[str]] | None = None,
    diversity: float = 0.5,
) -> UserPreference:
    """Deterministic extractor for the documented template families.

    Matching is case-insensitive with plural stripping against the ontology
    vocabulary; the same question always yields the same preference.
    """
    text = _normalize_question(question)
    match = _CLAUSE.match(text)
    if not match:
        raise ExtractionError(f"question does not match a known template: {question!r}")
    interest = _match_type(match.group("subject"), ontology)
    if interest is None:
        raise ExtractionError(f"unknown interest type {match.group('subject')!r}")
    if match.group("year") is not None:
        attribute = _match_attribute("year", interest, attributes)
        if attribute is None:
            raise ExtractionError(f"type {interest!r} has no year attribute for 'published in'")
        value = match.group("year")
    else:
        attribute = _match_attribute(match.group("attr"), interest, attributes)
        if attribute is None:
            raise ExtractionError(f"unknown attribute {match.group('attr')!r} on {interest!r}")
        value = match.group("value")
    connected: list[str] = []
    for part in re.split(r",| and ", match.group("connected")):
        part = part.strip().removeprefix("their ").removeprefix("the ").strip()
        if not part:
            continue
        ct = _match_type(part, ontology)
        if ct is None:
            raise ExtractionError(f"unknown connected type {part!r}")
        if ct not in connected:
            connected.append(ct)
    pref = UserPreference(
        interest_type=interest,
        attribute=attribute,
        attribute_value=canonical_value(value),
        connected_types=tuple(connected),
        diversity=diversity,
    )
    return validate_preference(pref, ontology, attributes)


def _directive_from_payload(
    payload: Mapping,
    node_labels: Mapping[str, str] | None,
) -> ContextDirective:
    kind = str(payload.get("kind", "")).lower()
    if kind == NEIGHBOR:
        return ContextDirective(
            kind=NEIGHBOR,
            neighbor_metric=str(payload["metric"]),
            target_type=payload.get("target_type"),
        )
    if kind == EDGE:
        attr = payload.get("attribute")
        return ContextDirective(
            kind=EDGE,
            edge_relation=payload.get("relation"),
            edge_attribute=(str(attr[0]), str(attr[1])) if attr else None,
        )
    if kind == PATH:
        source = _resolve_node(str(payload["source"]), node_labels)
        target = _resolve_node(str(payload["target"]), node_labels)
        criterion = str(payload.get("criterion", SHORTEST)).lower()
        if criterion not in (SHORTEST, HOMOGENEOUS, DISJOINT):
            raise ClassificationError(f"unknown path criterion {criterion!r}")
        return ContextDirective(kind=PATH, path_source=source, path_target=target, path_criterion=criterion)
    raise ClassificationError(f"unknown directive kind {kind!r}")


def _resolve_node(name: str, node_labels: Mapping[str, str] | None) -> str:
    """Resolve a node name against the current subgraph's label -> id map."""
    if node_labels is None:
        return name
    lowered = {label.lower(): node_id for label, node_id in node_labels.items()}
    node_id = lowered.get(name.strip().lower())
    if node_id is None:
        raise ClassificationError(f"unknown entity {name!r}")
    return node_id


def classify_context(
    description: str,
    pref: UserPreference,
    ontology: Ontology,
    client: LanguageModelClient,
    *,
    node_labels: Mapping[str, str] | None = None,
) -> ContextDirective:
    """Classify a context description into Neighbor / Edge / Path via the client."""
    if not description.strip():
        raise ClassificationError("description is empty")
    template = load_prompt_template(CLASSIFY_PROMPT_FILE)
    user = (
        f"Schema:\n{schema_summary(ontology)}\n"
        f"Current interest type: {pref.interest_type}; connected types: {', '.join(pref.connected_types)}\n\n"
        f"Description: {description}"
    )
    prompt = Prompt(system=template, user=user)
    completion = client.complete(prompt)
    for attempt in range(2):
        try:
            return _directive_from_payload(extract_json_object(completion), node_labels)
        except (ValueError, KeyError, ClassificationError) as exc:
            if attempt == 1 or isinstance(exc, ClassificationError) and "unknown entity" in str(exc):
                raise ClassificationError(f"could not classify {description!r}: {exc}") from exc
            repair = Prompt(
                system=template,
                user=f"{user}\n\nYour previous answer was rejected ({exc}). Previous answer:\n{completion}\n"
                "Reply again with only the JSON object.",
            )
            completion = client.complete(repair)
    raise ClassificationError(f"could not classify {description!r}")


_DEGREE_WORDS = ("prolific", "connected", "linked", "central", "active", "popular", "collaborative")
_PATH_CLAUSE = re.compile(r"\bhow\b (?:is |are )?(?P<a>.+?) (?:is |are )?connected to (?P<b>.+)$")


def classify_context_offline(
    description: str,
    pref: UserPreference,
    ontology: Ontology,
    *,
    node_labels: Mapping[str, str] | None = None,
    relations: Sequence[str] = (),
) -> ContextDirective:
    """Rule-based classifier used in offline mode.

    Precedence on ambiguity is Path > Edge > Neighbor (the most structured kind
    wins). Rules are keyword grammars over the same phrasing families the live
    prompt documents.
    """
    if not description.strip():
        raise ClassificationError("description is empty")
    text = _normalize_question(description)

    path = _PATH_CLAUSE.search(text)
    if path or " path" in text or text.startswith("path"):
        criterion = SHORTEST
        if "disjoint" in text or "independent" in text:
            criterion = DISJOINT
        elif "homogeneous" in text or "same relation" in text or "same category" in text:
            criterion = HOMOGENEOUS
        if path:
            raw_a, raw_b = path.group("a"), path.group("b")
        else:
            between = re.search(r"between (?P<a>.+?) and (?P<b>.+)$", text)
            if not between:
                raise ClassificationError(f"path description lacks two endpoints: {description!r}")
            raw_a, raw_b = between.group("a"), between.group("b")
        return ContextDirective(
            kind=PATH,
            path_source=_resolve_node(raw_a, node_labels),
            path_target=_resolve_node(raw_b, node_labels),
            path_criterion=criterion,
        )

    if "edge" in text or "relationship" in text or "relation" in text:
        edge_match = re.search(
            r"edges? (?:representing|with|labeled|of type|for) (?P<token>[\w -]+?)(?: relations?| edges?)?$",
            text,
        )
        token = edge_match.group("token").strip() if edge_match else ""
        for rel in relations:
            if rel.lower() in text.replace(" ", "").replace("-", "").lower() or (
                token and rel.lower() == token.replace(" ", "").lower()
            ):
                return ContextDirective(kind=EDGE, edge_relation=rel)
        attr_eq = re.search(r"where (?P<name>\w+) (?:is|=|equals) (?P<value>[\w .-]+)$", text)
        if attr_eq:
            return ContextDirective(
                kind=EDGE,
                edge_attribute=(attr_eq.group("name"), canonical_value(attr_eq.group("value"))),
            )
        if token:
            return ContextDirective(kind=EDGE, edge_relation=token)
        raise ClassificationError(f"edge description lacks a predicate: {description!r}")

    if "most" in text or "least" in text or "important" in text or "largest" in text:
        target = None
        for word in re.findall(r"[a-z_]+", text):
            matched = _match_type(word, ontology)
            if matched:
                target = matched
                break
        by_attr = re.search(r"by (?:their )?(?P<attr>\w+)$", text)
        if by_attr and by_attr.group("attr") not in ("degree", "connections", "links"):
            metric = by_attr.group("attr")
        elif any(word in text for word in _DEGREE_WORDS) or "degree" in text or not by_attr:
            metric = "degree"
        else:
            metric = "degree"
        return ContextDirective(kind=NEIGHBOR, neighbor_metric=metric, target_type=target)

    raise ClassificationError(f"could not classify {description!r}")
