"""Data model for the ontology, lexicon, linking templates and feature algebra.

Everything here is immutable once built.  A :class:`Resource` is a snapshot;
the learner produces new snapshots instead of mutating an existing one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

TYPE_PREFIX = "ONT::"
_TYPE_RE = re.compile(r"^ONT::[A-Z0-9][A-Z0-9\-_.]*$")
_SENSE_KEY_RE = re.compile(r"^([^%\s]+)%([1-5]):(\d\d):(\d\d):[^:\s]*:[^:\s]*$")

POS_BY_SENSE_DIGIT = {"1": "n", "2": "v", "3": "adj", "4": "adv", "5": "adj"}


class ResourceError(Exception):
    """A resource violates one of its invariants."""

    def __init__(self, message: str, *, source: str = "", key: str = ""):
        self.source = source
        self.key = key
        where = ", ".join(p for p in (source, key) if p)
        super().__init__(f"{where}: {message}" if where else message)


class UnknownType(ResourceError, KeyError):
    pass


def type_id(name: str) -> str:
    """Normalise a type name to its ``ONT::NAME`` form and validate it."""
    name = name.strip()
    if not name.upper().startswith(TYPE_PREFIX):
        name = TYPE_PREFIX + name
    name = TYPE_PREFIX + name[len(TYPE_PREFIX):].upper()
    if not _TYPE_RE.match(name):
        raise ResourceError(f"malformed type id {name!r}")
    return name


def short_type(name: str) -> str:
    return name[len(TYPE_PREFIX):] if name.startswith(TYPE_PREFIX) else name


@dataclass(frozen=True, order=True)
class SenseKey:
    key: str

    def __post_init__(self):
        if not _SENSE_KEY_RE.match(self.key):
            raise ResourceError(f"malformed sense key {self.key!r}")

    @property
    def lemma(self) -> str:
        return self.key.split("%", 1)[0].lower()

    @property
    def pos(self) -> str:
        return POS_BY_SENSE_DIGIT[_SENSE_KEY_RE.match(self.key).group(2)]

    @property
    def digits(self) -> str:
        """The ``p:ff:nn`` fields with separators removed, e.g. ``23500``."""
        m = _SENSE_KEY_RE.match(self.key)
        return m.group(2) + m.group(3) + m.group(4)

    def __str__(self) -> str:
        return self.key


# ---------------------------------------------------------------------------
# Features


@dataclass(frozen=True)
class FeatureVocabulary:
    """Declared feature attributes and their admissible values.

    ``bare`` attributes are written by value alone (``PHYS-OBJ``); binary
    attributes use ``+``/``-`` suffixes (``LIVING+``); the rest use ``A=V``.
    """

    attributes: dict[str, tuple[str, ...]]
    bare: frozenset[str] = frozenset()

    def parse_token(self, token: str) -> tuple[str, str]:
        token = token.strip()
        if "=" in token:
            attr, value = token.split("=", 1)
        elif token.endswith(("+", "-")) and token[:-1] in self.attributes:
            attr, value = token[:-1], token[-1]
        else:
            owners = [a for a in sorted(self.bare) if token in self.attributes[a]]
            if len(owners) != 1:
                raise ResourceError(f"undeclared feature {token!r}")
            attr, value = owners[0], token
        if attr not in self.attributes:
            raise ResourceError(f"undeclared feature attribute {attr!r}")
        if value not in self.attributes[attr]:
            raise ResourceError(f"value {value!r} not declared for {attr}")
        return attr, value

    def format_pair(self, attr: str, value: str) -> str:
        if attr in self.bare:
            return value
        if value in ("+", "-"):
            return attr + value
        return f"{attr}={value}"

    def parse(self, tokens: Iterable[str]) -> "FeatureSet":
        pairs = [self.parse_token(t) for t in tokens]
        return FeatureSet.of(pairs)

    def format(self, fs: "FeatureSet") -> list[str]:
        return [self.format_pair(a, v) for a, v in fs.items]

    def check(self, fs: "FeatureSet") -> None:
        for attr, value in fs.items:
            if attr not in self.attributes:
                raise ResourceError(f"undeclared feature attribute {attr!r}")
            if value not in self.attributes[attr]:
                raise ResourceError(f"value {value!r} not declared for {attr}")


@dataclass(frozen=True)
class FeatureSet:
    items: tuple[tuple[str, str], ...] = ()

    @classmethod
    def of(cls, pairs: Iterable[tuple[str, str]]) -> "FeatureSet":
        seen: dict[str, str] = {}
        for attr, value in pairs:
            if attr in seen and seen[attr] != value:
                raise ResourceError(f"two values for feature {attr}")
            seen[attr] = value
        return cls(tuple(sorted(seen.items())))

    def as_dict(self) -> dict[str, str]:
        return dict(self.items)

    def without(self, attr: str) -> "FeatureSet":
        return FeatureSet(tuple(p for p in self.items if p[0] != attr))

    def merged(self, other: "FeatureSet") -> "FeatureSet":
        """Union, with ``other`` winning on shared attributes."""
        d = self.as_dict()
        d.update(other.as_dict())
        return FeatureSet(tuple(sorted(d.items())))

    def __bool__(self) -> bool:
        return bool(self.items)

    def __len__(self) -> int:
        return len(self.items)


EMPTY_FEATURES = FeatureSet()


def feature_compatible(pref: FeatureSet, candidate: FeatureSet,
                       vocab: Optional[FeatureVocabulary] = None) -> bool:
    """True unless some attribute carries different values in the two sets.

    Missing attributes are compatible: preferences are soft.
    """
    if vocab is not None:
        vocab.check(pref)
        vocab.check(candidate)
    cand = candidate.as_dict()
    return all(cand.get(attr, value) == value for attr, value in pref.items)


# ---------------------------------------------------------------------------
# Ontology and lexicon records


@dataclass(frozen=True)
class RoleSpec:
    role: str
    features: FeatureSet = EMPTY_FEATURES
    restriction: Optional[str] = None   # TypeId preference
    optional: bool = False


@dataclass(frozen=True)
class Provenance:
    kind: str = "seed"          # seed | derived
    iteration: int = 0

    def __str__(self) -> str:
        return "seed" if self.kind == "seed" else f"derived({self.iteration})"

    @classmethod
    def parse(cls, text: str) -> "Provenance":
        if text == "seed":
            return cls()
        m = re.match(r"^derived\((\d+)\)$", text)
        if not m:
            raise ResourceError(f"bad provenance {text!r}")
        return cls("derived", int(m.group(1)))


@dataclass(frozen=True)
class OntType:
    id: str
    parent: Optional[str]
    roles: tuple[RoleSpec, ...] = ()
    axioms: tuple[str, ...] = ()
    synsets: tuple[str, ...] = ()       # sense keys
    provenance: Provenance = Provenance()
    features: FeatureSet = EMPTY_FEATURES
    stative: bool = False

    def role(self, name: str) -> Optional[RoleSpec]:
        for spec in self.roles:
            if spec.role == name:
                return spec
        return None


@dataclass(frozen=True)
class Slot:
    grel: str                     # LSUBJ, LOBJ, LCOMP, LOBL
    phrase: str                   # NP, CP, PRED, PP
    role: str
    ctype: Optional[str] = None   # s-to, s-ing
    ptype: Optional[str] = None   # required preposition for PP slots
    var: Optional[str] = None     # coindex variable on this slot's referent
    subj: Optional[str] = None    # coindex variable on the complement's subject
    optional: bool = False

    def constraint_text(self) -> str:
        parts = [self.phrase]
        if self.ctype:
            parts.append(f"(ctype {self.ctype})")
        if self.ptype:
            parts.append(f"(ptype {self.ptype})")
        if self.var:
            parts.append(f"(var {self.var})")
        if self.subj:
            parts.append(f"(subj (var {self.subj}))")
        return "(% " + " ".join(parts) + ")"


@dataclass(frozen=True)
class LinkingTemplate:
    name: str
    slots: tuple[Slot, ...]

    @property
    def roles(self) -> frozenset[str]:
        return frozenset(s.role for s in self.slots)

    @property
    def required_roles(self) -> frozenset[str]:
        return frozenset(s.role for s in self.slots if not s.optional)

    def slot(self, grel: str) -> Optional[Slot]:
        for s in self.slots:
            if s.grel == grel:
                return s
        return None

    def validate(self) -> None:
        roles = [s.role for s in self.slots]
        if len(roles) != len(set(roles)):
            raise ResourceError("slot roles are not distinct", key=self.name)
        uses: dict[str, int] = {}
        for s in self.slots:
            for v in (s.var, s.subj):
                if v:
                    uses[v] = uses.get(v, 0) + 1
        lonely = sorted(v for v, n in uses.items() if n < 2)
        if lonely:
            raise ResourceError(f"coindex {lonely[0]} used only once", key=self.name)

    def render(self) -> str:
        lines = [self.name]
        for s in self.slots:
            opt = " (optional)" if s.optional else ""
            lines.append(f"  {s.grel} {s.constraint_text()} {s.role}{opt}")
        return "\n".join(lines)


@dataclass(frozen=True)
class LexSense:
    type: str
    templates: tuple[str, ...] = ()


@dataclass(frozen=True)
class LexEntry:
    word: str
    pos: str
    senses: tuple[LexSense, ...]

    @property
    def key(self) -> tuple[str, str]:
        return (self.word, self.pos)


@dataclass(frozen=True)
class Mapping:
    synset: str
    type: str
    kind: str = "direct"        # direct | remapped
    provenance: str = "seed"    # seed | repair


STRUCTURAL_LABELS = ("MOD", "OPERAND")
CORE_ROLE = "CORE-ROLE"


@dataclass(frozen=True)
class PathStep:
    label: str                    # edge label, or CORE-ROLE
    cat: Optional[str] = None     # category required of the edge's target node


@dataclass(frozen=True)
class SkeletonRule:
    """Edge-label path from the definition root to a gap, and the role it yields.

    ``emits`` is a role name, ``LIFT`` (copy the label of the last edge) or
    ``LIFT-OUTER`` (copy the label of the first edge).
    """

    id: str
    pattern: tuple[PathStep, ...]
    emits: str
    priority: int


@dataclass(frozen=True)
class PhraseRule:
    head: str
    modifiers: tuple[str, ...]
    target: str


@dataclass(frozen=True)
class Resource:
    ontology: dict[str, OntType]
    lexicon: dict[tuple[str, str], LexEntry]
    templates: dict[str, LinkingTemplate]
    axioms: dict
    mappings: tuple[Mapping, ...]
    vocabulary: FeatureVocabulary
    roles: tuple[str, ...]
    role_variants: dict[str, str]
    skeleton_rules: tuple[SkeletonRule, ...] = ()
    phrase_rules: tuple[PhraseRule, ...] = ()
    core_roles: tuple[str, ...] = ()
    event_root: Optional[str] = None
    impro_type: str = "ONT::REFERENTIAL-SEM"

    # -- structure ---------------------------------------------------------

    @cached_property
    def root(self) -> str:
        roots = sorted(t.id for t in self.ontology.values() if t.parent is None)
        if len(roots) != 1:
            raise ResourceError(f"expected exactly one root type, found {roots}")
        return roots[0]

    @cached_property
    def _children(self) -> dict[str, tuple[str, ...]]:
        kids: dict[str, list[str]] = {t: [] for t in self.ontology}
        for t in self.ontology.values():
            if t.parent is not None and t.parent in kids:
                kids[t.parent].append(t.id)
        return {k: tuple(sorted(v)) for k, v in kids.items()}

    def get(self, t: str) -> OntType:
        try:
            return self.ontology[t]
        except KeyError:
            raise UnknownType(f"unknown type {t}") from None

    def children(self, t: str) -> tuple[str, ...]:
        self.get(t)
        return self._children[t]

    def ancestors(self, t: str) -> list[str]:
        """``t`` followed by its parent chain up to the root."""
        chain = [t]
        cur = self.get(t)
        while cur.parent is not None:
            chain.append(cur.parent)
            cur = self.get(cur.parent)
        return chain

    def descendants(self, t: str) -> list[str]:
        out, stack = [], [t]
        while stack:
            cur = stack.pop()
            out.append(cur)
            stack.extend(reversed(self.children(cur)))
        return out

    def depth(self, t: str) -> int:
        """Number of parent edges between ``t`` and the root."""
        return len(self.ancestors(t)) - 1

    def subsumes(self, ancestor: str, descendant: str) -> bool:
        self.get(ancestor)
        return ancestor in self.ancestors(descendant)

    def comparable(self, a: str, b: str) -> bool:
        return self.subsumes(a, b) or self.subsumes(b, a)

    def common_ancestor(self, types: Iterable[str]) -> str:
        types = list(types)
        common = self.ancestors(types[0])
        for t in types[1:]:
            chain = set(self.ancestors(t))
            common = [c for c in common if c in chain]
        return common[0]

    def is_stative(self, t: str) -> bool:
        return any(self.ontology[a].stative for a in self.ancestors(t))

    def is_event(self, t: str) -> bool:
        return self.event_root is not None and self.subsumes(self.event_root, t)

    def type_features(self, t: str) -> FeatureSet:
        """Features of ``t`` including those inherited from ancestors."""
        fs = EMPTY_FEATURES
        for a in reversed(self.ancestors(t)):
            fs = fs.merged(self.ontology[a].features)
        return fs

    def effective_roles(self, t: str) -> list[RoleSpec]:
        """Local roles first, then inherited ones by ascending distance.

        A locally declared role hides the same-named role further up.
        """
        seen: set[str] = set()
        out: list[RoleSpec] = []
        for a in self.ancestors(t):
            for spec in self.ontology[a].roles:
                if spec.role not in seen:
                    seen.add(spec.role)
                    out.append(spec)
        return out

    def effective_role(self, t: str, role: str) -> Optional[RoleSpec]:
        for spec in self.effective_roles(t):
            if spec.role == role:
                return spec
        return None

    def canonical_role(self, role: str) -> str:
        return self.role_variants.get(role, role)

    def is_core_role(self, role: str) -> bool:
        return self.canonical_role(role) in self.core_roles

    # -- lexicon -----------------------------------------------------------

    @cached_property
    def _lex_by_word(self) -> dict[str, tuple[LexEntry, ...]]:
        by: dict[str, list[LexEntry]] = {}
        for (word, _pos), entry in sorted(self.lexicon.items()):
            by.setdefault(word, []).append(entry)
        return {k: tuple(v) for k, v in by.items()}

    def entries(self, word: str) -> tuple[LexEntry, ...]:
        return self._lex_by_word.get(word, ())

    def entry(self, word: str, pos: str) -> Optional[LexEntry]:
        return self.lexicon.get((word, pos))

    @cached_property
    def words_by_type(self) -> dict[str, tuple[tuple[str, str, LexSense], ...]]:
        by: dict[str, list] = {}
        for (word, pos), entry in sorted(self.lexicon.items()):
            for sense in entry.senses:
                by.setdefault(sense.type, []).append((word, pos, sense))
        return {k: tuple(v) for k, v in by.items()}

    @cached_property
    def multiword_lemmas(self) -> frozenset[str]:
        return frozenset(w for (w, _p) in self.lexicon if " " in w)

    @cached_property
    def mappings_by_synset(self) -> dict[str, tuple[Mapping, ...]]:
        by: dict[str, list[Mapping]] = {}
        for m in self.mappings:
            by.setdefault(m.synset, []).append(m)
        return {k: tuple(sorted(v, key=lambda m: m.type)) for k, v in by.items()}

    @cached_property
    def incorporated_senses(self) -> frozenset[str]:
        return frozenset(k for t in self.ontology.values() for k in t.synsets)

    # -- integrity ---------------------------------------------------------

    def validate(self) -> None:
        """Raise :class:`ResourceError` on the first invariant violation."""
        known_roles = set(self.roles)
        for tid, t in sorted(self.ontology.items()):
            type_id(tid)
            if t.parent is not None and t.parent not in self.ontology:
                raise ResourceError(f"dangling parent {t.parent}", source="ontology.json", key=tid)
            for spec in t.roles:
                if spec.role not in known_roles:
                    raise ResourceError(f"unknown role {spec.role}", source="ontology.json", key=tid)
                if spec.restriction and spec.restriction not in self.ontology:
                    raise ResourceError(f"dangling preference {spec.restriction}",
                                        source="ontology.json", key=tid)
                self.vocabulary.check(spec.features)
            self.vocabulary.check(t.features)
            for ax in t.axioms:
                if ax not in self.axioms:
                    raise ResourceError(f"dangling axiom {ax}", source="ontology.json", key=tid)
            if t.provenance.kind == "derived" and not t.synsets:
                raise ResourceError("derived type without source synsets",
                                    source="ontology.json", key=tid)
        self._check_tree()
        for name, tmpl in sorted(self.templates.items()):
            tmpl.validate()
            for s in tmpl.slots:
                if s.role not in known_roles:
                    raise ResourceError(f"unknown role {s.role}", source="templates.json", key=name)
        for key, entry in sorted(self.lexicon.items()):
            for sense in entry.senses:
                if sense.type not in self.ontology:
                    raise ResourceError(f"dangling type {sense.type}",
                                        source="lexicon.json", key=entry.word)
                for tn in sense.templates:
                    if tn not in self.templates:
                        raise ResourceError(f"dangling template {tn}",
                                            source="lexicon.json", key=entry.word)
        pairs = set()
        for m in self.mappings:
            if m.type not in self.ontology:
                raise ResourceError(f"dangling type {m.type}", source="mappings.json", key=m.synset)
            if (m.synset, m.type) in pairs:
                raise ResourceError(f"duplicate mapping to {m.type}",
                                    source="mappings.json", key=m.synset)
            pairs.add((m.synset, m.type))
        for aid, ax in sorted(self.axioms.items()):
            if ax.antecedent_type not in self.ontology:
                raise ResourceError(f"dangling type {ax.antecedent_type}",
                                    source="axioms.json", key=aid)
            ax.check_closed()
            for t in sorted(ax.consequent_types):
                if t not in self.ontology:
                    raise ResourceError(f"dangling type {t}", source="axioms.json", key=aid)
        for variant, base in sorted(self.role_variants.items()):
            if variant not in known_roles or base not in known_roles:
                raise ResourceError(f"unknown role in variant {variant}->{base}",
                                    source="vocabulary.json")
        for rule in self.phrase_rules:
            for t in (rule.head, rule.target, *rule.modifiers):
                if t not in self.ontology:
                    raise ResourceError(f"dangling type {t}", source="phrase_rules.json",
                                        key=rule.target)
        labels = known_roles | set(STRUCTURAL_LABELS) | {CORE_ROLE}
        priorities = [r.priority for r in self.skeleton_rules]
        if len(priorities) != len(set(priorities)):
            raise ResourceError("skeleton rule priorities are not unique",
                                source="skeleton_rules.json")
        for rule in self.skeleton_rules:
            for step in rule.pattern:
                if step.label not in labels:
                    raise ResourceError(f"undeclared edge label {step.label}",
                                        source="skeleton_rules.json", key=rule.id)
            if rule.emits not in ("LIFT", "LIFT-OUTER") and rule.emits not in known_roles:
                raise ResourceError(f"unknown role {rule.emits}", source="skeleton_rules.json",
                                    key=rule.id)
        for role in self.core_roles:
            if role not in known_roles:
                raise ResourceError(f"unknown core role {role}", source="vocabulary.json")
        if self.event_root and self.event_root not in self.ontology:
            raise ResourceError(f"dangling event root {self.event_root}", source="vocabulary.json")
        if self.impro_type not in self.ontology:
            raise ResourceError(f"dangling gap type {self.impro_type}", source="vocabulary.json")

    def _check_tree(self) -> None:
        state: dict[str, int] = {}
        for start in sorted(self.ontology):
            path = []
            cur: Optional[str] = start
            while cur is not None and state.get(cur) is None:
                state[cur] = 1
                path.append(cur)
                cur = self.ontology[cur].parent
            if cur is not None and state.get(cur) == 1:
                raise ResourceError(f"cycle in type tree through {cur}", source="ontology.json",
                                    key=cur)
            for p in path:
                state[p] = 2
        self.root  # noqa: B018 - raises unless exactly one root
