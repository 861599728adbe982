"""Learning new verb senses from parsed glosses.

One synset goes through: induce constraints from its mapping, parse the
gloss, identify roles with the skeleton rules, derive preferences and
templates, classify, write the axiom, and check the result against the
constraints.  :func:`bootstrap` runs that over a corpus until nothing new
is accepted.
"""

from __future__ import annotations

import dataclasses
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .corpus import Corpus, Synset
from .defparser import F, IMPRO, OPERATOR, TERM, DefinitionError, LFEdge, LFGraph, parse_definition
from .logic import And, Atom, Axiom, Expr, Or, Var
from .mapping import Hierarchy
from .model import (CORE_ROLE, EMPTY_FEATURES, FeatureSet, LexEntry, LexSense, OntType,
                    Provenance, Resource, RoleSpec, SenseKey, SkeletonRule,
                    feature_compatible)

TRANSPARENT = ("OPERAND",)

# stable rejection reasons, in the order checks are made
NO_MAPPING = "NO-MAPPING"
NO_PARSE = "NO-PARSE"
UNMAPPED_GAP = "UNMAPPED-GAP"
DUPLICATE_ROLE = "DUPLICATE-ROLE"
STATIVE_DEFINITION = "STATIVE-DEFINITION"
INCOMPARABLE_PLACEMENT = "INCOMPARABLE-PLACEMENT"
ROLE_MISMATCH = "ROLE-MISMATCH"
PREFERENCE_CONFLICT = "PREFERENCE-CONFLICT"
NO_TEMPLATES = "NO-TEMPLATES"
REASONS = (NO_MAPPING, NO_PARSE, UNMAPPED_GAP, DUPLICATE_ROLE, STATIVE_DEFINITION,
           INCOMPARABLE_PLACEMENT, ROLE_MISMATCH, PREFERENCE_CONFLICT, NO_TEMPLATES)


@dataclass(frozen=True)
class InducedConstraints:
    induced_type: str
    candidate_roles: tuple[RoleSpec, ...]
    candidate_templates: tuple[str, ...]
    hops: int = 0

    @property
    def role_names(self) -> frozenset[str]:
        return frozenset(r.role for r in self.candidate_roles)


@dataclass(frozen=True)
class Binding:
    role: str
    nodes: tuple[str, ...]
    rule: str
    evidence: str


@dataclass(frozen=True)
class RoleAssignment:
    bindings: tuple[Binding, ...]
    unmatched: tuple[str, ...] = ()      # gaps no rule covers
    conflicts: tuple[str, ...] = ()      # roles claimed by two non-parallel nodes

    @property
    def roles(self) -> list[str]:
        return [b.role for b in self.bindings]

    def binding(self, role: str) -> Optional[Binding]:
        for b in self.bindings:
            if b.role == role:
                return b
        return None

    def node_roles(self) -> dict[str, str]:
        return {n: b.role for b in self.bindings for n in b.nodes}


@dataclass
class Candidate:
    synset: str
    senses: tuple[str, ...]
    status: str = "rejected"
    reason: Optional[str] = None
    detail: str = ""
    induced: Optional[str] = None
    definition: Optional[str] = None     # main predicate type
    placement: Optional[str] = None
    new_type: Optional[str] = None
    roles: tuple[RoleSpec, ...] = ()
    templates: tuple[str, ...] = ()
    axiom: Optional[Axiom] = None
    graph: Optional[LFGraph] = None
    assignment: Optional[RoleAssignment] = None
    gloss: str = ""
    other_definitions: tuple[tuple[str, str], ...] = ()   # (gloss, outcome) not used

    @property
    def accepted(self) -> bool:
        return self.status == "accepted"

    def lex_entries(self) -> list[LexEntry]:
        return [LexEntry(SenseKey(k).lemma.replace("_", " "), "v",
                         (LexSense(self.new_type or "", self.templates),))
                for k in self.senses]

    def group_key(self) -> tuple:
        roles = tuple((r.role, r.restriction or "", tuple(r.features.items))
                      for r in self.roles)
        cons = self.axiom.render() if self.axiom else ""
        cons = cons.split("=>", 1)[-1]
        return (self.placement, self.definition, roles, cons)


# ---------------------------------------------------------------------------
# Constraints


def induce_constraints(synset: str, hierarchy: Hierarchy) -> Optional[InducedConstraints]:
    res = hierarchy.resolve_mapping(synset)
    if res is None:
        return None
    r = hierarchy.resource
    return InducedConstraints(res.type, tuple(r.effective_roles(res.type)),
                              template_pool(r, res.type), res.hops)


def template_pool(resource: Resource, t: str) -> tuple[str, ...]:
    """Templates of verbs whose sense type is ``t`` or below it."""
    names = set()
    for d in resource.descendants(t):
        for _w, pos, sense in resource.words_by_type.get(d, ()):
            if pos == "v":
                names.update(sense.templates)
    return tuple(sorted(names))


# ---------------------------------------------------------------------------
# Roles


def _evidence(graph: LFGraph, nid: str) -> Optional[str]:
    node = graph.node(nid)
    if node.indicator == IMPRO:
        return "IMPRO"
    if node.indicator == TERM:
        for mark in ("INDEF-PRONOUN", "PARENTHETICAL", "INDEF-NOUN", "CERTAIN-MARKED"):
            if mark in node.marks:
                return mark
    return None


def _visible(path: tuple[LFEdge, ...]) -> list[LFEdge]:
    return [e for e in path if e.label not in TRANSPARENT]


def rule_matches(rule: SkeletonRule, path: list[LFEdge], graph: LFGraph,
                 resource: Resource) -> bool:
    if len(path) != len(rule.pattern):
        return False
    for step, edge in zip(rule.pattern, path):
        if step.label == CORE_ROLE:
            if not resource.is_core_role(edge.label):
                return False
        elif resource.canonical_role(edge.label) != step.label:
            return False
        if step.cat is not None and graph.node(edge.dst).cat != step.cat:
            return False
    return True


def _parallel(a: tuple[LFEdge, ...], b: tuple[LFEdge, ...], graph: LFGraph) -> bool:
    """Do two root paths split at a coordination into different conjuncts?"""
    for ea, eb in zip(a, b):
        if ea == eb:
            continue
        return (ea.src == eb.src and ea.label == eb.label == "OPERAND"
                and graph.node(ea.src).indicator == OPERATOR)
    return False


def identify_roles(graph: LFGraph, resource: Resource) -> RoleAssignment:
    """Apply the highest-priority skeleton rule to each gap and marked node."""
    paths = graph.paths()
    rules = sorted(resource.skeleton_rules, key=lambda r: -r.priority)
    found: dict[str, list[tuple[str, str, str]]] = {}
    unmatched = []
    for node in sorted(graph.nodes, key=lambda n: _id_num(n.id)):
        ev = _evidence(graph, node.id)
        if ev is None or node.id not in paths:
            continue
        path = _visible(paths[node.id])
        rule = next((r for r in rules if rule_matches(r, path, graph, resource)), None)
        if rule is None:
            if ev == "IMPRO":
                unmatched.append(node.id)
            continue
        if rule.emits == "LIFT":
            role = path[-1].label
        elif rule.emits == "LIFT-OUTER":
            role = path[0].label
        else:
            role = rule.emits
        found.setdefault(role, []).append((node.id, rule.id, ev))
    bindings, conflicts = [], []
    order = {r: i for i, r in enumerate(resource.roles)}
    for role in sorted(found, key=lambda r: (order.get(r, len(order)), r)):
        items = sorted(found[role], key=lambda x: _id_num(x[0]))
        nodes = [items[0]]
        for item in items[1:]:
            if all(_parallel(paths[item[0]], paths[n[0]], graph) for n in nodes):
                nodes.append(item)
            else:
                conflicts.append(role)
                break
        rule_id, ev = nodes[0][1], nodes[0][2]
        bindings.append(Binding(role, tuple(n[0] for n in nodes), rule_id, ev))
    return RoleAssignment(tuple(bindings), tuple(unmatched), tuple(conflicts))


def _id_num(nid: str) -> int:
    return int("".join(ch for ch in nid if ch.isdigit()) or 0)


# ---------------------------------------------------------------------------
# Preferences and templates


def _common_features(sets: list[FeatureSet]) -> FeatureSet:
    common = set(sets[0].items)
    for fs in sets[1:]:
        common &= set(fs.items)
    return FeatureSet.of(common)


def derive_preferences(graph: LFGraph, assignment: RoleAssignment,
                       resource: Resource) -> tuple[RoleSpec, ...]:
    out = []
    for b in assignment.bindings:
        feats, types = [], []
        for nid in b.nodes:
            node = graph.node(nid)
            ev = _evidence(graph, nid)
            if ev in ("PARENTHETICAL", "INDEF-NOUN"):
                feats.append(EMPTY_FEATURES)
                types.append(node.type)
                continue
            spec = None
            for e in graph.in_edges(nid):
                src = graph.node(e.src)
                if src.indicator == F and src.type in resource.ontology:
                    spec = resource.effective_role(src.type, e.label)
                    if spec is not None:
                        break
            feats.append(spec.features if spec else EMPTY_FEATURES)
            types.append(spec.restriction if spec else None)
        restriction = None
        if all(types):
            restriction = resource.common_ancestor(types)
        out.append(RoleSpec(b.role, _common_features(feats), restriction))
    return tuple(out)


def template_frequencies(resource: Resource) -> Counter:
    freq: Counter = Counter()
    for (_w, pos), entry in resource.lexicon.items():
        if pos == "v":
            for sense in entry.senses:
                freq.update(sense.templates)
    return freq


def derive_templates(roles, constraints: InducedConstraints,
                     resource: Resource) -> tuple[str, ...]:
    """Filter the sibling pool by identified roles; back off to the commonest fit."""
    roles = frozenset(roles)
    kept = tuple(t for t in constraints.candidate_templates
                 if resource.templates[t].required_roles <= roles)
    if kept:
        return kept
    freq = template_frequencies(resource)
    exact = [t for t in sorted(resource.templates) if resource.templates[t].roles == roles]
    if not exact:
        return ()
    best = max(freq[t] for t in exact)
    return tuple(t for t in exact if freq[t] == best)


# ---------------------------------------------------------------------------
# Classification


def main_predicate(graph: LFGraph, resource: Resource, nid: Optional[str] = None) -> str:
    node = graph.node(nid or graph.root)
    if node.indicator == OPERATOR:
        return resource.common_ancestor(
            [main_predicate(graph, resource, e.dst) for e in graph.out_edges(node.id)])
    return node.type


def classify(graph: LFGraph, constraints: InducedConstraints, resource: Resource) -> str:
    d = main_predicate(graph, resource)
    induced = constraints.induced_type
    placement = d if resource.subsumes(induced, d) else induced
    root = graph.node(graph.root)
    mods = [graph.node(e.dst).type for e in graph.out_edges(root.id) if e.label == "MOD"]
    for rule in resource.phrase_rules:
        if not resource.subsumes(rule.head, d):
            continue
        if all(any(resource.subsumes(m, t) for t in mods if t in resource.ontology)
               for m in rule.modifiers):
            placement = rule.target
            break
    return placement


# ---------------------------------------------------------------------------
# Axioms


class _AxiomWriter:
    def __init__(self, graph: LFGraph, node_roles: dict[str, str]):
        self.g = graph
        self.bound = {n: Var(r.lower()) for n, r in node_roles.items()}
        self.existentials: list[str] = []
        self.terms: dict[str, Var] = {}

    def fresh(self, base: str) -> Var:
        n = sum(1 for e in self.existentials if e.rstrip("0123456789") == base) + 1
        name = base if base == "ev" and n == 1 else f"{base}{n}"
        self.existentials.append(name)
        return Var(name)

    def args(self, nid: str, extra: list[Expr]) -> tuple[Expr, ...]:
        return tuple(self.expr(e.dst, extra) for e in self.g.out_edges(nid) if e.label != "MOD")

    def expr(self, nid: str, extra: list[Expr]) -> Expr:
        if nid in self.bound:
            return self.bound[nid]
        node = self.g.node(nid)
        if node.indicator == OPERATOR:
            parts = [self.top(e.dst) for e in self.g.out_edges(nid)]
            if all(p == parts[0] for p in parts) and isinstance(parts[0], Var):
                return parts[0]
            return (Or if node.type == "OR" else And)(tuple(parts))
        if node.indicator in (TERM, IMPRO):
            if nid not in self.terms:
                var = self.fresh("x")
                self.terms[nid] = var
                if node.indicator == TERM:
                    extra.append(Atom(node.type, (var,) + self.args(nid, extra)))
                    for e in self.g.out_edges(nid):
                        if e.label == "MOD":
                            extra.append(self.modifier(e.dst, var, extra))
            return self.terms[nid]
        mods = [e.dst for e in self.g.out_edges(nid) if e.label == "MOD"]
        if node.cat == "V" and mods:
            ev = self.fresh("ev")
            atom = Atom(node.type, (ev,) + self.args(nid, extra))
            return And((atom,) + tuple(self.modifier(m, ev, extra) for m in mods))
        return Atom(node.type, self.args(nid, extra))

    def modifier(self, nid: str, target: Var, extra: list[Expr]) -> Expr:
        node = self.g.node(nid)
        return Atom(node.type, (target,) + self.args(nid, extra))

    def top(self, nid: str) -> Expr:
        extra: list[Expr] = []
        e = self.expr(nid, extra)
        if not extra:
            return e
        head = e.exprs if isinstance(e, And) else (e,)
        return And(tuple(head) + tuple(extra))


def generate_axiom(graph: LFGraph, assignment: RoleAssignment, new_type: str,
                   resource: Resource, axiom_id: Optional[str] = None) -> Axiom:
    order = {r: i for i, r in enumerate(resource.roles)}
    roles = tuple(sorted(assignment.roles, key=lambda r: (order.get(r, len(order)), r)))
    writer = _AxiomWriter(graph, assignment.node_roles())
    consequent = writer.top(graph.root)
    ax = Axiom(axiom_id or axiom_name(new_type), new_type, roles,
               tuple(r.lower() for r in roles), consequent, tuple(writer.existentials))
    ax.check_closed()
    return ax


def axiom_name(type_id: str) -> str:
    return "ax-" + type_id.split("::", 1)[-1].lower()


# ---------------------------------------------------------------------------
# Consistency


def check_consistency(candidate: Candidate, constraints: InducedConstraints,
                      resource: Resource) -> tuple[str, Optional[str]]:
    """``("accepted", None)`` or ``("rejected", reason)``."""
    d, induced = candidate.definition, constraints.induced_type
    if resource.is_stative(d) and not resource.is_stative(induced):
        return "rejected", STATIVE_DEFINITION
    if not resource.comparable(d, induced) or not resource.comparable(candidate.placement, induced):
        return "rejected", INCOMPARABLE_PLACEMENT
    allowed = {resource.canonical_role(r) for r in constraints.role_names}
    if any(resource.canonical_role(r.role) not in allowed for r in candidate.roles):
        return "rejected", ROLE_MISMATCH
    for spec in candidate.roles:
        inherited = resource.effective_role(candidate.placement, spec.role)
        if inherited is None:
            continue
        pref = inherited.features
        if inherited.restriction:
            pref = resource.type_features(inherited.restriction).merged(pref)
        cand = spec.features
        if spec.restriction:
            cand = resource.type_features(spec.restriction).merged(cand)
        if not feature_compatible(pref, cand):
            return "rejected", PREFERENCE_CONFLICT
    if not candidate.templates:
        return "rejected", NO_TEMPLATES
    return "accepted", None


# ---------------------------------------------------------------------------
# Naming


def name_new_type(synset: Synset | tuple[str, ...], taken=()) -> str:
    senses = synset.senses if isinstance(synset, Synset) else tuple(synset)
    key = SenseKey(sorted(senses)[0])
    base = f"ONT::{key.lemma.upper()}-WN{key.digits}"
    name, n = base, 1
    while name in taken:
        n += 1
        name = f"{base}-{n}"
    return name


# ---------------------------------------------------------------------------
# One synset


def process_synset(synset: Synset, hierarchy: Hierarchy) -> Candidate:
    """Run the whole pipeline on one synset; the first accepted definition wins."""
    cand = Candidate(synset.id, tuple(sorted(synset.senses)), gloss=synset.gloss)
    constraints = induce_constraints(synset.id, hierarchy)
    if constraints is None:
        cand.reason = NO_MAPPING
        return cand
    cand.induced = constraints.induced_type
    outcomes = []
    first: Optional[Candidate] = None
    for tokens in synset.definitions():
        text = " ".join(t.text for t in tokens)
        attempt = _process_definition(dataclasses.replace(cand, gloss=text), tokens,
                                      constraints, hierarchy)
        outcomes.append((text, attempt.reason or "accepted"))
        if first is None:
            first = attempt
        if attempt.accepted:
            attempt.other_definitions = tuple(o for o in outcomes if o[0] != text)
            return attempt
    assert first is not None
    first.other_definitions = tuple(outcomes[1:])
    return first


def _process_definition(cand: Candidate, tokens, constraints: InducedConstraints,
                        hierarchy: Hierarchy) -> Candidate:
    resource = hierarchy.resource
    try:
        graphs = parse_definition(tokens, resource, hierarchy,
                                  context=constraints.role_names)
    except DefinitionError as exc:
        cand.reason, cand.detail = NO_PARSE, str(exc)
        return cand
    graph = graphs[0]
    cand.graph = graph
    assignment = identify_roles(graph, resource)
    cand.assignment = assignment
    cand.definition = main_predicate(graph, resource)
    if assignment.unmatched:
        cand.reason, cand.detail = UNMAPPED_GAP, ",".join(assignment.unmatched)
        return cand
    if assignment.conflicts:
        cand.reason, cand.detail = DUPLICATE_ROLE, ",".join(assignment.conflicts)
        return cand
    cand.placement = classify(graph, constraints, resource)
    cand.roles = derive_preferences(graph, assignment, resource)
    cand.templates = derive_templates(assignment.roles, constraints, resource)
    cand.new_type = name_new_type(cand.senses, resource.ontology)
    cand.axiom = generate_axiom(graph, assignment, cand.new_type, resource)
    cand.status, cand.reason = check_consistency(cand, constraints, resource)
    if cand.accepted:
        cand.roles = realize_roles(cand.roles, cand.placement, resource)
    return cand


def realize_roles(roles, placement: str, resource: Resource) -> tuple[RoleSpec, ...]:
    """Fold the preferences inherited at ``placement`` into the derived ones."""
    out = []
    for spec in roles:
        inherited = resource.effective_role(placement, spec.role)
        if inherited is None:
            out.append(spec)
            continue
        out.append(RoleSpec(spec.role, inherited.features.merged(spec.features),
                            spec.restriction or inherited.restriction, spec.optional))
    return tuple(out)


# ---------------------------------------------------------------------------
# Merging and bootstrapping


def merge(resource: Resource, accepted: list[Candidate], iteration: int) -> tuple[Resource, list[dict]]:
    """Add accepted candidates to a copy of ``resource``; siblings share one type."""
    groups: dict[tuple, list[Candidate]] = {}
    for c in sorted(accepted, key=lambda c: c.senses[0]):
        groups.setdefault(c.group_key(), []).append(c)
    ontology = dict(resource.ontology)
    lexicon = dict(resource.lexicon)
    axioms = dict(resource.axioms)
    created = []
    for members in sorted(groups.values(), key=lambda g: g[0].senses[0]):
        senses = tuple(sorted(k for c in members for k in c.senses))
        name = name_new_type(senses, ontology)
        lead = members[0]
        templates = tuple(sorted({t for c in members for t in c.templates}))
        axiom = dataclasses.replace(lead.axiom, id=axiom_name(name), antecedent_type=name)
        ontology[name] = OntType(name, lead.placement, lead.roles, (axiom.id,), senses,
                                 Provenance("derived", iteration))
        axioms[axiom.id] = axiom
        for key in senses:
            word = SenseKey(key).lemma.replace("_", " ")
            old = lexicon.get((word, "v"))
            sense = LexSense(name, templates)
            lexicon[(word, "v")] = LexEntry(word, "v", (old.senses if old else ()) + (sense,))
        for c in members:
            c.new_type = name
            c.templates = templates
        created.append({"type": name, "parent": lead.placement,
                        "synsets": sorted(c.synset for c in members), "senses": list(senses)})
    merged = dataclasses.replace(resource, ontology=ontology, lexicon=lexicon, axioms=axioms)
    merged.validate()
    return merged, created


@dataclass
class BuildReport:
    iterations: list[dict] = field(default_factory=list)
    rejected: dict[str, dict] = field(default_factory=dict)
    incorporated: dict[str, dict] = field(default_factory=dict)

    def totals(self) -> dict:
        by_reason = Counter(r["reason"] for r in self.rejected.values())
        processed = len(self.rejected) + len(self.incorporated)
        return {
            "processed": processed,
            "accepted": len(self.incorporated),
            "rejected": len(self.rejected),
            "rejected_by_reason": dict(sorted(by_reason.items())),
            "rejection_rate": round(len(self.rejected) / processed, 6) if processed else 0.0,
            "new_types": sum(it["new_types"] for it in self.iterations),
            "new_lex_entries": sum(it["new_lex_entries"] for it in self.iterations),
        }

    def as_dict(self) -> dict:
        return {"iterations": self.iterations, "totals": self.totals(),
                "rejected": dict(sorted(self.rejected.items())),
                "incorporated": dict(sorted(self.incorporated.items()))}

    def summary(self) -> str:
        t = self.totals()
        lines = [f"processed {t['processed']}, accepted {t['accepted']}, "
                 f"rejected {t['rejected']} (rate {t['rejection_rate']:.3f})",
                 f"new types {t['new_types']}, new lexical senses {t['new_lex_entries']}"]
        for it in self.iterations:
            lines.append(f"iteration {it['iteration']}: processed {it['processed']}, "
                         f"accepted {it['accepted']}, rejected {it['rejected']}")
        for reason, n in t["rejected_by_reason"].items():
            lines.append(f"  {reason}: {n}")
        for sid, info in sorted(self.rejected.items()):
            lines.append(f"rejected {sid} {info['senses'][0]} {info['reason']}")
        return "\n".join(lines)


def bootstrap(corpus: Corpus, seed: Resource, max_iterations: int = 3,
              jobs: int = 1) -> tuple[Resource, BuildReport]:
    resource = seed
    report = BuildReport()
    for iteration in range(1, max_iterations + 1):
        done = resource.incorporated_senses
        todo = [s for _sid, s in sorted(corpus.synsets.items())
                if s.pos == "v" and not any(k in done for k in s.senses)]
        if not todo:
            break
        hierarchy = Hierarchy(resource, corpus)
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(lambda s: process_synset(s, hierarchy), todo))
        else:
            results = [process_synset(s, hierarchy) for s in todo]
        accepted = [c for c in results if c.accepted]
        rejected = [c for c in results if not c.accepted]
        before = sum(len(e.senses) for e in resource.lexicon.values())
        if accepted:
            resource, created = merge(resource, accepted, iteration)
        else:
            created = []
        after = sum(len(e.senses) for e in resource.lexicon.values())
        for c in accepted:
            report.rejected.pop(c.synset, None)
            report.incorporated[c.synset] = {"iteration": iteration, "type": c.new_type,
                                             "parent": c.placement, "senses": list(c.senses)}
        for c in rejected:
            report.rejected[c.synset] = {"reason": c.reason, "iteration": iteration,
                                         "senses": list(c.senses), "detail": c.detail}
        report.iterations.append({
            "iteration": iteration, "processed": len(results), "accepted": len(accepted),
            "rejected": len(rejected),
            "rejected_by_reason": dict(sorted(Counter(c.reason for c in rejected).items())),
            "new_types": len(created), "new_lex_entries": after - before})
        if not accepted:
            break
    return resource, report
