"""Parsing dictionary glosses into logical-form graphs with explicit gaps.

A gloss for a verb sense is a verb phrase whose subject (and often some
complement) is missing: "cause to die" leaves out who causes and who dies.
The grammar below admits such phrases and records every missing argument as
an IMPRO node typed ``ONT::REFERENTIAL-SEM``.

Gap positions admitted by the grammar:

* subject of the defining verb (always)
* direct object of a verb
* object of a preposition in a prepositional complement
* complement of ``of`` after a relational noun ("the strength of _")
* complement of ``than`` after a comparative ("heavier than _")
* a to-infinitive complement slot ("want _ strongly")
* the subject of a controlled complement, via its controller

Also covered: a leading "to", coordination of verb phrases, noun phrases and
adverbs with "or"/"and", parenthesised noun phrases, adjectival predicates,
prepositional complements and adjuncts, and multiword verbs ("take in").

All analyses are produced; :func:`parse_definition` ranks them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

from .corpus import Token
from .mapping import Hierarchy
from .model import LinkingTemplate, Resource, SenseKey, Slot, feature_compatible

F, IMPRO, TERM, OPERATOR = "F", "IMPRO", "TERM", "OPERATOR"

INDEF_PRONOUNS = {"something": "ONT::REFERENTIAL-SEM", "somebody": "ONT::PERSON",
                  "someone": "ONT::PERSON"}
REFLEXIVES = {"oneself": "ONT::PERSON"}
DETERMINERS = {"a", "an", "the"}
SPECIFIERS = {"certain", "particular"}
CONJUNCTIONS = {"or": "OR", "and": "AND"}
CLOSED_CLASS = ({"to", "of", "than", "somewhere", "(", ")", ";"} | set(INDEF_PRONOUNS)
                | set(REFLEXIVES) | DETERMINERS | SPECIFIERS | set(CONJUNCTIONS))
LOCATIVE_ADVERBS = {"somewhere": "ONT::LOCATION"}

MARKS = ("PARENTHETICAL", "INDEF-PRONOUN", "INDEF-NOUN", "CERTAIN-MARKED")
TAG_POS = {"n": "n", "v": "v", "adj": "adj", "adv": "adv"}


class DefinitionError(Exception):
    pass


class NoParse(DefinitionError):
    pass


class UnknownToken(DefinitionError):
    def __init__(self, token: str, index: int, offset: int):
        self.token, self.index, self.offset = token, index, offset
        super().__init__(f"unknown token {token!r} at character {offset}")


# ---------------------------------------------------------------------------
# Logical form graphs


@dataclass(frozen=True)
class LFNode:
    id: str
    indicator: str
    type: str
    word: Optional[str] = None
    cat: Optional[str] = None         # V, P, ADJ, ADV, N, PRO, NMOD
    marks: frozenset[str] = frozenset()
    span: tuple[int, int] = (0, 0)    # token range of the whole constituent
    head: Optional[int] = None        # token index of the head word
    det: Optional[str] = None
    sense: Optional[str] = None       # gloss tag the chosen sense agrees with


@dataclass(frozen=True)
class LFEdge:
    src: str
    dst: str
    label: str


@dataclass(frozen=True)
class LFGraph:
    nodes: tuple[LFNode, ...]
    edges: tuple[LFEdge, ...]
    root: str
    tokens: tuple[Token, ...] = ()
    score: tuple = ()

    def node(self, nid: str) -> LFNode:
        for n in self.nodes:
            if n.id == nid:
                return n
        raise KeyError(nid)

    def out_edges(self, nid: str) -> list[LFEdge]:
        return [e for e in self.edges if e.src == nid]

    def in_edges(self, nid: str) -> list[LFEdge]:
        return [e for e in self.edges if e.dst == nid]

    def impros(self) -> list[LFNode]:
        return [n for n in self.nodes if n.indicator == IMPRO]

    def char_offsets(self, nid: str) -> tuple[int, int]:
        """Character range of a node's constituent in the space-joined gloss."""
        start, end = self.node(nid).span
        starts, pos = [], 0
        for t in self.tokens:
            starts.append(pos)
            pos += len(t.text) + 1
        if start >= len(starts):
            return (pos, pos)
        last = self.tokens[end - 1] if end > start else None
        return (starts[start], starts[end - 1] + len(last.text) if last else starts[start])

    def paths(self) -> dict[str, tuple[LFEdge, ...]]:
        """Shortest edge path from the root to every reachable node."""
        out = {self.root: ()}
        frontier = [self.root]
        while frontier:
            nxt = []
            for nid in frontier:
                for e in self.out_edges(nid):
                    if e.dst not in out:
                        out[e.dst] = out[nid] + (e,)
                        nxt.append(e.dst)
            frontier = nxt
        return out

    def render(self) -> str:
        """Term dump in the style ``(F X2 (:* ONT::CAUSE-EFFECT W::CAUSE) :AGENT X1 ...)``."""
        order = [self.root] + sorted((n.id for n in self.nodes if n.id != self.root),
                                     key=_id_key)
        lines = []
        for nid in order:
            n = self.node(nid)
            if n.word:
                head = f"(:* {n.type} W::{n.word.upper().replace(' ', '-')})"
            else:
                head = n.type
            parts = [n.indicator, n.id, head]
            for e in self.out_edges(nid):
                parts.append(f":{e.label} {e.dst}")
            if n.marks:
                parts.append(":MARKS (" + " ".join(sorted(n.marks)) + ")")
            indent = "" if nid == self.root else "  "
            lines.append(indent + "(" + " ".join(parts) + ")")
        return "\n".join(lines)


def _id_key(nid: str) -> tuple[int, str]:
    digits = "".join(ch for ch in nid if ch.isdigit())
    return (int(digits) if digits else 0, nid)


# ---------------------------------------------------------------------------
# Parse trees (internal)


@dataclass(frozen=True)
class Choice:
    word: str
    pos: str
    type: str
    templates: tuple[str, ...]
    start: int
    end: int
    tag: Optional[str] = None
    matched: bool = False


class _Gap:
    def __repr__(self) -> str:
        return "GAP"


GAP = _Gap()
Absent = None


@dataclass(frozen=True)
class NP:
    start: int
    end: int
    head: Optional[Choice] = None     # noun
    pronoun: Optional[str] = None
    det: Optional[str] = None
    specifier: Optional[str] = None
    adjs: tuple[Choice, ...] = ()
    nmods: tuple[Choice, ...] = ()
    of_comp: object = None            # NP | GAP | None
    paren: bool = False


@dataclass(frozen=True)
class Coord:
    op: str
    items: tuple
    start: int
    end: int


@dataclass(frozen=True)
class ADJP:
    adj: Choice
    compar: object = None             # NP | GAP | None
    start: int = 0
    end: int = 0


@dataclass(frozen=True)
class PP:
    prep: Choice
    obj: object                       # NP | GAP
    start: int = 0
    end: int = 0


@dataclass(frozen=True)
class ADV:
    choice: Optional[Choice]
    word: str
    type: str
    start: int
    end: int


@dataclass(frozen=True)
class VP:
    verb: Choice
    template: LinkingTemplate
    args: tuple                       # (Slot, constituent | GAP | None)
    mods: tuple
    start: int
    end: int


def lemma_candidates(word: str) -> list[str]:
    w = word.lower()
    out = [w]
    if w.endswith("ing") and len(w) > 4:
        stem = w[:-3]
        out += [stem, stem + "e"]
        if len(stem) > 2 and stem[-1] == stem[-2]:
            out.append(stem[:-1])
    if w.endswith("ed") and len(w) > 3:
        stem = w[:-2]
        out += [stem, w[:-1]]
        if len(stem) > 2 and stem[-1] == stem[-2]:
            out.append(stem[:-1])
    if w.endswith("ies") and len(w) > 4:
        out.append(w[:-3] + "y")
    if w.endswith("es") and len(w) > 3:
        out.append(w[:-2])
    if w.endswith("s") and len(w) > 2:
        out.append(w[:-1])
    seen, uniq = set(), []
    for c in out:
        if c not in seen:
            seen.add(c)
            uniq.append(c)
    return uniq


# ---------------------------------------------------------------------------
# The grammar


class _Parser:
    def __init__(self, tokens: Sequence[Token], resource: Resource,
                 hierarchy: Optional[Hierarchy]):
        self.tokens = tuple(tokens)
        self.low = [t.text.lower() for t in self.tokens]
        self.n = len(self.tokens)
        self.r = resource
        self.h = hierarchy
        self.memo: dict = {}
        self.multi = sorted((w.split(), w) for w in resource.multiword_lemmas)

    # -- lexical lookup --------------------------------------------------

    def tag_type(self, i: int, pos: str) -> Optional[str]:
        tag = self.tokens[i].sense
        if not tag or self.h is None:
            return None
        key = SenseKey(tag)
        if key.pos != pos:
            return None
        synset = self.h.corpus.synset_of(tag)
        if synset is None:
            return None
        res = self.h.resolve_mapping(synset.id)
        return res.type if res else None

    def lookup(self, i: int, pos: str, form: Optional[str] = None) -> list[Choice]:
        key = ("lookup", i, pos, form)
        if key in self.memo:
            return self.memo[key]
        out: list[Choice] = []
        if i < self.n and self.low[i] not in CLOSED_CLASS:
            tok = self.low[i]
            if form == "ing" and not tok.endswith("ing"):
                self.memo[key] = out
                return out
            tag = self.tokens[i].sense
            ttype = self.tag_type(i, pos)
            spans: list[tuple[str, int]] = []
            cands = lemma_candidates(tok)
            for parts, lemma in self.multi:
                k = len(parts)
                if (i + k <= self.n and parts[0] in cands
                        and self.low[i + 1:i + k] == parts[1:]):
                    spans.append((lemma, i + k))
            spans += [(c, i + 1) for c in cands]
            found = False
            for lemma, end in spans:
                entry = self.r.entry(lemma, pos)
                if entry is None:
                    continue
                found = True
                for sense in entry.senses:
                    matched = ttype is not None and self.r.comparable(sense.type, ttype)
                    out.append(Choice(lemma, pos, sense.type, sense.templates, i, end,
                                      tag, matched))
            if not found and ttype is not None:
                out.append(Choice(SenseKey(tag).lemma.replace("_", " "), pos, ttype,
                                  self._pool_templates(ttype) if pos == "v" else (),
                                  i, i + 1, tag, True))
        uniq = list(dict.fromkeys(out))
        self.memo[key] = uniq
        return uniq

    def _pool_templates(self, t: str) -> tuple[str, ...]:
        names = set()
        for d in self.r.descendants(t):
            for _w, pos, sense in self.r.words_by_type.get(d, ()):
                if pos == "v":
                    names.update(sense.templates)
        return tuple(sorted(names))

    # -- phrases ---------------------------------------------------------

    def definition(self) -> list:
        starts = [0]
        if self.n and self.low[0] == "to":
            starts = [1]
        out = []
        for s in starts:
            for tree, j in self.vp_coord(s, None):
                if j == self.n:
                    out.append(tree)
        return out

    def vp_coord(self, i: int, form: Optional[str]) -> list:
        key = ("vpc", i, form)
        if key in self.memo:
            return self.memo[key]
        out = []
        for vp, j in self.vp(i, form):
            out.append((vp, j))
            if j < self.n and self.low[j] in CONJUNCTIONS:
                op = CONJUNCTIONS[self.low[j]]
                for rest, k in self.vp_coord(j + 1, form):
                    items = rest.items if isinstance(rest, Coord) and rest.op == op else (rest,)
                    out.append((Coord(op, (vp,) + items, i, k), k))
        self.memo[key] = out
        return out

    def vp(self, i: int, form: Optional[str]) -> list:
        key = ("vp", i, form)
        if key in self.memo:
            return self.memo[key]
        out = []
        for verb in self.lookup(i, "v", form):
            for tname in verb.templates:
                tmpl = self.r.templates[tname]
                slots = tuple(s for s in tmpl.slots if s.grel != "LSUBJ")
                for args, j in self.slots(slots, 0, verb.end):
                    for mods, k in self.adjuncts(j):
                        out.append((VP(verb, tmpl, args, mods, i, k), k))
        self.memo[key] = out
        return out

    def slots(self, slots: tuple[Slot, ...], idx: int, i: int) -> list:
        if idx == len(slots):
            return [((), i)]
        slot = slots[idx]
        options: list[tuple[object, int]] = []
        if slot.phrase == "NP":
            options += self.np(i)
            options.append((GAP, i))
        elif slot.phrase == "CP":
            marker = slot.ptype or "to"
            if i < self.n and self.low[i] == marker:
                form = "ing" if slot.ctype == "s-ing" else None
                options += self.vp_coord(i + 1, form)
            if slot.ctype != "s-ing":
                options.append((GAP, i))
        elif slot.phrase == "PRED":
            options += self.adjp(i)
        elif slot.phrase == "PP":
            options += self.pp(i, slot.ptype, allow_gap=True)
        if slot.optional:
            options.append((Absent, i))
        out = []
        for con, j in options:
            for rest, k in self.slots(slots, idx + 1, j):
                out.append((((slot, con),) + rest, k))
        return out

    def np(self, i: int) -> list:
        key = ("np", i)
        if key in self.memo:
            return self.memo[key]
        out = []
        for base, j in self.base_np(i):
            out.append((base, j))
            if j < self.n and self.low[j] in CONJUNCTIONS:
                op = CONJUNCTIONS[self.low[j]]
                for rest, k in self.np(j + 1):
                    items = rest.items if isinstance(rest, Coord) and rest.op == op else (rest,)
                    out.append((Coord(op, (base,) + items, i, k), k))
        self.memo[key] = out
        return out

    def base_np(self, i: int) -> list:
        if i >= self.n:
            return []
        tok = self.low[i]
        out = []
        if tok == "(":
            for inner, j in self.np(i + 1):
                if j < self.n and self.low[j] == ")":
                    if isinstance(inner, NP):
                        inner = replace(inner, paren=True, start=i, end=j + 1)
                    out.append((inner, j + 1))
            return out
        if tok in INDEF_PRONOUNS or tok in REFLEXIVES:
            return [(NP(i, i + 1, pronoun=tok), i + 1)]
        j = i
        det = spec = None
        if tok in DETERMINERS:
            det, j = tok, j + 1
        if j < self.n and self.low[j] in SPECIFIERS:
            spec, j = self.low[j], j + 1
        for adjs, k in self._adj_seq(j):
            for nouns, m in self._noun_seq(k):
                *nmods, head = nouns
                base = NP(i, m, head=head, det=det, specifier=spec, adjs=adjs,
                          nmods=tuple(nmods))
                out.append((base, m))
                if m < self.n and self.low[m] == "of":
                    for comp, q in self.np(m + 1):
                        out.append((replace(base, of_comp=comp, end=q), q))
                    out.append((replace(base, of_comp=GAP, end=m + 1), m + 1))
        return out

    def _adj_seq(self, i: int) -> list:
        out = [((), i)]
        for adj in self.lookup(i, "adj"):
            for rest, j in self._adj_seq(adj.end):
                out.append(((adj,) + rest, j))
        return out

    def _noun_seq(self, i: int) -> list:
        out = []
        for noun in self.lookup(i, "n"):
            out.append(((noun,), noun.end))
            for rest, j in self._noun_seq(noun.end):
                out.append(((noun,) + rest, j))
        return out

    def adjp(self, i: int) -> list:
        out = []
        for adj in self.lookup(i, "adj"):
            j = adj.end
            out.append((ADJP(adj, None, i, j), j))
            if j < self.n and self.low[j] == "than":
                for comp, k in self.np(j + 1):
                    out.append((ADJP(adj, comp, i, k), k))
                out.append((ADJP(adj, GAP, i, j + 1), j + 1))
        return out

    def pp(self, i: int, ptype: Optional[str], allow_gap: bool) -> list:
        out = []
        for prep in self.lookup(i, "p"):
            if ptype and prep.word != ptype:
                continue
            for obj, j in self.np(prep.end):
                out.append((PP(prep, obj, i, j), j))
            if allow_gap:
                out.append((PP(prep, GAP, i, prep.end), prep.end))
        return out

    def adverbs(self, i: int) -> list:
        out = []
        if i < self.n and self.low[i] in LOCATIVE_ADVERBS:
            out.append(((ADV(None, self.low[i], LOCATIVE_ADVERBS[self.low[i]], i, i + 1),),
                        i + 1))
        for adv in self.lookup(i, "adv"):
            single = ADV(adv, adv.word, adv.type, i, adv.end)
            out.append(((single,), adv.end))
            j = adv.end
            if j < self.n and self.low[j] in CONJUNCTIONS:
                for rest, k in self.adverbs(j + 1):
                    out.append(((single,) + rest, k))
        return out

    def adjuncts(self, i: int) -> list:
        key = ("adj*", i)
        if key in self.memo:
            return self.memo[key]
        out = [((), i)]
        options = list(self.adverbs(i))
        options += [((pp,), j) for pp, j in self.pp(i, None, allow_gap=False)]
        for mods, j in options:
            for rest, k in self.adjuncts(j):
                out.append((mods + rest, k))
        self.memo[key] = out
        return out


# ---------------------------------------------------------------------------
# Trees to graphs


class _Builder:
    def __init__(self, resource: Resource, tokens: tuple[Token, ...]):
        self.r = resource
        self.tokens = tokens
        self.nodes: dict[str, LFNode] = {}
        self.edges: list[LFEdge] = []
        self.counter = 0
        self.depth_sum = 0
        self.tag_hits = 0

    def new(self, **kw) -> str:
        self.counter += 1
        nid = f"X{self.counter}"
        self.nodes[nid] = LFNode(id=nid, **kw)
        return nid

    def edge(self, src: str, dst: str, label: str) -> None:
        self.edges.append(LFEdge(src, dst, label))

    def use(self, choice: Choice) -> None:
        self.depth_sum += self.r.depth(choice.type)
        if choice.matched:
            self.tag_hits += 1

    def gap(self) -> str:
        return self.new(indicator=IMPRO, type=self.r.impro_type)

    # control: None -> fresh subject gap; "omit" -> no subject edge; node id -> reuse
    def vp_or_coord(self, tree, control=None) -> str:
        if isinstance(tree, Coord):
            op = self.new(indicator=OPERATOR, type=tree.op, span=(tree.start, tree.end))
            for item in tree.items:
                self.edge(op, self.vp_or_coord(item, control), "OPERAND")
            return op
        return self.vp(tree, control)

    def vp(self, vp: VP, control=None) -> str:
        subj_slot = vp.template.slot("LSUBJ")
        subject = None
        if subj_slot is not None:
            if control is None:
                subject = self.gap()
            elif control != "omit":
                subject = control
        self.use(vp.verb)
        ev = self.new(indicator=F, type=vp.verb.type, word=vp.verb.word, cat="V",
                      span=(vp.start, vp.end), head=vp.verb.start, sense=vp.verb.tag
                      if vp.verb.matched else None)
        if subject is not None:
            self.edge(ev, subject, subj_slot.role)
        # referents of coindexed slots
        refs: dict[str, object] = {}
        if subj_slot is not None and subj_slot.var:
            refs[subj_slot.var] = subject if subject is not None else "omit"
        for slot, con in vp.args:
            if slot.var and slot.phrase == "NP":
                if con is GAP:
                    refs[slot.var] = None      # the controlled complement supplies the gap
                elif con is not Absent:
                    refs[slot.var] = "pending"
        for slot, con in vp.args:
            if con is Absent:
                continue
            if slot.phrase == "NP":
                if con is GAP:
                    if slot.var and self._controls(vp, slot.var):
                        continue
                    self.edge(ev, self.gap(), slot.role)
                else:
                    nid = self.np(con)
                    self.edge(ev, nid, slot.role)
                    if slot.var:
                        refs[slot.var] = nid
            elif slot.phrase == "CP":
                if con is GAP:
                    self.edge(ev, self.gap(), slot.role)
                else:
                    ctl = refs.get(slot.subj) if slot.subj else None
                    self.edge(ev, self.vp_or_coord(con, ctl), slot.role)
            elif slot.phrase == "PRED":
                self.edge(ev, self.adjp(con), slot.role)
            elif slot.phrase == "PP":
                self.edge(ev, self.pp(con), slot.role)
        for mod in vp.mods:
            self.edge(ev, self.modifier(mod), "MOD")
        return ev

    @staticmethod
    def _controls(vp: VP, var: str) -> bool:
        return any(s.subj == var and s.phrase == "CP" and c is not Absent and c is not GAP
                   for s, c in vp.args)

    def modifier(self, mod) -> str:
        if isinstance(mod, ADV):
            if mod.choice is not None:
                self.use(mod.choice)
            return self.new(indicator=F, type=mod.type, word=mod.word, cat="ADV",
                            span=(mod.start, mod.end), head=mod.start)
        return self.pp(mod)

    def pp(self, pp: PP) -> str:
        self.use(pp.prep)
        nid = self.new(indicator=F, type=pp.prep.type, word=pp.prep.word, cat="P",
                       span=(pp.start, pp.end), head=pp.prep.start)
        obj = self.gap() if pp.obj is GAP else self.np(pp.obj)
        self.edge(nid, obj, "GROUND")
        return nid

    def adjp(self, adjp: ADJP) -> str:
        self.use(adjp.adj)
        nid = self.new(indicator=F, type=adjp.adj.type, word=adjp.adj.word, cat="ADJ",
                       span=(adjp.start, adjp.end), head=adjp.adj.start)
        if adjp.compar is not None:
            target = self.gap() if adjp.compar is GAP else self.np(adjp.compar)
            self.edge(nid, target, "COMPAR")
        return nid

    def np(self, np) -> str:
        if isinstance(np, Coord):
            op = self.new(indicator=OPERATOR, type=np.op, span=(np.start, np.end))
            for item in np.items:
                self.edge(op, self.np(item), "OPERAND")
            return op
        if np.pronoun:
            t = INDEF_PRONOUNS.get(np.pronoun) or REFLEXIVES[np.pronoun]
            return self.new(indicator=TERM, type=t, word=np.pronoun, cat="PRO",
                            span=(np.start, np.end), head=np.start + int(np.paren))
        self.use(np.head)
        nid = self.new(indicator=TERM, type=np.head.type, word=np.head.word, cat="N",
                       span=(np.start, np.end), head=np.head.start, det=np.det,
                       sense=np.head.tag if np.head.matched else None)
        for adj in np.adjs:
            self.use(adj)
            self.edge(nid, self.new(indicator=F, type=adj.type, word=adj.word, cat="ADJ",
                                    span=(adj.start, adj.end), head=adj.start), "MOD")
        for nm in np.nmods:
            self.use(nm)
            self.edge(nid, self.new(indicator=F, type=nm.type, word=nm.word, cat="NMOD",
                                    span=(nm.start, nm.end), head=nm.start), "MOD")
        if np.of_comp is not None:
            target = self.gap() if np.of_comp is GAP else self.np(np.of_comp)
            self.edge(nid, target, "FIGURE")
        return nid


def build_graph(tree, resource: Resource, tokens: tuple[Token, ...]) -> tuple[LFGraph, _Builder]:
    b = _Builder(resource, tokens)
    root = b.vp_or_coord(tree)
    graph = LFGraph(tuple(b.nodes[k] for k in sorted(b.nodes, key=_id_key)), tuple(b.edges),
                    root, tokens)
    return graph, b


# ---------------------------------------------------------------------------
# Surface patterns


def _argument_nodes(graph: LFGraph, resource: Resource) -> set[str]:
    """Nodes filling a core role of a predicate, seen through coordinations."""
    out = set()
    for e in graph.edges:
        src = graph.node(e.src)
        if src.indicator == F and src.cat == "V" and resource.is_core_role(e.label):
            stack = [e.dst]
            while stack:
                nid = stack.pop()
                out.add(nid)
                if graph.node(nid).indicator == OPERATOR:
                    stack.extend(x.dst for x in graph.out_edges(nid))
    return out


def mark_surface_patterns(graph: LFGraph, resource: Resource) -> LFGraph:
    """Attach INDEF-PRONOUN, PARENTHETICAL, INDEF-NOUN and CERTAIN-MARKED marks."""
    low = [t.text.lower() for t in graph.tokens]
    args = _argument_nodes(graph, resource)
    nodes = []
    for n in graph.nodes:
        marks = set(n.marks)
        if n.indicator == TERM:
            s, e = n.span
            if n.cat == "PRO" and n.word in INDEF_PRONOUNS:
                marks.add("INDEF-PRONOUN")
            if s > 0 and e <= len(low) and low[s] == "(" and low[e - 1] == ")":
                marks.add("PARENTHETICAL")
            elif s > 0 and e < len(low) and low[s - 1] == "(" and low[e] == ")":
                marks.add("PARENTHETICAL")
            if n.cat == "N" and n.head is not None:
                before = low[s:n.head]
                if any(w in SPECIFIERS for w in before):
                    marks.add("CERTAIN-MARKED")
                if n.det is None and n.id in args and "PARENTHETICAL" not in marks:
                    marks.add("INDEF-NOUN")
        nodes.append(replace(n, marks=frozenset(marks)) if marks != set(n.marks) else n)
    return replace(graph, nodes=tuple(nodes))


# ---------------------------------------------------------------------------
# Entry point


def check_tokens(tokens: Sequence[Token], resource: Resource,
                 hierarchy: Optional[Hierarchy]) -> None:
    parser = _Parser(tokens, resource, hierarchy)
    covered = set()
    for i in range(len(tokens)):
        for pos in ("v", "n", "adj", "adv", "p"):
            for c in parser.lookup(i, pos):
                covered.update(range(c.start, c.end))
    offset = 0
    for i, tok in enumerate(tokens):
        low = tok.text.lower()
        if low not in CLOSED_CLASS and low not in CONJUNCTIONS and i not in covered:
            raise UnknownToken(tok.text, i, offset)
        offset += len(tok.text) + 1


def _context_score(graph: LFGraph, resource: Resource, roles: Optional[frozenset[str]]) -> int:
    if not roles:
        return 0
    # one point per gap filling a role the mapping expects, per conjunct
    wanted = {resource.canonical_role(r) for r in roles}
    score = 0
    for n in graph.impros():
        for e in graph.in_edges(n.id):
            if resource.canonical_role(e.label) in wanted:
                score += 1
    for e in graph.edges:
        src, dst = graph.node(e.src), graph.node(e.dst)
        if src.indicator != F or src.cat != "V" or dst.indicator != TERM:
            continue
        spec = resource.effective_role(src.type, e.label)
        if spec is None:
            continue
        if dst.type in resource.ontology and feature_compatible(
                spec.features, resource.type_features(dst.type)):
            score += 1
    return score


def parse_definition(tokens: Sequence[Token], resource: Resource,
                     hierarchy: Optional[Hierarchy] = None,
                     context: Optional[Iterable[str]] = None) -> list[LFGraph]:
    """All analyses of a gloss, best first.

    Ranking: more tokens whose sense agrees with its gloss tag; better fit
    with the ``context`` role names; fewer gaps; shallower senses; then the
    term dump, so the order is total and reproducible.
    """
    tokens = tuple(t for t in tokens if t.text.strip())
    if not tokens:
        raise NoParse("empty gloss")
    check_tokens(tokens, resource, hierarchy)
    parser = _Parser(tokens, resource, hierarchy)
    trees = parser.definition()
    roles = frozenset(context) if context is not None else None
    ranked: dict[str, LFGraph] = {}
    for tree in trees:
        graph, b = build_graph(tree, resource, tokens)
        graph = mark_surface_patterns(graph, resource)
        text = graph.render()
        score = (-b.tag_hits, -_context_score(graph, resource, roles), len(graph.impros()),
                 b.depth_sum, text)
        graph = replace(graph, score=score)
        if text not in ranked or score < ranked[text].score:
            ranked[text] = graph
    if not ranked:
        raise NoParse("no analysis covers the whole gloss: "
                      + " ".join(t.text for t in tokens))
    return sorted(ranked.values(), key=lambda g: g.score)


def parse_text(text: str, resource: Resource, hierarchy: Optional[Hierarchy] = None,
               context: Optional[Iterable[str]] = None) -> list[LFGraph]:
    """Parse an untagged gloss; ``word%2:30:00::`` suffixes are read as tags."""
    from .corpus import tokenize
    toks = []
    for raw in tokenize(text):
        if "%" in raw:
            word = raw.split("%", 1)[0]
            toks.append(Token(word, raw))
        else:
            toks.append(Token(raw))
    return parse_definition(toks, resource, hierarchy, context)
