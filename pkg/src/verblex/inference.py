"""Forward chaining over entailment axioms.

Facts are ground atoms with a time tag.  Axioms fire on positive facts whose
type is subsumed by the axiom's antecedent type.  Conjunctions split into
facts, disjunctions are kept aside (never case-split), and a BECOME at
``AT(t)`` yields the negated state at ``t`` plus the state ``AFTER(t)``.
Derived events co-occur with their trigger: they inherit its time tag.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .logic import And, Atom, Axiom, Become, Const, Expr, Not, Or, render, substitute
from .model import Resource, ResourceError, type_id

TIME_TAGS = ("AT", "AFTER", "BEFORE")


class ArityError(ResourceError):
    pass


@dataclass(frozen=True, order=True)
class Time:
    tag: str
    instant: str

    def __str__(self) -> str:
        return f"{self.tag}({self.instant})"


@dataclass(frozen=True)
class Fact:
    type: str
    args: tuple[Expr, ...]
    time: Optional[Time] = None
    negated: bool = False

    @property
    def atom(self) -> Atom:
        return Atom(self.type, self.args)

    def __str__(self) -> str:
        body = self.type + "(" + ", ".join(_ground_text(a) for a in self.args) + ")"
        if self.time is not None:
            body += f"@{self.time}"
        return ("not " if self.negated else "") + body

    def sort_key(self) -> str:
        return str(self)


def _ground_text(e: Expr) -> str:
    if isinstance(e, Atom):
        return e.type + "(" + ", ".join(_ground_text(a) for a in e.args) + ")"
    return str(e)


@dataclass(frozen=True)
class Step:
    fact: Fact
    axiom: str          # axiom id, or "become" for the transition rule
    premise: Fact
    depth: int


@dataclass
class Closure:
    facts: set[Fact]
    disjunctions: set[tuple[str, Optional[Time]]] = field(default_factory=set)
    trace: dict[Fact, Step] = field(default_factory=dict)
    exhausted: bool = False
    inputs: frozenset[Fact] = frozenset()

    def depth(self, fact: Fact) -> int:
        step = self.trace.get(fact)
        return 0 if step is None else step.depth

    def derivation(self, fact: Fact) -> list[Step]:
        """Steps from an input fact down to ``fact``, in firing order."""
        path = []
        while fact in self.trace:
            step = self.trace[fact]
            path.append(step)
            fact = step.premise
        return list(reversed(path))

    def contradictions(self) -> list[Fact]:
        """Positive facts whose negation holds at the same time."""
        out = []
        for f in self.facts:
            if not f.negated and Fact(f.type, f.args, f.time, True) in self.facts:
                out.append(f)
        return sorted(out, key=Fact.sort_key)

    def sorted_facts(self) -> list[Fact]:
        return sorted(self.facts, key=Fact.sort_key)


def instantiate(axiom: Axiom, fact: Fact, resource: Resource,
                skolem_prefix: str = "sk") -> Optional[Expr]:
    """Bind the axiom's universals to the fact's arguments.

    Returns ``None`` when the axiom's antecedent type does not subsume the
    fact's type.  A fact carrying one extra leading argument is read as
    event-variable-first and that argument is skipped.
    """
    if fact.negated or not resource.subsumes(axiom.antecedent_type, fact.type):
        return None
    args = fact.args
    if len(args) == len(axiom.vars) + 1:
        args = args[1:]
    if len(args) != len(axiom.vars):
        raise ArityError(f"{fact.type} has {len(fact.args)} arguments, "
                         f"axiom expects {len(axiom.vars)}", source="axioms.json", key=axiom.id)
    binding: dict[str, Expr] = dict(zip(axiom.vars, args))
    for name in axiom.existentials:
        binding[name] = Const(f"{skolem_prefix}-{name}")
    return substitute(axiom.consequent, binding)


def _assert(expr: Expr, time: Optional[Time], facts: list[Fact],
            disjunctions: list[tuple[str, Optional[Time]]], becomes: list[Fact]) -> None:
    if isinstance(expr, Atom):
        facts.append(Fact(expr.type, expr.args, time))
    elif isinstance(expr, And):
        for x in expr.exprs:
            _assert(x, time, facts, disjunctions, becomes)
    elif isinstance(expr, Or):
        disjunctions.append((render(expr), time))
    elif isinstance(expr, Not):
        inner = expr.expr
        if isinstance(inner, Atom):
            facts.append(Fact(inner.type, inner.args, time, True))
    elif isinstance(expr, Become):
        state = expr.state
        if not isinstance(state, Atom):
            return
        if time is not None and time.tag == "AT":
            becomes.append(Fact(state.type, state.args, time, True))
            becomes.append(Fact(state.type, state.args, Time("AFTER", time.instant)))
        else:
            becomes.append(Fact(state.type, state.args, time))
    # constants and unbound variables assert nothing


def closure(facts: Iterable[Fact], axioms: Iterable[Axiom], resource: Resource,
            max_depth: int = 8) -> Closure:
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    axioms = sorted(axioms, key=lambda a: a.id)
    inputs = frozenset(facts)
    result = Closure(facts=set(inputs), inputs=inputs)
    frontier = sorted(inputs, key=Fact.sort_key)
    fired: set[tuple[str, Fact]] = set()
    step_no = 0
    for depth in range(1, max_depth + 1):
        new: list[Fact] = []
        for fact in frontier:
            for ax in axioms:
                if (ax.id, fact) in fired:
                    continue
                step_no += 1
                inst = instantiate(ax, fact, resource, skolem_prefix=f"sk{step_no}")
                if inst is None:
                    continue
                fired.add((ax.id, fact))
                derived: list[Fact] = []
                becomes: list[Fact] = []
                disj: list[tuple[str, Optional[Time]]] = []
                _assert(inst, fact.time, derived, disj, becomes)
                result.disjunctions.update(disj)
                for d in derived:
                    if d not in result.facts:
                        result.facts.add(d)
                        result.trace[d] = Step(d, ax.id, fact, depth)
                        new.append(d)
                for d in becomes:
                    if d not in result.facts:
                        result.facts.add(d)
                        result.trace[d] = Step(d, f"{ax.id}+become", fact, depth)
                        new.append(d)
        frontier = sorted(set(new), key=Fact.sort_key)
        if not frontier:
            break
    else:
        result.exhausted = any(
            (ax.id, f) not in fired and not f.negated
            and resource.subsumes(ax.antecedent_type, f.type)
            for f in frontier for ax in axioms)
    return result


def matches(query: Fact, fact: Fact, resource: Resource) -> bool:
    if query.negated != fact.negated or query.args != fact.args:
        return False
    if query.time is not None and query.time != fact.time:
        return False
    return resource.subsumes(query.type, fact.type)


def entails(facts: Iterable[Fact], query: Fact, axioms: Iterable[Axiom],
            resource: Resource, max_depth: int = 8) -> tuple[bool, list[Step]]:
    """``(True, trace)`` if the query is derivable, else ``(False, [])``.

    There is no "no" answer: the world is open.
    """
    facts = list(facts)
    for f in facts:
        if matches(query, f, resource):
            return True, []
    cl = closure(facts, axioms, resource, max_depth)
    for f in cl.sorted_facts():
        if matches(query, f, resource):
            return True, cl.derivation(f)
    return False, []


# ---------------------------------------------------------------------------
# Fact syntax:  [not] TYPE(arg, ...)[@TAG(instant)]

_TIME_RE = re.compile(r"@\s*(AT|AFTER|BEFORE)\s*\(\s*([^()\s]+)\s*\)\s*$", re.IGNORECASE)


class FactSyntaxError(ValueError):
    pass


def _split_args(text: str) -> list[str]:
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise FactSyntaxError("unbalanced parentheses")
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if depth:
        raise FactSyntaxError("unbalanced parentheses")
    tail = "".join(cur).strip()
    if tail or out:
        out.append(tail)
    return out


def _parse_term(text: str) -> Expr:
    text = text.strip()
    if not text:
        raise FactSyntaxError("empty argument")
    if "(" in text:
        if not text.endswith(")"):
            raise FactSyntaxError(f"bad term {text!r}")
        head, rest = text.split("(", 1)
        try:
            tid = type_id(head)
        except ResourceError as exc:
            raise FactSyntaxError(str(exc)) from None
        return Atom(tid, tuple(_parse_term(a) for a in _split_args(rest[:-1])))
    return Const(text)


def parse_fact(text: str) -> Fact:
    text = text.strip()
    negated = False
    if text.lower().startswith("not "):
        negated, text = True, text[4:].strip()
    time = None
    m = _TIME_RE.search(text)
    if m:
        time = Time(m.group(1).upper(), m.group(2))
        text = text[:m.start()].strip()
    term = _parse_term(text)
    if not isinstance(term, Atom):
        raise FactSyntaxError(f"a fact needs a type and arguments: {text!r}")
    return Fact(term.type, term.args, time, negated)


def parse_facts(text: str, default_time: Optional[Time] = None) -> list[Fact]:
    facts = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        f = parse_fact(line)
        if f.time is None and default_time is not None:
            f = Fact(f.type, f.args, default_time, f.negated)
        facts.append(f)
    return facts
