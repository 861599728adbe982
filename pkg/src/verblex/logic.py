"""Logical expressions and axioms in bracketed term notation.

Grammar of the notation::

    axiom  := expr "=>" expr
    expr   := VAR | CONST | "[" HEAD expr* "]"
    HEAD   := AND | OR | NOT | ONT::BECOME | type name
    VAR    := "?" name
    CONST  := bare name (lowercase by convention)

``[ONT::BECOME ?x [ONT::DEAD ?x]]`` is read as a transition into the state
given by its last argument.  Type names may omit the ``ONT::`` prefix.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from .model import ResourceError, short_type, type_id


class TermSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class Var:
    name: str            # without the leading "?"

    def __str__(self) -> str:
        return "?" + self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Atom:
    type: str
    args: tuple["Expr", ...] = ()


@dataclass(frozen=True)
class And:
    exprs: tuple["Expr", ...]


@dataclass(frozen=True)
class Or:
    exprs: tuple["Expr", ...]


@dataclass(frozen=True)
class Not:
    expr: "Expr"


@dataclass(frozen=True)
class Become:
    """Transition into ``state``; ``subject`` is the entity changing."""

    subject: "Expr"
    state: "Expr"


Expr = Union[Var, Const, Atom, And, Or, Not, Become]


def render(e: Expr, *, abbreviate: bool = False) -> str:
    if isinstance(e, (Var, Const)):
        return str(e)
    if isinstance(e, Atom):
        head = short_type(e.type) if abbreviate else e.type
        return "[" + " ".join([head] + [render(a, abbreviate=abbreviate) for a in e.args]) + "]"
    if isinstance(e, (And, Or)):
        head = "AND" if isinstance(e, And) else "OR"
        return "[" + " ".join([head] + [render(x, abbreviate=abbreviate) for x in e.exprs]) + "]"
    if isinstance(e, Not):
        return f"[NOT {render(e.expr, abbreviate=abbreviate)}]"
    if isinstance(e, Become):
        head = "BECOME" if abbreviate else "ONT::BECOME"
        return (f"[{head} {render(e.subject, abbreviate=abbreviate)} "
                f"{render(e.state, abbreviate=abbreviate)}]")
    raise TypeError(e)


def variables(e: Expr) -> Iterator[str]:
    if isinstance(e, Var):
        yield e.name
    elif isinstance(e, Atom):
        for a in e.args:
            yield from variables(a)
    elif isinstance(e, (And, Or)):
        for x in e.exprs:
            yield from variables(x)
    elif isinstance(e, Not):
        yield from variables(e.expr)
    elif isinstance(e, Become):
        yield from variables(e.subject)
        yield from variables(e.state)


def atom_types(e: Expr) -> Iterator[str]:
    if isinstance(e, Atom):
        yield e.type
        for a in e.args:
            yield from atom_types(a)
    elif isinstance(e, (And, Or)):
        for x in e.exprs:
            yield from atom_types(x)
    elif isinstance(e, Not):
        yield from atom_types(e.expr)
    elif isinstance(e, Become):
        yield from atom_types(e.subject)
        yield from atom_types(e.state)


def substitute(e: Expr, binding: dict[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return binding.get(e.name, e)
    if isinstance(e, Atom):
        return Atom(e.type, tuple(substitute(a, binding) for a in e.args))
    if isinstance(e, And):
        return And(tuple(substitute(x, binding) for x in e.exprs))
    if isinstance(e, Or):
        return Or(tuple(substitute(x, binding) for x in e.exprs))
    if isinstance(e, Not):
        return Not(substitute(e.expr, binding))
    if isinstance(e, Become):
        return Become(substitute(e.subject, binding), substitute(e.state, binding))
    return e


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(r"\s*(=>|\[|\]|[^\s\[\]]+)")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise TermSyntaxError(f"cannot tokenize at {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def _parse_expr(tokens: list[str], i: int) -> tuple[Expr, int]:
    if i >= len(tokens):
        raise TermSyntaxError("unexpected end of term")
    tok = tokens[i]
    if tok == "]" or tok == "=>":
        raise TermSyntaxError(f"unexpected {tok!r}")
    if tok != "[":
        if tok.startswith("?"):
            if len(tok) == 1:
                raise TermSyntaxError("empty variable name")
            return Var(tok[1:]), i + 1
        return Const(tok), i + 1
    if i + 1 >= len(tokens):
        raise TermSyntaxError("unterminated bracket")
    head = tokens[i + 1]
    args: list[Expr] = []
    j = i + 2
    while True:
        if j >= len(tokens):
            raise TermSyntaxError("unterminated bracket")
        if tokens[j] == "]":
            break
        arg, j = _parse_expr(tokens, j)
        args.append(arg)
    j += 1
    upper = head.upper()
    if upper == "AND":
        return And(tuple(args)), j
    if upper == "OR":
        return Or(tuple(args)), j
    if upper == "NOT":
        if len(args) != 1:
            raise TermSyntaxError("NOT takes one argument")
        return Not(args[0]), j
    try:
        tid = type_id(head)
    except ResourceError as exc:
        raise TermSyntaxError(str(exc)) from None
    if tid == "ONT::BECOME":
        if len(args) != 2:
            raise TermSyntaxError("BECOME takes a subject and a state")
        return Become(args[0], args[1]), j
    return Atom(tid, tuple(args)), j


def parse_expr(text: str) -> Expr:
    tokens = _tokenize(text)
    expr, i = _parse_expr(tokens, 0)
    if i != len(tokens):
        raise TermSyntaxError(f"trailing tokens: {' '.join(tokens[i:])}")
    return expr


# ---------------------------------------------------------------------------
# Axioms


@dataclass(frozen=True)
class Axiom:
    """``[TYPE ?v1 ... ?vn] => consequent``.

    ``roles`` lists the antecedent's role names in argument order, with
    ``vars`` the matching universal variable names.  Variables of the
    consequent outside ``vars`` must be listed in ``existentials``.
    """

    id: str
    antecedent_type: str
    roles: tuple[str, ...]
    vars: tuple[str, ...]
    consequent: Expr
    existentials: tuple[str, ...] = ()

    @property
    def antecedent(self) -> Atom:
        return Atom(self.antecedent_type, tuple(Var(v) for v in self.vars))

    def render(self, *, abbreviate: bool = False) -> str:
        return (f"{render(self.antecedent, abbreviate=abbreviate)} => "
                f"{render(self.consequent, abbreviate=abbreviate)}")

    def free_variables(self) -> set[str]:
        return set(variables(self.consequent)) - set(self.vars) - set(self.existentials)

    def check_closed(self) -> None:
        if len(set(self.vars)) != len(self.vars):
            raise ResourceError("antecedent variables not distinct", source="axioms.json", key=self.id)
        if len(self.roles) != len(self.vars):
            raise ResourceError("roles and variables differ in length",
                                source="axioms.json", key=self.id)
        free = sorted(self.free_variables())
        if free:
            raise ResourceError(f"free variable ?{free[0]} in consequent",
                                source="axioms.json", key=self.id)

    @property
    def consequent_types(self) -> set[str]:
        return set(atom_types(self.consequent))


def parse_axiom(axiom_id: str, text: str, roles: tuple[str, ...] | None = None,
                existentials: tuple[str, ...] = ()) -> Axiom:
    if "=>" not in text:
        raise TermSyntaxError("axiom needs '=>'")
    lhs, rhs = text.split("=>", 1)
    ante = parse_expr(lhs)
    if not isinstance(ante, Atom) or not all(isinstance(a, Var) for a in ante.args):
        raise TermSyntaxError("antecedent must be a type applied to variables")
    names = tuple(a.name for a in ante.args)
    if roles is None:
        roles = tuple(n.upper() for n in names)
    return Axiom(axiom_id, ante.type, tuple(roles), names, parse_expr(rhs), tuple(existentials))
