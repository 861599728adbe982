"""Sense-tagged gloss corpus (WordNet synsets with tagged definitions)."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

from .model import ResourceError, SenseKey


@dataclass(frozen=True)
class Token:
    text: str
    sense: Optional[str] = None     # sense key tag from the gloss corpus


@dataclass(frozen=True)
class Synset:
    id: str
    senses: tuple[str, ...]
    gloss: str
    tagged_gloss: tuple[Token, ...] = ()
    hypernyms: tuple[str, ...] = ()
    examples: tuple[str, ...] = ()

    @property
    def pos(self) -> str:
        return SenseKey(self.senses[0]).pos

    @property
    def lemmas(self) -> list[str]:
        return [SenseKey(k).lemma.replace("_", " ") for k in self.senses]

    @property
    def tokens(self) -> tuple[Token, ...]:
        if self.tagged_gloss:
            return self.tagged_gloss
        return tuple(Token(t) for t in tokenize(self.gloss))

    def definitions(self) -> list[tuple[Token, ...]]:
        """Split the gloss on ``;`` into separate definitions."""
        defs, cur = [], []
        for tok in self.tokens:
            if tok.text == ";":
                if cur:
                    defs.append(tuple(cur))
                cur = []
            else:
                cur.append(tok)
        if cur:
            defs.append(tuple(cur))
        return defs

    def validate(self) -> None:
        if not self.senses:
            raise ResourceError("synset without senses", source="corpus.json", key=self.id)
        for k in self.senses:
            SenseKey(k)
        for tok in self.tagged_gloss:
            if tok.sense is None:
                continue
            lemma = SenseKey(tok.sense).lemma.replace("_", " ")
            stem = lemma[:max(3, len(lemma) - 1)]
            if stem not in tok.text.lower():
                raise ResourceError(f"tag {tok.sense} does not match token {tok.text!r}",
                                    source="corpus.json", key=self.id)


def tokenize(text: str) -> list[str]:
    out = []
    for raw in text.replace("(", " ( ").replace(")", " ) ").replace(";", " ; ").split():
        raw = raw.strip(",.\"'")
        if raw:
            out.append(raw)
    return out


@dataclass(frozen=True)
class Corpus:
    synsets: dict[str, Synset] = field(default_factory=dict)

    @classmethod
    def of(cls, synsets: Iterable[Synset]) -> "Corpus":
        by: dict[str, Synset] = {}
        for s in synsets:
            if s.id in by:
                raise ResourceError("duplicate synset id", source="corpus.json", key=s.id)
            by[s.id] = s
        corpus = cls(by)
        corpus.validate()
        return corpus

    def __len__(self) -> int:
        return len(self.synsets)

    def get(self, synset_id: str) -> Synset:
        try:
            return self.synsets[synset_id]
        except KeyError:
            raise ResourceError(f"unknown synset {synset_id}", source="corpus.json") from None

    @cached_property
    def by_sense(self) -> dict[str, str]:
        return {k: s.id for s in self.synsets.values() for k in s.senses}

    def synset_of(self, sense_key: str) -> Optional[Synset]:
        sid = self.by_sense.get(sense_key)
        return self.synsets[sid] if sid else None

    @cached_property
    def by_lemma(self) -> dict[str, tuple[str, ...]]:
        by: dict[str, set[str]] = {}
        for s in self.synsets.values():
            for lemma in s.lemmas:
                by.setdefault(lemma, set()).add(s.id)
        return {k: tuple(sorted(v)) for k, v in by.items()}

    def validate(self) -> None:
        seen_keys: dict[str, str] = {}
        for sid in sorted(self.synsets):
            s = self.synsets[sid]
            s.validate()
            for k in s.senses:
                if k in seen_keys:
                    raise ResourceError(f"sense {k} also in {seen_keys[k]}",
                                        source="corpus.json", key=sid)
                seen_keys[k] = sid
            for h in s.hypernyms:
                if h not in self.synsets:
                    raise ResourceError(f"dangling hypernym {h}", source="corpus.json", key=sid)
        # hypernym graph must be acyclic
        state: dict[str, int] = {}

        def visit(sid: str) -> None:
            stack = [(sid, iter(self.synsets[sid].hypernyms))]
            state[sid] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    state[node] = 2
                    stack.pop()
                elif state.get(nxt) == 1:
                    raise ResourceError(f"hypernym cycle through {nxt}", source="corpus.json", key=node)
                elif nxt not in state:
                    state[nxt] = 1
                    stack.append((nxt, iter(self.synsets[nxt].hypernyms)))

        for sid in sorted(self.synsets):
            if sid not in state:
                visit(sid)
