"""Synset-to-ontology mappings and the hybrid hierarchy built from them.

The hybrid hierarchy hangs each synset below the ontology type it maps to
(directly or through its nearest mapped hypernym).  Depths::

    depth(type)   = 1 + parent edges to the root
    depth(synset) = depth(mapped type) + 1 + hypernym hops to the mapped synset
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .corpus import Corpus
from .model import Resource, ResourceError, TYPE_PREFIX

ROOT_DEPTH = 1
MAPPING_HOP_COST = 1
HYPERNYM_HOP_COST = 1

DEPTH_MODEL = {
    "rootDepth": ROOT_DEPTH,
    "mappingHopCost": MAPPING_HOP_COST,
    "hypernymHopCost": HYPERNYM_HOP_COST,
}


class Unresolvable(ResourceError):
    pass


@dataclass(frozen=True)
class Resolution:
    type: str
    hops: int
    path: tuple[str, ...]     # synset ids from the query up to the mapped one

    @property
    def anchor(self) -> str:
        return self.path[-1]


def is_type(node: str) -> bool:
    return node.startswith(TYPE_PREFIX)


def detect_duplicates(resource: Resource) -> list[dict]:
    """Synsets mapped to two or more distinct types.  Report only."""
    out = []
    for synset, maps in sorted(resource.mappings_by_synset.items()):
        types = sorted({m.type for m in maps})
        if len(types) > 1:
            out.append({"synset": synset, "types": types})
    return out


class Hierarchy:
    """Queries over the ontology tree extended by the mapped synsets."""

    def __init__(self, resource: Resource, corpus: Corpus):
        self.resource = resource
        self.corpus = corpus
        self._resolve = lru_cache(maxsize=None)(self._resolve_uncached)

    # -- mappings ---------------------------------------------------------

    def resolve_mapping(self, synset: str) -> Optional[Resolution]:
        self.corpus.get(synset)
        return self._resolve(synset)

    def _resolve_uncached(self, synset: str) -> Optional[Resolution]:
        # breadth-first up the hypernyms; nearest mapped ancestor wins,
        # ties broken by synset id, then by type id
        maps = self.resource.mappings_by_synset
        parent: dict[str, Optional[str]] = {synset: None}
        level = [synset]
        hops = 0
        while level:
            mapped = sorted(s for s in level if s in maps)
            if mapped:
                anchor = mapped[0]
                path = [anchor]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return Resolution(maps[anchor][0].type, hops, tuple(reversed(path)))
            nxt = []
            for s in sorted(level):
                for h in sorted(self.corpus.get(s).hypernyms):
                    if h not in parent:
                        parent[h] = s
                        nxt.append(h)
            level = nxt
            hops += 1
        return None

    # -- hybrid hierarchy -------------------------------------------------

    def chain(self, node: str) -> list[str]:
        """``node`` and all its ancestors in the hybrid hierarchy, deepest first."""
        if is_type(node):
            return self.resource.ancestors(node)
        res = self.resolve_mapping(node)
        if res is None:
            raise Unresolvable(f"synset {node} has no mapped ancestor")
        return list(res.path) + self.resource.ancestors(res.type)

    def hybrid_depth(self, node: str) -> int:
        if is_type(node):
            return ROOT_DEPTH + self.resource.depth(node)
        res = self.resolve_mapping(node)
        if res is None:
            raise Unresolvable(f"synset {node} has no mapped ancestor")
        return (self.hybrid_depth(res.type) + MAPPING_HOP_COST
                + HYPERNYM_HOP_COST * res.hops)

    def lcs(self, a: str, b: str) -> str:
        other = set(self.chain(b))
        for node in self.chain(a):
            if node in other:
                return node
        raise Unresolvable(f"{a} and {b} share no ancestor")   # unreachable on a tree

    def wup(self, a: str, b: str) -> float:
        da, db = self.hybrid_depth(a), self.hybrid_depth(b)
        return 2.0 * self.hybrid_depth(self.lcs(a, b)) / (da + db)

    # -- words ------------------------------------------------------------

    def sense_nodes(self, lemma: str) -> list[str]:
        nodes = set()
        for entry in self.resource.entries(lemma):
            nodes.update(s.type for s in entry.senses)
        for sid in self.corpus.by_lemma.get(lemma, ()):
            if self._resolve(sid) is not None:
                nodes.add(sid)
        return sorted(nodes)

    def word_similarity(self, w1: str, w2: str) -> tuple[float, tuple[str, str]]:
        """Best WuP score over all sense pairs, with the witnessing pair."""
        n1, n2 = self.sense_nodes(w1), self.sense_nodes(w2)
        for w, nodes in ((w1, n1), (w2, n2)):
            if not nodes:
                raise Unresolvable(f"no senses for {w!r}")
        best, pair = -1.0, (n1[0], n2[0])
        for a in n1:
            for b in n2:
                score = self.wup(a, b)
                if score > best:
                    best, pair = score, (a, b)
        return best, pair
