"""Metrics and the ablation drivers.

The ablation protocol removes a curated entry from the resource, lets the
learner rebuild it from the synset's gloss and compares the rebuilt role and
template sets with what was removed.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Corpus
from .learner import process_synset
from .mapping import Hierarchy, Unresolvable
from .model import LexEntry, Resource, ResourceError

BASELINE_ROLES = frozenset({"AGENT", "AFFECTED"})
BASELINE_TEMPLATE = "AGENT-AFFECTED-XP-TEMPL"


class InvalidCase(ResourceError):
    pass


# ---------------------------------------------------------------------------
# Metrics


def average_ranks(xs: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean of the ranks they span."""
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    ranks = [0.0] * len(xs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        mean = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = mean
        i = j + 1
    return ranks


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        raise ValueError("correlation is undefined for constant input")
    return sxy / math.sqrt(sxx * syy)


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) != len(ys):
        raise ValueError("inputs differ in length")
    if len(xs) < 2:
        raise ValueError("need at least two observations")
    rho = pearson(average_ranks(xs), average_ranks(ys))
    return max(-1.0, min(1.0, rho))


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    def as_dict(self) -> dict:
        return {"precision": round(self.precision, 6), "recall": round(self.recall, 6),
                "f1": round(self.f1, 6)}


def _prf_counts(tp: int, n_pred: int, n_gold: int) -> PRF:
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_gold if n_gold else 0.0
    # from counts, so the score is the correctly rounded value of 2tp / (|P| + |G|)
    f = 2 * tp / (n_pred + n_gold) if tp else 0.0
    return PRF(p, r, f)


def prf(predicted: Iterable, gold: Iterable) -> PRF:
    predicted, gold = set(predicted), set(gold)
    if not gold:
        raise ValueError("gold set is empty")
    return _prf_counts(len(predicted & gold), len(predicted), len(gold))


def aggregate(pairs: Sequence[tuple[set, set]]) -> dict:
    """Micro (pooled counts, the headline) and macro (mean of per-case) scores."""
    if not pairs:
        return {}
    tp = sum(len(p & g) for p, g in pairs)
    micro = _prf_counts(tp, sum(len(p) for p, _ in pairs), sum(len(g) for _, g in pairs))
    per = [prf(p, g) for p, g in pairs]
    n = len(per)
    macro = PRF(sum(x.precision for x in per) / n, sum(x.recall for x in per) / n,
                sum(x.f1 for x in per) / n)
    return {"micro": micro.as_dict(), "macro": macro.as_dict()}


# ---------------------------------------------------------------------------
# Ablation


@dataclass(frozen=True)
class AblationCase:
    synset: str
    gold_roles: frozenset[str]
    gold_templates: frozenset[str]

    def __post_init__(self):
        if not self.gold_roles or not self.gold_templates:
            raise InvalidCase("gold sets must be non-empty", key=self.synset)


def load_cases(path: str | Path) -> list[AblationCase]:
    try:
        records = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ResourceError(str(exc), source=str(path)) from None
    return [AblationCase(r["synset"], frozenset(r["gold_roles"]), frozenset(r["gold_templates"]))
            for r in records]


def shared_items(case: AblationCase, resource: Resource, corpus: Corpus) -> list[tuple[str, str]]:
    """Lexicon (word, type) pairs the synset shares with its mapped type."""
    maps = resource.mappings_by_synset.get(case.synset)
    if not maps:
        raise InvalidCase("case synset has no direct mapping", key=case.synset)
    types = {m.type for m in maps}
    out = []
    for lemma in corpus.get(case.synset).lemmas:
        entry = resource.entry(lemma, "v")
        if entry is None:
            continue
        out += [(lemma, s.type) for s in entry.senses if s.type in types]
    return out


def ablated(resource: Resource, corpus: Corpus, case: AblationCase) -> Resource:
    """``resource`` without the lexical senses the case synset is meant to rebuild."""
    items = shared_items(case, resource, corpus)
    if not items:
        raise InvalidCase("synset shares no lexicon item with its mapped type", key=case.synset)
    lexicon = dict(resource.lexicon)
    for word, t in items:
        entry = lexicon[(word, "v")]
        senses = tuple(s for s in entry.senses if s.type != t)
        if senses:
            lexicon[(word, "v")] = LexEntry(word, "v", senses)
        else:
            del lexicon[(word, "v")]
    return dataclasses.replace(resource, lexicon=lexicon)


def _predictions(resource: Resource, corpus: Corpus, cases: Sequence[AblationCase]) -> list[dict]:
    out = []
    for case in cases:
        cand = process_synset(corpus.get(case.synset),
                              Hierarchy(ablated(resource, corpus, case), corpus))
        if cand.accepted:
            roles, templates = set(cand.assignment.roles), set(cand.templates)
        else:
            roles, templates = set(), set()
        out.append({"case": case, "roles": roles, "templates": templates,
                    "status": cand.reason or "accepted"})
    return out


def _report(preds: list[dict], field: str, gold: str, baseline: set) -> dict:
    if not preds:
        return {}
    system = [(p[field], set(getattr(p["case"], gold))) for p in preds]
    base = [(set(baseline), set(getattr(p["case"], gold))) for p in preds]
    cases = [{"synset": p["case"].synset, "predicted": sorted(p[field]),
              "gold": sorted(getattr(p["case"], gold)), "status": p["status"]} for p in preds]
    return {"system": aggregate(system), "baseline": aggregate(base), "cases": cases}


def ablate_roles(resource: Resource, corpus: Corpus, cases: Sequence[AblationCase]) -> dict:
    return _report(_predictions(resource, corpus, cases), "roles", "gold_roles", BASELINE_ROLES)


def ablate_templates(resource: Resource, corpus: Corpus, cases: Sequence[AblationCase]) -> dict:
    for case in cases:
        if not shared_items(case, resource, corpus):
            raise InvalidCase("synset shares no lexicon item with its mapped type",
                              key=case.synset)
    return _report(_predictions(resource, corpus, cases), "templates", "gold_templates",
                   {BASELINE_TEMPLATE})


# ---------------------------------------------------------------------------
# Similarity


@dataclass(frozen=True)
class SimJudgement:
    word1: str
    word2: str
    score: float


def load_judgements(path: str | Path) -> list[SimJudgement]:
    """Tab-separated ``word1 word2 score`` lines; a non-numeric first row is a header."""
    out = []
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    for n, line in enumerate(lines, 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 3:
            raise ResourceError(f"line {n}: expected three tab-separated fields", source=str(path))
        try:
            score = float(parts[2])
        except ValueError:
            if n == 1:
                continue
            raise ResourceError(f"line {n}: bad score {parts[2]!r}", source=str(path)) from None
        if not math.isfinite(score):
            raise ResourceError(f"line {n}: score is not finite", source=str(path))
        out.append(SimJudgement(parts[0].strip(), parts[1].strip(), score))
    return out


def sim_eval(hierarchy: Hierarchy, judgements: Sequence[SimJudgement]) -> dict:
    system, human, skipped, pairs = [], [], [], []
    for j in judgements:
        try:
            score, pair = hierarchy.word_similarity(j.word1, j.word2)
        except Unresolvable:
            skipped.append([j.word1, j.word2])
            continue
        system.append(score)
        human.append(j.score)
        pairs.append({"word1": j.word1, "word2": j.word2, "human": j.score,
                      "wup": round(score, 6), "senses": list(pair)})
    rho = spearman(system, human) if len(system) >= 2 else None
    return {"rho": None if rho is None else round(rho, 6), "pairs": pairs,
            "used": len(system), "excluded": len(skipped), "unresolved": skipped}
