import copy
import json

import pytest

from verblex.cli import data_path
from verblex.corpus import Corpus, Synset, Token
from verblex.learner import bootstrap
from verblex.mapping import Hierarchy
from verblex.resource_io import (load_corpus, load_resource, resource_from_records,
                                 resource_records)


@pytest.fixture(scope="session")
def seed():
    return load_resource(data_path("seed"))


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(data_path("corpus.json"))


@pytest.fixture(scope="session")
def hierarchy(seed, corpus):
    return Hierarchy(seed, corpus)


@pytest.fixture(scope="session")
def built(seed, corpus):
    return bootstrap(corpus, seed, max_iterations=3)


@pytest.fixture()
def seed_records(seed):
    """Editable copy of the seed's JSON records."""
    return copy.deepcopy(resource_records(seed))


def tiny_records(types, roles=("AGENT", "AFFECTED"), mappings=()):
    """Records for a bare resource: ``types`` is a list of (name, parent)."""
    return {
        "vocabulary.json": {"features": {"LIVING": ["+", "-"]}, "bare": [],
                            "roles": list(roles), "core_roles": list(roles),
                            "impro_type": types[0][0]},
        "ontology.json": [{"name": n, "parent": p} for n, p in types],
        "lexicon.json": [], "templates.json": [], "axioms.json": [],
        "mappings.json": [{"synset": s, "type": t} for s, t in mappings],
        "skeleton_rules.json": [], "phrase_rules.json": [],
    }


def tiny_resource(types, **kw):
    return resource_from_records(tiny_records(types, **kw))


def synset(sid, senses, gloss="", hypernyms=(), tags=None):
    tagged = ()
    if tags:
        tagged = tuple(Token(w, tags.get(w)) for w in gloss.split())
    return Synset(sid, tuple(senses), gloss, tagged, tuple(hypernyms))


def corpus_of(*synsets):
    return Corpus.of(synsets)


def dumps(obj):
    return json.dumps(obj, sort_keys=True)
