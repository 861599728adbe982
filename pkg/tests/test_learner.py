import dataclasses

import pytest

from conftest import corpus_of, dumps, synset
from verblex.corpus import Corpus
from verblex.defparser import IMPRO, LFEdge, LFGraph, LFNode, parse_text
from verblex.learner import (InducedConstraints, bootstrap, check_consistency, classify,
                             derive_templates, generate_axiom, identify_roles,
                             induce_constraints, name_new_type, process_synset)
from verblex.mapping import Hierarchy
from verblex.model import FeatureSet, RoleSpec
from verblex.resource_io import resource_records


def run(hierarchy, sid):
    return process_synset(hierarchy.corpus.get(sid), hierarchy)


# synset, induced type, placement, roles, axiom consequent
ROWS = [
    ("kill.v.01", "ONT::KILL", "ONT::KILL", ["AGENT", "AFFECTED"],
     "[CAUSE-EFFECT ?agent [DIE ?affected]]"),
    ("pinion.v.01", "ONT::CONFINE", "ONT::CONFINE", ["AGENT", "AFFECTED"],
     "[AND [CONFINE ?agent ?x1] [EXTERNAL-BODY-PART ?x1 ?affected]]"),
    ("outweigh.v.01", "ONT::EXCEED", "ONT::EXCEED", ["NEUTRAL", "NEUTRAL1"],
     "[HAVE-PROPERTY ?neutral [HEAVY ?neutral1]]"),
    ("approach.v.01", "ONT::MOVE", "ONT::MOVE", ["AGENT", "NEUTRAL"],
     "[MOVE ?agent [TO-LOC ?neutral]]"),
    ("breeze.v.01", "ONT::MOVE", "ONT::MOVE-RAPIDLY", ["AGENT"],
     "[AND [GO-ON ?ev ?agent] [SPEEDY ?ev] [EASY ?ev]]"),
    ("breakfast.v.01", "ONT::CONSUME", "ONT::EAT", ["AGENT"],
     "[AND [EAT ?agent ?x1] [MEAL ?x1] [EARLY ?x1] [TIME-OF-DAY ?x1]]"),
]


@pytest.mark.parametrize("sid, induced, placement, roles, consequent", ROWS)
def test_worked_examples(hierarchy, sid, induced, placement, roles, consequent):
    c = run(hierarchy, sid)
    assert c.accepted, c.reason
    assert (c.induced, c.placement) == (induced, placement)
    assert [r.role for r in c.roles] == roles
    assert c.axiom.render(abbreviate=True).split(" => ")[1] == consequent


def test_kill_affected_preference_from_formal_event(hierarchy):
    c = run(hierarchy, "kill.v.01")
    assert c.new_type == "ONT::KILL-WN23500"
    affected = c.assignment.binding("AFFECTED")
    assert (affected.rule, affected.evidence) == ("formal-event-core-gap", "IMPRO")
    assert c.roles[1].features.as_dict() == {"LIVING": "+"}


def test_marked_nouns_restrict(hierarchy):
    port = run(hierarchy, "port.v.01")
    assert port.assignment.binding("AFFECTED").evidence == "INDEF-NOUN"
    assert port.roles[1].restriction == "ONT::ALCOHOL"
    remit = run(hierarchy, "remit.v.01")
    assert remit.roles[1].restriction == "ONT::MONEY"


def test_coordinated_gaps_bind_once(hierarchy):
    c = run(hierarchy, "abrade.v.01")
    assert [(b.role, b.nodes) for b in c.assignment.bindings] == [
        ("AGENT", ("X2", "X6")), ("AFFECTED", ("X4", "X8"))]
    assert c.axiom.render(abbreviate=True).split(" => ")[1] == (
        "[OR [AND [RUB-SCRAPE-WIPE ?ev ?agent ?affected] [INTENSE ?ev]] "
        "[RUB-SCRAPE-WIPE ?agent ?affected]]")


def test_stative_definition_rejected(hierarchy):
    c = run(hierarchy, "ask.v.05")
    assert (c.status, c.reason, c.definition) == ("rejected", "STATIVE-DEFINITION", "ONT::BELIEVE")


def with_extra(seed, corpus, *extra):
    return Hierarchy(seed, Corpus.of(list(corpus.synsets.values()) + list(extra)))


def test_rejection_reasons_from_glosses(seed, corpus):
    extra = [
        synset("zoom.v.01", ["zoom%2:38:00::"], "eat quickly", ["travel.v.01"]),
        synset("orphan.v.01", ["orphan%2:30:00::"], "eat quickly"),
        synset("gulp.v.01", ["gulp%2:34:00::"], "eat zzyzx", ["have.v.01"]),
        synset("dine.v.01", ["dine%2:34:00::"], "eat with", ["have.v.01"]),
    ]
    h = with_extra(seed, corpus, *extra)
    assert [run(h, s.id).reason for s in extra] == [
        "INCOMPARABLE-PLACEMENT", "NO-MAPPING", "NO-PARSE", "NO-PARSE"]
    assert "zzyzx" in run(h, "gulp.v.01").detail


def test_later_definition_can_win(seed, corpus):
    h = with_extra(seed, corpus,
                   synset("nibble.v.01", ["nibble%2:34:00::"], "zzyzx; eat quickly", ["have.v.01"]))
    c = run(h, "nibble.v.01")
    assert c.accepted and c.gloss == "eat quickly"
    assert c.other_definitions == (("zzyzx", "NO-PARSE"),)


def graph(nodes, edges):
    return LFGraph(tuple(nodes), tuple(LFEdge(*e) for e in edges), nodes[0].id)


def gap(nid):
    return LFNode(nid, IMPRO, "ONT::REFERENTIAL-SEM")


def test_gap_outside_skeleton_is_unmatched(seed):
    g = graph([LFNode("X2", "F", "ONT::EAT", "eat", "V"), gap("X1"),
               LFNode("X3", "F", "ONT::SPEEDY", "quickly", "ADV"), gap("X4")],
              [("X2", "X1", "AGENT"), ("X2", "X3", "MOD"), ("X3", "X4", "FIGURE")])
    a = identify_roles(g, seed)
    assert a.roles == ["AGENT"] and a.unmatched == ("X4",)


def test_duplicate_role_conflict(seed):
    g = graph([LFNode("X2", "F", "ONT::CAUSE-EFFECT", "cause", "V"), gap("X1"),
               LFNode("X3", "F", "ONT::DIE", "die", "V"), gap("X4"), gap("X5")],
              [("X2", "X1", "AGENT"), ("X2", "X5", "AFFECTED"), ("X2", "X3", "FORMAL"),
               ("X3", "X4", "AFFECTED")])
    a = identify_roles(g, seed)
    assert a.conflicts == ("AFFECTED",)
    assert a.binding("AFFECTED").nodes == ("X4",)


@pytest.fixture()
def kill_case(hierarchy):
    c = run(hierarchy, "kill.v.01")
    return c, induce_constraints("kill.v.01", hierarchy)


def test_consistency_reasons(seed, kill_case):
    c, k = kill_case
    assert check_consistency(c, k, seed) == ("accepted", None)
    extra = c.roles + (RoleSpec("RESULT"),)
    assert check_consistency(dataclasses.replace(c, roles=extra), k, seed)[1] == "ROLE-MISMATCH"
    dead = (c.roles[0], RoleSpec("AFFECTED", FeatureSet.of([("LIVING", "-")])))
    assert check_consistency(dataclasses.replace(c, roles=dead), k, seed)[1] == "PREFERENCE-CONFLICT"
    assert check_consistency(dataclasses.replace(c, templates=()), k, seed)[1] == "NO-TEMPLATES"
    moved = dataclasses.replace(c, placement="ONT::MOVE")
    assert check_consistency(moved, k, seed)[1] == "INCOMPARABLE-PLACEMENT"


def test_consistency_order(seed, kill_case):
    c, k = kill_case
    bad = dataclasses.replace(c, definition="ONT::BELIEVE", templates=(),
                              roles=c.roles + (RoleSpec("RESULT"),))
    assert check_consistency(bad, k, seed)[1] == "STATIVE-DEFINITION"
    bad = dataclasses.replace(bad, definition="ONT::CAUSE-EFFECT")
    assert check_consistency(bad, k, seed)[1] == "ROLE-MISMATCH"


def test_template_filter_and_backoff(seed):
    k = InducedConstraints("ONT::KILL", (), ("AGENT-AFFECTED-XP-TEMPL", "AGENT-TEMPL",
                                             "AGENT-RESULT-TEMPL"))
    kept = derive_templates({"AGENT"}, k, seed)
    assert kept and set(kept) <= set(k.candidate_templates)
    assert all(seed.templates[t].required_roles <= {"AGENT"} for t in kept)
    empty = InducedConstraints("ONT::EXCEED", (), ())
    assert derive_templates({"NEUTRAL", "NEUTRAL1"}, empty, seed) == ("NEUTRAL-NEUTRAL1-TEMPL",)
    assert derive_templates({"RESULT"}, empty, seed) == ()


def test_classify_uses_phrase_rule(seed, hierarchy):
    g = parse_text("to proceed quickly and easily", seed)[0]
    k = induce_constraints("breeze.v.01", hierarchy)
    assert classify(g, k, seed) == "ONT::MOVE-RAPIDLY"
    g = parse_text("move towards", seed)[0]
    assert classify(g, k, seed) == "ONT::MOVE"


def test_axiom_binds_roles_and_quantifies_rest(seed):
    g = parse_text("eat a meal", seed)[0]
    ax = generate_axiom(g, identify_roles(g, seed), "ONT::NEW", seed)
    assert ax.render(abbreviate=True) == "[NEW ?agent] => [AND [EAT ?agent ?x1] [MEAL ?x1]]"
    assert ax.existentials == ("x1",)
    ax.check_closed()


def test_naming():
    assert name_new_type(("shackle%2:35:00::", "pinion%2:35:00::")) == "ONT::PINION-WN23500"
    taken = {"ONT::PINION-WN23500"}
    assert name_new_type(("pinion%2:35:00::",), taken) == "ONT::PINION-WN23500-2"
    taken.add("ONT::PINION-WN23500-2")
    assert name_new_type(("pinion%2:35:00::",), taken) == "ONT::PINION-WN23500-3"


# -- bootstrapping -----------------------------------------------------------

def test_empty_corpus_changes_nothing(seed):
    built, report = bootstrap(corpus_of(), seed)
    assert dumps(resource_records(built)) == dumps(resource_records(seed))
    assert report.totals()["processed"] == 0 and report.iterations == []


def test_bootstrap_totals(built):
    _, report = built
    t = report.totals()
    assert (t["processed"], t["accepted"], t["rejected"], t["new_types"]) == (34, 33, 1, 32)
    assert t["rejected_by_reason"] == {"STATIVE-DEFINITION": 1}


def test_later_iteration_uses_earlier_types(seed, corpus, built):
    _, report = built
    assert report.incorporated["devour.v.01"] == {
        "iteration": 2, "type": "ONT::DEVOUR-WN23400", "parent": "ONT::GOBBLE-WN23400",
        "senses": ["devour%2:34:00::"]}
    _, once = bootstrap(corpus, seed, max_iterations=1)
    assert once.rejected["devour.v.01"]["reason"] == "NO-PARSE"


def test_equivalent_synsets_share_a_type(built):
    resource, report = built
    assert report.incorporated["port.v.01"]["type"] == report.incorporated["wine.v.01"]["type"]
    t = resource.get("ONT::CLARET-WN23400")
    assert t.synsets == ("claret%2:34:00::", "port%2:34:00::", "wine%2:34:00::")
    for word in ("claret", "port", "wine"):
        assert resource.entry(word, "v").senses[0].type == t.id


def test_bootstrap_only_adds(seed, built):
    resource, _ = built
    for tid, t in seed.ontology.items():
        assert resource.get(tid).parent == t.parent
    for key, entry in seed.lexicon.items():
        assert set(entry.senses) <= set(resource.lexicon[key].senses)
    assert set(seed.axioms) <= set(resource.axioms)
    for t in resource.ontology.values():
        if t.id not in seed.ontology:
            assert t.provenance.kind == "derived" and t.synsets


def test_parallel_build_identical(seed, corpus, built):
    resource, report = built
    par, par_report = bootstrap(corpus, seed, max_iterations=3, jobs=4)
    assert dumps(resource_records(par)) == dumps(resource_records(resource))
    assert dumps(par_report.as_dict()) == dumps(report.as_dict())
