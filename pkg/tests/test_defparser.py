import pytest

from verblex.corpus import Token
from verblex.defparser import NoParse, UnknownToken, parse_definition, parse_text
from verblex.mapping import Hierarchy
from verblex.resource_io import resource_from_records


def only(graphs):
    assert len(graphs) == 1
    return graphs[0]


def test_cause_to_die(seed):
    g = only(parse_text("cause to die", seed))
    assert g.render() == (
        "(F X2 (:* ONT::CAUSE-EFFECT W::CAUSE) :AGENT X1 :FORMAL X4)\n"
        "  (IMPRO X1 ONT::REFERENTIAL-SEM)\n"
        "  (IMPRO X3 ONT::REFERENTIAL-SEM)\n"
        "  (F X4 (:* ONT::DIE W::DIE) :AFFECTED X3)")
    assert [n.id for n in g.impros()] == ["X1", "X3"]
    assert [e.label for e in g.paths()["X3"]] == ["FORMAL", "AFFECTED"]


def test_modifiers_and_comparatives(seed):
    g = only(parse_text("eat an early morning meal", seed))
    meal = g.node("X3")
    assert (meal.indicator, meal.type, meal.det) == ("TERM", "ONT::MEAL", "an")
    assert [e.label for e in g.out_edges("X3")] == ["MOD", "MOD"]
    g = only(parse_text("be heavier than", seed))
    assert [(e.label, e.dst) for e in g.out_edges("X3")] == [("COMPAR", "X4")]


def test_stranded_preposition_leaves_gap(seed):
    g = only(parse_text("bind the arms of", seed))
    assert g.node("X2").type == "ONT::CONFINE"
    assert [(e.label, g.node(e.dst).indicator) for e in g.out_edges("X3")] == [("FIGURE", "IMPRO")]


@pytest.mark.parametrize("gloss, node, mark", [
    ("drink wine", "X3", "INDEF-NOUN"),
    ("prevent (food) from rotting", "X3", "PARENTHETICAL"),
    ("set or ask for a certain price", None, "CERTAIN-MARKED"),
    ("take something or somebody with oneself somewhere", None, "INDEF-PRONOUN"),
])
def test_surface_marks(seed, gloss, node, mark):
    g = parse_text(gloss, seed)[0]
    if node:
        assert mark in g.node(node).marks
    else:
        assert any(mark in n.marks for n in g.nodes)


def test_parenthetical_not_indefinite(seed):
    g = parse_text("send (money) in payment", seed)[0]
    money = [n for n in g.nodes if n.word == "money"][0]
    assert money.marks == frozenset({"PARENTHETICAL"})


def test_character_offsets(seed):
    g = only(parse_text("eat an early morning meal", seed))
    start, end = g.char_offsets("X3")
    assert "eat an early morning meal"[start:end] == "an early morning meal"
    assert g.char_offsets("X2") == (0, 25)


def test_unknown_token_position(seed):
    with pytest.raises(UnknownToken) as info:
        parse_text("eat zzyzx quickly", seed)
    assert (info.value.token, info.value.index, info.value.offset) == ("zzyzx", 1, 4)


def test_empty_gloss(seed):
    with pytest.raises(NoParse):
        parse_definition([Token(" ")], seed)


def test_no_covering_analysis(seed):
    with pytest.raises(NoParse):
        parse_text("quickly the", seed)


def test_context_prefers_expected_gaps(seed):
    plain = parse_text("eat quickly", seed)
    assert len(plain[0].impros()) == 1
    ctx = parse_text("eat quickly", seed, context={"AGENT", "AFFECTED"})
    assert len(ctx[0].impros()) == 2
    assert {g.render() for g in plain} == {g.render() for g in ctx}


def test_gloss_tag_outranks_depth(seed_records, corpus):
    for e in seed_records["lexicon.json"]:
        if (e["word"], e["pos"]) == ("drink", "v"):
            e["senses"].append({"type": "ONT::CAUSE-EFFECT",
                                "templates": ["AGENT-AFFECTED-XP-TEMPL"]})
    r = resource_from_records(seed_records)
    h = Hierarchy(r, corpus)
    untagged = parse_text("drink wine", r, h)
    assert [g.node(g.root).type for g in untagged] == ["ONT::CAUSE-EFFECT", "ONT::DRINKING"]
    tagged = parse_text("drink%2:34:00:: wine", r, h)
    assert [g.node(g.root).type for g in tagged] == ["ONT::DRINKING", "ONT::CAUSE-EFFECT"]
    assert tagged[0].node(tagged[0].root).sense == "drink%2:34:00::"


def test_tag_supplies_missing_word(seed, hierarchy):
    with pytest.raises(UnknownToken):
        parse_text("gobble quickly", seed, hierarchy)
    g = parse_text("gobble%2:34:00:: quickly", seed, hierarchy)[0]
    assert g.node(g.root).type == "ONT::CONSUME"


def test_ranking_is_total_and_stable(seed):
    a = parse_text("rub hard or scrub", seed)
    b = parse_text("rub hard or scrub", seed)
    assert [g.render() for g in a] == [g.render() for g in b]
    assert [g.score for g in a] == sorted(g.score for g in a)
    assert len({g.render() for g in a}) == len(a)
