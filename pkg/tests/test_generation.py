import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force_separate, nested_loop_alignment, rightmost_path
from taxoforge.corpus import parse_page
from taxoforge.generation import (
    ABSTRACT, BRACKET, INFOBOX, TAG, CandidateRelation, LookupGenerator, abstract_extract,
    bracket_extract, build_ds_dataset, discover_predicates, extract_hypernyms, infobox_extract,
    merge_candidates, read_candidates, relation, separate, tag_extract, write_candidates,
)
from taxoforge.segstats import Dictionary, build_pmi_table


def table_scorer(scores):
    return lambda a, b: scores.get((a, b), 0.0)


def test_separate_running_example():
    # 中国 香港 男 演员: (男,演员) strongest, then 香港 attaches, then 中国
    score = table_scorer({("男", "演员"): 5.0, ("香港", "男"): 1.0,
                          ("香港", "男演员"): 3.0, ("中国", "香港男演员"): 0.5, ("中国", "香港"): 0.1})
    tree = separate(["中国", "香港", "男", "演员"], score)
    assert tree.bracketing() == ("中国", ("香港", ("男", "演员")))
    assert extract_hypernyms(tree) == ["香港男演员", "男演员", "演员"]


def test_separate_single_and_pair():
    assert separate(["演员"], table_scorer({})).bracketing() == "演员"
    assert extract_hypernyms(separate(["演员"], table_scorer({}))) == ["演员"]
    tree = separate(["male", "actor"], table_scorer({}))
    assert tree.bracketing() == ("male", "actor")
    assert extract_hypernyms(tree) == ["actor"]


def test_separate_rejects_empty():
    with pytest.raises(ValueError):
        separate([], table_scorer({}))


def test_all_ties_fall_back_leftmost():
    assert separate(list("abcd"), table_scorer({})).bracketing() == ((("a", "b"), "c"), "d")


@given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=7), st.randoms(use_true_random=False))
@settings(max_examples=300)
def test_separate_matches_brute_force(words, rnd):
    scores = {(a, b): rnd.choice([0.0, 0.5, 1.0, 2.0, rnd.random()])
              for a, b in itertools.product("abcde", repeat=2)}

    def score(a, b):
        # merged strings score by their boundary characters
        return scores[(a[-1], b[0])] + 0.01 * (len(a) + len(b))

    tree = separate(words, score)
    expected = brute_force_separate(words, score)
    assert tree.bracketing() == expected
    assert tree.leaves() == words
    assert extract_hypernyms(tree) == rightmost_path(expected)


@given(st.lists(st.sampled_from(["中国", "香港", "男", "演员", "歌手"]), min_size=1, max_size=8))
def test_separation_tree_invariants(words):
    t = build_pmi_table([["中国", "香港", "男", "演员"], ["香港", "男", "歌手"], ["男", "演员"]])
    tree = separate(words, t)
    assert tree.leaves() == words
    assert tree.text == "".join(words)
    hyps = extract_hypernyms(tree)
    assert hyps[-1] == words[-1]
    assert all(h.endswith(words[-1]) for h in hyps)


def test_bracket_extract():
    d = Dictionary.from_words(["中国", "香港", "男", "演员"])
    t = build_pmi_table([["男", "演员"]] * 5 + [["香港", "男", "演员"]] * 2 + [["中国", "香港"]])
    page = parse_page({"title": "刘德华（中国香港男演员）"})
    got = bracket_extract(page, t, d)
    assert [r.hypernym for r in got][-1] == "演员"
    assert all(r.sources == {BRACKET} and r.hyponym == "刘德华" for r in got)
    assert bracket_extract(parse_page({"title": "刘德华"}), t, d) == []


def test_infobox_and_tag_extract():
    page = parse_page({"title": "Dehua Liu (singer)", "infobox": {"occupation": "actor", "born": "1961"},
                       "tags": ["person", "Dehua Liu"]})
    assert infobox_extract(page, {"occupation"}) == [relation("Dehua Liu", "actor", INFOBOX)]
    assert infobox_extract(page, set()) == []
    assert tag_extract(page) == [relation("Dehua Liu", "person", TAG)]


def test_abstract_extract_with_lookup_and_failure():
    page = parse_page({"title": "Dehua Liu", "abstract": "A Hong Kong singer."})
    gen = LookupGenerator([("A Hong Kong singer.", "singer"), ("A Hong Kong singer.", "singer")])
    assert abstract_extract(page, gen) == [relation("Dehua Liu", "singer", ABSTRACT)]
    assert abstract_extract(page) == []

    def boom(_):
        raise RuntimeError("model down")
    assert abstract_extract(page, boom) == []


def test_build_ds_dataset():
    pages = {"x": parse_page({"title": "x", "abstract": "x is a y."}), "z": parse_page({"title": "z"})}
    rels = [relation("x", "y", BRACKET), relation("z", "w", BRACKET), relation("q", "y", BRACKET)]
    assert build_ds_dataset(rels, pages) == [("x is a y.", "y")]


def test_merge_unions_sources_and_dedups():
    merged = merge_candidates([relation("a", "b", TAG), relation("a", "c", TAG)],
                              [relation("a", "b", INFOBOX)])
    assert merged == [relation("a", "b", INFOBOX, TAG), relation("a", "c", TAG)]


def test_candidate_invariants():
    with pytest.raises(ValueError):
        relation("a", "a", TAG)
    with pytest.raises(ValueError):
        CandidateRelation("a", "b", frozenset())
    with pytest.raises(ValueError):
        CandidateRelation("a", "b", frozenset({TAG}), "filtered")
    rel = relation("a", "b", TAG).filtered("head-stem")
    assert rel.status == "filtered" and rel.filter_reason == "head-stem"
    with pytest.raises(ValueError):
        relation("a", "b", TAG).filtered("bogus")


def test_candidate_file_roundtrip(tmp_path):
    rels = [relation("a", "b", TAG, BRACKET), relation("中国", "国家", INFOBOX).filtered("ne-support")]
    write_candidates(tmp_path / "c.tsv", rels)
    assert read_candidates(tmp_path / "c.tsv") == rels


def test_discover_predicates_matches_oracle():
    rnd = random.Random(3)
    names = [f"e{i}" for i in range(30)]
    concepts = ["singer", "actor", "city", "fruit"]
    preds = ["occupation", "born", "genre", "type"]
    pages = []
    triples = []
    for n in names:
        info = {p: rnd.choice(concepts + ["1961", "pop"]) for p in rnd.sample(preds, 3)}
        pages.append(parse_page({"title": n, "infobox": info}))
        triples += [(t.subject, t.predicate, t.object) for t in pages[-1].triples]
    known = [relation(n, c, BRACKET) for n in names for c in concepts if rnd.random() < 0.4]
    got = [(p.predicate, p.alignment_count) for p in discover_predicates(known, pages)]
    assert got == nested_loop_alignment([r.pair for r in known], triples)
