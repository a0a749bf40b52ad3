import pytest

from dsnlg.generator import GenerationSession, tree_licenses
from dsnlg.parser import parse_utterance
from dsnlg.repair import (
    BACKWARD, FORWARD, NONE, RevisionEvent, classify_revision, generate_with_revisions,
    strip_repair,
)
from dsnlg.ttr import EMPTY, equivalent, parse_rt

from conftest import JOHN_PREFIX


@pytest.fixture
def goal_today(corpus):
    return next(e.goal for e in corpus if e.tokens == ["john", "arrives", "today"])


def resume_oracle(dag, goal, old_spine):
    """Deepest vertex on the old spine that still licenses ``goal``."""
    for vid in reversed(old_spine):
        v = dag.vertex(vid)
        if tree_licenses(v.tree, v.r_cur, goal):
            return vid
    return None


def test_classify_examples(goal_john, goal_mary, goal_today):
    prefix = parse_rt(JOHN_PREFIX)
    assert classify_revision(prefix, goal_today) == FORWARD
    assert classify_revision(prefix, goal_mary) == BACKWARD
    assert classify_revision(EMPTY, goal_mary) == FORWARD
    assert classify_revision(goal_john, goal_today, complete=True) == FORWARD
    assert classify_revision(goal_today, goal_john, complete=True) == BACKWARD


def test_revision_index_nonnegative(goal_mary):
    with pytest.raises(ValueError):
        RevisionEvent(-1, goal_mary)


def test_backward_example(model, lexicon, goal_john, goal_mary):
    out = generate_with_revisions(model, lexicon, goal_john, [RevisionEvent(1, goal_mary)])
    assert out.surface == "john uh I mean mary arrives".split()
    assert out.clean == ["mary", "arrives"]
    assert out.kind == BACKWARD and out.backtrack_depth == 1
    assert out.repaired_edges == 1 and out.interregnum_count == 1
    assert out.annotated == "⟦john⟧ ⟨uh I mean⟩ mary arrives"
    assert strip_repair(out.annotated) == out.clean


def test_forward_example(model, lexicon, goal_john, goal_today):
    out = generate_with_revisions(model, lexicon, goal_john, [RevisionEvent(1, goal_today)])
    assert out.success and out.kind == FORWARD
    assert out.clean == ["john", "arrives", "today"]
    assert out.repaired_edges == 0 and out.interregnum_count == 0
    assert out.surface == out.clean


def test_no_revisions(model, lexicon, goal_john):
    out = generate_with_revisions(model, lexicon, goal_john, [])
    assert out.kind == NONE and out.surface == out.clean == ["john", "arrives"]
    assert out.resumes == []


def test_revision_after_completion(model, lexicon, goal_john, goal_mary):
    out = generate_with_revisions(model, lexicon, goal_john, [RevisionEvent(5, goal_mary)])
    assert out.success and out.clean == ["mary", "arrives"]
    assert out.backtrack_depth == 2 and out.repaired_edges == 2


def test_clean_parses_to_final_goal(model, lexicon, fixture_revisions):
    for spec in fixture_revisions:
        out = generate_with_revisions(model, lexicon, spec.r_g,
                                      [RevisionEvent(spec.index, spec.r_r)])
        assert out.success, spec.utt_r
        assert parse_utterance(out.clean, lexicon).matching(spec.r_r) is not None


def test_minimal_backtracking(model, lexicon, fixture_revisions):
    checked = 0
    for spec in fixture_revisions:
        out = generate_with_revisions(model, lexicon, spec.r_g,
                                      [RevisionEvent(spec.index, spec.r_r)])
        for r in out.resumes:
            assert r.vertex == resume_oracle(out.dag, spec.r_r, r.old_spine)
            assert r.depth == len(r.old_spine) - 1 - r.old_spine.index(r.vertex)
            checked += 1
    assert checked == len(fixture_revisions)


def test_edges_never_disappear(model, lexicon, goal_john, goal_mary):
    s = GenerationSession(model, lexicon, goal_john)
    counts = [len(s.dag.edges)]
    s.step()
    counts.append(len(s.dag.edges))
    s.revise(goal_mary)
    counts.append(len(s.dag.edges))
    s.run()
    counts.append(len(s.dag.edges))
    assert counts == sorted(counts) and counts[-1] == 3


def test_repair_is_deterministic(model, lexicon, goal_john, goal_mary):
    a = generate_with_revisions(model, lexicon, goal_john, [RevisionEvent(1, goal_mary)])
    b = generate_with_revisions(model, lexicon, goal_john, [RevisionEvent(1, goal_mary)])
    assert a == b


def test_custom_interregnum(model, lexicon, goal_john, goal_mary):
    out = generate_with_revisions(model, lexicon, goal_john, [RevisionEvent(1, goal_mary)],
                                  interregnum=["sorry"])
    assert out.surface == ["john", "sorry", "mary", "arrives"]
    assert strip_repair(out.surface, ["sorry"]) == ["mary", "arrives"]


@pytest.mark.parametrize("surface, clean", [
    ("⟦john⟧ ⟨uh I mean⟩ mary arrives", "mary arrives"),
    ("john uh I mean mary arrives", "mary arrives"),
    ("sure enough ten minutes later the bell uh I mean the doorbell rang",
     "sure enough ten minutes later the doorbell rang"),
    ("john arrives", "john arrives"),
    ("", ""),
])
def test_strip_repair(surface, clean):
    assert strip_repair(surface) == clean.split()
    assert strip_repair(surface.split()) == clean.split()


def test_revised_goal_is_reached(model, lexicon, goal_john, goal_mary):
    out = generate_with_revisions(model, lexicon, goal_john, [RevisionEvent(1, goal_mary)])
    tip = out.dag.vertex(out.dag.spine[-1])
    assert equivalent(tip.r_cur, goal_mary)
