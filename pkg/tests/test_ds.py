import pytest

from dsnlg.ds import (
    ARG, E, FUN, T, Abstract, DSTypeError, FunctionType, LexiconSyntaxError, UnknownWordError,
    anticipation, apply_computational, apply_formula, apply_lexical, axiom_tree, beta_reduce,
    completion, introduction_prediction, is_complete, load_grammar, parse_formula,
    parse_semtype, root_semantics,
)
from dsnlg.parser import computational_closure, parse_utterance
from dsnlg.ttr import EMPTY, HEAD, ManifestType, equivalent, parse_rt, subtype

ARRIVES = "lambda r:[head:e].[x=r.head:e, e=arrive:es, p=subj(e,x):t, head=p:t]"
JOHN = "[x=john:e, head=x:e]"
JOHN_ARRIVES_RT = "[x=john:e, e=arrive:es, p=subj(e,x):t, head=p:t]"


def lex_action(lexicon, word):
    (action,) = lexicon.for_word(word)
    return action


def john_tree(lexicon):
    return apply_lexical(introduction_prediction(axiom_tree()), lex_action(lexicon, "john"))


def test_semtypes_parse_and_print():
    assert parse_semtype("e->t") == FunctionType(E, T)
    tv = parse_semtype("e->(e->t)")
    assert str(tv) == "e→e→t"
    assert parse_semtype(str(tv)) == tv
    assert parse_semtype("(e->e)->t") != parse_semtype("e->(e->t)")
    assert parse_semtype("e→t") == FunctionType(E, T)
    with pytest.raises(ValueError):
        parse_semtype("q")


def test_axiom_tree():
    t = axiom_tree()
    assert t.pointed.requirements == {T}
    assert not is_complete(t)
    assert root_semantics(t) == EMPTY


def test_intro_pred_points_at_subject():
    t = introduction_prediction(axiom_tree())
    assert t.pointer == ARG
    assert t.node(ARG).requirements == {E}
    assert t.node(FUN).requirements == {FunctionType(E, T)}


def test_completion_inapplicable_at_root():
    assert completion(axiom_tree()) is None
    assert apply_computational(axiom_tree(), "completion") is None


def test_john_action(lexicon):
    t = john_tree(lexicon)
    n = t.node(ARG)
    assert n.ty == E and n.bottom and not n.requirements
    assert n.formula == parse_rt(JOHN)
    assert root_semantics(t) == parse_rt(JOHN)
    assert not is_complete(t)


def test_john_needs_intro_pred(lexicon):
    assert apply_lexical(axiom_tree(), lex_action(lexicon, "john")) is None


def test_arrives_action_and_beta_reduce(lexicon):
    t = anticipation(completion(john_tree(lexicon)))
    assert t.pointer == FUN
    t = apply_lexical(t, lex_action(lexicon, "arrives"))
    assert t.node(FUN).ty == FunctionType(E, T)
    assert isinstance(t.node(FUN).formula, Abstract)
    t = beta_reduce(completion(t))
    assert t.node("").ty == T
    assert equivalent(t.node("").formula, parse_rt(JOHN_ARRIVES_RT))
    assert is_complete(t)


def test_apply_formula_examples():
    got = apply_formula(parse_formula(ARRIVES), parse_rt(JOHN))
    assert got == parse_rt(JOHN_ARRIVES_RT)
    ident = parse_formula("lambda r:[head:e].[x=r.head:e, head=x:e]")
    assert apply_formula(ident, parse_rt("[x=mary:e, head=x:e]")) == parse_rt("[x=mary:e, head=x:e]")


def test_apply_formula_needs_head():
    with pytest.raises(DSTypeError):
        apply_formula(parse_formula(ARRIVES), parse_rt("[x=john:e]"))


def test_apply_formula_placeholder_argument():
    got = apply_formula(parse_formula(ARRIVES), parse_rt("[head:e]"))
    assert got == parse_rt("[x:e, e=arrive:es, p=subj(e,x):t, head=p:t]")


def test_apply_formula_renames_clashes():
    red = parse_formula("lambda r:[head:e].[x=r.head:e, p=red(x):t, head=x:e]")
    got = apply_formula(red, parse_rt("[x=ball:e, p=big(x):t, head=x:e]"))
    preds = sorted(str(f.type) for f in got.fields if f.label.startswith("p"))
    assert preds == ["=big(x):t", "=red(x):t"]
    assert got[HEAD] == ManifestType("e", "x")


def test_bundled_lexicon(lexicon):
    assert sum(len(v) for v in lexicon.actions.values()) >= 12
    assert lexicon.pos["john"] == "PROPN"
    with pytest.raises(UnknownWordError):
        lexicon.for_word("zebra")


def test_empty_and_bad_lexicon():
    assert load_grammar("# nothing here\n").words == []
    with pytest.raises(LexiconSyntaxError) as info:
        load_grammar("\nword x : trigger=?Ty(q) ; bottom")
    assert info.value.line == 2


def test_lexicon_round_trip(lexicon):
    again = load_grammar(lexicon.dumps())
    assert again.actions == lexicon.actions


def test_actions_do_not_mutate(lexicon):
    t = john_tree(lexicon)
    before = (t.nodes, t.pointer)
    for s in computational_closure(t):
        for w in lexicon.words:
            for a in lexicon.for_word(w):
                apply_lexical(s, a)
    assert (t.nodes, t.pointer) == before


@pytest.mark.parametrize("sentence", [
    "john arrives", "john sees the red ball", "the red dog sees the cat today",
    "bill sees a big cat yesterday",
])
def test_prefix_semantics_are_monotone(lexicon, sentence):
    res = parse_utterance(sentence.split(), lexicon)
    sems = res.prefix_semantics()
    for before, after in zip(sems, sems[1:]):
        assert subtype(after.without(HEAD), before.without(HEAD))
    assert res.grammatical


def test_corpus_gold_matches_parse(lexicon, corpus):
    for e in corpus:
        res = parse_utterance(e.tokens, lexicon)
        assert res.matching(e.goal) is not None, e.tokens


def test_complete_trees_have_manifest_head(lexicon, corpus):
    for e in corpus:
        res = parse_utterance(e.tokens, lexicon)
        for t in computational_closure(res.dag.vertex(res.path[-1]).tree):
            if is_complete(t):
                sem = root_semantics(t)
                assert isinstance(sem[HEAD], ManifestType)
                assert subtype(e.goal, sem) and subtype(sem, e.goal)


def test_modifier_order_changes_semantics(lexicon):
    a = parse_utterance("john sees the red ball".split(), lexicon)
    b = parse_utterance("john sees red the ball".split(), lexicon)
    assert not equivalent(a.prefix_semantics()[-1], b.prefix_semantics()[-1])
