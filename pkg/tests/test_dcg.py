import random
import re

import pytest

from llmlogic.dcg import (DRIVER, DCGGrammar, QATreeError, build_qatree, clean_text,
                          generate_language, read_dcg, render_dcg, tree_to_dcg)
from llmlogic.oracles import ReplayOracle, ScriptedOracle

from helpers import count_paths

Q0 = "How constructive negation works in logic and constraint programming?"
RULE = re.compile(r"^q\d+-->q\d+_,a\d+_(,q\d+)?\.$")


@pytest.fixture
def session(fixtures):
    oracle = ReplayOracle.from_file(fixtures / "constructive_negation_replay.json")
    return build_qatree(Q0, 2, oracle)


def test_rule_shapes(session):
    text = render_dcg(tree_to_dcg(session))
    lines = text.splitlines()
    assert "q0-->q0_,a0_,q1." in lines
    leaves = [l for l in lines if RULE.match(l) and l.count(",") == 1]
    assert leaves and all(re.fullmatch(r"q(\d+)-->q\1_,a\d+_\.", l) for l in leaves)
    assert lines[-1] == DRIVER
    assert any(l.startswith("opens(") for l in lines)
    assert lines[0] == ":-dynamic(opens/2)."


def test_opens_counted_across_branches(session):
    g = tree_to_dcg(session)
    assert sorted(g.opens.values()) == [1, 1, 2]
    assert "opens('What specific computational techniques can be employed to further " \
           "optimize the solver_s performance when using constructive negation in " \
           "scheduling?',2)." in render_dcg(g)


def test_loop_and_repeat_handling(session):
    assert session.dropped_questions == [Q0]
    assert [q for q, _ in session.repeated_answers] == [
        "Is constructive negation the same thing as negation as failure?"]


def test_answers_cleaned(session):
    g = tree_to_dcg(session)
    assert all("\n" not in a and "  " not in a for a in g.answers.values())


def test_language(session):
    g = tree_to_dcg(session)
    sents = generate_language(g)
    assert len(sents) == 2
    assert all(s[0] == "Q: " + Q0 for s in sents)
    assert all(len(s) == 4 for s in sents)


def test_read_roundtrip(session):
    g = tree_to_dcg(session)
    back = read_dcg(render_dcg(g))
    assert back.rules == g.rules and back.questions == g.questions
    assert back.answers == g.answers and back.opens == g.opens
    assert back.repeated_answers == g.repeated_answers


def test_depth_zero():
    t = build_qatree("  what?  ", 0, ScriptedOracle({}))
    g = tree_to_dcg(t)
    assert g.rules == [] and g.opens == {"what?": 1}
    assert generate_language(g) == []
    assert render_dcg(g).splitlines()[-1] == DRIVER


def test_depth_one_leaf():
    o = ScriptedOracle({("answer", "q"): "a", ("followups", "q"): "- f1\n- f2"})
    g = tree_to_dcg(build_qatree("q", 1, o))
    assert g.rules == [(0, 0, None)]
    assert g.opens == {"f1": 1, "f2": 1}


def test_shared_answer_index():
    o = ScriptedOracle({("answer", "q"): "a", ("followups", "q"): "- x\n- y",
                        ("answer", "x"): "same", ("answer", "y"): "same",
                        ("followups", "x"): "- o1", ("followups", "y"): "- o2"})
    g = tree_to_dcg(build_qatree("q", 2, o))
    assert g.rules == [(0, 0, 1), (0, 0, 2), (1, 1, None), (2, 1, None)]


def test_oracle_failure():
    with pytest.raises(QATreeError):
        build_qatree("q", 2, ScriptedOracle({("answer", "q"): "a"}))


def test_clean_text():
    assert clean_text(" a\n  b\tc ") == "a b c"


def test_read_rejects_garbage():
    with pytest.raises(ValueError):
        read_dcg("q0-->q1_,a0_.\n")
    with pytest.raises(ValueError):
        read_dcg("hello.\n")


def test_quoting_roundtrip():
    g = DCGGrammar(rules=[(0, 0, None)], questions={0: "it's \\ odd?"}, answers={0: "don't"},
                   opens={"why's that?": 3})
    back = read_dcg(render_dcg(g))
    assert back.questions == g.questions and back.answers == g.answers and back.opens == g.opens


def test_cycle_detected():
    g = DCGGrammar(rules=[(0, 0, 1), (1, 0, 0)], questions={0: "a", 1: "b"}, answers={0: "x"})
    with pytest.raises(ValueError, match="cyclic"):
        generate_language(g)


def random_dag(rng):
    n = rng.randint(1, 9)
    g = DCGGrammar(questions={i: f"q{i}" for i in range(n)},
                   answers={j: f"a{j}" for j in range(4)})
    for i in range(n):
        targets = [k for k in range(i + 1, n) if rng.random() < 0.4]
        if not targets or rng.random() < 0.2:
            g.rules.append((i, rng.randrange(4), None))
        g.rules.extend((i, rng.randrange(4), k) for k in targets)
    return g


@pytest.mark.parametrize("seed", range(200))
def test_sentence_count_matches_paths(seed):
    g = random_dag(random.Random(seed))
    sents = generate_language(g)
    assert len(sents) == count_paths(g.successors(), 0)
    # every sentence alternates question and answer terminals
    for s in sents:
        assert all(x.startswith("Q: ") for x in s[0::2])
        assert all(x.startswith("A: ") for x in s[1::2])
    # the rendered grammar reads back to the same language
    assert generate_language(read_dcg(render_dcg(g))) == sents


def test_linear_chain_one_sentence():
    o = ScriptedOracle({("answer", "q"): "a", ("followups", "q"): "- r",
                        ("answer", "r"): "b", ("followups", "r"): "- s",
                        ("answer", "s"): "c", ("followups", "s"): "- t"})
    sents = generate_language(tree_to_dcg(build_qatree("q", 3, o)))
    assert sents == [["Q: q", "A: a", "Q: r", "A: b", "Q: s", "A: c"]]


def random_session(rng):
    """Scripted follow-up session over a small vocabulary, so answers collide."""
    questions = [f"question {i}" for i in range(12)]
    answers = [f"answer {i}" for i in range(5)]
    script = {}
    for q in questions:
        script[("answer", q)] = rng.choice(answers)
        script[("followups", q)] = "\n".join(f"- {x}" for x in rng.sample(questions, rng.randint(0, 3)))
    return script


@pytest.mark.parametrize("seed", range(100))
def test_path_answers_unique(seed):
    rng = random.Random(seed)
    script = random_session(rng)
    t = build_qatree("question 0", rng.randint(1, 4), ScriptedOracle(script))
    g = tree_to_dcg(t)
    for s in generate_language(g):
        answers = s[1::2]
        assert len(answers) == len(set(answers))
        questions = s[0::2]
        assert len(questions) == len(set(questions))
    assert len(generate_language(g)) == count_paths(g.successors(), 0)
