import pytest

from indescent.parser import parse_system, print_system
from indescent.sexpr import ParseError, read_all
from indescent.system import Theory, ValidationError


def test_reads_nested_lists_and_comments():
    forms = read_all("; comment\n(a (b c) d) ; trailing\n(e)")
    assert len(forms) == 2


def test_unbalanced_input_reports_position():
    with pytest.raises(ParseError) as e:
        read_all("(theory herbrand))")
    assert e.value.line == 1
    with pytest.raises(ParseError):
        read_all("(theory herbrand")


def test_example_system_shape(fol):
    assert fol.theory is Theory.HERBRAND
    assert len(fol.all_rules()) == 11
    assert [str(q) for q in fol.queries] == ["p ⊨ q"]


def test_disjunction_is_split_into_rules():
    text = """
    (theory herbrand) (sort T) (fun a () T) (fun b () T)
    (pred p (T))
    (rule (p (x)) (constraint (or (= x a) (= x b))))
    """
    s = parse_system(text)
    assert len(s.rules_of("p")) == 2


def test_roundtrip_preserves_structure(fol, sl):
    for s in (fol, sl):
        again = parse_system(print_system(s))
        assert print_system(again) == print_system(s)
        assert [str(r) for r in again.all_rules()] == [str(r) for r in s.all_rules()]
        assert again.queries == s.queries


@pytest.mark.parametrize(
    "body, msg",
    [
        ("(rule (p (x)) (constraint (= x (g x))))", "g"),
        ("(rule (p (x)) (constraint (= x a)) (subgoals ((r x))))", "r"),
        ("(rule (p (x y)) (constraint (= x a)))", ""),
    ],
)
def test_bad_rules_are_rejected(body, msg):
    text = "(theory herbrand) (sort T) (fun a () T) (pred p (T)) " + body
    with pytest.raises((ParseError, ValidationError)) as e:
        parse_system(text)
    assert msg in str(e.value)


def test_unknown_form():
    with pytest.raises((ParseError, ValidationError)):
        parse_system("(theory herbrand) (frobnicate)")


def test_sl_constraint_forms(sl):
    lsp = sl.rules_of("lsp")
    assert lsp[0].constraint.cells and not lsp[0].subgoals
    lse = sl.rules_of("lse")
    assert lse[0].constraint.is_emp()
