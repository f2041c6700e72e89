import pytest

from soccerevents.dsl import rule_ast as ast
from soccerevents.dsl.builtins import builtin_rules, builtin_source, compile_rules, load_rules
from soccerevents.dsl.compiler import ATOMIC_LEVEL, COMPLEX_LEVEL, MERGED_LEVEL
from soccerevents.dsl.lexer import tokenize
from soccerevents.dsl.parser import parse
from soccerevents.dsl.printer import format_rules
from soccerevents.exception.exception import (CyclicDependency, DataFileNotFound, RuleError, RuleSyntaxError,
                                              TypeMismatch, UnknownEvent, UnknownRole)

BUILTIN_NAMES = [
    "Pass", "Cross", "FilteringPass", "PassThenGoal", "CrossThenGoal", "FilteringPassThenGoal",
    "Tackle", "WonTackle", "LostTackle", "Shot", "ShotOut", "ShotThenGoal", "SavedShot",
]


def test_tokenize_drops_comments_and_tracks_positions():
    tokens = list(tokenize("complex A: merged Tackle as t # note\n  within"))
    assert [t.kind for t in tokens] == ["KEYWORD", "IDENTIFIER", "COLON", "KEYWORD", "IDENTIFIER", "KEYWORD",
                                        "IDENTIFIER", "KEYWORD"]
    assert (tokens[-1].line, tokens[-1].col) == (2, 3)


def test_parse_pattern_and_clauses():
    [rule] = parse("complex LongPass: seq(KickingTheBall as k, merged BallPossession as p) within 90\n"
                   "    lasting 30..90\n"
                   "    where k.KickingPlayer != p.PossessingPlayer\n"
                   "    emit roles {KickingPlayer: k.KickingPlayer}\n")
    assert rule.name == "LongPass"
    assert rule.pattern == ast.Pattern("seq", (ast.EventRef("KickingTheBall", "k"),
                                              ast.EventRef("BallPossession", "p", merged=True)), 90)
    assert rule.lasting == (30, 90)
    assert rule.where == ast.Comparison("!=", ast.RoleRef("k", "KickingPlayer"), ast.RoleRef("p", "PossessingPlayer"))
    assert rule.emit == (("KickingPlayer", ast.RoleRef("k", "KickingPlayer")),)
    assert (rule.line, rule.col) == (1, 1)


def test_condition_precedence():
    [rule] = parse("complex X: Goal as g where not is_goalkeeper(g.Scorer) or g.start > 3 and g.end < 9")
    assert isinstance(rule.where, ast.BoolOp) and rule.where.op == "or"
    left, right = rule.where.operands
    assert isinstance(left, ast.Not)
    assert isinstance(right, ast.BoolOp) and right.op == "and"


def test_syntax_error_lists_expected_tokens():
    with pytest.raises(RuleSyntaxError) as info:
        parse("complex X: seq(KickingTheBall)")
    assert info.value.expected == frozenset(["COMMA"])
    assert (info.value.line, info.value.col) == (1, 30)


def test_syntax_errors():
    with pytest.raises(RuleSyntaxError) as info:
        parse("complex X: Goal @")
    assert info.value.col == 17

    with pytest.raises(RuleSyntaxError) as info:
        parse("complex X: Goal as g lasting 1.5..3")
    assert info.value.expected == frozenset(["integer"])

    with pytest.raises(RuleSyntaxError) as info:
        parse("complex X:")
    assert (info.value.line, info.value.col) == (1, 11)
    assert "end of input" in info.value.diagnostic

    with pytest.raises(RuleSyntaxError) as info:
        parse("complex X: Goal as g stray")
    assert "'where'" in info.value.expected


def test_formatted_rules_parse_back():
    rules = parse(builtin_source())
    assert len(rules) == 13
    assert parse(format_rules(rules)) == rules

    custom = parse("complex X: and(Goal as g, or(BallOut as o, merged Tackle as t)) within 4\n"
                   "  where not (is_goalkeeper(g.Scorer) or distance(g.Scorer, o.OutObject) > 2.5)\n")
    assert parse(format_rules(custom)) == custom


def test_builtin_rules_compile_in_file_order():
    rules = builtin_rules()
    assert rules.names == BUILTIN_NAMES
    assert rules["Pass"].dependencies == ()
    assert rules["Cross"].dependencies == ("Pass",)
    assert rules["SavedShot"].dependencies == ("Shot",)
    assert rules["Pass"].operands["k"].level == ATOMIC_LEVEL
    assert rules["Tackle"].operands["t"].level == MERGED_LEVEL
    assert rules["WonTackle"].operands["c"].level == COMPLEX_LEVEL
    assert rules["Tackle"].roles == ("PossessingPlayer", "TacklingPlayer", "WinningPlayer")
    rules.check_order()
    assert load_rules() is rules


def test_rules_are_ordered_by_dependency():
    rules = compile_rules("complex Late: Early as e\ncomplex Early: Goal as g\n")
    assert rules.names == ["Early", "Late"]


def test_unknown_names():
    with pytest.raises(UnknownEvent) as info:
        compile_rules("complex X: Header as h")
    assert (info.value.name, info.value.line, info.value.col) == ("Header", 1, 12)

    with pytest.raises(UnknownEvent):
        compile_rules("complex X: merged Pass as p")

    with pytest.raises(UnknownRole) as info:
        compile_rules("complex X: KickingTheBall as k emit roles {Player: k.Scorer}")
    assert info.value.role == "Scorer"

    with pytest.raises(UnknownRole):
        compile_rules("complex Shot: KickingTheBall as k emit roles {ShootingPlayer: k.KickingPlayer, "
                      "Keeper: k.KickingPlayer}")


def test_known_event_must_emit_its_roles():
    with pytest.raises(RuleError, match="must emit role ReceivingPlayer"):
        compile_rules("complex Pass: KickingTheBall as k emit roles {KickingPlayer: k.KickingPlayer}")
    rules = compile_rules("complex Sprint: KickingTheBall as k emit roles {Runner: k.KickingPlayer}")
    assert rules["Sprint"].roles == ("Runner",)


@pytest.mark.parametrize("condition", [
    "team(k.KickingPlayer) == 3",
    "k.start < k.KickingPlayer",
    "zone(k.KickingPlayer, 3)",
    "distance(k.KickingPlayer) > 1",
    "is_goalkeeper(k.start)",
])
def test_type_mismatch(condition):
    with pytest.raises(TypeMismatch):
        compile_rules(f"complex X: KickingTheBall as k where {condition}")


def test_time_cannot_be_emitted():
    with pytest.raises(TypeMismatch):
        compile_rules("complex X: KickingTheBall as k emit roles {When: k.start}")


def test_binding_errors():
    with pytest.raises(RuleError, match="bound twice"):
        compile_rules("complex X: seq(Goal as g, Goal as g)")
    with pytest.raises(RuleError, match="not bound"):
        compile_rules("complex X: Goal as g where h.Scorer == g.Scorer")
    with pytest.raises(RuleError, match="defined twice"):
        compile_rules("complex X: Goal as g\ncomplex X: BallOut as o")
    with pytest.raises(RuleError, match="empty duration"):
        compile_rules("complex X: Goal as g lasting 9..3")


def test_cycles_are_rejected():
    with pytest.raises(CyclicDependency) as info:
        compile_rules("complex A: B as b\ncomplex B: A as a\n")
    assert info.value.cycle == ("A", "B", "A")
    assert info.value.line == 2
    assert info.value.exit_code == 4


def test_missing_rule_file(tmp_path):
    with pytest.raises(DataFileNotFound):
        load_rules(str(tmp_path / "absent.cer"))
    path = tmp_path / "rules.cer"
    path.write_text("complex Kick: KickingTheBall as k emit roles {Player: k.KickingPlayer}\n")
    assert load_rules(str(path)).names == ["Kick"]
