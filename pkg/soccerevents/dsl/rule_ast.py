"""
Syntax tree of the complex-event rule language.

Every node records the line and column where it starts; positions are left out of
equality so that two parses of equivalent text compare equal.
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

## value-returning builtins and the boolean predicates
VALUE_FUNCTIONS = frozenset(["team", "distance"])
PREDICATES = frozenset(["is_goalkeeper", "zone", "nearest_to_goal_among_opponents", "aims_at_goal"])
ZONES = frozenset(["sideline_band", "goal_area", "attacking_third", "behind_goal_line"])
TIME_ATTRIBUTES = frozenset(["start", "end"])
PATTERN_OPERATORS = ("seq", "and", "or")


@dataclass(frozen=True)
class EventRef:
    """
    Operand naming an event stream. ``merged`` selects the possession or tackle
    spells built from atoms instead of the atoms themselves.
    """
    name: str
    alias: Optional[str] = None
    merged: bool = False
    line: int = field(default=1, compare=False)
    col: int = field(default=1, compare=False)


@dataclass(frozen=True)
class Pattern:
    operator: str
    operands: Tuple[Union["Pattern", EventRef], ...]
    within: Optional[int] = None
    line: int = field(default=1, compare=False)
    col: int = field(default=1, compare=False)


@dataclass(frozen=True)
class RoleRef:
    """``alias.Role``, or ``alias.start`` / ``alias.end`` for the bound instance's bounds."""
    alias: str
    attribute: str
    line: int = field(default=1, compare=False)
    col: int = field(default=1, compare=False)

    @property
    def is_time(self) -> bool:
        return self.attribute in TIME_ATTRIBUTES


@dataclass(frozen=True)
class Number:
    value: float
    line: int = field(default=1, compare=False)
    col: int = field(default=1, compare=False)


@dataclass(frozen=True)
class ZoneName:
    name: str
    line: int = field(default=1, compare=False)
    col: int = field(default=1, compare=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple["Expression", ...]
    line: int = field(default=1, compare=False)
    col: int = field(default=1, compare=False)


@dataclass(frozen=True)
class Comparison:
    op: str
    left: "Expression"
    right: "Expression"
    line: int = field(default=1, compare=False)
    col: int = field(default=1, compare=False)


@dataclass(frozen=True)
class Not:
    operand: "Expression"
    line: int = field(default=1, compare=False)
    col: int = field(default=1, compare=False)


@dataclass(frozen=True)
class BoolOp:
    op: str
    operands: Tuple["Expression", ...]
    line: int = field(default=1, compare=False)
    col: int = field(default=1, compare=False)


Expression = Union[RoleRef, Number, ZoneName, Call, Comparison, Not, BoolOp]


@dataclass(frozen=True)
class Rule:
    """
    One ``complex`` declaration.

    Attributes:
        name (str): Complex event type produced.
        pattern (Pattern or EventRef): Interval pattern to match.
        lasting (tuple, optional): Inclusive bounds on the duration in frames.
        where (Expression, optional): Condition over the bound operands.
        emit (tuple): ``(role, RoleRef)`` pairs of the produced event.
    """
    name: str
    pattern: Union[Pattern, EventRef]
    lasting: Optional[Tuple[int, int]] = None
    where: Optional[Expression] = None
    emit: Tuple[Tuple[str, RoleRef], ...] = ()
    line: int = field(default=1, compare=False)
    col: int = field(default=1, compare=False)


def event_refs(node: Union[Pattern, EventRef]):
    """Operands of a pattern in source order, depth first."""
    if isinstance(node, EventRef):
        yield node
        return
    for operand in node.operands:
        yield from event_refs(operand)


def role_refs(node):
    """Every RoleRef below an expression."""
    if node is None:
        return
    if isinstance(node, RoleRef):
        yield node
    elif isinstance(node, Call):
        for arg in node.args:
            yield from role_refs(arg)
    elif isinstance(node, Comparison):
        yield from role_refs(node.left)
        yield from role_refs(node.right)
    elif isinstance(node, Not):
        yield from role_refs(node.operand)
    elif isinstance(node, BoolOp):
        for operand in node.operands:
            yield from role_refs(operand)
