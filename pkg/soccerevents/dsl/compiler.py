import sys
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from soccerevents.dsl import rule_ast as ast
from soccerevents.entity.trace_entity import ATOMIC_ROLES, COMPLEX_ROLES
from soccerevents.exception.exception import (
    CyclicDependency,
    CyclicRuleSet,
    RuleError,
    SoccerEventsException,
    TypeMismatch,
    UnknownEvent,
    UnknownRole,
)
from soccerevents.logging.logger import logging

## spells built from consecutive atoms, addressed as ``merged <name>``
MERGED_ROLES: Dict[str, Tuple[str, ...]] = {
    "BallPossession": ("PossessingPlayer",),
    "Tackle": ("PossessingPlayer", "TacklingPlayer"),
}

ATOMIC_LEVEL = "atomic"
COMPLEX_LEVEL = "complex"
MERGED_LEVEL = "merged"


@dataclass(frozen=True)
class EventSchema:
    """
    Role vocabulary the compiler checks rules against.

    Attributes:
        atomic (dict): Atomic event type to its roles.
        complex (dict): Known complex event types to the roles they must emit.
    """
    atomic: Mapping[str, Tuple[str, ...]] = field(default_factory=lambda: dict(ATOMIC_ROLES))
    complex: Mapping[str, Tuple[str, ...]] = field(default_factory=lambda: dict(COMPLEX_ROLES))


@dataclass(frozen=True)
class Operand:
    """A pattern operand resolved to its stream."""
    event_type: str
    level: str
    roles: Tuple[str, ...]


@dataclass(frozen=True)
class CompiledRule:
    """
    A checked rule.

    Attributes:
        rule (ast.Rule): Syntax tree, positions included.
        operands (dict): Alias to resolved Operand; unaliased operands are keyed by
            their position in the pattern as ``#i``.
        dependencies (tuple): Complex event types the pattern consumes.
    """
    rule: ast.Rule
    operands: Dict[str, Operand]
    dependencies: Tuple[str, ...]

    @property
    def name(self) -> str:
        return self.rule.name

    @property
    def roles(self) -> Tuple[str, ...]:
        return tuple(role for role, _ in self.rule.emit)


@dataclass(frozen=True)
class CompiledRuleSet:
    """Rules in an order where every rule comes after the rules it consumes."""
    rules: Tuple[CompiledRule, ...] = ()

    @property
    def names(self) -> List[str]:
        return [r.name for r in self.rules]

    def __len__(self) -> int:
        return len(self.rules)

    def __getitem__(self, name: str) -> CompiledRule:
        for compiled in self.rules:
            if compiled.name == name:
                return compiled
        raise KeyError(name)

    def check_order(self) -> None:
        """Raises CyclicRuleSet when a rule consumes one that is not computed before it."""
        seen = set()
        produced = set(self.names)
        for compiled in self.rules:
            for dependency in compiled.dependencies:
                if dependency in produced and dependency not in seen:
                    raise CyclicRuleSet([compiled.name, dependency])
            seen.add(compiled.name)


class RuleChecker:
    """
    Semantic checks of parsed rules: event and role names, predicate signatures and
    expression types, then a dependency order.
    """

    def __init__(self, rules: Sequence[ast.Rule], schema: Optional[EventSchema] = None):
        self.rules = list(rules)
        self.schema = schema or EventSchema()
        self.by_name: Dict[str, ast.Rule] = {}

    def resolve_operand(self, ref: ast.EventRef) -> Operand:
        if ref.merged:
            if ref.name not in MERGED_ROLES:
                raise UnknownEvent(f"merged {ref.name}", ref.line, ref.col)
            return Operand(ref.name, MERGED_LEVEL, MERGED_ROLES[ref.name])
        if ref.name in self.by_name:
            target = self.by_name[ref.name]
            return Operand(ref.name, COMPLEX_LEVEL, tuple(role for role, _ in target.emit))
        if ref.name in self.schema.atomic:
            return Operand(ref.name, ATOMIC_LEVEL, tuple(self.schema.atomic[ref.name]))
        raise UnknownEvent(ref.name, ref.line, ref.col)

    def check_rule(self, rule: ast.Rule) -> CompiledRule:
        operands: Dict[str, Operand] = {}
        dependencies: List[str] = []
        for i, ref in enumerate(ast.event_refs(rule.pattern)):
            operand = self.resolve_operand(ref)
            key = ref.alias if ref.alias is not None else f"#{i}"
            if key in operands:
                raise RuleError(f"alias {key} is bound twice", ref.line, ref.col)
            operands[key] = operand
            if operand.level == COMPLEX_LEVEL and operand.event_type not in dependencies:
                dependencies.append(operand.event_type)

        if rule.lasting is not None and rule.lasting[0] > rule.lasting[1]:
            raise RuleError(f"empty duration range {rule.lasting[0]}..{rule.lasting[1]}", rule.line, rule.col)

        for ref in ast.role_refs(rule.where):
            self.check_role_ref(ref, operands)
        if rule.where is not None:
            self.expect(rule.where, "bool", operands)

        required = self.schema.complex.get(rule.name)
        emitted = set()
        for role, ref in rule.emit:
            self.check_role_ref(ref, operands)
            if ref.is_time:
                raise TypeMismatch(f"role {role} must be bound to an object, not a time", ref.line, ref.col)
            if required is not None and role not in required:
                raise UnknownRole(rule.name, role, ref.line, ref.col)
            if role in emitted:
                raise RuleError(f"role {role} is emitted twice", ref.line, ref.col)
            emitted.add(role)
        for role in required or ():
            if role not in emitted:
                raise RuleError(f"rule {rule.name} must emit role {role}", rule.line, rule.col)
        return CompiledRule(rule, operands, tuple(dependencies))

    def check_role_ref(self, ref: ast.RoleRef, operands: Dict[str, Operand]) -> None:
        if ref.alias not in operands:
            raise RuleError(f"alias {ref.alias} is not bound by the pattern", ref.line, ref.col)
        operand = operands[ref.alias]
        if not ref.is_time and ref.attribute not in operand.roles:
            raise UnknownRole(operand.event_type, ref.attribute, ref.line, ref.col)

    def type_of(self, node, operands: Dict[str, Operand]) -> str:
        if isinstance(node, ast.RoleRef):
            return "time" if node.is_time else "object"
        if isinstance(node, ast.Number):
            return "number"
        if isinstance(node, ast.ZoneName):
            return "zone"
        if isinstance(node, ast.Not):
            self.expect(node.operand, "bool", operands)
            return "bool"
        if isinstance(node, ast.BoolOp):
            for operand in node.operands:
                self.expect(operand, "bool", operands)
            return "bool"
        if isinstance(node, ast.Comparison):
            left, right = self.type_of(node.left, operands), self.type_of(node.right, operands)
            numeric = {"number", "time"}
            if node.op in ("==", "!="):
                if not (left == right or {left, right} <= numeric) or left in ("bool", "zone"):
                    raise TypeMismatch(f"cannot compare {left} with {right}", node.line, node.col)
            elif left not in numeric or right not in numeric:
                raise TypeMismatch(f"operator {node.op} needs numbers, got {left} and {right}", node.line, node.col)
            return "bool"
        if isinstance(node, ast.Call):
            return self.type_of_call(node, operands)
        raise TypeMismatch(f"unexpected expression {node!r}", 1, 1)

    _SIGNATURES = {
        "team": (("object",), "team"),
        "distance": (("object", "object"), "number"),
        "is_goalkeeper": (("object",), "bool"),
        "zone": (("object", "zone"), "bool"),
        "nearest_to_goal_among_opponents": (("object", "time"), "bool"),
        "aims_at_goal": (("object", "object"), "bool"),
    }

    def type_of_call(self, node: ast.Call, operands: Dict[str, Operand]) -> str:
        expected, result = self._SIGNATURES[node.name]
        if node.name == "zone" and len(node.args) == 3:
            expected = expected + ("object",)
        if len(node.args) != len(expected):
            raise TypeMismatch(f"{node.name} takes {len(expected)} arguments, got {len(node.args)}",
                               node.line, node.col)
        for arg, wanted in zip(node.args, expected):
            found = self.type_of(arg, operands)
            if found != wanted and not (wanted == "time" and found == "number"):
                raise TypeMismatch(f"{node.name} expects {wanted}, got {found}", arg.line, arg.col)
        return result

    def expect(self, node, wanted: str, operands: Dict[str, Operand]) -> None:
        found = self.type_of(node, operands)
        if found != wanted:
            raise TypeMismatch(f"expected a {wanted} expression, got {found}", node.line, node.col)

    def order(self, compiled: Dict[str, CompiledRule]) -> List[CompiledRule]:
        """Depth-first post-order in file order; a back edge is a cycle."""
        ordered: List[CompiledRule] = []
        state: Dict[str, str] = {}

        def visit(name: str, path: List[str]) -> None:
            state[name] = "open"
            rule = compiled[name]
            for ref in ast.event_refs(rule.rule.pattern):
                if ref.merged or ref.name not in compiled:
                    continue
                if state.get(ref.name) == "open":
                    cycle = path[path.index(ref.name):] + [name, ref.name] if ref.name in path \
                        else [name, ref.name]
                    raise CyclicDependency(cycle, ref.line, ref.col)
                if ref.name not in state:
                    visit(ref.name, path + [name])
            state[name] = "done"
            ordered.append(rule)

        for rule in self.rules:
            if rule.name not in state:
                visit(rule.name, [])
        return ordered

    def initiate_rule_check(self) -> CompiledRuleSet:
        for rule in self.rules:
            if rule.name in self.by_name:
                raise RuleError(f"rule {rule.name} is defined twice", rule.line, rule.col)
            self.by_name[rule.name] = rule
        compiled = {rule.name: self.check_rule(rule) for rule in self.rules}
        rule_set = CompiledRuleSet(tuple(self.order(compiled)))
        logging.info(f"Compiled {len(rule_set)} complex event rules")
        return rule_set


def check_and_compile(asts: Sequence[ast.Rule], schema: Optional[EventSchema] = None) -> CompiledRuleSet:
    """
    Checks parsed rules and orders them by dependency.

    Raises:
        UnknownEvent: Operand naming neither a rule nor an atomic type.
        UnknownRole: ``alias.Role`` not carried by the operand, or an emitted role
            outside the schema of a known complex type.
        TypeMismatch: Predicate or comparison applied to the wrong kind of value.
        CyclicDependency: Rules consuming each other.
    """
    try:
        return RuleChecker(asts, schema).initiate_rule_check()
    except SoccerEventsException:
        raise
    except Exception as e:
        raise SoccerEventsException(e, sys)
