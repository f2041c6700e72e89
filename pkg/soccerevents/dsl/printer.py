from typing import Iterable

from soccerevents.dsl import rule_ast as ast

_INDENT = "    "


def _number(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    text = repr(float(value))
    return format(float(value), "f") if "e" in text else text


def format_pattern(node) -> str:
    if isinstance(node, ast.EventRef):
        text = f"merged {node.name}" if node.merged else node.name
        return f"{text} as {node.alias}" if node.alias is not None else text
    inner = ", ".join(format_pattern(operand) for operand in node.operands)
    text = f"{node.operator}({inner})"
    if node.within is not None:
        text += f" within {node.within}"
    return text


def format_expression(node) -> str:
    if isinstance(node, ast.RoleRef):
        return f"{node.alias}.{node.attribute}"
    if isinstance(node, ast.Number):
        return _number(node.value)
    if isinstance(node, ast.ZoneName):
        return node.name
    if isinstance(node, ast.Call):
        return f"{node.name}({', '.join(format_expression(a) for a in node.args)})"
    if isinstance(node, ast.Comparison):
        return f"{format_expression(node.left)} {node.op} {format_expression(node.right)}"
    if isinstance(node, ast.Not):
        return f"not {_grouped(node.operand)}"
    if isinstance(node, ast.BoolOp):
        return f" {node.op} ".join(_grouped(operand) for operand in node.operands)
    raise TypeError(f"cannot format {node!r}")


def _grouped(node) -> str:
    text = format_expression(node)
    return f"({text})" if isinstance(node, ast.BoolOp) else text


def format_rule(rule: ast.Rule) -> str:
    lines = [f"complex {rule.name}: {format_pattern(rule.pattern)}"]
    if rule.lasting is not None:
        lines.append(f"{_INDENT}lasting {rule.lasting[0]}..{rule.lasting[1]}")
    if rule.where is not None:
        lines.append(f"{_INDENT}where {format_expression(rule.where)}")
    if rule.emit:
        items = ", ".join(f"{role}: {format_expression(ref)}" for role, ref in rule.emit)
        lines.append(f"{_INDENT}emit roles {{{items}}}")
    return "\n".join(lines)


def format_rules(rules: Iterable[ast.Rule]) -> str:
    """Canonical text of parsed rules; parsing it gives back equal syntax trees."""
    return "\n\n".join(format_rule(rule) for rule in rules) + "\n"
