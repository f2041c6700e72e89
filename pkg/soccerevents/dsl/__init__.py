from soccerevents.dsl.builtins import builtin_rules, builtin_source, compile_rules, load_rules
from soccerevents.dsl.compiler import CompiledRule, CompiledRuleSet, EventSchema, check_and_compile
from soccerevents.dsl.parser import parse
from soccerevents.dsl.printer import format_rules
