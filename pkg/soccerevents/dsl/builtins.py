import os
from functools import lru_cache
from typing import Optional

from soccerevents.constant import detection_pipeline
from soccerevents.dsl.compiler import CompiledRuleSet, check_and_compile
from soccerevents.dsl.parser import parse
from soccerevents.exception.exception import DataFileNotFound
from soccerevents.logging.logger import logging

BUILTIN_RULES_PATH = os.path.join(os.path.dirname(__file__), detection_pipeline.COMPLEX_RULES_FILE_NAME)


def builtin_source() -> str:
    """Text of the shipped rule file."""
    with open(BUILTIN_RULES_PATH, "r", encoding="utf-8") as file:
        return file.read()


@lru_cache(maxsize=1)
def builtin_rules() -> CompiledRuleSet:
    return check_and_compile(parse(builtin_source()))


def compile_rules(source: str) -> CompiledRuleSet:
    return check_and_compile(parse(source))


def load_rules(path: Optional[str] = None) -> CompiledRuleSet:
    """Compiled rules of a ``.cer`` file, or the shipped rules when no path is given."""
    if path is None:
        return builtin_rules()
    if not os.path.exists(path):
        raise DataFileNotFound(path)
    with open(path, "r", encoding="utf-8") as file:
        rule_set = compile_rules(file.read())
    logging.info(f"Loaded rules {rule_set.names} from {path}")
    return rule_set
