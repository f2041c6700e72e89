import sys
from typing import Iterable, Optional


class SoccerEventsException(Exception):
    """
    Base error of the package.

    Records where the failure was raised (script name and line number of the active
    traceback, if any) next to the original message. Domain errors subclass it and
    carry the process exit code the CLI reports.
    """

    exit_code: int = 1

    def __init__(self, error_message, error_details=sys):
        super().__init__(str(error_message))
        self.error_message = error_message
        _, _, exc_tb = error_details.exc_info()

        if exc_tb is not None:
            while exc_tb.tb_next is not None:
                exc_tb = exc_tb.tb_next
            self.lineno = exc_tb.tb_lineno
            self.file_name = exc_tb.tb_frame.f_code.co_filename
        else:
            self.lineno = None
            self.file_name = None

    @property
    def diagnostic(self) -> str:
        """One-line message for users, without the script location."""
        return str(self.error_message)

    def __str__(self):
        return "Error occured in python script name [{0}] line number [{1}] error message [{2}]".format(
            self.file_name, self.lineno, str(self.error_message))


class DataError(SoccerEventsException):
    exit_code = 3


class MalformedRecord(DataError):
    def __init__(self, line: int, reason: str = ""):
        self.line = line
        message = f"malformed record at line {line}"
        super().__init__(f"{message}: {reason}" if reason else message)


class MissingObject(DataError):
    def __init__(self, frame: int, object_id):
        self.frame = frame
        self.object_id = object_id
        super().__init__(f"frame {frame} has no row for object {object_id}")


class NonContiguousFrames(DataError):
    def __init__(self, gap: int):
        self.gap = gap
        super().__init__(f"frame {gap} is missing from the trace")


class UnknownEventType(DataError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown event type {name!r}")


class MissingRole(DataError):
    def __init__(self, event: str, role: str):
        self.event = event
        self.role = role
        super().__init__(f"event {event} lacks role {role}")


class UnknownObject(DataError):
    def __init__(self, object_id):
        self.object_id = object_id
        super().__init__(f"object {object_id} is not in the roster")


class WindowOutOfRange(DataError):
    def __init__(self, frame: int, window: int, length: int):
        super().__init__(f"window of {window} frames at frame {frame} exceeds a trace of {length} frames")


class OutOfGrid(DataError):
    def __init__(self, gene: str, value):
        self.gene = gene
        self.value = value
        super().__init__(f"gene {gene} value {value} is off its grid")


class NoTrainingData(DataError):
    def __init__(self, message: str = "no training trace with ground truth was given"):
        super().__init__(message)


class NoArchive(DataError):
    def __init__(self, message: str = "archive is empty"):
        super().__init__(message)


class InfeasibleScript(DataError):
    pass


class OverlappingScenarios(DataError):
    def __init__(self, first: int, second: int):
        super().__init__(f"scenario {second} starts before scenario {first} ends")


class DataFileNotFound(DataError):
    def __init__(self, path: str):
        self.path = path
        super().__init__(f"no such file: {path}")


class RuleError(SoccerEventsException):
    """Rule-language error positioned in the source text."""

    exit_code = 4

    def __init__(self, message: str, line: int = 1, col: int = 1):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}")


class RuleSyntaxError(RuleError):
    def __init__(self, line: int, col: int, expected: Iterable[str], encountered: Optional[str] = None):
        self.expected = frozenset(expected)
        wanted = ", ".join(sorted(self.expected))
        message = f"expected {wanted}"
        if encountered is not None:
            message += f", encountered {encountered} instead"
        super().__init__(message, line, col)


class UnknownEvent(RuleError):
    def __init__(self, name: str, line: int, col: int):
        self.name = name
        super().__init__(f"unknown event type {name}", line, col)


class UnknownRole(RuleError):
    def __init__(self, event: str, role: str, line: int, col: int):
        self.event = event
        self.role = role
        super().__init__(f"event {event} has no role {role}", line, col)


class TypeMismatch(RuleError):
    pass


class CyclicDependency(RuleError):
    def __init__(self, cycle, line: int, col: int):
        self.cycle = tuple(cycle)
        super().__init__("rules depend on each other: " + " -> ".join(self.cycle), line, col)


class CyclicRuleSet(RuleError):
    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__("rule set is cyclic: " + " -> ".join(self.cycle))
