import sys
from typing import Dict, Iterable, Iterator, List, Optional

import numpy as np

from soccerevents.components.atomic_detector import detect_atomic_stream
from soccerevents.components.complex_detector import detect_complex
from soccerevents.dsl import CompiledRuleSet, builtin_rules, load_rules
from soccerevents.entity.config_entity import DetectorConfig, RuleParameterSet
from soccerevents.entity.trace_entity import EventLog, SampledTrace, Trace
from soccerevents.exception.exception import SoccerEventsException
from soccerevents.logging.logger import logging


class EventDetector:
    """
    Complete detector: a parameter set for the atomic rules and a compiled set of
    complex rules, applied to positional traces.

    Attributes:
        params (RuleParameterSet): Thresholds, windows and order of the atomic rules.
        rules (CompiledRuleSet): Complex rules; the shipped ones unless a rule file is configured.
        config (DetectorConfig): Smoothing, speed span, strike radius and merge options.
    Methods:
        detect(trace): Atomic and complex events of one trace.
        detect_stream(chunks): The same over consecutive chunks, never holding the whole trace.
    Raises:
        SoccerEventsException: If any error occurs during construction or detection.
    """

    def __init__(self, params: Optional[RuleParameterSet] = None, rules: Optional[CompiledRuleSet] = None,
                 config: Optional[DetectorConfig] = None):
        try:
            self.params = params or RuleParameterSet.reference()
            self.config = config or DetectorConfig()
            if rules is None:
                rules = load_rules(self.config.rules_path) if self.config.rules_path else builtin_rules()
            self.rules = rules
        except SoccerEventsException:
            raise
        except Exception as e:
            raise SoccerEventsException(e, sys)

    def detect(self, trace: Trace) -> EventLog:
        return self.detect_stream([trace])

    def detect_stream(self, chunks: Iterable[Trace]) -> EventLog:
        """
        Events of a trace fed as consecutive chunks.

        The atomic rules consume the chunks as they arrive. The complex rules then
        read the positions kept around each atomic event instead of the trace itself.
        """
        try:
            seen: List[Trace] = []
            last_frame = [0]

            def tracked(source: Iterable[Trace]) -> Iterator[Trace]:
                for chunk in source:
                    if not seen:
                        seen.append(chunk)
                    last_frame[0] = chunk.end_frame
                    yield chunk

            samples: Dict[int, np.ndarray] = {}
            atomics = list(detect_atomic_stream(tracked(chunks), self.params, self.config, samples))
            if not seen:
                return EventLog()
            first = seen[0]
            positions = SampledTrace(samples, first.roster, first.start_frame, last_frame[0], first.fps,
                                     first.geometry)
            complexes = detect_complex(atomics, self.rules, positions, self.config.merge_gap)
            logging.info(f"Detected {len(atomics)} atomic and {len(complexes)} complex events in {positions}")
            return EventLog(tuple(atomics), tuple(complexes))

        except SoccerEventsException:
            raise
        except Exception as e:
            logging.error(f"Detection failed: {e}")
            raise SoccerEventsException(e, sys)
