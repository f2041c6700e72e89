import sys
from typing import List

import numpy as np

from soccerevents.constant import detection_pipeline
from soccerevents.entity.artifact_entity import Diagnostic
from soccerevents.entity.trace_entity import Team, Trace
from soccerevents.exception.exception import SoccerEventsException
from soccerevents.logging.logger import logging


class TraceValidation:
    """
    Checks a trace against the invariants of the positional data model and reports
    every violation instead of stopping at the first one.

    Attributes:
        trace (Trace): Trace under test.
        margin (float): Distance outside the pitch lines still accepted (m).
    """

    def __init__(self, trace: Trace, margin: float = detection_pipeline.TRACE_MARGIN_M):
        self.trace = trace
        self.margin = margin

    def validate_ball(self) -> List[Diagnostic]:
        balls = self.trace.balls
        diagnostics = []
        if not balls:
            diagnostics.append(Diagnostic("MissingBall", message="no ball in the roster"))
        elif len(balls) > 1:
            diagnostics.append(Diagnostic("DuplicateBall", message=f"{len(balls)} balls: {[b.id for b in balls]}"))
        for ball in balls:
            if ball.team is not Team.NONE or ball.is_goalkeeper:
                diagnostics.append(Diagnostic("BallWithTeam", object_id=ball.id,
                                              message="the ball cannot belong to a team or keep goal"))
        return diagnostics

    def validate_goalkeepers(self) -> List[Diagnostic]:
        diagnostics = []
        for team in (Team.HOME, Team.AWAY):
            keepers = [p.id for p in self.trace.players if p.team is team and p.is_goalkeeper]
            if len(keepers) != 1:
                diagnostics.append(Diagnostic("GoalkeeperCount",
                                              message=f"{team.value} team has {len(keepers)} goalkeepers"))
        return diagnostics

    def validate_bounds(self) -> List[Diagnostic]:
        geometry = self.trace.geometry
        x = self.trace.positions[:, :, 0]
        y = self.trace.positions[:, :, 1]
        with np.errstate(invalid="ignore"):
            inside = ((x >= -self.margin) & (x <= geometry.length_m + self.margin)
                      & (y >= -self.margin) & (y <= geometry.width_m + self.margin))
        rows, cols = np.nonzero(~inside)
        return [
            Diagnostic("OutOfBounds", frame=self.trace.start_frame + int(r), object_id=self.trace.roster[c].id,
                       message=f"position ({x[r, c]:.2f}, {y[r, c]:.2f}) is off the field")
            for r, c in zip(rows, cols)
        ]

    def initiate_trace_validation(self) -> List[Diagnostic]:
        try:
            diagnostics = self.validate_ball() + self.validate_goalkeepers() + self.validate_bounds()
            if diagnostics:
                logging.info(f"Trace validation found {len(diagnostics)} problems, first: {diagnostics[0]}")
            else:
                logging.info("Trace validation passed")
            return diagnostics
        except Exception as e:
            raise SoccerEventsException(e, sys)


def validate(trace: Trace) -> List[Diagnostic]:
    """Diagnostics for every violated trace invariant; empty when the trace is sound."""
    return TraceValidation(trace).initiate_trace_validation()
