import os

'''
Define the common constant variable for the detection pipeline.
'''
PIPELINE_NAME: str = "SoccerEvents"
ARTIFACT_DIR: str = "Artifacts"

SCHEMA_FILE_PATH = os.path.join("data_schema", "schema.yaml")

TRACE_FILE_NAME: str = "trace.csv"
TRUTH_FILE_NAME: str = "truth.jsonl"
EVENTS_FILE_NAME: str = "events.jsonl"
REPORT_FILE_NAME: str = "report.json"

'''
Trace model related constants start with TRACE VAR NAME
'''
TRACE_FPS: float = 30.0
TRACE_MARGIN_M: float = 5.0
TRACE_COORDINATE_DECIMALS: int = 3
TRACE_CSV_COLUMNS: list = ["frame", "object_id", "class", "team", "goalkeeper", "x", "y"]

FIELD_LENGTH_M: float = 105.0
FIELD_WIDTH_M: float = 68.0
FIELD_GOAL_MOUTH_WIDTH_M: float = 7.32
FIELD_SIDELINE_BAND_M: float = 13.84
FIELD_GOAL_AREA_DEPTH_M: float = 16.5
FIELD_GOAL_AREA_WIDTH_M: float = 40.32

"""
Feature extraction related constant start with FEATURE VAR NAME
"""
FEATURE_MOVING_SPEED_MPS: float = 0.5
FEATURE_SMOOTHING_WINDOW: int = 1
FEATURE_SPEED_SPAN_FRAMES: int = 1

"""
Atomic detector related constant start with ATOMIC VAR NAME
"""
ATOMIC_EVENT_TYPES: tuple = (
    "KickingTheBall",
    "BallPossession",
    "Tackle",
    "BallDeflection",
    "BallOut",
    "Goal",
)
PARAMETERIZED_EVENT_TYPES: tuple = (
    "KickingTheBall",
    "BallPossession",
    "Tackle",
    "BallDeflection",
)
ATOMIC_SCORER_LOOKBACK_FRAMES: int = 150
## 0 keeps every kick and deflection anchor
ATOMIC_STRIKE_RADIUS_FRAMES: int = 0

## thresholds the generator's clean traces are scripted against
ATOMIC_REFERENCE_PARAMS: dict = {
    "KickingTheBall": {"inner_distance": 1.0, "speed": 5.0, "acceleration": 10.0, "window": 5},
    "BallPossession": {"inner_distance": 1.0, "outer_distance": 1.5, "speed": 5.0, "window": 5},
    "Tackle": {"inner_distance": 1.0, "outer_distance": 1.5, "speed": 5.0, "window": 5},
    "BallDeflection": {"inner_distance": 1.0, "speed": 5.0, "acceleration": 10.0, "window": 5},
}

"""
Complex detector related constant start with COMPLEX VAR NAME
"""
COMPLEX_EVENT_TYPES: tuple = (
    "BallPossession",
    "Tackle",
    "WonTackle",
    "LostTackle",
    "Pass",
    "Cross",
    "FilteringPass",
    "PassThenGoal",
    "CrossThenGoal",
    "FilteringPassThenGoal",
    "Shot",
    "ShotOut",
    "ShotThenGoal",
    "SavedShot",
)
COMPLEX_PASS_MAX_GAP_FRAMES: int = 90
COMPLEX_MERGE_GAP_FRAMES: int = 5
COMPLEX_TACKLE_END_GAP_FRAMES: int = 30
COMPLEX_GOAL_CHAIN_GAP_FRAMES: int = 150
COMPLEX_SAVE_GAP_FRAMES: int = 60
COMPLEX_RULES_FILE_NAME: str = "builtin_rules.cer"

"""
Evaluation related constant start with EVALUATION VAR NAME
"""
EVALUATION_ATOMIC_TOLERANCE_FRAMES: int = 3
EVALUATION_INTERVAL_IOU_THRESHOLD: float = 0.2

"""
Optimizer related constant start with OPTIMIZER VAR NAME
"""
OPTIMIZER_POPULATION_SIZE: int = 200
OPTIMIZER_GENERATIONS: int = 50
OPTIMIZER_ARCHIVE_SIZE: int = 100
OPTIMIZER_CROSSOVER_PROBABILITY: float = 0.9
OPTIMIZER_MUTATION_PROBABILITY: float = 0.2
OPTIMIZER_BLX_ALPHA: float = 0.5
OPTIMIZER_SEED: int = 42

OPTIMIZER_WINDOW_GRID: tuple = (3, 30, 1)
OPTIMIZER_SPEED_GRID: tuple = (1.0, 15.0, 1.0)
OPTIMIZER_DISTANCE_GRID: tuple = (0.1, 2.0, 0.1)
OPTIMIZER_ACCELERATION_GRID: tuple = (1.0, 30.0, 1.0)

OPTIMIZER_DIR_NAME: str = "optimizer"
OPTIMIZER_TELEMETRY_FILE_NAME: str = "telemetry.csv"
OPTIMIZER_HYPERVOLUME_FILE_NAME: str = "hypervolume.csv"
OPTIMIZER_ARCHIVE_FILE_NAME: str = "archive.json"

"""
Scenario generator related constant start with SCENARIO VAR NAME
"""
SCENARIO_SPEED_RANGE: tuple = (6.0, 30.0)
SCENARIO_FRICTION_RANGE: tuple = (1.0, 6.0)
SCENARIO_MAX_DROPOUT: float = 0.05
SCENARIO_BALL_OFFSET_M: float = 0.3
SCENARIO_LEAD_FRAMES: int = 20
SCENARIO_TAIL_FRAMES: int = 100
SCENARIO_BALL_STOP_BEYOND_LINE_M: float = 2.0
SCENARIO_JITTER_M: float = 0.5
SCENARIO_SHOT_DELAY_FRAMES: int = 20
SCENARIO_STEP_FRAMES: int = 6
SCENARIO_CONTEST_FRAMES: int = 20
SCENARIO_CONTEST_DISTANCE_M: float = 1.0
SCENARIO_POKE_STEP_M: float = 0.4
SCENARIO_CHALLENGE_SPEED_MPS: float = 5.0
SCENARIO_RETREAT_SPEED_MPS: float = 6.0
SCENARIO_DRIBBLE_SPEED_MPS: float = 3.0
SCENARIO_DEFLECTION_RETENTION: float = 0.7
SCENARIO_PARRY_ANGLE_DEG: float = 50.0
SCENARIO_OUTFIELD_PER_TEAM: int = 10
## aim points for the home team; mirrored in x for the away team
SCENARIO_SHOT_AIM: tuple = (105.0, 32.5)
SCENARIO_WIDE_AIM: tuple = (105.0, 39.5)

"""
Detection pipeline related constant start with DETECTION VAR NAME
"""
DETECTION_DIR_NAME: str = "detection"
DETECTION_CHUNK_FRAMES: int = 1500
DETECTION_CSV_CHUNK_ROWS: int = 50000
DETECTION_DURATIONS_FILE_NAME: str = "durations.csv"

"""
Generation pipeline related constant start with GENERATION VAR NAME
"""
GENERATION_DIR_NAME: str = "generation"
GENERATION_SUITE_SPACING_FRAMES: int = 600
