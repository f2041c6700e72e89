import sys
from dataclasses import replace
from typing import List, Optional, Tuple

import numpy as np

from soccerevents.components.scenario_generation import add_noise, generate_match, scenario_suite
from soccerevents.components.trace_ingestion import save_events, save_trace
from soccerevents.constant import detection_pipeline
from soccerevents.entity.artifact_entity import GenerationArtifact
from soccerevents.entity.config_entity import GenerationConfig, NoiseSpec, ScenarioSpec
from soccerevents.exception.exception import DataError, SoccerEventsException
from soccerevents.logging.logger import logging
from soccerevents.utils.main_utils.utils import read_yaml_file


def parse_script(content) -> Tuple[List[ScenarioSpec], NoiseSpec, int]:
    """
    Scenarios, noise and seed of a match script.

    A script is either a list of scenario objects, or an object with ``scenarios``
    (a list), ``suite`` (a count of mixed default scenarios laid out one after
    another), ``noise`` (``sigma``, ``dropout``) and ``seed``.
    """
    if isinstance(content, list):
        content = {"scenarios": content}
    if not isinstance(content, dict):
        raise DataError("a match script must be a list or an object")
    unknown = set(content) - {"scenarios", "suite", "noise", "seed"}
    if unknown:
        raise DataError(f"unknown script settings: {sorted(unknown)}")
    seed = int(content.get("seed", 0))
    specs = [ScenarioSpec.from_dict(item) for item in content.get("scenarios") or []]
    if content.get("suite"):
        start = max((s.offset for s in specs), default=-detection_pipeline.GENERATION_SUITE_SPACING_FRAMES)
        spacing = detection_pipeline.GENERATION_SUITE_SPACING_FRAMES
        for n, spec in enumerate(scenario_suite(int(content["suite"]), seed), start=1):
            specs.append(replace(spec, offset=start + n * spacing))
    noise_settings = dict(content.get("noise") or {})
    unknown = set(noise_settings) - {"sigma", "dropout"}
    if unknown:
        raise DataError(f"unknown noise settings: {sorted(unknown)}")
    noise = NoiseSpec(**noise_settings)
    return specs, noise, seed


class GenerationPipeline:
    """
    Writes the positional CSV and ground-truth JSONL of a scripted match.

    Attributes:
        generation_config (GenerationConfig): Output paths.
        seed (int, optional): Overrides the seed of the script.
    """

    def __init__(self, generation_config: Optional[GenerationConfig] = None, seed: Optional[int] = None):
        self.generation_config = generation_config or GenerationConfig()
        self.seed = seed

    def run_pipeline(self, script_path: str) -> GenerationArtifact:
        try:
            specs, noise, seed = parse_script(read_yaml_file(script_path))
            if self.seed is not None:
                seed = self.seed
            logging.info(f"Generating {len(specs)} scenarios from {script_path} with seed {seed}")
            rng = np.random.default_rng(seed)
            trace, truth = generate_match(specs, rng)
            trace = add_noise(trace, noise, rng)

            config = self.generation_config
            save_trace(trace, config.trace_file_path)
            save_events(truth, config.truth_file_path)
            artifact = GenerationArtifact(config.trace_file_path, config.truth_file_path, len(trace),
                                          len(truth.atomic), len(truth.complex))
            logging.info(f"Generation artifact: {artifact}")
            return artifact

        except SoccerEventsException:
            raise
        except Exception as e:
            raise SoccerEventsException(e, sys)
