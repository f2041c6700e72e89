import os
import sys

from soccerevents.entity.config_entity import DetectionPipelineConfig, GenerationConfig
from soccerevents.exception.exception import SoccerEventsException
from soccerevents.logging.logger import logging
from soccerevents.pipeline.detection_pipeline import DetectionPipeline, evaluate_files
from soccerevents.pipeline.generation_pipeline import GenerationPipeline

DEMO_SCRIPT = os.path.join("scenarios", "demo_match.json")

if __name__ == '__main__':
    try:
        pipeline_config = DetectionPipelineConfig()

        generation_config = GenerationConfig(pipeline_config)
        logging.info("Generating the demo match.")
        generation_artifact = GenerationPipeline(generation_config).run_pipeline(DEMO_SCRIPT)
        print(generation_artifact)

        logging.info("Detecting events in the demo match.")
        detection_pipeline = DetectionPipeline(pipeline_config)
        detection_artifact = detection_pipeline.run_pipeline(generation_artifact.trace_file_path,
                                                             truth_path=generation_artifact.truth_file_path)
        print(detection_artifact)

        report = evaluate_files(detection_artifact.events_file_path, generation_artifact.truth_file_path)
        logging.info(f"Demo match scored macro F {report.macro['f_score']:.3f}")
        print(f"macro F-score: {report.macro['f_score']:.3f}")

    except Exception as e:
        raise SoccerEventsException(e, sys)
