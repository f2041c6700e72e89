import json
import os

import pytest

from soccerevents.components.trace_ingestion import load_events, load_trace
from soccerevents.entity.config_entity import DetectionPipelineConfig, GenerationConfig, NoiseSpec, OptimizerConfig
from soccerevents.entity.trace_entity import SampledTrace
from soccerevents.exception.exception import DataError, NoTrainingData, SoccerEventsException
from soccerevents.pipeline.detection_pipeline import DetectionPipeline, evaluate_files, event_durations, iter_chunks
from soccerevents.pipeline.generation_pipeline import GenerationPipeline, parse_script
from soccerevents.pipeline.optimization_pipeline import (OptimizationPipeline, load_optimizer_config,
                                                         training_pairs)
from soccerevents.utils.ml_utils.model.estimator import EventDetector

PASS_SCRIPT = {"scenarios": [{"kind": "Pass", "placements": {"kicker": [30, 20], "receiver": [45, 20]},
                              "v0": 12, "mu": 3}]}


def signature(event):
    return event.event_type, event.start, event.end, tuple(sorted(event.roles.items()))


@pytest.fixture
def generated(tmp_path):
    script = tmp_path / "script.json"
    script.write_text(json.dumps(PASS_SCRIPT))
    return GenerationPipeline(GenerationConfig(output_dir=str(tmp_path / "gen"))).run_pipeline(str(script))


def test_parse_script():
    specs, noise, seed = parse_script(PASS_SCRIPT["scenarios"])
    assert [s.kind for s in specs] == ["Pass"]
    assert noise == NoiseSpec() and seed == 0

    specs, noise, seed = parse_script({"suite": 2, "noise": {"sigma": 0.05}, "seed": 9})
    assert [s.offset for s in specs] == [0, 600]
    assert noise.sigma == 0.05 and seed == 9

    specs, _, _ = parse_script({"scenarios": [{"kind": "Dribble", "offset": 100}], "suite": 1})
    assert [s.offset for s in specs] == [100, 700]


def test_parse_script_rejects_unknown_settings():
    with pytest.raises(DataError):
        parse_script({"scenario": []})
    with pytest.raises(DataError):
        parse_script({"noise": {"jitter": 1.0}})
    with pytest.raises(DataError):
        parse_script("Pass")


def test_generation_pipeline(generated):
    assert generated.frames == 166
    assert os.path.exists(generated.trace_file_path)
    assert len(load_trace(generated.trace_file_path)) == 166
    truth = load_events(generated.truth_file_path)
    assert len(truth.atomic) == generated.atomic_count
    assert [(p.start, p.end) for p in truth.complex_of("Pass")] == [(20, 65)]


def test_iter_chunks(generated):
    trace = load_trace(generated.trace_file_path)
    chunks = list(iter_chunks(trace, 50))
    assert [len(c) for c in chunks] == [50, 50, 50, 16]
    assert chunks[1].start_frame == 50


def test_detection_pipeline_writes_report_next_to_events(generated, tmp_path):
    events_path = str(tmp_path / "detected" / "events.jsonl")
    artifact = DetectionPipeline().run_pipeline(generated.trace_file_path, truth_path=generated.truth_file_path,
                                                events_path=events_path)
    assert artifact.events_file_path == events_path
    assert artifact.report_file_path == str(tmp_path / "detected" / "report.json")
    report = json.loads((tmp_path / "detected" / "report.json").read_text())
    assert set(report) == {"atomic", "complex", "macro"}
    assert len(load_events(events_path).atomic) == artifact.atomic_count


def test_detection_pipeline_default_layout(generated, tmp_path):
    config = DetectionPipelineConfig(artifact_root=str(tmp_path / "Artifacts"))
    artifact = DetectionPipeline(config).run_pipeline(generated.trace_file_path)
    assert artifact.events_file_path.startswith(config.artifact_dir)
    assert artifact.report_file_path is None
    assert os.path.exists(artifact.events_file_path)


def test_evaluate_files_and_durations(generated, tmp_path):
    truth = generated.truth_file_path
    report = evaluate_files(truth, truth, str(tmp_path / "report.json"))
    assert report.macro["f_score"] == 1.0
    assert json.loads((tmp_path / "report.json").read_text())["macro"]["overall"]["f_score"] == 1.0
    evaluate_files(truth, truth, str(tmp_path / "report.txt"))
    assert "macro" in (tmp_path / "report.txt").read_text()

    table = event_durations(truth, output_path=str(tmp_path / "durations.csv"))
    passes = table[table["event_type"] == "Pass"]
    assert list(passes["count"]) == [1]
    assert list(passes["max_frames"]) == [45]
    assert (tmp_path / "durations.csv").read_text().startswith("event_type,count")


def test_training_pairs(tmp_path):
    with pytest.raises(NoTrainingData):
        training_pairs(str(tmp_path / "absent"))
    with pytest.raises(NoTrainingData):
        training_pairs(str(tmp_path))

    (tmp_path / "match1").mkdir()
    (tmp_path / "match1" / "trace.csv").write_text("")
    (tmp_path / "match1" / "truth.jsonl").write_text("")
    (tmp_path / "second.csv").write_text("")
    (tmp_path / "second.jsonl").write_text("")
    (tmp_path / "orphan.csv").write_text("")
    pairs = training_pairs(str(tmp_path))
    assert [os.path.relpath(t, tmp_path) for t, _ in pairs] == [os.path.join("match1", "trace.csv"), "second.csv"]


def test_load_optimizer_config(tmp_path):
    assert load_optimizer_config(seed=7).seed == 7
    path = tmp_path / "optimizer.yaml"
    path.write_text("population_size: 10\ngenerations: 2\nmutation_mode: per_gene\n")
    config = load_optimizer_config(str(path))
    assert (config.population_size, config.generations, config.mutation_mode) == (10, 2, "per_gene")
    path.write_text("population: 10\n")
    with pytest.raises(DataError):
        load_optimizer_config(str(path))


def test_optimization_pipeline(generated, tmp_path):
    config = OptimizerConfig(population_size=4, generations=1, archive_size=3, seed=1)
    archive_path = str(tmp_path / "opt" / "archive.json")
    artifact = OptimizationPipeline(config, archive_path=archive_path).run_pipeline(str(tmp_path / "gen"))
    content = json.loads((tmp_path / "opt" / "archive.json").read_text())
    assert set(content) == {"seed", "population_size", "generations", "detector", "archive", "best_per_event"}
    assert len(content["archive"]) == 3
    assert set(content["best_per_event"]) == {"KickingTheBall", "BallPossession", "Tackle", "BallDeflection"}
    assert (tmp_path / "opt" / "telemetry.csv").exists()
    assert (tmp_path / "opt" / "hypervolume.csv").read_text().count("\n") == 3
    assert 0.0 <= artifact.best_macro_f <= 1.0


def test_detection_pipeline_streams_the_file(generated, tmp_path):
    pipeline = DetectionPipeline(DetectionPipelineConfig(artifact_root=str(tmp_path / "Artifacts")))
    pipeline.chunk_frames = 25
    artifact = pipeline.run_pipeline(generated.trace_file_path, events_path=str(tmp_path / "events.jsonl"))
    streamed = load_events(artifact.events_file_path)
    whole = EventDetector().detect(load_trace(generated.trace_file_path))
    assert list(map(signature, streamed.atomic)) == list(map(signature, whole.atomic))
    assert list(map(signature, streamed.complex)) == list(map(signature, whole.complex))
    assert streamed.complex_of("Pass")


def test_sampled_positions_only_cover_event_frames(generated):
    trace = load_trace(generated.trace_file_path)
    events = EventDetector().detect_stream(iter_chunks(trace, 30))
    assert events == EventDetector().detect(trace)

    samples = {10: trace.positions[trace.row(10)]}
    sampled = SampledTrace(samples, trace.roster, trace.start_frame, trace.end_frame, trace.fps)
    assert len(sampled) == len(trace)
    assert list(sampled.position(0, 10)) == list(trace.position(0, 10))
    with pytest.raises(SoccerEventsException):
        sampled.position(0, 11)
