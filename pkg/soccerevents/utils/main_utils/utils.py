import json
import os
import sys
from typing import Iterable, List

import yaml

from soccerevents.exception.exception import DataFileNotFound, SoccerEventsException
from soccerevents.logging.logger import logging


def _make_parent(file_path: str) -> None:
    parent = os.path.dirname(file_path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def read_yaml_file(file_path: str) -> dict:
    """
    Reads a YAML (or JSON) file and returns its contents as a dictionary.

    Args:
        file_path (str): Path to the file.

    Returns:
        dict: Contents of the file, empty when the file is empty.

    Raises:
        DataFileNotFound: If the file does not exist.
        SoccerEventsException: If the file cannot be parsed.
    """
    if not os.path.exists(file_path):
        raise DataFileNotFound(file_path)
    try:
        with open(file_path, "rb") as yaml_file:
            return yaml.safe_load(yaml_file) or {}

    except Exception as e:
        raise SoccerEventsException(e, sys)


def write_json_file(file_path: str, content: object) -> None:
    try:
        _make_parent(file_path)
        with open(file_path, "w", encoding="utf-8") as file:
            json.dump(content, file, indent=2, sort_keys=False)
            file.write("\n")
        logging.info(f"Wrote {file_path}")
    except Exception as e:
        raise SoccerEventsException(e, sys)


def read_jsonl_file(file_path: str) -> List[tuple]:
    """
    Reads a JSON-lines file.

    Returns:
        list: ``(line_number, record)`` pairs for every non-blank line, numbered from 1.
    """
    if not os.path.exists(file_path):
        raise DataFileNotFound(file_path)
    records = []
    with open(file_path, "r", encoding="utf-8") as file:
        for number, line in enumerate(file, start=1):
            if line.strip():
                records.append((number, line))
    return records


def write_jsonl_file(file_path: str, records: Iterable[dict]) -> None:
    try:
        _make_parent(file_path)
        with open(file_path, "w", encoding="utf-8") as file:
            for record in records:
                file.write(json.dumps(record, separators=(", ", ": ")))
                file.write("\n")
    except Exception as e:
        raise SoccerEventsException(e, sys)


def write_text_file(file_path: str, text: str) -> None:
    try:
        _make_parent(file_path)
        with open(file_path, "w", encoding="utf-8") as file:
            file.write(text)
    except Exception as e:
        raise SoccerEventsException(e, sys)
