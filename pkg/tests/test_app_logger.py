import json
import logging

from manager.run_program import make_app_state
from util.app_logger import init_logger, log_paths, run_name


def test_run_name_is_file_safe(make_config):
    app_state = make_app_state(make_config(family={"id": "flat"}))
    assert run_name(app_state) == "smooth2d-flat"
    config = make_config(suite="assumption", family={"id": "slope-field:demo/sampled-osgood.txt"})
    assert run_name(make_app_state(config)) == "assumption-slope-field_demo_sampled-osgood.txt"


def test_log_paths_create_directory(tmp_path):
    json_path, text_path = log_paths(str(tmp_path / "logs"), "run")
    assert (tmp_path / "logs").is_dir()
    assert json_path.endswith(".json")
    assert text_path.endswith(".log")


def test_records_reach_both_files(make_config, tmp_path):
    app_state = make_app_state(make_config(family={"id": "flat"}))
    logger, listener = init_logger(app_state, logging.DEBUG, logger_name="lamination-test", directory=str(tmp_path))
    try:
        logger.debug("detail")
        logger.info("summary", extra={"check": "plateau"})
    finally:
        listener.stop()
        for handler in logger.handlers[:]:
            logger.removeHandler(handler)

    (json_file,) = tmp_path.glob("*.json")
    (text_file,) = tmp_path.glob("*.log")
    records = [json.loads(line) for line in json_file.read_text().splitlines()]
    assert [r["msg"] for r in records] == ["detail", "summary"]
    assert records[1]["level"] == "INFO"
    assert records[1]["check"] == "plateau"
    assert "time" in records[0]
    text = text_file.read_text()
    assert "detail" not in text
    assert "::INFO::lamination-test: summary" in text
