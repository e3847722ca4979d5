"""Scenario loading and validation tests.

Oracle style: hand-built minimal documents, exact default values, and
error-message paths checked against the offending field.
"""

import json

import numpy as np
import pytest

from quadassist.errors import ScenarioError
from quadassist.scenario import Scenario, load_scenario


def minimal_doc(**overrides):
    doc = {"name": "t"}
    doc.update(overrides)
    return doc


def course_doc():
    return {
        "name": "course",
        "dt": 0.01,
        "seed": 7,
        "duration_ticks": 5000,
        "world": {
            "base_start": {"x": 0.5, "yaw": 0.1},
            "head": {"position": [2.0, 1.0, 1.0], "axis": [0, -1, 0]},
            "fixtures": {
                "mailbox": {"kind": "mailbox", "position": [2.0, 0.3, 0.7]},
                "table": {"kind": "region", "center": [2.0, -0.5, 0.7],
                          "half_extents": [0.3, 0.3, 0.1]},
                "brush": {"kind": "toothbrush", "position": [2.5, 1.0, 0.7]},
                "cup": {"kind": "cup", "position": [2.7, 1.0, 0.7]},
            },
        },
        "tasks": [
            {"id": "mail", "type": "mailbox_package", "fixtures": ["mailbox", "table"]},
            {"id": "teeth", "type": "toothbrush", "fixtures": ["brush", "cup"]},
        ],
        "config": {
            "quadstick": {"deadzone": 0.1},
            "voice": {"keywords": {"stop": ["stop"], "retreat": ["back"],
                                   "start": ["go"]}},
        },
    }


def test_minimal_document_fills_defaults():
    sc = load_scenario(minimal_doc())
    assert isinstance(sc, Scenario)
    assert sc.dt == 0.01
    assert sc.seed == 0
    assert sc.tasks == []  # empty course is a valid free-driving session
    assert sc.max_points == 0
    assert sc.deadzone == 0.08
    assert sc.switch_latency == 2.0
    assert sc.caps.ee_linear == 0.15
    assert sc.limits.linear_accel == 2.0
    assert sc.safety.standoff == 0.10
    assert sc.base_start == (0.0, 0.0, 0.0)
    assert sc.arm_start.shape == (6,)
    assert sc.model.origins.shape[0] == 7


def test_course_document_resolves():
    sc = load_scenario(course_doc())
    assert [t.id for t in sc.tasks] == ["mail", "teeth"]
    assert sc.tasks[0].subgoals == ("door_open", "package_on_table")
    assert sc.max_points == 4
    assert sc.deadzone == 0.1
    assert sc.fixtures["mailbox"]["door_width"] == 0.25  # default filled
    assert np.allclose(sc.head_axis, [0, -1, 0])
    from quadassist.voice import VoiceCommand
    assert sc.keywords.keywords[VoiceCommand.START_FACE_TOUCH] == frozenset({"go"})


def test_digest_stable_and_sensitive():
    a = load_scenario(course_doc())
    b = load_scenario(course_doc())
    assert a.digest == b.digest
    doc = course_doc()
    doc["world"]["fixtures"]["cup"]["radius"] = 0.09
    assert load_scenario(doc).digest != a.digest


def test_defaults_do_not_change_digest():
    doc = course_doc()
    explicit = course_doc()
    explicit["config"]["quadstick"]["switch_latency"] = 2.0
    assert load_scenario(doc).digest == load_scenario(explicit).digest


def test_unknown_fields_rejected_with_path():
    with pytest.raises(ScenarioError, match="scenario"):
        load_scenario(minimal_doc(bogus=1))
    doc = course_doc()
    doc["config"]["quadstick"]["dead_zone"] = 0.1
    with pytest.raises(ScenarioError, match="config.quadstick"):
        load_scenario(doc)
    doc = course_doc()
    doc["world"]["fixtures"]["cup"]["colour"] = "red"
    with pytest.raises(ScenarioError, match="world.fixtures.cup"):
        load_scenario(doc)


def test_unresolved_fixture_reference():
    doc = course_doc()
    doc["tasks"][0]["fixtures"] = ["mailbox", "missing_table"]
    with pytest.raises(ScenarioError, match="undefined fixture 'missing_table'"):
        load_scenario(doc)


def test_fixture_kind_mismatch():
    doc = course_doc()
    doc["tasks"][0]["fixtures"] = ["mailbox", "cup"]  # cup is not a region
    with pytest.raises(ScenarioError, match="kind 'cup'"):
        load_scenario(doc)


def test_toothbrush_requires_head():
    doc = course_doc()
    del doc["world"]["head"]
    with pytest.raises(ScenarioError, match="world.head"):
        load_scenario(doc)


def test_duplicate_task_id():
    doc = course_doc()
    doc["tasks"][1]["id"] = "mail"
    with pytest.raises(ScenarioError, match="duplicate task id"):
        load_scenario(doc)


def test_unknown_task_type():
    doc = course_doc()
    doc["tasks"][0]["type"] = "wormhole"
    with pytest.raises(ScenarioError, match="tasks\\[0\\].type"):
        load_scenario(doc)


def test_bad_values_report_path():
    with pytest.raises(ScenarioError, match="scenario.dt"):
        load_scenario(minimal_doc(dt=-0.01))
    doc = course_doc()
    doc["world"]["fixtures"]["table"]["half_extents"] = [0.3, -0.1, 0.1]
    with pytest.raises(ScenarioError, match="half_extents"):
        load_scenario(doc)
    doc = course_doc()
    doc["world"]["head"]["axis"] = [0, 0, 0]
    with pytest.raises(ScenarioError, match="nonzero"):
        load_scenario(doc)
    doc = course_doc()
    doc["config"]["kinematics"] = {"penalties": [1, 2, 3]}
    with pytest.raises(ScenarioError, match="penalties"):
        load_scenario(doc)


def test_arm_start_variants():
    doc = minimal_doc(world={"arm_start": "top"})
    sc = load_scenario(doc)
    assert sc.arm_start[1] == pytest.approx(-0.3)
    doc = minimal_doc(world={"arm_start": [0, 0.1, -0.2, 0, 0.3, 0]})
    assert np.allclose(load_scenario(doc).arm_start, [0, 0.1, -0.2, 0, 0.3, 0])
    with pytest.raises(ScenarioError, match="arm_start"):
        load_scenario(minimal_doc(world={"arm_start": "sideways"}))
    with pytest.raises(ScenarioError, match="arm_start"):
        load_scenario(minimal_doc(world={"arm_start": [1, 2]}))


def test_json_parse_error_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "name": "x",\n  oops\n}\n')
    with pytest.raises(ScenarioError, match="line 3"):
        load_scenario(p)


def test_missing_file():
    with pytest.raises(ScenarioError, match="cannot read"):
        load_scenario("/nonexistent/path.json")


def test_file_round_trip(tmp_path):
    p = tmp_path / "course.json"
    p.write_text(json.dumps(course_doc()))
    sc = load_scenario(p)
    assert sc.name == "course"
    assert sc.digest == load_scenario(course_doc()).digest


def test_voice_keyword_override_validated():
    doc = course_doc()
    doc["config"]["voice"]["keywords"] = {"stop": ["stop"], "retreat": ["stop"],
                                          "start": ["go"]}
    with pytest.raises(Exception):  # overlapping keywords rejected downstream
        load_scenario(doc)
    doc["config"]["voice"]["keywords"] = {"stop": [1]}
    with pytest.raises(ScenarioError, match="keywords.stop"):
        load_scenario(doc)


def test_inline_robot_model():
    from quadassist.model import default_model

    doc = minimal_doc(robot_model=default_model().to_dict())
    sc = load_scenario(doc)
    assert sc.model.axes.shape == (6, 3)
    with pytest.raises(ScenarioError, match="robot_model"):
        load_scenario(minimal_doc(robot_model=42))
