import io
from pathlib import Path

import numpy as np
import pytest

from conftest import random_state
from posefocal.config import ConfigError, load_scene_config, parse_scene_config, profile_config
from posefocal.records import RecordError, StateRecord, read_states, read_table, write_states, write_table
from posefocal.scene import SceneConfig
from posefocal.update import Detection2D

FIX = Path(__file__).resolve().parent / "fixtures"


def test_example_config_loads():
    cfg = load_scene_config(FIX / "scene.yaml")
    assert cfg.focal_range == (300.0, 900.0)
    assert cfg.depth_range == (0.8, 2.4)
    assert (cfg.image_w, cfg.image_h, cfg.n_points) == (640, 480, 200)
    assert cfg.noise.euler_sigma == pytest.approx(np.deg2rad(10))
    assert cfg.noise.depth_sigma == 0.05  # untouched default


def test_empty_config_is_base():
    base = SceneConfig(n_points=7)
    assert parse_scene_config("", base) == base


@pytest.mark.parametrize(
    "text, line",
    [
        ("image_w: 640\nbogus: 1\n", 2),
        ("image_w: 640\nimage_h: 4.5\n", 2),
        ("focal_range: [900, 300]\n", 1),
        ("focal_range: [1, 2, 3]\n", 1),
        ("noise:\n  depth_sigma: -1\n", 2),
        ("noise:\n  colour: 1\n", 2),
        ("xy_box: abc\n", 1),
        ("image_w: [1\n", 2),
    ],
)
def test_config_errors_name_line(text, line):
    with pytest.raises(ConfigError) as exc:
        parse_scene_config(text, source="cfg.yaml")
    assert exc.value.line == line
    assert str(exc.value).startswith(f"cfg.yaml:{line}:")


def test_config_top_level_must_be_mapping():
    with pytest.raises(ConfigError):
        parse_scene_config("- 1\n- 2\n")


def test_profiles():
    cfg, K = profile_config("pix3d")
    assert K == 15 and cfg.depth_range == (0.8, 2.4)
    cfg, K = profile_config("cars")
    assert K == 55 and cfg.depth_range == (0.8, 3.0) and (cfg.image_w, cfg.image_h) == (300, 200)


def _records(rng, n=5):
    return [
        StateRecord(random_state(rng), i, 1000 + i, Detection2D(1.5, 2.25, 100.0 + i, 80.0), 640, 480)
        for i in range(n)
    ]


@pytest.mark.parametrize("fmt", ["csv", "jsonl"])
def test_states_roundtrip_exact(rng, fmt):
    recs = _records(rng)
    buf = io.StringIO()
    write_states(buf, recs, fmt)
    back = read_states(io.StringIO(buf.getvalue()))
    assert len(back) == len(recs)
    for a, b in zip(recs, back):
        assert a.state == b.state
        assert (a.index, a.seed, a.image_w, a.image_h) == (b.index, b.seed, b.image_w, b.image_h)
        assert a.box.as_tuple() == b.box.as_tuple()


@pytest.mark.parametrize("fmt", ["csv", "jsonl"])
def test_optional_fields(rng, fmt):
    buf = io.StringIO()
    write_states(buf, [StateRecord(random_state(rng))], fmt)
    (rec,) = read_states(io.StringIO(buf.getvalue()))
    assert rec.seed is None and rec.box is None and rec.image_w is None


@pytest.mark.parametrize("fmt", ["csv", "jsonl"])
def test_corrupted_line_reports_number(rng, fmt):
    buf = io.StringIO()
    write_states(buf, _records(rng), fmt)
    lines = buf.getvalue().splitlines()
    bad = 4 if fmt == "csv" else 3  # second record in both encodings
    lines[bad - 1] = lines[bad - 1][: len(lines[bad - 1]) // 2]
    with pytest.raises(RecordError) as exc:
        read_states(io.StringIO("\n".join(lines) + "\n"), source="x")
    assert exc.value.line == bad


def test_invalid_state_values_rejected(rng):
    buf = io.StringIO()
    write_states(buf, _records(rng, 1), "csv")
    text = buf.getvalue().replace(",640,480", ",640,")
    with pytest.raises(RecordError):
        read_states(io.StringIO(text))


def test_bad_header():
    with pytest.raises(RecordError) as exc:
        read_states(io.StringIO("index,f\n1,2\n"))
    assert exc.value.line == 1
    with pytest.raises(RecordError):
        read_states(io.StringIO(""))


@pytest.mark.parametrize("fmt", ["csv", "jsonl"])
def test_table_roundtrip(fmt):
    buf = io.StringIO()
    write_table(buf, "report", ("a", "b"), [[1, 0.1], [2, np.float64(1 / 3)]], fmt)
    cols, rows = read_table(io.StringIO(buf.getvalue()), "report")
    assert cols == ["a", "b"]
    assert float(rows[1][1]) == 1 / 3
