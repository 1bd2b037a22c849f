"""Scene configuration files (YAML) and dataset profiles.

Recognised keys::

    focal_range: [200, 1000]      # pixels
    depth_range: [0.8, 3.0]       # camera-object distance, meters
    xy_box: 0.15                  # side of the xy position box, meters
    image_w: 640
    image_h: 640
    n_points: 1000                # model points per scene
    init_focal: 600               # f used by the initial state, pixels
    box_jitter: 0.0               # std of detection-corner noise, pixels
    max_attempts: 1000            # resampling bound for visibility
    noise:                        # refiner-input error model (std devs)
      focal_rel_sigma: 0.15       # fraction of the true focal length
      trans_xy_sigma: 0.01        # meters
      depth_sigma: 0.05           # meters
      euler_sigma_deg: 15         # degrees, per Euler angle

Errors name the offending line.
"""

from dataclasses import replace

import numpy as np
import yaml

from .scene import SceneConfig

PROFILES = {
    "pix3d": {"K": 15, "depth_range": (0.8, 2.4), "image_w": 640, "image_h": 640},
    "cars": {"K": 55, "depth_range": (0.8, 3.0), "image_w": 300, "image_h": 200},
}

_RANGE_KEYS = ("focal_range", "depth_range")
_FLOAT_KEYS = ("xy_box", "init_focal", "box_jitter")
_INT_KEYS = ("image_w", "image_h", "n_points", "max_attempts")
_NOISE_KEYS = ("focal_rel_sigma", "trans_xy_sigma", "depth_sigma", "euler_sigma_deg")


class ConfigError(ValueError):
    def __init__(self, message, line=None, source=None):
        where = ""
        if source is not None:
            where = f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line


def _line(node):
    return node.start_mark.line + 1


def _scalar(node, kind, key, source):
    if not isinstance(node, yaml.ScalarNode):
        raise ConfigError(f"{key} must be a scalar", _line(node), source)
    value = yaml.safe_load(node.value) if node.tag != "tag:yaml.org,2002:str" else node.value
    try:
        if isinstance(value, bool) or (kind is int and not isinstance(value, int)):
            raise TypeError
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be {kind.__name__}, got {node.value!r}", _line(node), source) from None


def _range(node, key, source):
    if not isinstance(node, yaml.SequenceNode) or len(node.value) != 2:
        raise ConfigError(f"{key} must be a two-element list", _line(node), source)
    lo, hi = (_scalar(n, float, key, source) for n in node.value)
    if not 0 < lo < hi:
        raise ConfigError(f"{key} must satisfy 0 < lo < hi, got [{lo}, {hi}]", _line(node), source)
    return (lo, hi)


def _noise(node, base, source):
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError("noise must be a mapping", _line(node), source)
    values = {}
    for knode, vnode in node.value:
        key = knode.value
        if key not in _NOISE_KEYS:
            raise ConfigError(f"unknown noise key {key!r}", _line(knode), source)
        v = _scalar(vnode, float, key, source)
        if v < 0:
            raise ConfigError(f"{key} must be non-negative", _line(vnode), source)
        if key == "euler_sigma_deg":
            values["euler_sigma"] = float(np.deg2rad(v))
        else:
            values[key] = v
    return replace(base, **values)


def parse_scene_config(text, base=None, source=None):
    """Overlay the YAML mapping in ``text`` onto ``base`` (defaults if None)."""
    base = SceneConfig() if base is None else base
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark else None, source) from None
    if root is None:
        return base
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError("top level must be a mapping", _line(root), source)
    values = {}
    lines = {}
    for knode, vnode in root.value:
        key = knode.value
        lines[key] = _line(knode)
        if key in _RANGE_KEYS:
            values[key] = _range(vnode, key, source)
        elif key in _FLOAT_KEYS:
            values[key] = _scalar(vnode, float, key, source)
        elif key in _INT_KEYS:
            values[key] = _scalar(vnode, int, key, source)
        elif key == "noise":
            values["noise"] = _noise(vnode, base.noise, source)
        else:
            raise ConfigError(f"unknown key {key!r}", _line(knode), source)
    try:
        return replace(base, **values)
    except ValueError as exc:
        line = next((n for k, n in lines.items() if k in str(exc)), None)
        raise ConfigError(str(exc), line, source) from None


def load_scene_config(path, base=None):
    with open(path) as fh:
        text = fh.read()
    return parse_scene_config(text, base, source=str(path))


def profile_config(name, base=None):
    """``(SceneConfig, K)`` for a dataset profile."""
    base = SceneConfig() if base is None else base
    p = PROFILES[name]
    cfg = replace(base, depth_range=p["depth_range"], image_w=p["image_w"], image_h=p["image_h"])
    return cfg, p["K"]

