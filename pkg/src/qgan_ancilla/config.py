"""
Experiment configuration files (YAML).

The file is validated against a JSON schema before anything runs. Errors
carry the line of the offending key, or of the enclosing block when a
required key is missing. See ``README.md`` for the full schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import yaml

from .adversarial.training import ScheduleEvent, TrainConfig
from .ansatz import AncillaConfig, InitMode
from .sim import ContractError

SCHEMA_VERSION = 1

STUDY_KINDS = ("SINGLE", "ANCILLA_SWEEP", "TIMING_SWEEP", "RESTART_SWEEP", "EXPRESSIVITY")
_CONFIGS = [c.value for c in AncillaConfig]
_MODES = [m.value for m in InitMode]


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


_INT0 = {"type": "integer", "minimum": 0}
_INT1 = {"type": "integer", "minimum": 1}
_POS = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = _obj(
    {
        "target": _obj(
            {"hamiltonian": {"enum": ["zzz"]}, "time": {"type": "number"}},
            required=("hamiltonian",),
        ),
        "generator": _obj(
            {"qubits": {"type": "integer", "minimum": 2}, "layers": _INT1, "ancilla_config": {"enum": _CONFIGS}},
        ),
        "training": _obj(
            {
                "max_iters_phase1": _INT0,
                "max_iters_phase2": _INT0,
                "fidelity_threshold": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "lr_generator": _POS,
                "lr_discriminator": _POS,
                "disc_steps_per_iter": _INT1,
                "gen_steps_per_iter": _INT1,
                "seed": _INT0,
                "disc_max_weight": {"anyOf": [_INT1, {"type": "null"}]},
                "clip_bound": _POS,
                "clip_mode": {"enum": ["l2", "box"]},
                "disc_optimizer": {"enum": ["sgd", "adam"]},
                "schedule": {
                    "type": "array",
                    "items": _obj(
                        {
                            "kind": {"enum": ["INSERT_ANCILLA", "RANDOM_RESTART"]},
                            "iteration": _INT0,
                            "config": {"enum": _CONFIGS},
                            "init_mode": {"enum": _MODES},
                            "ratio": {"type": "number", "minimum": 0, "maximum": 1},
                        },
                        required=("kind", "iteration"),
                    ),
                },
            }
        ),
        "study": _obj(
            {
                "kind": {"enum": list(STUDY_KINDS)},
                "runs_per_point": _INT1,
                "configs": {"type": "array", "items": {"enum": _CONFIGS}, "minItems": 1},
                "init_modes": {"type": "array", "items": {"enum": _MODES}, "minItems": 1},
                "timings": {"type": "array", "items": {"enum": ["start", "mid"]}, "minItems": 1},
                "ratios": {
                    "type": "array",
                    "items": {"type": "number", "minimum": 0, "maximum": 1},
                    "minItems": 1,
                },
                "layers": _INT1,
                "samples": _INT1,
                "rel_tol": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
            required=("kind",),
        ),
        "output": _obj(
            {
                "directory": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": ["csv", "json", "png"]}, "uniqueItems": True},
            }
        ),
    },
    required=("target", "generator", "study"),
)

STUDY_DEFAULTS = {
    "runs_per_point": 30,
    "configs": ["NONE", "A1", "A2", "A3", "A4"],
    "init_modes": ["RANDOM", "ZERO"],
    "timings": ["start", "mid"],
    "ratios": [0.0, 0.25, 0.5, 0.75, 1.0],
    "layers": 1,
    "samples": 1000,
    "rel_tol": 1e-10,
}


class ConfigError(ContractError):
    """Invalid experiment file; ``line`` is 1-based when known."""

    def __init__(self, message: str, source: str = "<config>", line: int | None = None):
        self.source, self.line = source, line
        where = f"{source}:{line}" if line else source
        super().__init__(f"{where}: {message}")


@dataclass
class ExperimentConfig:
    target_time: float
    train: TrainConfig
    study_kind: str
    study: dict
    output_dir: Path
    formats: tuple[str, ...]
    raw: dict = field(repr=False, default_factory=dict)

    def runs_per_point(self) -> int:
        return int(self.study["runs_per_point"])


def _line_map(node, path: tuple, lines: dict) -> None:
    """Record the 1-based line of every key and item; reject duplicate keys."""
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        seen = set()
        for key_node, value_node in node.value:
            key = key_node.value
            if key in seen:
                raise ConfigError(f"duplicate key {key!r}", line=key_node.start_mark.line + 1)
            seen.add(key)
            _line_map(value_node, path + (key,), lines)
            lines[path + (key,)] = key_node.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_map(v, path + (i,), lines)


def _describe(err: jsonschema.ValidationError) -> str:
    where = ".".join(str(p) for p in err.absolute_path)
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        return f"unknown key(s) {', '.join(map(repr, extra))}" + (f" in {where!r}" if where else "")
    if err.validator == "required":
        return f"{err.message}" + (f" in {where!r}" if where else "")
    return f"{where or 'document'}: {err.message}"


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}", source,
                          mark.line + 1 if mark else None) from None
    if node is None:
        raise ConfigError("empty configuration", source, 1)
    lines: dict = {}
    try:
        _line_map(node, (), lines)
    except ConfigError as exc:
        raise ConfigError(str(exc).split(": ", 1)[1], source, exc.line) from None
    data = yaml.safe_load(text)
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        path = tuple(err.absolute_path)
        while path not in lines and path:
            path = path[:-1]
        raise ConfigError(_describe(err), source, lines.get(path))
    try:
        return _build(data, source)
    except ConfigError:
        raise
    except ValueError as exc:
        # cross-field checks done by TrainConfig / ScheduleEvent
        raise ConfigError(str(exc), source, lines.get(("training",))) from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc.strerror}", str(path)) from None
    return parse_config(text, str(path))


def _build(data: dict, source: str) -> ExperimentConfig:
    gen = data.get("generator", {})
    training = dict(data.get("training", {}))
    schedule = tuple(ScheduleEvent(**ev) for ev in training.pop("schedule", []))
    train = TrainConfig(
        n_qubits=gen.get("qubits", 3),
        n_layers=gen.get("layers", 3),
        ancilla=gen.get("ancilla_config", "NONE"),
        schedule=schedule,
        **training,
    )
    study = {**STUDY_DEFAULTS, **data["study"]}
    kind = study.pop("kind")
    out = data.get("output", {})
    return ExperimentConfig(
        target_time=float(data["target"].get("time", 1.0)),
        train=train,
        study_kind=kind,
        study=study,
        output_dir=Path(out.get("directory", "results")),
        formats=tuple(out.get("formats", ["csv", "json", "png"])),
        raw=data,
    )
