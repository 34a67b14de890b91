"""Run configuration: dataclass of defaults, YAML loading, validation.

The YAML file is organized in sections (physical, scaling, timing, synthesis,
architecture, thermal, factories); every key is optional and absent keys keep
their defaults.  Unknown sections or keys warn rather than fail, so configs
written for newer versions degrade gracefully; values that violate an
invariant (e.g. a physical error rate at or above threshold) are hard errors.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .architecture import DEFAULT_FACTORIES, TFactory
from .scalefit import SCALING_PRESETS
from .thermal import DEFAULT_THERMAL, LineClass, ThermalConfig

__all__ = ["ArchConfig", "ConfigError", "load_config", "config_from_mapping"]


class ConfigError(ValueError):
    """Raised when a configuration value violates an invariant."""


@dataclass(frozen=True)
class ArchConfig:
    """All architectural knobs for one estimation run."""

    # physical
    p: float = 1e-3                  # physical error rate per operation
    t: float = 25e-9                 # characteristic intra-module gate time (s)
    n_phys_per_module: int = 1_000_000
    # scaling law
    kappa: float = 0.009
    p_thresh: float = 0.016
    # timing
    t_inter: float = 1e-6            # inter-module operation time (s)
    t_decoder: float = 1e-6          # decoder cycle time (s)
    n_algo_reps: int = 1
    # gate synthesis
    c0: float = 0.57
    c1: float = 8.83
    epsilon: float | None = None     # fixed precision override (None = solve)
    # architecture
    p_algo_fail: float = 0.05        # total algorithm failure budget
    n_inter_pipes: int = 1
    qubit_pitch: float = 1e-3        # physical qubit pitch (m)
    couplers_per_qubit: float = 2.0
    fan_out: int = 4                 # preparation MPPO fan-out cap
    max_active_qubits: int = 64      # widgetization split thresholds
    max_gates: int = 4096
    slice_moments: int = 16
    # thermal model
    thermal: ThermalConfig = field(default_factory=lambda: DEFAULT_THERMAL)
    # distillation units, scanned in listed order
    factories: tuple[TFactory, ...] = DEFAULT_FACTORIES

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        problems: list[str] = []
        if not 0 < self.p < self.p_thresh:
            problems.append(
                f"physical.p: need 0 < p < p_thresh, got p={self.p}, "
                f"p_thresh={self.p_thresh}")
        if not 0 < self.p_thresh < 1:
            problems.append(f"scaling.p_thresh out of (0, 1): {self.p_thresh}")
        if self.kappa <= 0:
            problems.append(f"scaling.kappa must be positive: {self.kappa}")
        if not 0 < self.p_algo_fail < 1:
            problems.append(
                f"architecture.p_algo_fail out of (0, 1): {self.p_algo_fail}")
        for name in ("t", "t_inter", "t_decoder"):
            if getattr(self, name) <= 0:
                problems.append(f"{name} must be positive: {getattr(self, name)}")
        if self.epsilon is not None and not 0 < self.epsilon <= 1:
            problems.append(
                f"synthesis.epsilon out of (0, 1]: {self.epsilon}")
        if self.n_phys_per_module < 1:
            problems.append("physical.n_phys_per_module must be >= 1")
        if self.n_inter_pipes < 1:
            problems.append("architecture.n_inter_pipes must be >= 1")
        if self.n_algo_reps < 1:
            problems.append("timing.n_algo_reps must be >= 1")
        if self.qubit_pitch <= 0:
            problems.append("architecture.qubit_pitch must be positive")
        if self.couplers_per_qubit < 0:
            problems.append("architecture.couplers_per_qubit must be >= 0")
        if self.fan_out < 1:
            problems.append("architecture.fan_out must be >= 1")
        if min(self.max_active_qubits, self.max_gates, self.slice_moments) < 1:
            problems.append("widgetization thresholds must all be >= 1")
        if not self.factories:
            problems.append("factories: need at least one distillation unit")
        if problems:
            raise ConfigError("; ".join(problems))


# section -> {yaml key -> ArchConfig field}
_SECTIONS: dict[str, dict[str, str]] = {
    "physical": {
        "p": "p",
        "t": "t",
        "n_phys_per_module": "n_phys_per_module",
    },
    "scaling": {
        "kappa": "kappa",
        "p_thresh": "p_thresh",
    },
    "timing": {
        "t_inter": "t_inter",
        "t_decoder": "t_decoder",
        "n_algo_reps": "n_algo_reps",
    },
    "synthesis": {
        "c0": "c0",
        "c1": "c1",
        "epsilon": "epsilon",
    },
    "architecture": {
        "p_algo_fail": "p_algo_fail",
        "n_inter_pipes": "n_inter_pipes",
        "qubit_pitch": "qubit_pitch",
        "couplers_per_qubit": "couplers_per_qubit",
        "fan_out": "fan_out",
        "max_active_qubits": "max_active_qubits",
        "max_gates": "max_gates",
        "slice_moments": "slice_moments",
    },
}

_INT_FIELDS = {"n_phys_per_module", "n_algo_reps", "n_inter_pipes", "fan_out",
               "max_active_qubits", "max_gates", "slice_moments"}


def _coerce(field_name: str, value):
    if value is None:
        return None
    if field_name in _INT_FIELDS:
        return int(value)
    return float(value)


def config_from_mapping(data: dict | None, *, source: str = "<config>") -> ArchConfig:
    """Build an ArchConfig from a parsed YAML mapping (None = all defaults)."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")

    overrides: dict[str, object] = {}
    for section, content in data.items():
        if section == "factories":
            overrides["factories"] = _parse_factories(content, source)
            continue
        if section == "thermal":
            overrides["thermal"] = _parse_thermal(content, source)
            continue
        known = _SECTIONS.get(section)
        if known is None:
            warnings.warn(f"{source}: unknown config section {section!r} ignored")
            continue
        if content is None:
            continue
        if not isinstance(content, dict):
            raise ConfigError(f"{source}: section {section!r} must be a mapping")
        for key, value in content.items():
            if section == "scaling" and key == "preset":
                preset = SCALING_PRESETS.get(str(value))
                if preset is None:
                    raise ConfigError(
                        f"{source}: unknown scaling preset {value!r}; "
                        f"choices: {sorted(SCALING_PRESETS)}")
                overrides["kappa"], overrides["p_thresh"] = preset
                continue
            target = known.get(key)
            if target is None:
                warnings.warn(
                    f"{source}: unknown key {section}.{key} ignored")
                continue
            try:
                overrides[target] = _coerce(target, value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{source}: {section}.{key}: {exc}") from exc

    try:
        return ArchConfig(**overrides)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def _parse_factories(content, source: str) -> tuple[TFactory, ...]:
    if not isinstance(content, list) or not content:
        raise ConfigError(f"{source}: factories must be a nonempty list")
    rows: list[TFactory] = []
    for i, row in enumerate(content):
        if not isinstance(row, dict):
            raise ConfigError(f"{source}: factories[{i}] must be a mapping")
        known = {"name", "p_out", "width", "length", "qubits", "cycles"}
        for key in row.keys() - known:
            warnings.warn(f"{source}: unknown key factories[{i}].{key} ignored")
        try:
            rows.append(TFactory(
                name=str(row["name"]),
                p_out=float(row["p_out"]),
                l_width=int(row["width"]),
                l_length=int(row["length"]),
                q_phys=int(row["qubits"]),
                cycles=float(row["cycles"]),
            ))
        except KeyError as exc:
            raise ConfigError(
                f"{source}: factories[{i}] missing key {exc.args[0]!r}") from exc
        except ValueError as exc:
            raise ConfigError(f"{source}: factories[{i}]: {exc}") from exc
    return tuple(rows)


def _parse_thermal(content, source: str) -> ThermalConfig:
    if content is None:
        return DEFAULT_THERMAL
    if not isinstance(content, dict):
        raise ConfigError(f"{source}: thermal must be a mapping")
    kwargs = {
        "eta_4k": DEFAULT_THERMAL.eta_4k,
        "eta_20mk": DEFAULT_THERMAL.eta_20mk,
        "p_decoding_core": DEFAULT_THERMAL.p_decoding_core,
    }
    lines = {c.name: c for c in DEFAULT_THERMAL.lines}
    for key, value in content.items():
        if key in kwargs:
            kwargs[key] = float(value)
        elif key == "lines":
            if not isinstance(value, dict):
                raise ConfigError(f"{source}: thermal.lines must be a mapping")
            for name, entry in value.items():
                base = lines.get(name)
                if base is None:
                    warnings.warn(
                        f"{source}: unknown thermal line class {name!r} ignored")
                    continue
                if not isinstance(entry, dict):
                    raise ConfigError(
                        f"{source}: thermal.lines.{name} must be a mapping")
                for k in entry.keys() - {"per_qubit", "load_4k", "load_20mk"}:
                    warnings.warn(
                        f"{source}: unknown key thermal.lines.{name}.{k} ignored")
                try:
                    lines[name] = LineClass(
                        name=name,
                        per_qubit=float(entry.get("per_qubit", base.per_qubit)),
                        load_4k=float(entry.get("load_4k", base.load_4k)),
                        load_20mk=float(entry.get("load_20mk", base.load_20mk)),
                    )
                except ValueError as exc:
                    raise ConfigError(
                        f"{source}: thermal.lines.{name}: {exc}") from exc
        else:
            warnings.warn(f"{source}: unknown key thermal.{key} ignored")
    try:
        return ThermalConfig(lines=tuple(lines.values()), **kwargs)
    except ValueError as exc:
        raise ConfigError(f"{source}: thermal: {exc}") from exc


def load_config(path: str | Path | None) -> ArchConfig:
    """Load a YAML config file; None or an empty file yields all defaults."""
    if path is None:
        return ArchConfig()
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return config_from_mapping(data, source=str(path))


def describe_defaults() -> str:
    """Human-readable table of every field and its default."""
    cfg = ArchConfig()
    rows = []
    for f in fields(cfg):
        if f.name in ("thermal", "factories"):
            continue
        rows.append(f"{f.name} = {getattr(cfg, f.name)}")
    rows.append(f"thermal = {cfg.thermal}")
    rows.append("factories = " + ", ".join(x.name for x in cfg.factories))
    return "\n".join(rows)
