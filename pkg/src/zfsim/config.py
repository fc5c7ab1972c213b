"""Run configuration: typed fields, key=value file parsing, hashing."""

import dataclasses
import hashlib
from dataclasses import dataclass, field

from .channel import ArrayGeometry


class ParseError(Exception):
    """Config file rejected; message carries line/field diagnostics."""


def _float_list(text):
    return [float(tok) for tok in str(text).split(",") if tok.strip() != ""]


def _int_list(text):
    return [int(tok) for tok in str(text).split(",") if tok.strip() != ""]


@dataclass
class SimulationConfig:
    # array
    geometry: str = "upa"
    m_x: int = 8
    m_z: int = 16
    d_x: float = 0.5
    d_z: float = 0.7
    # users and multipath
    n_ues: int = 4
    n_paths: int = 20
    asd_az: float = 10.0
    asd_el: float = 5.0
    # canonical placement: user k sits at reference + (k-1)*separation in
    # the swept dimension (azimuth for azimuth scenarios, elevation for
    # elevation scenarios); the non-swept coordinate stays at the
    # reference. The reference azimuth is array broadside.
    ref_az: float = 90.0
    ref_el: float = 100.0
    ue_az_list: list = field(default_factory=list)
    ue_el_list: list = field(default_factory=list)
    az_separations: list = field(default_factory=lambda: [30.0, 10.0, 7.5, 5.0])
    el_separations: list = field(default_factory=lambda: [15.0, 10.0])
    # link budget
    beta_mode: str = "unit"
    cell_radius_m: float = 500.0
    # sweep axes and sampling
    operating_snr_db: list = field(default_factory=lambda: [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0])
    n_drops: int = 200
    n_realizations_per_drop: int = 200
    seed: int = 20260809
    neumann_order: int = 2
    ns_m_values: list = field(default_factory=lambda: [10, 32, 64, 128, 256])

    _LIST_FIELDS = {
        "ue_az_list": _float_list,
        "ue_el_list": _float_list,
        "az_separations": _float_list,
        "el_separations": _float_list,
        "operating_snr_db": _float_list,
        "ns_m_values": _int_list,
    }

    def validate(self):
        if self.geometry not in ("ula", "upa"):
            raise ParseError(f"geometry must be 'ula' or 'upa', got {self.geometry!r}")
        if self.beta_mode not in ("unit", "link_budget"):
            raise ParseError(f"beta_mode must be 'unit' or 'link_budget', got {self.beta_mode!r}")
        counts = {"m_x": self.m_x, "m_z": self.m_z, "n_ues": self.n_ues,
                  "n_paths": self.n_paths, "n_drops": self.n_drops,
                  "n_realizations_per_drop": self.n_realizations_per_drop}
        for name, value in counts.items():
            if value < 1:
                raise ParseError(f"{name} must be >= 1, got {value}")
        if self.n_ues > self.m_x * self.m_z:
            raise ParseError(f"n_ues={self.n_ues} exceeds antenna count {self.m_x * self.m_z}")
        if not 0 <= self.neumann_order <= 8:
            raise ParseError(f"neumann_order must be in [0, 8], got {self.neumann_order}")
        for name in ("asd_az", "asd_el"):
            if getattr(self, name) < 0:
                raise ParseError(f"{name} must be >= 0")
        if any(s < 0 for s in self.az_separations + self.el_separations):
            raise ParseError("separations must be >= 0")
        if self.cell_radius_m <= 0:
            raise ParseError("cell_radius_m must be positive")
        if bool(self.ue_az_list) != bool(self.ue_el_list):
            raise ParseError("explicit placement needs both ue_az_list and ue_el_list")
        if self.ue_az_list and len(self.ue_az_list) != self.n_ues:
            raise ParseError("explicit placement lists must have n_ues entries")
        return self

    def array_geometry(self, m_x=None, m_z=None):
        return ArrayGeometry(kind=self.geometry,
                             m_x=self.m_x if m_x is None else m_x,
                             m_z=self.m_z if m_z is None else m_z,
                             d_x=self.d_x, d_z=self.d_z)

    def key_values(self):
        """Stable (key, value-string) pairs; inverse of the file format."""
        out = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, list):
                out.append((f.name, ",".join(f"{v:g}" if isinstance(v, float) else str(v)
                                             for v in value)))
            else:
                out.append((f.name, str(value)))
        return out

    def content_hash(self):
        blob = "\n".join(f"{k}={v}" for k, v in sorted(self.key_values()))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def default_config(experiment):
    """Per-experiment default sampling sizes (placement/channel shared)."""
    cfg = SimulationConfig()
    if experiment == "ns-accuracy":
        cfg.n_drops = 100
        cfg.n_realizations_per_drop = 10  # 1000 samples per antenna count
    elif experiment == "oracle":
        cfg.m_x = 4
        cfg.m_z = 4
        cfg.n_ues = 2
        cfg.n_drops = 1
        cfg.n_realizations_per_drop = 100_000
    elif experiment not in ("snr-sweep", "se-sweep"):
        raise ValueError(f"unknown experiment {experiment!r}")
    return cfg.validate()


def dump_config(cfg):
    return "".join(f"{k} = {v}\n" for k, v in cfg.key_values())


def load_config(path, experiment="snr-sweep"):
    """Parse a key = value config file. Unknown keys are hard errors."""
    cfg = default_config(experiment)
    fields = {f.name: f for f in dataclasses.fields(cfg)}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in fields:
                raise ParseError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                if key in SimulationConfig._LIST_FIELDS:
                    parsed = SimulationConfig._LIST_FIELDS[key](value)
                else:
                    parsed = type(getattr(cfg, key))(value)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
            setattr(cfg, key, parsed)
    return cfg.validate()
