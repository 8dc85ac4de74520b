"""JSON run configuration: parsing, validation, defaults and builders.

The schema ships as ``config_schema.json`` next to this module. Defaults:
``n_seq = 2``, ``controller = "vci"``, ``weight_mode = "stationary"``,
zero default input, ``horizon = 150``, ``seed = 0``, ``runs = 100``,
``controllers = ["cs", "ol", "vci"]``, ``workers = 1``. For the pendulum
plant, ``x0`` and ``cost`` default to the benchmark values; the gain
defaults to the LQR gain for ``cost``.
"""

import json
from dataclasses import asdict, dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from .harness import EpisodeConfig
from .network import DelayModel
from .plant import (
    PENDULUM_Q,
    PENDULUM_R,
    PENDULUM_X0,
    PendulumParams,
    PlantModel,
    lqr_gain,
    pendulum_plant,
)
from .stability import DEFAULT_MAX_ENTRIES

__all__ = ["ConfigError", "RunConfig", "load_schema", "parse_config", "config_from_dict",
           "pendulum_preset"]


class ConfigError(ValueError):
    pass


def load_schema():
    return json.loads(resources.files("vcinet").joinpath("config_schema.json").read_text())


@dataclass
class RunConfig:
    plant: dict
    network: dict
    n_seq: int = 2
    controller: str = "vci"
    weight_mode: str = "stationary"
    default_input: list = None
    horizon: int = 150
    x0: list = None
    cost: dict = None
    gain: list = None
    seed: int = 0
    runs: int = 100
    noise_stds: list = None
    controllers: list = field(default_factory=lambda: ["cs", "ol", "vci"])
    stability_cap: int = DEFAULT_MAX_ENTRIES
    workers: int = 1
    output: dict = field(default_factory=dict)

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}

    @property
    def effective_controller(self):
        if self.controller == "vci" and self.weight_mode == "filtered":
            return "vci-filtered"
        return self.controller

    def build_plant(self, noise_std=None):
        fields = dict(self.plant)
        if fields.pop("type") == "pendulum":
            if noise_std is not None:
                fields["noise_std"] = noise_std
            return pendulum_plant(PendulumParams(**fields))
        cov = fields.get("noise_cov")
        if noise_std is not None:
            cov = noise_std**2 * np.eye(len(fields["a"]))
        return PlantModel(fields["a"], fields["b"], cov)

    def build_delay(self):
        return DelayModel(self.network["pmf"], self.network.get("loss_prob", 0.0))

    def build_gain(self, plant):
        if self.gain is not None:
            return np.asarray(self.gain, dtype=float)
        return lqr_gain(plant.a, plant.b, self.cost["q"], self.cost["r"])

    def episode_config(self, controller=None, noise_std=None, seed=None):
        plant = self.build_plant(noise_std)
        return EpisodeConfig(
            plant=plant,
            delay=self.build_delay(),
            gain=self.build_gain(plant),
            x0=self.x0,
            q=self.cost["q"],
            r=self.cost["r"],
            controller=controller or self.effective_controller,
            n_seq=self.n_seq,
            default_input=self.default_input,
            horizon=self.horizon,
            seed=self.seed if seed is None else seed,
        )

    @property
    def sigma_values(self):
        if self.noise_stds:
            return list(self.noise_stds)
        if self.plant["type"] == "pendulum":
            return [self.plant.get("noise_std", 0.0)]
        return [None]


def _check_shapes(cfg):
    plant = cfg.build_plant()
    s, n = plant.state_dim, plant.input_dim
    if len(cfg.x0) != s:
        raise ConfigError(f"x0: expected {s} entries, got {len(cfg.x0)}")
    q, r = np.asarray(cfg.cost["q"]), np.asarray(cfg.cost["r"])
    if q.shape != (s, s) or r.shape != (n, n):
        raise ConfigError(f"cost: q must be {s}x{s} and r {n}x{n}")
    if cfg.gain is not None and np.asarray(cfg.gain).shape != (n, s):
        raise ConfigError(f"gain: expected shape {n}x{s}")
    if cfg.default_input is not None and len(cfg.default_input) != n:
        raise ConfigError(f"default_input: expected {n} entries")


def config_from_dict(data):
    """Validate a decoded JSON document and fill in defaults."""
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {err.message}")
    pmf = data["network"]["pmf"]
    if abs(sum(pmf) - 1.0) > 1e-9:
        raise ConfigError(f"network.pmf: probabilities must sum to 1, got {sum(pmf):.12g}")

    data = dict(data)
    if data["plant"]["type"] == "pendulum":
        data.setdefault("x0", PENDULUM_X0.tolist())
        data.setdefault("cost", {"q": PENDULUM_Q.tolist(), "r": PENDULUM_R.tolist()})
    else:
        for key in ("x0", "cost"):
            if key not in data:
                raise ConfigError(f"{key}: required for a matrices plant")
    cfg = RunConfig(**data)
    try:
        _check_shapes(cfg)
    except ConfigError:
        raise
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise ConfigError(f"plant: {exc}") from exc
    return cfg


def parse_config(path):
    """Read and validate a JSON config file.

    Raises
    ------
    ConfigError
        Missing file, invalid JSON, or a schema violation (message starts
        with the offending field).
    """
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def pendulum_preset(**overrides):
    """Benchmark cart-pole config as a plain dict."""
    params = asdict(PendulumParams(noise_std=0.006))
    cfg = {
        "plant": {"type": "pendulum", **params},
        "network": {"pmf": [0.05, 0.15, 0.6, 0.15, 0.05], "loss_prob": 0.0},
        "n_seq": 4,
        "controller": "vci",
        "weight_mode": "stationary",
        "horizon": 150,
        "x0": PENDULUM_X0.tolist(),
        "cost": {"q": PENDULUM_Q.tolist(), "r": PENDULUM_R.tolist()},
        "seed": 0,
        "runs": 100,
        "noise_stds": [0.001, 0.003, 0.006, 0.009, 0.012],
        "controllers": ["cs", "ol", "vci"],
    }
    cfg.update(overrides)
    return cfg
