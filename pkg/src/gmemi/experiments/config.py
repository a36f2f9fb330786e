"""Key/value run configuration for sweeps and checks.

A config file is plain ``key = value`` lines (``#`` starts a comment). List
values are comma separated. Recognized keys are exactly those in
:data:`CONFIG_KEYS`; anything else is rejected.

``model``, ``d`` and ``snr_db`` may be lists and span the sweep grid.
``lambda``, ``alpha`` and ``theta`` are either one value for all models or a
list aligned with ``model``; omitted ones fall back to per-scenario defaults.
"""

import configparser
import math
from dataclasses import dataclass, replace

from .models import model_info, parse_constraint

__all__ = [
    "CONFIG_KEYS",
    "SCENARIOS",
    "ConfigError",
    "TrialConfig",
    "load_config",
    "parse_config_text",
    "default_params",
    "scenario_defaults",
]

CONFIG_KEYS = (
    "scenario", "model", "n", "d", "snr_db", "trials", "rng_seed",
    "lambda", "alpha", "theta", "threshold", "max_iters", "constraint",
)

SCENARIOS = ("block-sparse", "piecewise-linear", "penalty-curve")

# (lambda, alpha, theta) used by --fixed runs; tuned once on held-out seeds
_DEFAULTS = {
    "block-sparse": {
        "gme-lop": (2.0, 12.0, 0.9),
        "lop": (0.5, 12.0, 0.0),
        "gme-l21": (8.0, 4.0, 0.95),
        "l21": (8.0, 4.0, 0.0),
        "gme-l1": (8.0, 1.0, 0.95),
        "l1": (8.0, 1.0, 0.0),
    },
    "piecewise-linear": {
        "gme-tgv": (8.0, 0.6, 0.7),
        "tgv": (4.0, 0.6, 0.0),
        "gme-tv": (1.0, 1.0, 0.95),
        "tv": (1.0, 1.0, 0.0),
    },
}

_SCENARIO_DEFAULTS = {
    "block-sparse": dict(n=256, d=(220,), snr_db=(40.0,), constraint="whole"),
    "piecewise-linear": dict(n=128, d=(100,), snr_db=(30.0,), constraint="box"),
    "penalty-curve": dict(n=50, d=(1,), snr_db=(math.inf,), constraint="whole"),
}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


def default_params(scenario, model):
    """Default ``(lambda, alpha, theta)`` of a model in a scenario."""
    table = _DEFAULTS.get(scenario, {})
    if model in table:
        return table[model]
    for tab in _DEFAULTS.values():
        if model in tab:
            return tab[model]
    raise ConfigError(f"no default parameters for model {model!r}")


def scenario_defaults(scenario):
    """Default ``n``, ``d``, ``snr_db`` and ``constraint`` of a scenario."""
    if scenario not in _SCENARIO_DEFAULTS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    return dict(_SCENARIO_DEFAULTS[scenario])


@dataclass(frozen=True)
class TrialConfig:
    scenario: str
    models: tuple
    n: int
    ds: tuple
    snr_dbs: tuple
    trials: int = 20
    rng_seed: int = 0
    lams: tuple = ()
    alphas: tuple = ()
    thetas: tuple = ()
    threshold: float = 1e-4
    max_iters: int = 10000
    constraint: str = "whole"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if not self.models:
            raise ConfigError("at least one model is required")
        for mname in self.models:
            try:
                model_info(mname)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.n < 4:
            raise ConfigError("n must be at least 4")
        if any(d < 1 for d in self.ds):
            raise ConfigError("d must be at least 1")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.threshold > 0:
            raise ConfigError("threshold must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        for name, vals in (("lambda", self.lams), ("alpha", self.alphas), ("theta", self.thetas)):
            if len(vals) != len(self.models):
                raise ConfigError(f"{name} needs one value or one per model")
        for mname, lam, alpha, theta in zip(self.models, self.lams, self.alphas, self.thetas):
            if not lam > 0:
                raise ConfigError("lambda must be positive")
            if not 0.0 <= theta <= 1.0:
                raise ConfigError("theta must lie in [0, 1]")
            fam = model_info(mname).family
            if fam == "tgv" and not 0.0 < alpha < 1.0:
                raise ConfigError("tgv models need alpha in (0, 1)")
            if fam == "lop" and alpha < 0:
                raise ConfigError("lop models need alpha >= 0")
            if fam == "l21" and round(alpha) < 1:
                raise ConfigError("l21 models read alpha as a group length >= 1")
        try:
            parse_constraint(self.constraint)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def params_for(self, model):
        i = self.models.index(model)
        return self.lams[i], self.alphas[i], self.thetas[i]

    def cells(self):
        """Grid cells ``(model, d, snr_db)`` in deterministic order."""
        return [(m, d, s) for m in self.models for d in self.ds for s in self.snr_dbs]

    def with_params(self, model, lam, alpha, theta):
        i = self.models.index(model)
        lams, alphas, thetas = list(self.lams), list(self.alphas), list(self.thetas)
        lams[i], alphas[i], thetas[i] = lam, alpha, theta
        return replace(self, lams=tuple(lams), alphas=tuple(alphas), thetas=tuple(thetas))


def _split(value):
    return [v.strip() for v in value.split(",") if v.strip()]


def _num(text, key, kind=float):
    t = text.strip().lower()
    try:
        if kind is float and t in ("inf", "+inf", "infinity"):
            return math.inf
        return kind(float(t)) if kind is int else kind(t)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r}") from None


def _aligned(raw, key, models, defaults):
    if raw is None:
        return tuple(defaults)
    vals = [_num(v, key) for v in _split(raw)]
    if len(vals) == 1:
        return tuple(vals * len(models))
    if len(vals) != len(models):
        raise ConfigError(f"{key} needs one value or one per model")
    return tuple(vals)


def parse_config_text(text) -> TrialConfig:
    """Parse ``key = value`` text into a :class:`TrialConfig`."""
    parser = configparser.ConfigParser(
        delimiters=("=", ":"), comment_prefixes=("#", ";"), inline_comment_prefixes=("#",),
        interpolation=None,
    )
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    raw = dict(parser["run"])
    unknown = sorted(set(raw) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    if "scenario" not in raw or "model" not in raw:
        raise ConfigError("scenario and model are required")
    scenario = raw["scenario"].strip()
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    sd = _SCENARIO_DEFAULTS[scenario]
    models = tuple(_split(raw["model"]))
    try:
        defaults = [default_params(scenario, m) for m in models]
    except ConfigError:
        for m in models:
            try:
                model_info(m)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        raise
    return TrialConfig(
        scenario=scenario,
        models=models,
        n=_num(raw["n"], "n", int) if "n" in raw else sd["n"],
        ds=tuple(_num(v, "d", int) for v in _split(raw["d"])) if "d" in raw else sd["d"],
        snr_dbs=tuple(_num(v, "snr_db") for v in _split(raw["snr_db"])) if "snr_db" in raw else sd["snr_db"],
        trials=_num(raw["trials"], "trials", int) if "trials" in raw else 20,
        rng_seed=_num(raw["rng_seed"], "rng_seed", int) if "rng_seed" in raw else 0,
        lams=_aligned(raw.get("lambda"), "lambda", models, [p[0] for p in defaults]),
        alphas=_aligned(raw.get("alpha"), "alpha", models, [p[1] for p in defaults]),
        thetas=_aligned(raw.get("theta"), "theta", models, [p[2] for p in defaults]),
        threshold=_num(raw["threshold"], "threshold") if "threshold" in raw else 1e-4,
        max_iters=_num(raw["max_iters"], "max_iters", int) if "max_iters" in raw else 10000,
        constraint=raw.get("constraint", sd["constraint"]).strip(),
    )


def load_config(path) -> TrialConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config_text(text)
