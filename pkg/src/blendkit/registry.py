"""Model registry: the immutable selection set plus global pipeline config.

The registry file is YAML with a ``models`` array, an optional
``fuser_endpoint``, and an optional ``defaults`` block:

.. code-block:: yaml

    models:
      - name: alpaca-7b
        endpoint: mock          # URL or "mock" for the built-in backend
        n_params: 6.7e9         # non-embedding parameters
        n_layer: 32
        d_model: 4096
        max_ctx: 2048
        chars_per_token: 4.0    # optional, default 4.0
    fuser_endpoint: null
    defaults:
      budget_fraction: 0.2
      grid_resolution: 1000
      dispatch_timeout: 30.0
      failure_policy: fuse_partial   # or fail_fast
      fusion_mode: best_predicted    # or remote
      infeasible_policy: error       # or cheapest_model
      token_mode: chars_ratio        # or whitespace

Model order in the file is the canonical index order: predictor output
slot i corresponds to ``models[i]`` everywhere downstream.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import yaml

from .errors import RegistryError, UnknownModelError

CONFIG_ENV_VAR = "BLENDKIT_CONFIG"

FAILURE_POLICIES = ("fail_fast", "fuse_partial")
FUSION_MODES = ("remote", "best_predicted")
INFEASIBLE_POLICIES = ("error", "cheapest_model")
TOKEN_MODES = ("chars_ratio", "whitespace")


@dataclass(frozen=True)
class ModelSpec:
    """Architecture numbers, endpoint, and tokenizer ratio for one model."""

    name: str
    endpoint: str
    n_params: float
    n_layer: int
    d_model: int
    max_ctx: int
    chars_per_token: float = 4.0

    def validate(self) -> None:
        if not self.name:
            raise RegistryError("model name must be non-empty")
        if self.n_params < 1:
            raise RegistryError(f"model {self.name!r}: n_params must be >= 1")
        if self.n_layer < 1:
            raise RegistryError(f"model {self.name!r}: n_layer must be >= 1")
        if self.d_model < 1:
            raise RegistryError(f"model {self.name!r}: d_model must be >= 1")
        if self.max_ctx < 1:
            raise RegistryError(f"model {self.name!r}: max_ctx must be >= 1")
        if self.chars_per_token <= 0:
            raise RegistryError(
                f"model {self.name!r}: chars_per_token must be > 0"
            )


@dataclass(frozen=True)
class PipelineConfig:
    budget_fraction: float = 0.2
    grid_resolution: int = 1000
    dispatch_timeout: float = 30.0
    failure_policy: str = "fuse_partial"
    fusion_mode: str = "best_predicted"
    infeasible_policy: str = "error"
    token_mode: str = "chars_ratio"

    def validate(self) -> None:
        if not (0 < self.budget_fraction <= 1):
            raise RegistryError("budget_fraction must be in (0, 1]")
        if self.grid_resolution < 1:
            raise RegistryError("grid_resolution must be >= 1")
        if self.dispatch_timeout <= 0:
            raise RegistryError("dispatch_timeout must be positive")
        if self.failure_policy not in FAILURE_POLICIES:
            raise RegistryError(f"unknown failure_policy {self.failure_policy!r}")
        if self.fusion_mode not in FUSION_MODES:
            raise RegistryError(f"unknown fusion_mode {self.fusion_mode!r}")
        if self.infeasible_policy not in INFEASIBLE_POLICIES:
            raise RegistryError(
                f"unknown infeasible_policy {self.infeasible_policy!r}"
            )
        if self.token_mode not in TOKEN_MODES:
            raise RegistryError(f"unknown token_mode {self.token_mode!r}")


@dataclass(frozen=True)
class Registry:
    """Ordered, immutable list of model specs plus pipeline defaults."""

    models: tuple[ModelSpec, ...]
    fuser_endpoint: str | None = None
    defaults: PipelineConfig = field(default_factory=PipelineConfig)

    def __post_init__(self) -> None:
        if len(self.models) < 1:
            raise RegistryError("registry must contain at least one model")
        seen: set[str] = set()
        for spec in self.models:
            spec.validate()
            if spec.name in seen:
                raise RegistryError(f"duplicate model name {spec.name!r}")
            seen.add(spec.name)
        self.defaults.validate()

    def __len__(self) -> int:
        return len(self.models)

    @property
    def names(self) -> list[str]:
        return [m.name for m in self.models]

    def with_defaults(self, **overrides) -> "Registry":
        """Copy with pipeline defaults overridden (None values ignored)."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        if not changes:
            return self
        return Registry(
            models=self.models,
            fuser_endpoint=self.fuser_endpoint,
            defaults=replace(self.defaults, **changes),
        )


def model_index(registry: Registry, name: str) -> int:
    """Position of the named model in canonical registry order."""
    for i, spec in enumerate(registry.models):
        if spec.name == name:
            return i
    raise UnknownModelError(f"model {name!r} not in registry")


def _spec_from_mapping(entry: object, position: int) -> ModelSpec:
    if not isinstance(entry, dict):
        raise RegistryError(f"models[{position}] is not a mapping")
    name = entry.get("name")
    if not isinstance(name, str) or not name:
        raise RegistryError(f"models[{position}] has no usable 'name'")
    required = ("endpoint", "n_params", "n_layer", "d_model", "max_ctx")
    for key in required:
        if key not in entry:
            raise RegistryError(f"model {name!r} missing field {key!r}")
    try:
        return ModelSpec(
            name=name,
            endpoint=str(entry["endpoint"]),
            n_params=float(entry["n_params"]),
            n_layer=int(entry["n_layer"]),
            d_model=int(entry["d_model"]),
            max_ctx=int(entry["max_ctx"]),
            chars_per_token=float(entry.get("chars_per_token", 4.0)),
        )
    except (TypeError, ValueError) as exc:
        raise RegistryError(f"model {name!r}: bad field value: {exc}") from exc


def load_registry(path: str | os.PathLike) -> Registry:
    """Load and validate a registry config file.

    Deterministic: identical bytes produce an identical Registry.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise RegistryError(f"cannot parse registry file {path}: {exc}") from exc
    except OSError as exc:
        raise RegistryError(f"cannot read registry file {path}: {exc}") from exc
    if not isinstance(doc, dict) or "models" not in doc:
        raise RegistryError(f"registry file {path} must define a 'models' list")
    raw_models = doc["models"]
    if not isinstance(raw_models, list) or not raw_models:
        raise RegistryError("'models' must be a non-empty list")
    specs = tuple(
        _spec_from_mapping(entry, i) for i, entry in enumerate(raw_models)
    )

    defaults_doc = doc.get("defaults") or {}
    if not isinstance(defaults_doc, dict):
        raise RegistryError("'defaults' must be a mapping")
    known = set(PipelineConfig.__dataclass_fields__)
    unknown = set(defaults_doc) - known
    if unknown:
        raise RegistryError(f"unknown defaults keys: {sorted(unknown)}")
    defaults = PipelineConfig(**defaults_doc)

    fuser = doc.get("fuser_endpoint")
    if fuser is not None and not isinstance(fuser, str):
        raise RegistryError("'fuser_endpoint' must be a string or null")

    return Registry(models=specs, fuser_endpoint=fuser, defaults=defaults)


def resolve_config_path(cli_value: str | None) -> str:
    """--config flag wins, then the environment variable."""
    if cli_value:
        return cli_value
    env = os.environ.get(CONFIG_ENV_VAR)
    if env:
        return env
    raise RegistryError(
        f"no registry config: pass --config or set {CONFIG_ENV_VAR}"
    )
