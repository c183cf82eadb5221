import pytest

from blendkit.errors import RegistryError, UnknownModelError
from blendkit.registry import (
    PipelineConfig,
    Registry,
    load_registry,
    model_index,
    resolve_config_path,
)

VALID_YAML = """
models:
  - name: alpha
    endpoint: mock
    n_params: 1.0e6
    n_layer: 4
    d_model: 128
    max_ctx: 512
  - name: beta
    endpoint: mock
    n_params: 2.0e6
    n_layer: 6
    d_model: 256
    max_ctx: 512
    chars_per_token: 3.5
"""


def write(tmp_path, text):
    p = tmp_path / "registry.yaml"
    p.write_text(text)
    return str(p)


def test_load_two_models_in_file_order(tmp_path):
    reg = load_registry(write(tmp_path, VALID_YAML))
    assert len(reg) == 2
    assert reg.names == ["alpha", "beta"]
    assert reg.models[1].chars_per_token == 3.5
    assert reg.models[0].chars_per_token == 4.0  # default


def test_load_is_deterministic(tmp_path):
    path = write(tmp_path, VALID_YAML)
    assert load_registry(path) == load_registry(path)


def test_duplicate_name_rejected(tmp_path):
    dup = VALID_YAML.replace("name: beta", "name: alpha")
    with pytest.raises(RegistryError, match="alpha"):
        load_registry(write(tmp_path, dup))


def test_zero_layer_rejected(tmp_path):
    bad = VALID_YAML.replace("n_layer: 4", "n_layer: 0")
    with pytest.raises(RegistryError, match="alpha"):
        load_registry(write(tmp_path, bad))


def test_malformed_file_rejected(tmp_path):
    with pytest.raises(RegistryError):
        load_registry(write(tmp_path, "models: [unclosed"))


def test_missing_field_rejected(tmp_path):
    bad = VALID_YAML.replace("    d_model: 128\n", "")
    with pytest.raises(RegistryError, match="d_model"):
        load_registry(write(tmp_path, bad))


def test_empty_registry_rejected():
    with pytest.raises(RegistryError):
        Registry(models=())


def test_model_index(toy_registry):
    assert model_index(toy_registry, "m1") == 0
    assert model_index(toy_registry, "m2") == 1
    with pytest.raises(UnknownModelError):
        model_index(toy_registry, "nope")


def test_pipeline_config_validation():
    with pytest.raises(RegistryError):
        PipelineConfig(budget_fraction=0.0).validate()
    with pytest.raises(RegistryError):
        PipelineConfig(budget_fraction=1.5).validate()
    with pytest.raises(RegistryError):
        PipelineConfig(grid_resolution=0).validate()
    with pytest.raises(RegistryError):
        PipelineConfig(failure_policy="whatever").validate()
    PipelineConfig().validate()


def test_config_path_resolution(monkeypatch):
    monkeypatch.setenv("BLENDKIT_CONFIG", "/env/path.yaml")
    assert resolve_config_path(None) == "/env/path.yaml"
    assert resolve_config_path("/cli/wins.yaml") == "/cli/wins.yaml"
    monkeypatch.delenv("BLENDKIT_CONFIG")
    with pytest.raises(RegistryError):
        resolve_config_path(None)


def test_with_defaults_override(toy_registry):
    reg = toy_registry.with_defaults(budget_fraction=0.5, fusion_mode=None)
    assert reg.defaults.budget_fraction == 0.5
    assert reg.defaults.fusion_mode == toy_registry.defaults.fusion_mode


def test_bundled_registries_load(fixture_registry_path):
    reg = load_registry(fixture_registry_path)
    assert len(reg) == 4
    assert reg.names[0] == "toy-tiny"
