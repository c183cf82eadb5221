import pytest
from fastapi.testclient import TestClient

from blendkit.costing import build_query_context
from blendkit.embedding import HashedNgramEncoder, embed
from blendkit.errors import FusionError, InfeasibleBudgetError
from blendkit.mock_backend import Behavior, MockModelServer
from blendkit.orchestrator import ModelResponse, answer_query, dispatch, fuse
from blendkit.predictor import init_head, predict
from blendkit.registry import ModelSpec, PipelineConfig, Registry
from blendkit.selector import select
from blendkit.service import create_app

ENC = HashedNgramEncoder(d=32, seed=0)


def make_registry(endpoints, fuser=None, **defaults):
    sizes = [(1.0e6, 4, 128), (3.0e6, 6, 256), (1.0e7, 8, 512), (3.0e7, 12, 768)]
    models = tuple(
        ModelSpec(f"m{i}", ep, *sizes[i % 4], max_ctx=512)
        for i, ep in enumerate(endpoints)
    )
    return Registry(models=models, fuser_endpoint=fuser,
                    defaults=PipelineConfig(**defaults))


def full_selection(registry, text):
    ctx = build_query_context(registry, "q", text)
    return select([-2.0] * len(registry), list(ctx.costs),
                  ctx.total_baseline_cost, 100)


# --- dispatch ---

def test_dispatch_all_healthy_mock_server():
    with MockModelServer({f"m{i}": Behavior(text="hi {prompt}") for i in range(3)}) as srv:
        reg = make_registry([srv.endpoint(f"m{i}") for i in range(3)])
        sel = full_selection(reg, "question")
        responses = dispatch(reg, sel, "question", reg.defaults)
        assert [r.model_index for r in responses] == list(sel.selected)
        assert all(r.ok for r in responses)
        assert responses[0].text == "hi question"


def test_dispatch_timeout_isolated():
    behaviors = {
        "m0": Behavior(),
        "m1": Behavior(delay=2.0),
        "m2": Behavior(),
    }
    with MockModelServer(behaviors) as srv:
        reg = make_registry(
            [srv.endpoint(f"m{i}") for i in range(3)], dispatch_timeout=0.4
        )
        sel = full_selection(reg, "question")
        responses = dispatch(reg, sel, "question", reg.defaults)
        by_idx = {r.model_index: r for r in responses}
        assert by_idx[1].status == "timeout"
        assert by_idx[0].ok and by_idx[2].ok


def test_dispatch_http_error_and_empty_body():
    behaviors = {"m0": Behavior(status=500), "m1": Behavior(text="")}
    with MockModelServer(behaviors) as srv:
        reg = make_registry([srv.endpoint("m0"), srv.endpoint("m1")])
        sel = full_selection(reg, "q")
        responses = dispatch(reg, sel, "q", reg.defaults)
        assert responses[0].status == "error"
        assert "500" in responses[0].error
        assert responses[1].status == "error"


def test_dispatch_builtin_mock():
    reg = make_registry(["mock", "mock"])
    sel = full_selection(reg, "ping")
    responses = dispatch(reg, sel, "ping", reg.defaults)
    assert [r.text for r in responses] == ["[m0] ping", "[m1] ping"]


# --- fuse ---

def ok_resp(idx, text):
    return ModelResponse(model_index=idx, text=text, latency=0.0, status="ok")


def test_fuse_single_response():
    text, mode, _ = fuse("q", [ok_resp(0, "only")], [0.0], "best_predicted")
    assert text == "only" and mode == "best_predicted"
    text, _, _ = fuse("q", [ok_resp(0, "only")], [0.0], "remote", None)
    assert text == "only"


def test_fuse_best_predicted_argmax_and_ties():
    resp = [ok_resp(0, "a"), ok_resp(1, "b")]
    text, _, _ = fuse("q", resp, [-2.0, -3.0], "best_predicted")
    assert text == "a"
    text, _, _ = fuse("q", resp, [-2.0, -2.0], "best_predicted")
    assert text == "a"  # tie to lower index


def test_fuse_no_ok_responses():
    bad = ModelResponse(0, None, 0.0, "error", "boom")
    with pytest.raises(FusionError):
        fuse("q", [bad], [0.0], "best_predicted")


def test_fuse_remote():
    with MockModelServer(fuser_behavior=Behavior(text="fused<{joined}>")) as srv:
        text, mode, warnings = fuse(
            "q", [ok_resp(0, "a"), ok_resp(1, "b")], [0.0, 0.0],
            "remote", srv.fuser_endpoint,
        )
        assert text == "fused<a | b>"
        assert mode == "remote" and not warnings


def test_fuse_remote_down_falls_back():
    text, mode, warnings = fuse(
        "q", [ok_resp(0, "a"), ok_resp(1, "b")], [-3.0, -2.0],
        "remote", "http://127.0.0.1:1/unreachable", timeout=0.3,
    )
    assert text == "b" and mode == "best_predicted"
    assert warnings and "fuser" in warnings[0]


# --- answer_query ---

def pipeline_fixture(**defaults):
    reg = make_registry(["mock"] * 4, **defaults)
    head = init_head(d=32, h=8, g=4, n_models=4, seed=1)
    return reg, head


def test_answer_query_full_budget():
    reg, head = pipeline_fixture(budget_fraction=1.0)
    res = answer_query(reg, head, ENC, "q1", "what is a registry?")
    assert res.selection.selected == (0, 1, 2, 3)
    assert res.fused_text
    assert res.selection.total_cost <= res.epsilon
    assert {r.model_index for r in res.responses} == set(res.selection.selected)


def test_answer_query_matches_standalone_selector():
    reg, head = pipeline_fixture(budget_fraction=0.5)
    text = "compare the selection against a standalone run"
    res = answer_query(reg, head, ENC, "q2", text)
    scores = predict(head, embed(text, ENC, query_id="q2"))
    ctx = build_query_context(reg, "q2", text)
    standalone = select(list(scores), list(ctx.costs),
                        0.5 * ctx.total_baseline_cost,
                        reg.defaults.grid_resolution)
    assert res.selection.selected == standalone.selected
    assert res.selection.total_target_score == pytest.approx(
        standalone.total_target_score)


def test_answer_query_infeasible_error_policy():
    reg, head = pipeline_fixture(infeasible_policy="error")
    with pytest.raises(InfeasibleBudgetError):
        answer_query(reg, head, ENC, "q3", "short text", budget_fraction=0.001)


def test_answer_query_infeasible_cheapest_fallback():
    reg, head = pipeline_fixture(infeasible_policy="cheapest_model")
    res = answer_query(reg, head, ENC, "q4", "short text", budget_fraction=0.001)
    assert res.selection.selected == (0,)  # m0 is the cheapest
    assert not res.selection.feasible
    assert any("cheapest" in w for w in res.warnings)


def test_answer_query_fail_fast():
    with MockModelServer({"m0": Behavior(status=500)}) as srv:
        reg = make_registry([srv.endpoint("m0")], failure_policy="fail_fast",
                            budget_fraction=1.0)
        head = init_head(d=32, h=8, g=4, n_models=1, seed=1)
        with pytest.raises(Exception, match="dispatch failed"):
            answer_query(reg, head, ENC, "q5", "text")


def test_answer_query_fuse_partial_with_failure():
    behaviors = {"m0": Behavior(text="ok {prompt}"), "m1": Behavior(status=500)}
    with MockModelServer(behaviors) as srv:
        reg = make_registry([srv.endpoint("m0"), srv.endpoint("m1")],
                            failure_policy="fuse_partial", budget_fraction=1.0)
        head = init_head(d=32, h=8, g=4, n_models=2, seed=1)
        res = answer_query(reg, head, ENC, "q6", "text")
        assert res.fused_text == "ok text"
        assert any("m1" in w for w in res.warnings)


# --- service ---

def client(**defaults):
    reg, head = pipeline_fixture(**defaults)
    return TestClient(create_app(reg, head, ENC)), reg, head


def test_healthz():
    c, _, _ = client()
    r = c.get("/healthz")
    assert r.status_code == 200
    assert r.json()["models"] == 4


def test_models_endpoint_order():
    c, reg, _ = client()
    body = c.get("/v1/models").json()
    assert [m["name"] for m in body["models"]] == reg.names
    assert body["models"][0]["base_cost_per_token"] == 2 * reg.models[0].n_params


def test_query_endpoint_full_budget():
    c, _, _ = client()
    r = c.post("/v1/query", json={"text": "hi there friend",
                                  "budget_fraction": 1.0})
    assert r.status_code == 200
    body = r.json()
    assert body["selection"]["selected"] == [0, 1, 2, 3]
    assert body["fused_text"]
    assert body["budget"]["fraction"] == 1.0


def test_query_endpoint_validates_fraction():
    c, _, _ = client()
    r = c.post("/v1/query", json={"text": "hi", "budget_fraction": 0.0})
    assert r.status_code == 422
    r = c.post("/v1/query", json={"text": "hi", "budget_fraction": 1.5})
    assert r.status_code == 422


def test_query_endpoint_rejects_empty_text():
    c, _, _ = client()
    assert c.post("/v1/query", json={"text": ""}).status_code == 422


def test_query_endpoint_infeasible_structured_error():
    c, _, _ = client(infeasible_policy="error")
    r = c.post("/v1/query", json={"text": "hi", "budget_fraction": 0.0001})
    assert r.status_code == 409
    assert r.json()["error"]["type"] == "infeasible_budget"


def test_query_endpoint_stateless_repeatable():
    c, _, _ = client()
    payload = {"query_id": "rep", "text": "repeatable query",
               "budget_fraction": 0.5}
    a = c.post("/v1/query", json=payload).json()
    b = c.post("/v1/query", json=payload).json()
    assert a["selection"] == b["selection"]
    assert a["fused_text"] == b["fused_text"]
