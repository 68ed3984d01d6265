import pytest
from fastapi.testclient import TestClient

from hcflow.service import create_app

CE25_MODEL = {
    "factors": [
        {"kind": "grassmannian", "p": 1, "q": 2, "A": 1.0},
        {"kind": "grassmannian", "p": 1, "q": 2, "A": 1.0},
    ],
    "fiber": {"k": 1, "c": [[[0.0, -0.25]], [[-0.25, 0.0]]]},
    "ce_blocks": [[0, 1]],
}


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_simulate_cross_check(client):
    resp = client.post("/simulate", json={
        "model": CE25_MODEL, "t_end": 1.0, "steps": 200, "cross_check": True})
    assert resp.status_code == 200
    data = resp.json()
    assert data["columns"][:4] == ["t", "h_1", "h_2", "H_0_0_re"]
    assert "rk4_det_H" in data["columns"]
    assert len(data["rows"]) == 201
    assert data["meta"]["max_cross_check_error"] <= 1e-8
    # final closed-form row: h=(1/2,1/2), H=2/3
    last = dict(zip(data["columns"], data["rows"][-1]))
    assert last["t"] == pytest.approx(1.0)
    assert last["h_1"] == pytest.approx(0.5)
    assert last["H_0_0_re"] == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_simulate_requires_t_end(client):
    resp = client.post("/simulate", json={"model": CE25_MODEL})
    assert resp.status_code == 422
    assert "t_end" in resp.json()["detail"]["message"]


def test_simulate_past_extinction_is_409(client):
    resp = client.post("/simulate", json={"model": CE25_MODEL, "t_end": 3.0})
    assert resp.status_code == 409
    detail = resp.json()["detail"]
    assert detail["type"] == "PastExtinction"
    assert "T=2" in detail["message"]


def test_limit_endpoint(client):
    resp = client.post("/limit", json={"model": CE25_MODEL})
    assert resp.status_code == 200
    data = resp.json()
    assert data["T"] == 2.0
    assert data["p_set"] == [0, 1]
    assert data["fiber_rank"] == 0
    assert data["fiber_limit"] == [[[0.0, 0.0]]]
    assert data["collapse"]["description"] == "point"
    assert data["fiber_realizable"] is True
    devs = [row["max_deviation"] for row in data["near_extinction"]]
    assert all(b <= a for a, b in zip(devs, devs[1:]))   # log-resolved decay


def test_static_construct_and_check(client):
    resp = client.post("/static", json={"model": CE25_MODEL, "lambda": 1.0})
    assert resp.status_code == 200
    data = resp.json()
    assert data["h"] == [0.5, 0.5]
    assert data["H"] == [[[1.0, 0.0]]]
    assert data["residual"] <= 1e-12

    resp = client.post("/static", json={
        "model": CE25_MODEL, "check": {"h": [1.0, 1.0], "H": [[[1.0, 0.0]]]}})
    data = resp.json()
    assert data["mode"] == "check"
    assert data["lambda_fit"] == pytest.approx(5.0 / 12.0, rel=1e-12)
    assert data["residual"] == pytest.approx(1.0 / 6.0, rel=1e-12)


def test_static_requires_exactly_one_mode(client):
    resp = client.post("/static", json={"model": CE25_MODEL})
    assert resp.status_code == 422
    resp = client.post("/static", json={
        "model": CE25_MODEL, "lambda": 1.0,
        "check": {"h": [1.0, 1.0], "H": [[[1.0, 0.0]]]}})
    assert resp.status_code == 422


def test_static_nonpositive_lambda_rejected(client):
    resp = client.post("/static", json={"model": CE25_MODEL, "lambda": 0.0})
    assert resp.status_code == 422
    assert resp.json()["detail"]["type"] == "NoStaticForNonpositiveLambda"


def test_static_singular_coupling_is_409(client):
    model = {
        "factors": CE25_MODEL["factors"],
        "fiber": {"k": 1, "c": [[[0.0, 0.0]], [[0.0, 0.0]]]},
    }
    resp = client.post("/static", json={"model": model, "lambda": 1.0})
    assert resp.status_code == 409
    assert resp.json()["detail"]["type"] == "ThetaSingular"


def test_normalize_endpoint(client):
    resp = client.post("/normalize", json={"model": CE25_MODEL, "samples": 12})
    assert resp.status_code == 200
    data = resp.json()
    assert data["xi_limit"] == pytest.approx(1.0, abs=1e-10)
    assert data["lam"] == pytest.approx(1.0, abs=1e-10)
    assert data["static_h"] == [0.5, 0.5]
    cols = data["table"]["columns"]
    assert cols[:3] == ["t", "xi", "c"]
    # normalized components approach the static metric
    last = dict(zip(cols, data["table"]["rows"][-1]))
    assert last["ch_1"] == pytest.approx(0.5, abs=1e-3)
    assert last["cH_0_0_re"] == pytest.approx(1.0, abs=1e-3)


def test_normalize_unequal_A_rejected(client):
    model = dict(CE25_MODEL)
    model["factors"] = [
        {"kind": "grassmannian", "p": 1, "q": 2, "A": 1.0},
        {"kind": "grassmannian", "p": 1, "q": 2, "A": 2.0},
    ]
    resp = client.post("/normalize", json={"model": model})
    assert resp.status_code == 422
    assert resp.json()["detail"]["type"] == "UnequalA"


def test_verify_endpoint(client):
    resp = client.post("/verify", json={"random_count": 2})
    assert resp.status_code == 200
    data = resp.json()
    assert len(data["root_reports"]) == 3
    assert len(data["tensor_reports"]) == 2
    assert data["max_residual"] <= 1e-12
    for rep in data["root_reports"]:
        assert rep["max_residual"] <= 1e-12


def test_catalog_endpoint(client):
    resp = client.get("/catalog", params={"kind": "quadric", "n": 3})
    assert resp.status_code == 200
    data = resp.json()
    assert len(data["families"]) == 6
    assert data["entry"]["admissible"] is False

    resp = client.get("/catalog")
    assert resp.json()["entry"] is None


def test_schema_validation_error_shape(client):
    resp = client.post("/simulate", json={"model": {"factors": []}, "t_end": 1.0})
    assert resp.status_code == 422
    assert isinstance(resp.json()["detail"], list)     # pydantic location list


def test_cross_check_blowup_is_409(client):
    # coarse integrator steps deep into the blow-up must fail loudly
    resp = client.post("/simulate", json={
        "model": CE25_MODEL, "t_end": 1.99, "steps": 10, "cross_check": True})
    assert resp.status_code == 409
    assert resp.json()["detail"]["type"] == "LostPositivity"


def test_openapi_schema_generates(client):
    resp = client.get("/openapi.json")
    assert resp.status_code == 200
    paths = resp.json()["paths"]
    for route in ("/simulate", "/limit", "/static", "/normalize", "/verify",
                  "/catalog", "/health"):
        assert route in paths


def test_quadric_model_rejected(client):
    model = {
        "factors": [{"kind": "quadric", "n": 3, "A": 1.0}],
        "fiber": {"k": 1, "c": [[[1.0, 0.0]]]},
    }
    resp = client.post("/limit", json={"model": model})
    assert resp.status_code == 422
    assert resp.json()["detail"]["type"] == "QuadricNotSupported"
