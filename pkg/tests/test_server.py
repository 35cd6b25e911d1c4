import io

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from adaptseg.analysis import generate_simple
from adaptseg.image_io import encode_png_bytes
from adaptseg.server import create_app

from conftest import random_image


@pytest.fixture
def client():
    return TestClient(create_app())


def png_of(img):
    return encode_png_bytes(img, img.planes)


def upload(client, img, **fields):
    return client.post(
        "/sessions",
        files={"file": ("img.png", png_of(img), "image/png")},
        data=fields,
    )


@pytest.fixture
def simple_session(client):
    resp = upload(client, generate_simple(64))
    assert resp.status_code == 201
    return resp.json()["id"]


def test_create_session_initial_stats(client):
    img = generate_simple(64)
    resp = upload(client, img)
    assert resp.status_code == 201
    body = resp.json()
    assert body["n_vr"] == 1
    assert body["n_sr"] == 3
    assert body["iteration"] == 0
    assert body["status"] == "running"
    assert not body["can_undo"]
    assert 0.0 < body["tau"] < 100.0
    assert body["width"] == 64 and body["channels"] == 3


def test_create_session_distinct_ids(client):
    img = generate_simple(32)
    a = upload(client, img).json()["id"]
    b = upload(client, img).json()["id"]
    assert a != b


def test_create_session_bad_inputs(client):
    resp = client.post(
        "/sessions", files={"file": ("x.png", b"not a png", "image/png")})
    assert resp.status_code == 400

    img = generate_simple(32)
    assert upload(client, img, cutting="bogus").status_code == 400
    assert upload(client, img, mode="bogus").status_code == 400
    assert upload(client, img, mode="multiscalar").status_code == 400


def test_create_session_too_large():
    app = create_app(max_pixels=100)
    client = TestClient(app)
    resp = upload(client, generate_simple(32))  # 1024 pixels
    assert resp.status_code == 413


def test_unknown_session_404(client):
    assert client.get("/sessions/nope/state").status_code == 404
    assert client.post("/sessions/nope/step", json={}).status_code == 404
    assert client.post("/sessions/nope/undo", json={}).status_code == 404
    assert client.get("/sessions/nope/render").status_code == 404
    assert client.get("/sessions/nope/trace").status_code == 404
    assert client.delete("/sessions/nope").status_code == 404


def test_step_and_stats(client, simple_session):
    sid = simple_session
    resp = client.post(f"/sessions/{sid}/step", json={"count": 1})
    assert resp.status_code == 200
    body = resp.json()
    assert body["committed"] == 1
    assert len(body["events"]) == 1
    assert body["events"][0]["delta_j"] > 0.0
    assert body["iteration"] == 1
    assert body["n_vr"] == 2
    assert body["can_undo"]

    state = client.get(f"/sessions/{sid}/state").json()
    assert state["iteration"] == 1
    assert state["event_count"] == 1


def test_step_count_validation(client, simple_session):
    resp = client.post(f"/sessions/{simple_session}/step", json={"count": 0})
    assert resp.status_code == 400


def test_step_then_undo_restores_stats(client, simple_session):
    sid = simple_session
    before = client.get(f"/sessions/{sid}/state").json()
    client.post(f"/sessions/{sid}/step", json={"count": 3})
    resp = client.post(f"/sessions/{sid}/undo", json={"count": 3})
    assert resp.status_code == 200
    after = resp.json()
    for key in ("iteration", "n_sr", "n_vr", "j", "tau", "status"):
        assert after[key] == before[key], key


def test_undo_at_zero_409(client, simple_session):
    resp = client.post(f"/sessions/{simple_session}/undo", json={"count": 1})
    assert resp.status_code == 409
    resp = client.post(f"/sessions/{simple_session}/undo", json={"count": 0})
    assert resp.status_code == 400


def test_step_past_convergence_409(client, simple_session):
    sid = simple_session
    resp = client.post(f"/sessions/{sid}/step", json={"count": 3})
    assert resp.status_code == 200
    assert resp.json()["converged"]

    resp = client.post(f"/sessions/{sid}/step", json={"count": 1})
    assert resp.status_code == 409
    detail = resp.json()["detail"]
    assert detail["converged"] is True
    assert detail["committed"] == 0
    assert detail["events"] == []


def test_step_partial_progress_reported(client, simple_session):
    sid = simple_session
    resp = client.post(f"/sessions/{sid}/step", json={"count": 10})
    assert resp.status_code == 409  # converged after 3 of 10
    detail = resp.json()["detail"]
    assert detail["committed"] == 3
    assert len(detail["events"]) == 3
    assert detail["converged"] is True
    assert detail["j"] == 0.0
    assert detail["tau"] == 100.0


def test_strategy_switch_between_steps(client, rng):
    img = random_image(rng, 12, 12, 3)
    sid = upload(client, img).json()["id"]
    r1 = client.post(f"/sessions/{sid}/step",
                     json={"count": 1, "cutting": "family-all"})
    assert r1.status_code == 200
    assert r1.json()["events"][0]["cutting"] == "family-all"
    r2 = client.post(f"/sessions/{sid}/step",
                     json={"count": 1, "cutting": "overall-best"})
    assert r2.json()["events"][0]["cutting"] == "overall-best"
    bad = client.post(f"/sessions/{sid}/step",
                      json={"count": 1, "cutting": "bogus"})
    assert bad.status_code == 400
    vec_switch = client.post(f"/sessions/{sid}/step",
                             json={"count": 1, "multiscalar": "best-component-only"})
    assert vec_switch.status_code == 400


def test_multiscalar_divergence_conflict(client, rng):
    img = random_image(rng, 10, 10, 3)
    sid = upload(client, img, mode="multiscalar",
                 multiscalar="best-component-only").json()["id"]
    assert client.post(f"/sessions/{sid}/step",
                       json={"count": 1}).status_code == 200
    state = client.get(f"/sessions/{sid}/state").json()
    assert state["diverged"] is True
    resp = client.post(
        f"/sessions/{sid}/step",
        json={"count": 1, "multiscalar": "combine-best-components"})
    assert resp.status_code == 409


def test_render_layers(client, simple_session):
    sid = simple_session
    resp = client.get(f"/sessions/{sid}/render", params={"layer": "segmented"})
    assert resp.status_code == 200
    assert resp.headers["content-type"] == "image/png"
    decoded = Image.open(io.BytesIO(resp.content))
    assert decoded.size == (64, 64)
    # iteration 0: one region, so one color
    pixels = np.asarray(decoded.convert("RGB")).reshape(-1, 3)
    assert len(np.unique(pixels, axis=0)) == 1

    for layer in ("edges", "original", "labels"):
        assert client.get(f"/sessions/{sid}/render",
                          params={"layer": layer}).status_code == 200
    assert client.get(f"/sessions/{sid}/render",
                      params={"layer": "bogus"}).status_code == 400


def test_render_after_convergence_matches_original(client, simple_session):
    sid = simple_session
    client.post(f"/sessions/{sid}/step", json={"count": 3})
    segmented = client.get(f"/sessions/{sid}/render",
                           params={"layer": "segmented"}).content
    original = client.get(f"/sessions/{sid}/render",
                          params={"layer": "original"}).content
    a = np.asarray(Image.open(io.BytesIO(segmented)).convert("RGB"))
    b = np.asarray(Image.open(io.BytesIO(original)).convert("RGB"))
    assert np.array_equal(a, b)


def test_inspect(client, simple_session):
    sid = simple_session
    client.post(f"/sessions/{sid}/step", json={"count": 3})
    resp = client.get(f"/sessions/{sid}/inspect", params={"x": 1, "y": 1})
    assert resp.status_code == 200
    body = resp.json()
    assert body["x"] == 1 and body["y"] == 1
    assert len(body["regions"]) == 1
    region = body["regions"][0]
    assert region["channel"] == "RGB"
    assert region["pixel_count"] > 0
    assert len(region["mean"]) == 3
    assert region["best_delta_j"] == 0.0  # converged: nothing left to split

    other = client.get(f"/sessions/{sid}/inspect", params={"x": 2, "y": 1})
    assert other.json()["regions"][0]["region_id"] == region["region_id"]

    assert client.get(f"/sessions/{sid}/inspect",
                      params={"x": 64, "y": 0}).status_code == 400
    assert client.get(f"/sessions/{sid}/inspect",
                      params={"x": 0, "y": -1}).status_code == 400


def test_inspect_multiscalar_lists_three(client, rng):
    img = random_image(rng, 8, 8, 3)
    sid = upload(client, img, mode="multiscalar",
                 multiscalar="best-component-for-each").json()["id"]
    client.post(f"/sessions/{sid}/step", json={"count": 1})
    body = client.get(f"/sessions/{sid}/inspect",
                      params={"x": 0, "y": 0}).json()
    assert [r["channel"] for r in body["regions"]] == ["R", "G", "B"]
    for region in body["regions"]:
        assert len(region["mean"]) == 1


def test_trace_formats(client, simple_session):
    sid = simple_session
    fresh = client.get(f"/sessions/{sid}/trace")
    assert fresh.status_code == 200
    assert fresh.text.splitlines() == [
        "iteration,mode,strategy,channel,region_split,n_sr,n_vr,J,tau,delta_J"]

    client.post(f"/sessions/{sid}/step", json={"count": 2})
    csv = client.get(f"/sessions/{sid}/trace").text
    assert len(csv.splitlines()) == 3
    as_json = client.get(f"/sessions/{sid}/trace",
                         params={"format": "json"}).json()
    assert len(as_json["events"]) == 2
    assert client.get(f"/sessions/{sid}/trace",
                      params={"format": "xml"}).status_code == 400


def test_trace_equals_cli_trace(client, tmp_path):
    """Same image, same config: the server trace must equal the CLI's."""
    from adaptseg.cli import main

    img = generate_simple(64)
    path = tmp_path / "img.png"
    from adaptseg.image_io import save_image

    save_image(img, img.planes, path)
    out = tmp_path / "run"
    assert main(["segment", str(path), "--out", str(out),
                 "--target-regions", "4"]) == 0
    cli_trace = (out / "trace.csv").read_text()

    sid = upload(client, img).json()["id"]
    client.post(f"/sessions/{sid}/step", json={"count": 3})
    server_trace = client.get(f"/sessions/{sid}/trace").text
    assert server_trace == cli_trace


def test_delete_session(client, simple_session):
    sid = simple_session
    assert client.delete(f"/sessions/{sid}").status_code == 204
    assert client.get(f"/sessions/{sid}/state").status_code == 404
    assert client.delete(f"/sessions/{sid}").status_code == 404


def test_idle_eviction(rng):
    app = create_app(ttl=0.0)  # everything is stale immediately
    client = TestClient(app)
    img = random_image(rng, 8, 8, 3)
    sid = upload(client, img).json()["id"]
    upload(client, img)  # any create sweeps idle sessions
    assert client.get(f"/sessions/{sid}/state").status_code == 404


def test_grayscale_session(client, rng):
    img = random_image(rng, 8, 8, 1)
    resp = upload(client, img)
    assert resp.status_code == 201
    body = resp.json()
    assert body["channels"] == 1
    assert body["n_sr"] == 1
    sid = body["id"]
    stepped = client.post(f"/sessions/{sid}/step", json={"count": 1}).json()
    assert stepped["events"][0]["channel"] == "L"
