import time

import pytest
from fastapi.testclient import TestClient

from fairscore.service import create_app

from .conftest import EXAMPLE1_CSV

UPLOAD_PARAMS = {"scoring_cols": "x1,x2", "id_col": "id", "sensitive": "location"}
DETROIT = {"group": "Detroit", "k": 3, "min_count": 1}


@pytest.fixture
def client():
    return TestClient(create_app(sync_wait=30.0))


@pytest.fixture
def session_id(client):
    response = client.post(
        "/datasets",
        params=UPLOAD_PARAMS,
        content=EXAMPLE1_CSV,
        headers={"content-type": "text/csv"},
    )
    assert response.status_code == 200
    return response.json()["session_id"]


class TestDatasetUpload:
    def test_upload_reports_shape_and_groups(self, client):
        response = client.post(
            "/datasets",
            params=UPLOAD_PARAMS,
            content=EXAMPLE1_CSV,
            headers={"content-type": "text/csv"},
        )
        body = response.json()
        assert (body["n"], body["d"]) == (6, 2)
        assert body["columns"] == ["x1", "x2"]
        assert body["groups"] == ["Chicago", "Detroit"]

    def test_malformed_csv_is_400(self, client):
        response = client.post(
            "/datasets",
            params=UPLOAD_PARAMS,
            content="id,x1,location\nt1,1,East\n",
        )
        assert response.status_code == 400

    def test_unknown_session_is_404(self, client):
        response = client.post("/sessions/nope/rank", json={"weights": [1, 1]})
        assert response.status_code == 404

    def test_expired_session_is_410(self):
        client = TestClient(create_app(ttl_seconds=0.0))
        sid = client.post(
            "/datasets", params=UPLOAD_PARAMS, content=EXAMPLE1_CSV
        ).json()["session_id"]
        time.sleep(0.01)
        response = client.post(f"/sessions/{sid}/rank", json={"weights": [1, 1]})
        assert response.status_code == 410


class TestRankEndpoint:
    def test_equal_weights(self, client, session_id):
        response = client.post(
            f"/sessions/{session_id}/rank", json={"weights": [1, 1], "k": 3}
        )
        body = response.json()
        assert body["order"] == ["t6", "t4", "t2", "t3", "t5", "t1"]
        assert body["group_counts"] == {"Chicago": 3, "Detroit": 0}

    def test_constraint_verdict(self, client, session_id):
        response = client.post(
            f"/sessions/{session_id}/rank",
            json={"weights": [1, 1], "constraints": [DETROIT]},
        )
        assert response.json()["fair"] is False

    def test_dimension_mismatch_is_422(self, client, session_id):
        response = client.post(
            f"/sessions/{session_id}/rank", json={"weights": [1, 1, 1]}
        )
        assert response.status_code == 422

    def test_malformed_body_is_400(self, client, session_id):
        response = client.post(
            f"/sessions/{session_id}/rank", json={"weights": "not-a-list"}
        )
        assert response.status_code == 400


class TestComputeEndpoints:
    def test_up_unsatisfiable_constraint(self, client, session_id):
        response = client.post(
            f"/sessions/{session_id}/up",
            json={
                "weights": [1, 1],
                "theta": 0.3927,
                "constraints": [{"group": "Boston", "k": 3, "min_count": 1}],
                "samples": 200,
                "seed": 1,
            },
        )
        body = response.json()
        assert body["up"] == 1.0 and body["error"] == 0.0

    def test_deterministic_per_seed(self, client, session_id):
        request = {
            "weights": [1, 1],
            "theta": 0.3927,
            "constraints": [DETROIT],
            "samples": 1000,
            "seed": 42,
        }
        first = client.post(f"/sessions/{session_id}/up", json=request)
        second = client.post(f"/sessions/{session_id}/up", json=request)
        assert first.content == second.content

    def test_theta_and_cosine_both_given_is_422(self, client, session_id):
        response = client.post(
            f"/sessions/{session_id}/up",
            json={
                "weights": [1, 1],
                "theta": 0.3,
                "cosine_similarity": 0.95,
                "samples": 100,
                "seed": 0,
            },
        )
        assert response.status_code == 422

    def test_suggest_returns_fair_function(self, client, session_id):
        response = client.post(
            f"/sessions/{session_id}/suggest",
            json={
                "weights": [1, 1],
                "theta": 0.19635,
                "constraints": [DETROIT],
                "budget": 500,
                "seed": 2,
            },
        )
        body = response.json()
        assert body["found"] is True
        verdict = client.post(
            f"/sessions/{session_id}/rank",
            json={"weights": body["function"], "constraints": [DETROIT]},
        )
        assert verdict.json()["fair"] is True

    def test_audit_reference_outside_region_is_422(self, client, session_id):
        response = client.post(
            f"/sessions/{session_id}/audit",
            json={"weights": [1, 1], "theta": 0.01, "samples": 100, "seed": 0},
        )
        assert response.status_code != 422  # the reference is its own center
        response = client.post(
            f"/sessions/{session_id}/audit",
            json={"weights": [1, 1], "cosine_similarity": 2.0, "samples": 100, "seed": 0},
        )
        assert response.status_code == 422

    def test_three_dimensional_dataset_reuses_session_table(self, client):
        rows = "\n".join(
            f"{(i * 7) % 10 / 10},{(i * 3) % 10 / 10},{(i * 9) % 10 / 10},{'X' if i % 2 else 'Y'}"
            for i in range(1, 21)
        )
        sid = client.post(
            "/datasets",
            params={"scoring_cols": "a,b,c", "sensitive": "g"},
            content=f"a,b,c,g\n{rows}\n",
        ).json()["session_id"]
        request = {
            "weights": [1.0, 0.6, 0.3],
            "theta": 0.1,
            "constraints": [{"group": "X", "k": 5, "min_count": 1}],
            "samples": 500,
            "seed": 9,
        }
        first = client.post(f"/sessions/{sid}/up", json=request)
        second = client.post(f"/sessions/{sid}/up", json=request)
        assert first.status_code == 200
        assert first.content == second.content

    def test_stable_histogram(self, client, session_id):
        response = client.post(
            f"/sessions/{session_id}/stable",
            json={
                "weights": [1, 1],
                "theta": 0.3927,
                "samples": 1000,
                "top": 5,
                "seed": 3,
            },
        )
        body = response.json()
        assert sum(body["histogram"].values()) == 1000
        assert len(body["top_rankings"]) <= 5
        assert body["reference_stability"][0] <= 1.0


class TestAsyncJobs:
    def test_long_job_detaches_and_completes(self, session_id=None):
        client = TestClient(create_app(sync_wait=0.0))
        sid = client.post(
            "/datasets", params=UPLOAD_PARAMS, content=EXAMPLE1_CSV
        ).json()["session_id"]
        response = client.post(
            f"/sessions/{sid}/up",
            json={
                "weights": [1, 1],
                "theta": 0.3927,
                "constraints": [DETROIT],
                "samples": 5000,
                "seed": 5,
            },
        )
        assert response.status_code == 202
        job_id = response.json()["job_id"]
        deadline = time.time() + 30
        while time.time() < deadline:
            poll = client.get(f"/sessions/{sid}/progress/{job_id}")
            assert poll.status_code == 200
            body = poll.json()
            assert 0.0 <= body["done_fraction"] <= 1.0
            if body["done"]:
                assert "result" in body
                assert 0.0 <= body["result"]["up"] <= 1.0
                break
            time.sleep(0.02)
        else:
            pytest.fail("job never completed")

    def test_unknown_job_is_404(self, client, session_id):
        response = client.get(f"/sessions/{session_id}/progress/missing")
        assert response.status_code == 404
