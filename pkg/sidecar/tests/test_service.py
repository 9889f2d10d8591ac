import numpy as np
import pytest
from fastapi.testclient import TestClient

from earlyrisk_sidecar.config import SidecarConfig
from earlyrisk_sidecar.service import create_app


def cosine(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


@pytest.fixture(scope="module")
def client(test_config):
    return TestClient(create_app(test_config))


class TestMeta:
    def test_shape(self, client):
        meta = client.get("/meta").json()
        assert meta["encoder_dim"] == 1024
        assert len(meta["basic_labels"]) == 6
        assert len(meta["fine_labels"]) == 28
        assert meta["heads"] == {"basic": "softmax", "fine": "sigmoid"}


class TestEmbed:
    def test_single_text_width_1024(self, client):
        body = client.post("/embed", json={"texts": ["hello"]}).json()
        assert len(body["vectors"]) == 1
        assert len(body["vectors"][0]) == 1024

    def test_identical_texts_cosine_one(self, client):
        body = client.post("/embed", json={"texts": ["same text", "same text"]}).json()
        assert cosine(body["vectors"][0], body["vectors"][1]) == pytest.approx(1.0, abs=1e-6)

    def test_order_preserved(self, client):
        one = client.post("/embed", json={"texts": ["alpha"]}).json()["vectors"][0]
        two = client.post("/embed", json={"texts": ["beta", "alpha"]}).json()["vectors"]
        assert np.allclose(two[1], one)
        assert not np.allclose(two[0], one)

    def test_empty_batch_400(self, client):
        assert client.post("/embed", json={"texts": []}).status_code == 400

    def test_oversize_batch_413(self, client):
        texts = ["x"] * 17  # max_batch is 16 in the test config
        assert client.post("/embed", json={"texts": texts}).status_code == 413

    def test_vector_width_matches_meta(self, client):
        meta = client.get("/meta").json()
        body = client.post("/embed", json={"texts": ["probe"]}).json()
        assert len(body["vectors"][0]) == meta["encoder_dim"]


class TestEmotions:
    def test_shapes_and_ranges(self, client):
        body = client.post("/emotions", json={"texts": ["an ordinary day", "another one"]}).json()
        assert len(body["basic"]) == 2 and len(body["fine"]) == 2
        for row in body["basic"]:
            assert len(row) == 6
            assert all(0.0 <= v <= 1.0 for v in row)
        for row in body["fine"]:
            assert len(row) == 28
            assert all(0.0 <= v <= 1.0 for v in row)

    def test_basic_softmax_sums_to_one(self, client):
        body = client.post("/emotions", json={"texts": ["testing the head type"]}).json()
        assert sum(body["basic"][0]) == pytest.approx(1.0, abs=1e-4)

    def test_empty_batch_400(self, client):
        assert client.post("/emotions", json={"texts": []}).status_code == 400

    def test_deterministic(self, client):
        a = client.post("/emotions", json={"texts": ["repeat me"]}).json()
        b = client.post("/emotions", json={"texts": ["repeat me"]}).json()
        assert a == b


class TestLoadFailure:
    def test_unloadable_checkpoint_503(self, monkeypatch, tmp_path):
        pytest.importorskip("transformers")
        monkeypatch.setenv("HF_HUB_OFFLINE", "1")
        monkeypatch.setenv("TRANSFORMERS_OFFLINE", "1")
        config = SidecarConfig(backend="transformers",
                               encoder_checkpoint=str(tmp_path / "missing-model"))
        client = TestClient(create_app(config))
        response = client.post("/embed", json={"texts": ["x"]})
        assert response.status_code == 503


@pytest.fixture(scope="module")
def real_client(tiny_checkpoints):
    config = SidecarConfig(
        backend="transformers",
        encoder_checkpoint=tiny_checkpoints["encoder"],
        encoder_dim=1024,
        basic_checkpoint=tiny_checkpoints["basic"],
        fine_checkpoint=tiny_checkpoints["fine"],
        max_batch=8,
    )
    return TestClient(create_app(config))


class TestRealCheckpoints:
    """The same contract through actual transformer models (tiny, local)."""

    def test_embed_width_1024(self, real_client):
        body = real_client.post("/embed", json={"texts": ["eating about food"]}).json()
        assert len(body["vectors"][0]) == 1024

    def test_identical_inputs_cosine_one(self, real_client):
        body = real_client.post("/embed", json={"texts": ["fear of weight", "fear of weight"]}).json()
        assert cosine(body["vectors"][0], body["vectors"][1]) == pytest.approx(1.0, abs=1e-6)

    def test_emotions_shapes_and_softmax_head(self, real_client):
        body = real_client.post("/emotions", json={"texts": ["sad about body shape"]}).json()
        assert len(body["basic"][0]) == 6
        assert len(body["fine"][0]) == 28
        assert sum(body["basic"][0]) == pytest.approx(1.0, abs=1e-4)
        assert all(0.0 <= v <= 1.0 for v in body["fine"][0])

    def test_mismatched_width_rejected(self, tiny_checkpoints):
        config = SidecarConfig(
            backend="transformers",
            encoder_checkpoint=tiny_checkpoints["encoder"],
            encoder_dim=768,  # declared width disagrees with the checkpoint
        )
        client = TestClient(create_app(config))
        assert client.post("/embed", json={"texts": ["x"]}).status_code == 503
