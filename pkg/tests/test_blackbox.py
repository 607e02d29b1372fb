import json
import os
import sys
import textwrap

import numpy as np
import pytest

from surrex import AdapterError, Image, ParameterError, subprocess_adapter
from surrex.blackbox import (ConstantClassifier, builtin_quadrant_classifier,
                             decode_image_payload, encode_image_payload,
                             validate_probabilities)


class TestQuadrantClassifier:
    def test_black_image_uniform(self):
        box = builtin_quadrant_classifier()
        probs = box.predict_batch([Image(np.zeros((8, 8, 1)))])[0]
        assert np.allclose(probs, 0.25)

    def test_white_top_left_wins(self):
        data = np.zeros((8, 8, 1))
        data[:4, :4, 0] = 1.0
        probs = builtin_quadrant_classifier().predict_batch([Image(data)])[0]
        assert int(np.argmax(probs)) == 0

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(0)
        imgs = [Image(rng.uniform(0, 1, size=(10, 10, 3))) for _ in range(6)]
        probs = builtin_quadrant_classifier().predict_batch(imgs)
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-9)

    def test_each_quadrant_maps_to_its_class(self):
        for q, (ys, xs) in enumerate([(slice(0, 4), slice(0, 4)),
                                      (slice(0, 4), slice(4, 8)),
                                      (slice(4, 8), slice(0, 4)),
                                      (slice(4, 8), slice(4, 8))]):
            data = np.zeros((8, 8, 1))
            data[ys, xs, 0] = 1.0
            probs = builtin_quadrant_classifier().predict_batch([Image(data)])[0]
            assert int(np.argmax(probs)) == q


def test_validate_probabilities_rejects_bad_sum():
    with pytest.raises(AdapterError):
        validate_probabilities([[0.6, 0.3]], 2, 1, "test")


def test_payload_round_trip(rgb_16):
    doc = encode_image_payload(rgb_16)
    back = decode_image_payload(doc)
    assert back.shape == (16, 16, 3)
    assert np.array_equal(back, rgb_16.data.astype(np.float32).astype(np.float64))


STUB = textwrap.dedent(
    """
    import json, sys
    print(json.dumps({"protocol_version": 1, "n_classes": 2, "input_kind": "image"}), flush=True)
    for line in sys.stdin:
        req = json.loads(line)
        probs = [[0.7, 0.3] for _ in req["inputs"]]
        print(json.dumps({"id": req["id"], "probs": probs}), flush=True)
    """
)

RECORDING_STUB = textwrap.dedent(
    """
    import base64, json, sys
    print(json.dumps({"protocol_version": 1, "n_classes": 2, "input_kind": "image"}), flush=True)
    n_requests = 0
    for line in sys.stdin:
        req = json.loads(line)
        n_requests += 1
        probs = []
        for i, item in enumerate(req["inputs"]):
            raw = base64.b64decode(item["data_b64"])
            n_floats = len(raw) // 4
            # order marker: probability of class 1 encodes the input index
            p1 = round(0.1 * i + 0.01 * n_requests, 6)
            probs.append([1.0 - p1, p1])
        print(json.dumps({"id": req["id"], "probs": probs}), flush=True)
    """
)

BAD_SUM_STUB = textwrap.dedent(
    """
    import json, sys
    print(json.dumps({"protocol_version": 1, "n_classes": 2, "input_kind": "image"}), flush=True)
    for line in sys.stdin:
        req = json.loads(line)
        print(json.dumps({"id": req["id"], "probs": [[0.6, 0.3]] * len(req["inputs"])}), flush=True)
    """
)


def _stub_command(tmp_path, source, name):
    path = tmp_path / name
    path.write_text(source)
    return [sys.executable, str(path)]


class TestSubprocessAdapter:
    def test_fixed_probs_stub(self, tmp_path, rgb_16):
        with subprocess_adapter(_stub_command(tmp_path, STUB, "stub.py")) as box:
            assert box.n_classes == 2
            probs = box.predict_batch([rgb_16, rgb_16, rgb_16])
            assert np.allclose(probs, [[0.7, 0.3]] * 3)

    def test_batch_is_one_request_and_order_preserved(self, tmp_path, rgb_16):
        with subprocess_adapter(_stub_command(tmp_path, RECORDING_STUB, "rec.py")) as box:
            probs = box.predict_batch([rgb_16] * 5)
            # n_requests == 1 and per-input index marker intact
            expect = [0.1 * i + 0.01 for i in range(5)]
            assert np.allclose(probs[:, 1], expect)
            probs2 = box.predict_batch([rgb_16] * 2)
            assert np.allclose(probs2[:, 1], [0.02, 0.12])

    def test_bad_probability_sum_rejected(self, tmp_path, rgb_16):
        with subprocess_adapter(_stub_command(tmp_path, BAD_SUM_STUB, "bad.py")) as box:
            with pytest.raises(AdapterError):
                box.predict_batch([rgb_16])

    def test_spawn_failure(self):
        with pytest.raises(AdapterError, match="spawn"):
            subprocess_adapter(["/nonexistent/binary-xyz"])

    def test_handshake_kind_mismatch(self, tmp_path):
        with pytest.raises(AdapterError, match="handshake"):
            subprocess_adapter(_stub_command(tmp_path, STUB, "stub.py"),
                               input_kind="point2d")

    def test_child_exit_reported(self, tmp_path, rgb_16):
        crash = "import sys; sys.exit(3)"
        with pytest.raises(AdapterError):
            subprocess_adapter(_stub_command(tmp_path, crash, "crash.py"))

    def test_timeout(self, tmp_path, rgb_16):
        from surrex import AdapterTimeoutError
        slow = textwrap.dedent(
            """
            import json, sys, time
            print(json.dumps({"protocol_version": 1, "n_classes": 2, "input_kind": "image"}), flush=True)
            for line in sys.stdin:
                time.sleep(5)
            """
        )
        with subprocess_adapter(_stub_command(tmp_path, slow, "slow.py"),
                                timeout=0.5) as box:
            with pytest.raises(AdapterTimeoutError):
                box.predict_batch([rgb_16])
