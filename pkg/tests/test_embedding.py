import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from durqa.embedding import (
    HashEmbedder,
    RemoteEmbedder,
    _bucket,
    cosine_similarity,
    hash_embed,
)
from durqa.errors import CredentialError, ProtocolError, TransportError


# ---------------------------------------------------------------------------
# cosine_similarity
# ---------------------------------------------------------------------------

def test_identical_direction():
    assert cosine_similarity([1, 0], [1, 0]) == pytest.approx(1.0)


def test_orthogonal():
    assert cosine_similarity([1, 0], [0, 1]) == pytest.approx(0.0)


def test_analytic_angle():
    assert cosine_similarity([1, 1], [1, 0]) == pytest.approx(1 / math.sqrt(2), abs=1e-9)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        cosine_similarity([1, 0], [1, 0, 0])


def test_zero_vector_rejected():
    with pytest.raises(ValueError):
        cosine_similarity([0, 0], [1, 0])


_vectors = st.lists(
    st.floats(min_value=-100, max_value=100, allow_nan=False), min_size=3, max_size=3
).filter(lambda v: any(abs(x) > 1e-6 for x in v))


@given(_vectors)
def test_self_similarity_is_one(v):
    assert cosine_similarity(v, v) == pytest.approx(1.0, abs=1e-9)


@given(_vectors, _vectors, st.floats(min_value=0.01, max_value=50))
def test_positive_scale_invariance(a, b, c):
    scaled = [c * x for x in a]
    assert cosine_similarity(scaled, b) == pytest.approx(
        cosine_similarity(a, b), abs=1e-9
    )


# ---------------------------------------------------------------------------
# hash_embed
# ---------------------------------------------------------------------------

def test_hash_embed_deterministic():
    a = hash_embed("myopathy risk with statins", 256)
    b = hash_embed("myopathy risk with statins", 256)
    assert np.array_equal(a, b)


def test_hash_embed_unit_norm():
    for text in ["a", "a b c d", "금기 약물", "x" * 500]:
        v = hash_embed(text, 256)
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-6)


def test_hash_embed_identical_text_full_similarity():
    assert cosine_similarity(hash_embed("a b c", 256), hash_embed("a b c", 256)) == pytest.approx(1.0)


def test_shared_tokens_score_higher_than_disjoint():
    # The oracle check: verified collision-free bucket assignments first.
    buckets = {t: _bucket(t, 256) for t in ["a", "b", "x", "y"]}
    assert len(set(buckets.values())) == 4, f"hash collision among test tokens: {buckets}"
    same = cosine_similarity(hash_embed("a b", 256), hash_embed("a b", 256))
    disjoint = cosine_similarity(hash_embed("a b", 256), hash_embed("x y", 256))
    assert same >= disjoint
    assert disjoint == pytest.approx(0.0)


def test_zero_token_text_maps_to_bucket_zero_unit():
    v = hash_embed("?!...", 64)
    assert v[0] == pytest.approx(1.0)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-6)


def test_dim_below_eight_rejected():
    with pytest.raises(ValueError):
        hash_embed("text", 4)


def test_embedder_tag_encodes_dim():
    assert HashEmbedder(dim=128).tag != HashEmbedder(dim=256).tag


# ---------------------------------------------------------------------------
# RemoteEmbedder against the scripted stub
# ---------------------------------------------------------------------------

def _fixed_vectors(n, dim=8):
    return [[1.0 if i == j % dim else 0.0 for i in range(dim)] for j in range(n)]


def test_remote_embed_orders_and_normalizes(stub_server):
    url, handler = stub_server
    handler.script.append((200, {"vectors": [[2.0] + [0.0] * 7, [0.0, 3.0] + [0.0] * 6, [0.0, 0.0, 4.0] + [0.0] * 5]}))
    client = RemoteEmbedder(url, dim=8, backoff_base=0.01)
    vectors = client.embed(["one", "two", "three"])
    assert len(vectors) == 3
    assert vectors[0][0] == pytest.approx(1.0)
    assert vectors[1][1] == pytest.approx(1.0)
    assert vectors[2][2] == pytest.approx(1.0)
    for v in vectors:
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-6)


def test_remote_embed_batches_requests(stub_server):
    url, handler = stub_server
    handler.script.append((200, {"vectors": _fixed_vectors(2)}))
    handler.script.append((200, {"vectors": _fixed_vectors(1)}))
    client = RemoteEmbedder(url, dim=8, batch_size=2, backoff_base=0.01)
    vectors = client.embed(["a", "b", "c"])
    assert len(vectors) == 3
    assert len(handler.requests) == 2
    assert handler.requests[0]["payload"] == {"input": ["a", "b"]}
    assert handler.requests[1]["payload"] == {"input": ["c"]}


def test_remote_embed_retries_transient_failures(stub_server):
    url, handler = stub_server
    handler.script.append((500, {}))
    handler.script.append((500, {}))
    handler.script.append((200, {"vectors": _fixed_vectors(1)}))
    client = RemoteEmbedder(url, dim=8, backoff_base=0.01)
    assert len(client.embed(["a"])) == 1
    assert len(handler.requests) == 3


def test_remote_embed_exhausted_retries(stub_server):
    url, handler = stub_server
    handler.script.extend([(500, {})] * 3)
    client = RemoteEmbedder(url, dim=8, backoff_base=0.01)
    with pytest.raises(TransportError):
        client.embed(["a"])
    assert len(handler.requests) == 3


def test_remote_embed_auth_failure_no_retry(stub_server):
    url, handler = stub_server
    handler.script.append((401, {}))
    client = RemoteEmbedder(url, api_key="bad", dim=8, backoff_base=0.01)
    with pytest.raises(CredentialError):
        client.embed(["a"])
    assert len(handler.requests) == 1


def test_remote_embed_wrong_length_vector_is_protocol_error(stub_server):
    url, handler = stub_server
    handler.script.append((200, {"vectors": [[1.0, 0.0]]}))
    client = RemoteEmbedder(url, dim=8, backoff_base=0.01)
    with pytest.raises(ProtocolError):
        client.embed(["a"])


def test_remote_embed_wrong_count_is_protocol_error(stub_server):
    url, handler = stub_server
    handler.script.append((200, {"vectors": _fixed_vectors(2)}))
    client = RemoteEmbedder(url, dim=8, backoff_base=0.01)
    with pytest.raises(ProtocolError):
        client.embed(["a"])


def test_remote_embed_sends_bearer_key(stub_server):
    url, handler = stub_server
    handler.script.append((200, {"vectors": _fixed_vectors(1)}))
    client = RemoteEmbedder(url, api_key="sekrit", dim=8, backoff_base=0.01)
    client.embed(["a"])
    assert handler.requests[0]["headers"].get("Authorization") == "Bearer sekrit"


def test_from_env():
    client = RemoteEmbedder.from_env(
        {"EMBED_ENDPOINT": "http://example.invalid/v1", "EMBED_DIM": "32", "EMBED_BATCH": "7"}
    )
    assert client.dim == 32
    assert client.batch_size == 7
    with pytest.raises(ValueError):
        RemoteEmbedder.from_env({})
