import hashlib
import json

import pytest
from hypothesis import given, strategies as st

from estateledger.errors import LedgerError
from estateledger.storage import (ObjectStore, build_right_metadata,
                                  cid_digest, is_cid, make_cid, resolve_uri)


def test_put_get_round_trip():
    store = ObjectStore()
    cid = store.put(b"hello")
    assert store.get(cid) == b"hello"


@given(st.binary(min_size=1, max_size=200))
def test_round_trip_and_cid_determinism(data):
    store = ObjectStore()
    assert store.put(data) == store.put(data)
    assert store.get(store.put(data)) == data


def test_cid_is_external_sha256():
    data = b"some document"
    cid = make_cid(data)
    assert cid == "cidv0-sha256:" + hashlib.sha256(data).hexdigest()
    assert cid_digest(cid) == hashlib.sha256(data).digest()


def test_empty_object_rejected():
    with pytest.raises(LedgerError) as e:
        ObjectStore().put(b"")
    assert e.value.code == "EmptyObject"


def test_unknown_cid_not_found():
    store = ObjectStore()
    with pytest.raises(LedgerError) as e:
        store.get(make_cid(b"never stored"))
    assert e.value.code == "NotFound"


def test_is_cid():
    assert is_cid(make_cid(b"x"))
    assert not is_cid("cidv0-sha256:xyz")
    assert not is_cid("0x" + "00" * 32)
    assert not is_cid(None)


# -- right metadata -------------------------------------------------------------


def store_with_doc():
    store = ObjectStore()
    return store, store.put(b"a scanned deed")


def test_metadata_has_expected_keys():
    store, doc_cid = store_with_doc()
    cid = build_right_metadata(
        store, "Equity Right", "This right depicts right of equity",
        [{"name": "deed", "description": "the deed", "link": doc_cid}])
    obj = json.loads(store.get(cid).decode("utf-8"))
    assert set(obj) == {"nameOfRight", "description", "documents"}
    assert obj["nameOfRight"] == "Equity Right"
    assert obj["documents"][0] == {"name": "deed", "description": "the deed",
                                   "link": doc_cid}


def test_identical_fields_identical_cid():
    store, doc_cid = store_with_doc()
    docs = [{"name": "d", "description": "", "link": doc_cid}]
    assert (build_right_metadata(store, "R", "desc", docs)
            == build_right_metadata(store, "R", "desc", docs))


def test_document_field_order_does_not_matter():
    store, doc_cid = store_with_doc()
    a = build_right_metadata(
        store, "R", "d", [{"name": "n", "description": "x", "link": doc_cid}])
    b = build_right_metadata(
        store, "R", "d", [{"link": doc_cid, "description": "x", "name": "n"}])
    assert a == b


def test_empty_name_rejected():
    store, doc_cid = store_with_doc()
    with pytest.raises(LedgerError) as e:
        build_right_metadata(store, "", "d", [])
    assert e.value.code == "EmptyObject"


def test_empty_or_unknown_link_rejected():
    store, _ = store_with_doc()
    for link in ("", make_cid(b"not stored")):
        with pytest.raises(LedgerError) as e:
            build_right_metadata(store, "R", "d", [{"name": "n",
                                                    "link": link}])
        assert e.value.code == "InvalidDocumentLink"


def test_extra_fields_preserved_but_never_override():
    # the schema is open-ended; extras ride along in canonical form
    store, doc_cid = store_with_doc()
    cid = build_right_metadata(store, "R", "d", [],
                               extra={"zone": "residential",
                                      "nameOfRight": "spoofed"})
    obj = json.loads(store.get(cid).decode("utf-8"))
    assert obj["zone"] == "residential"
    assert obj["nameOfRight"] == "R"


# -- uri resolution ---------------------------------------------------------------


def test_resolve_substitutes_64_hex_chars():
    out = resolve_uri("ipfs://Qx/{id}.json", 1)
    assert out == "ipfs://Qx/" + "0" * 63 + "1.json"
    assert resolve_uri("{id}", 0) == "0" * 64


def test_resolve_large_id():
    token = (1 << 255) | 7
    assert resolve_uri("x/{id}", token) == "x/" + f"{token:064x}"


def test_missing_placeholder():
    with pytest.raises(LedgerError) as e:
        resolve_uri("ipfs://Qx/1.json", 1)
    assert e.value.code == "MissingPlaceholder"
