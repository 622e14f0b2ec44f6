"""State directory layout, snapshot export/import, and the write lock.

Layout inside a state directory:

    chain.json   the block log, canonical JSON
    state.json   accounts, stakeholders, factory, properties, config
    objects/     one <hex-digest>.bin file per stored object
    .lock        flock target guarding against concurrent writers

Files are written to a temp name and renamed so a kill mid-write never
leaves a half-written file. Object files are verified against their
filename digest on load.
"""

import fcntl
import json
import os

from .canonical import canonical_json_bytes, sha256_hex
from .chain import Chain, NativeLedger
from .errors import err
from .factory import Factory
from .identity import StakeholderRegistry
from .node import STATE_VERSION, LedgerState, Node
from .property_contract import PropertyContract
from .storage import ObjectStore


def _write_atomic(path: str, data: bytes):
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def save_state(state_dir: str, node: Node):
    os.makedirs(os.path.join(state_dir, "objects"), exist_ok=True)
    for digest, data in node.state.store.objects.items():
        path = os.path.join(state_dir, "objects", digest + ".bin")
        if not os.path.exists(path):  # content-addressed: never rewritten
            _write_atomic(path, data)
    _write_atomic(os.path.join(state_dir, "state.json"),
                  canonical_json_bytes(node.state.state_dict()))
    _write_atomic(os.path.join(state_dir, "chain.json"),
                  canonical_json_bytes(node.state.chain.to_dict()))


def _state_from_dicts(state_d: dict, chain_d: dict, objects: dict) -> Node:
    if state_d.get("version") != STATE_VERSION:
        raise err("VersionMismatch",
                  f"state version {state_d.get('version')}, "
                  f"expected {STATE_VERSION}")
    state = LedgerState(
        config=dict(state_d["config"]),
        chain=Chain.from_dict(chain_d),
        native=NativeLedger.from_dict(state_d["accounts"]),
        registry=StakeholderRegistry.from_dict(state_d["stakeholders"]),
        store=ObjectStore(objects=dict(objects)),
        factory=Factory.from_dict(state_d["factory"]),
        properties={a: PropertyContract.from_dict(p)
                    for a, p in state_d["properties"].items()},
    )
    return Node(state)


def load_state(state_dir: str) -> Node:
    state_path = os.path.join(state_dir, "state.json")
    chain_path = os.path.join(state_dir, "chain.json")
    if not (os.path.exists(state_path) and os.path.exists(chain_path)):
        raise err("Uninitialized", f"{state_dir} holds no ledger; run init")
    with open(state_path, "rb") as fh:
        state_d = json.loads(fh.read().decode("utf-8"))
    with open(chain_path, "rb") as fh:
        chain_d = json.loads(fh.read().decode("utf-8"))
    objects = {}
    objects_dir = os.path.join(state_dir, "objects")
    if os.path.isdir(objects_dir):
        for name in sorted(os.listdir(objects_dir)):
            if not name.endswith(".bin"):
                continue
            with open(os.path.join(objects_dir, name), "rb") as fh:
                data = fh.read()
            digest = name[:-len(".bin")]
            if sha256_hex(data) != digest:
                raise err("CorruptSnapshot",
                          f"object {name} does not match its digest")
            objects[digest] = data
    return _state_from_dicts(state_d, chain_d, objects)


# -- snapshots -------------------------------------------------------------


def export_snapshot(node: Node) -> dict:
    body = {
        "version": STATE_VERSION,
        "config": node.state.config,
        "accounts": node.state.native.to_dict(),
        "stakeholders": node.state.registry.to_dict(),
        "properties": {a: p.to_dict()
                       for a, p in sorted(node.state.properties.items())},
        "factory": node.state.factory.to_dict(),
        "chain": node.state.chain.to_dict(),
        "objects": {k: v.hex()
                    for k, v in sorted(node.state.store.objects.items())},
    }
    snapshot = dict(body)
    snapshot["digest"] = sha256_hex(canonical_json_bytes(body))
    return snapshot


def import_snapshot(snapshot: dict) -> Node:
    if snapshot.get("version") != STATE_VERSION:
        raise err("VersionMismatch",
                  f"snapshot version {snapshot.get('version')}, "
                  f"expected {STATE_VERSION}")
    body = {k: v for k, v in snapshot.items() if k != "digest"}
    if sha256_hex(canonical_json_bytes(body)) != snapshot.get("digest"):
        raise err("CorruptSnapshot", "snapshot digest does not match")
    state_d = {
        "version": body["version"],
        "config": body["config"],
        "accounts": body["accounts"],
        "stakeholders": body["stakeholders"],
        "factory": body["factory"],
        "properties": body["properties"],
    }
    objects = {k: bytes.fromhex(v) for k, v in body["objects"].items()}
    return _state_from_dicts(state_d, body["chain"], objects)


def write_snapshot(path: str, node: Node):
    _write_atomic(path, canonical_json_bytes(export_snapshot(node)))


def read_snapshot(path: str) -> Node:
    if not os.path.exists(path):
        raise err("NotFound", path)
    with open(path, "rb") as fh:
        snapshot = json.loads(fh.read().decode("utf-8"))
    return import_snapshot(snapshot)


# -- locking ----------------------------------------------------------------


class StateLock:
    """flock-based exclusive lock on <state_dir>/.lock."""

    def __init__(self, state_dir: str):
        os.makedirs(state_dir, exist_ok=True)
        self.path = os.path.join(state_dir, ".lock")
        self._fh = None

    def __enter__(self):
        self._fh = open(self.path, "a+")
        try:
            fcntl.flock(self._fh.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            self._fh.close()
            self._fh = None
            raise err("StateLocked",
                      f"another process holds {self.path}")
        return self

    def __exit__(self, *exc):
        if self._fh is not None:
            fcntl.flock(self._fh.fileno(), fcntl.LOCK_UN)
            self._fh.close()
            self._fh = None
        return False
