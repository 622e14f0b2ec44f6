"""Content-addressed object store and right-metadata documents.

Objects are addressed by a cid of the form

    cidv0-sha256:<64 lowercase hex chars>

where the hex is the SHA-256 of the object bytes. Right metadata is a
JSON document listing the name of the right, a description, and the
supporting documents, each document pointing at a stored object by cid.
"""

import re
from dataclasses import dataclass, field

from .canonical import canonical_json_bytes, sha256_hex
from .errors import err

CID_PREFIX = "cidv0-sha256:"

_CID_RE = re.compile(r"^cidv0-sha256:[0-9a-f]{64}$")


def make_cid(data: bytes) -> str:
    return CID_PREFIX + sha256_hex(data)


def is_cid(s) -> bool:
    return isinstance(s, str) and bool(_CID_RE.match(s))


def cid_digest(cid: str) -> bytes:
    if not is_cid(cid):
        raise err("ParseError", f"not a valid cid: {cid!r}")
    return bytes.fromhex(cid[len(CID_PREFIX):])


@dataclass
class ObjectStore:
    objects: dict = field(default_factory=dict)  # hex digest -> bytes

    def put(self, data: bytes) -> str:
        if not data:
            raise err("EmptyObject", "refusing to store an empty object")
        cid = make_cid(data)
        self.objects[cid[len(CID_PREFIX):]] = data
        return cid

    def get(self, cid: str) -> bytes:
        key = cid_digest(cid).hex()
        if key not in self.objects:
            raise err("NotFound", cid)
        return self.objects[key]

    def has(self, cid: str) -> bool:
        return is_cid(cid) and cid[len(CID_PREFIX):] in self.objects

    def __len__(self) -> int:
        return len(self.objects)


def build_right_metadata(store: ObjectStore, name_of_right: str,
                         description: str, documents: list,
                         extra: dict = None) -> str:
    """Assemble a right-metadata document and store it; returns its cid.

    documents: list of {"name", "description", "link"} where link is the
    cid of an object already in the store.
    """
    if not name_of_right:
        raise err("EmptyObject", "nameOfRight may not be empty")
    doc_entries = []
    for doc in documents:
        link = doc.get("link", "")
        if not link:
            raise err("InvalidDocumentLink", "document has no link")
        if not store.has(link):
            raise err("InvalidDocumentLink",
                      f"document link not in the object store: {link}")
        doc_entries.append({
            "name": doc.get("name", ""),
            "description": doc.get("description", ""),
            "link": link,
        })
    metadata = {
        "nameOfRight": name_of_right,
        "description": description,
        "documents": doc_entries,
    }
    if extra:
        merged = dict(extra)
        merged.update(metadata)  # core keys win over extras
        metadata = merged
    return store.put(canonical_json_bytes(metadata))


def resolve_uri(base_uri: str, token_id: int) -> str:
    """Substitute the 64-hex-digit token id into a base uri template."""
    if "{id}" not in base_uri:
        raise err("MissingPlaceholder",
                  "base uri has no {id} placeholder")
    return base_uri.replace("{id}", f"{token_id:064x}")
