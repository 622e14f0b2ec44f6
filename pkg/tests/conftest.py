import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from estateledger.node import Node

ADMIN_KEY = b"admin-key-1"
SELLER_KEY = b"seller-key"
BUYER_KEY = b"buyer-key"
REALTOR_KEY = b"realtor-key"

TREASURY = "0x" + "00" * 19 + "aa"
URI = "ipfs://meta/{id}.json"


def register(node, admin, role, key, ts=0):
    return node.execute(admin, "registerStakeholder",
                        {"role": role, "publicKey": key.hex(), "infoCid": ""},
                        timestamp=ts)["address"]


@pytest.fixture
def node():
    """Node with an admin, a funded seller and buyer, and a factory."""
    n = Node()
    admin = n.init_genesis(ADMIN_KEY, timestamp=1000)
    seller = register(n, admin, "Seller", SELLER_KEY, 1001)
    buyer = register(n, admin, "Buyer", BUYER_KEY, 1002)
    n.execute(admin, "faucet", {"to": seller, "amount": 2000}, timestamp=1003)
    n.execute(admin, "faucet", {"to": buyer, "amount": 1000}, timestamp=1004)
    n.execute(admin, "initializeFactory",
              {"versionId": 1, "behaviorTag": "base"}, timestamp=1005)
    n.admin, n.seller, n.buyer = admin, seller, buyer
    return n


def deploy(node, caller=None, ts=1006):
    caller = caller or node.seller
    return node.execute(caller, "deployProperty",
                        {"treasury": TREASURY, "upgrader": node.admin,
                         "admin": node.admin, "uri": URI,
                         "contractName": "House", "description": "a house"},
                        timestamp=ts)["address"]


def add_doc(node, prop, data: bytes, ts=1007):
    cid = node.execute(node.seller, "putObject", {"dataHex": data.hex()},
                       timestamp=ts)["cid"]
    node.execute(node.seller, "registerDocument",
                 {"property": prop, "cid": cid}, timestamp=ts)
    return cid


def approve(node, prop, ts=1008):
    root = node.state.properties[prop].document_root()
    node.execute(node.admin, "approvedProperty",
                 {"property": prop, "parentHash": root.hex()}, timestamp=ts)
    return root


@pytest.fixture
def approved_prop(node):
    """(node, property address) with one document, approved, ready to mint."""
    prop = deploy(node)
    add_doc(node, prop, b"deed of the house")
    approve(node, prop)
    return node, prop
