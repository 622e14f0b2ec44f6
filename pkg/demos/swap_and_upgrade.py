"""Consent-gated atomic swaps and behavior-preserving upgrades.

Drives the node API directly (no CLI, no disk) to show two guarantees:

  1. An atomic swap moves both sides or neither, and only after both
     parties consented to the exact same descriptor.
  2. Authorizing an upgrade that keeps the same behavior leaves the
     semantic ledger digest untouched, even though the chain records
     the authorization.

Run with: python3 demos/swap_and_upgrade.py
"""

from estateledger.errors import LedgerError
from estateledger.node import Node
from estateledger.tokens import fractional_of, swap_descriptor_digest

node = Node()
admin = node.init_genesis(b"swap-admin", timestamp=1)
ts = iter(range(2, 100))


def run(caller, op, params, value=0):
    return node.execute(caller, op, params, value=value, timestamp=next(ts))


seller = run(admin, "registerStakeholder",
             {"role": "Seller", "publicKey": b"swap-seller".hex(),
              "infoCid": ""})["address"]
buyer = run(admin, "registerStakeholder",
            {"role": "Buyer", "publicKey": b"swap-buyer".hex(),
             "infoCid": ""})["address"]
run(admin, "faucet", {"to": seller, "amount": 1000})
run(admin, "faucet", {"to": buyer, "amount": 1000})
run(admin, "initializeFactory", {"versionId": 1, "behaviorTag": "base"})
prop = run(seller, "deployProperty",
           {"treasury": admin, "upgrader": admin, "admin": seller,
            "uri": "ipfs://t/{id}.json", "contractName": "Swap demo",
            "description": ""})["address"]
cid = run(seller, "putObject", {"dataHex": b"deed".hex()})["cid"]
run(seller, "registerDocument", {"property": prop, "cid": cid})
root = node.state.properties[prop].document_root().hex()
run(admin, "approvedProperty", {"property": prop, "parentHash": root})
run(seller, "mintNFT", {"property": prop, "id": 1, "data": "", "price": 0})
run(seller, "mintFractional",
    {"property": prop, "rightId": 1, "units": 100, "pricePerUnit": 5})

frac = fractional_of(1)
tokens = node.state.properties[prop].tokens
print("before the swap:")
print(f"  seller units {tokens.balance_of(seller, frac)}, "
      f"coins {node.state.native.balance(seller)}")
print(f"  buyer  units {tokens.balance_of(buyer, frac)}, "
      f"coins {node.state.native.balance(buyer)}")

# 40 units against 120 coins, described once, consented to twice
legs_seller, legs_buyer = [[frac, 40]], []
digest = swap_descriptor_digest(seller, legs_seller, 0,
                                buyer, legs_buyer, 120)
swap_params = {"property": prop, "partyA": seller, "partyB": buyer,
               "legsA": legs_seller, "legsB": legs_buyer,
               "valueA": 0, "valueB": 120}

print()
try:
    run(seller, "atomicSwap", swap_params)
except LedgerError as exc:
    print(f"swap without consent is rejected: {exc}")

run(seller, "consentSwap", {"property": prop, "digest": digest})
run(buyer, "consentSwap", {"property": prop, "digest": digest})
run(seller, "atomicSwap", swap_params)
print("after both parties consent, the swap lands atomically:")
tokens = node.state.properties[prop].tokens
print(f"  seller units {tokens.balance_of(seller, frac)}, "
      f"coins {node.state.native.balance(seller)}")
print(f"  buyer  units {tokens.balance_of(buyer, frac)}, "
      f"coins {node.state.native.balance(buyer)}")

print()
try:
    run(seller, "atomicSwap", swap_params)
except LedgerError as exc:
    print(f"consents are one-shot, replaying fails: {exc}")

print()
before = node.ledger_digest()
run(admin, "authorizeUpgrade", {"versionId": 1, "behaviorTag": "base"})
after = node.ledger_digest()
print("identity upgrade authorized and logged on-chain")
print(f"  ledger digest before: {before[:32]}...")
print(f"  ledger digest after:  {after[:32]}...")
print(f"  unchanged: {before == after}")

rebuilt = node.replay()
print()
print(f"full replay from the block log matches: "
      f"{rebuilt.full_digest() == node.full_digest()}")
