"""Single-writer node: executes commands atomically and seals blocks.

Every mutating operation runs against a deep copy of the state; on
success the copy is committed and exactly one block is appended
holding the operation's transaction (deployments add an event
transaction). On failure nothing changes and no block is appended.

The block validator is the lexicographically smallest active
administrator. Replaying a recorded chain from genesis re-executes
every transaction and must reproduce the recorded block hashes and the
final state digest.
"""

import copy
from dataclasses import dataclass, field

from . import factory as factory_mod
from .addresses import derive_address
from .canonical import canonical_json_bytes, sha256_hex
from .chain import Chain, NativeLedger, Transaction
from .errors import err
from .factory import Factory, ImplementationVersion
from .identity import AllowlistVerifier, Role, StakeholderRegistry, parse_role
from .storage import ObjectStore, build_right_metadata
from .tokens import atomic_swap, swap_descriptor_digest

STATE_VERSION = 1

# ops that may carry attached native value
PAYABLE = {"mintNFT", "mintBatchNFTs", "transferNFT", "distributeEarnings"}

# event transactions are emitted by executors, never invoked directly
EVENT_OPS = {"DeployedProperty"}


@dataclass
class LedgerState:
    config: dict = field(default_factory=lambda: {"allowlist": None})
    chain: Chain = field(default_factory=Chain)
    native: NativeLedger = field(default_factory=NativeLedger)
    registry: StakeholderRegistry = field(default_factory=StakeholderRegistry)
    store: ObjectStore = field(default_factory=ObjectStore)
    factory: Factory = field(default_factory=Factory)
    properties: dict = field(default_factory=dict)  # address -> contract

    def property_at(self, address: str):
        prop = self.properties.get(address)
        if prop is None:
            raise err("NotFound", f"no property at {address}")
        return prop

    def state_dict(self) -> dict:
        return {
            "version": STATE_VERSION,
            "config": self.config,
            "accounts": self.native.to_dict(),
            "stakeholders": self.registry.to_dict(),
            "factory": self.factory.to_dict(),
            "properties": {a: p.to_dict()
                           for a, p in sorted(self.properties.items())},
        }


class Node:
    def __init__(self, state: LedgerState = None):
        self.state = state if state is not None else LedgerState()

    # -- digests ------------------------------------------------------------

    def _semantic_dict(self, include_chain: bool) -> dict:
        # config stays out: operational knobs must not shift state digests
        d = {
            "accounts": self.state.native.to_dict(),
            "factory": self.state.factory.to_dict(),
            "objects": {k: v.hex()
                        for k, v in sorted(self.state.store.objects.items())},
            "properties": {a: p.to_dict()
                           for a, p in sorted(self.state.properties.items())},
            "stakeholders": self.state.registry.to_dict(),
        }
        if include_chain:
            d["chain"] = self.state.chain.to_dict()
        return d

    def full_digest(self) -> str:
        return sha256_hex(canonical_json_bytes(self._semantic_dict(True)))

    def ledger_digest(self) -> str:
        """State digest without the block log; upgrades and other logged
        no-ops leave this unchanged."""
        return sha256_hex(canonical_json_bytes(self._semantic_dict(False)))

    def properties_digest(self) -> str:
        props = {a: p.to_dict() for a, p in sorted(self.state.properties.items())}
        return sha256_hex(canonical_json_bytes(props))

    # -- lifecycle ------------------------------------------------------------

    def init_genesis(self, admin_key: bytes, info_cid: str = "",
                     timestamp: int = 0) -> str:
        self.state.chain.append_genesis(timestamp)
        result = self.execute(
            caller=derive_address(admin_key),
            operation="bootstrapAdmin",
            params={"publicKey": admin_key.hex(), "infoCid": info_cid},
            timestamp=timestamp,
        )
        return result["address"]

    def _verifier(self):
        path = self.state.config.get("allowlist")
        return AllowlistVerifier(path) if path else None

    # -- execution -------------------------------------------------------------

    def execute(self, caller: str, operation: str, params: dict,
                value: int = 0, timestamp: int = 0, *,
                verify_keys: bool = True) -> dict:
        if operation in EVENT_OPS:
            raise err("ParseError", f"{operation} is an event, not a command")
        executor = EXECUTORS.get(operation)
        if executor is None:
            raise err("ParseError", f"unknown operation {operation!r}")
        if not self.state.chain.blocks:
            raise err("Uninitialized", "no genesis block; run init first")
        if value < 0:
            raise err("ParseError", "negative attached value")
        if value and operation not in PAYABLE:
            raise err("UnexpectedValue",
                      f"{operation} does not accept attached value")
        if operation == "bootstrapAdmin":
            if self.state.registry.stakeholders:
                raise err("NotAuthorized",
                          "bootstrap only works on an empty registry")
        elif not self.state.registry.is_active(caller):
            raise err("NotAuthorized",
                      f"{caller} is not an active stakeholder")

        working = copy.deepcopy(self.state)
        verifier = self._verifier() if verify_keys else None
        result, events = executor(working, caller, params, value, verifier)

        txs = [Transaction(caller=caller, operation=operation, params=params,
                           attached_value=value)]
        txs.extend(events)
        admins = working.registry.active_admins()
        if not admins:
            raise err("NotAuthorized", "no active administrator to seal the block")
        working.chain.append_block(
            validator=admins[0], transactions=txs, timestamp=timestamp,
            admin_check=working.registry.is_active_admin)
        self.state = working
        return result

    # -- replay -----------------------------------------------------------------

    def replay(self) -> "Node":
        """Re-execute the recorded chain from genesis on a fresh node.

        Returns the rebuilt node; raises HashMismatch if any replayed
        block hash differs from the recorded one.
        """
        blocks = self.state.chain.blocks
        if not blocks:
            raise err("Uninitialized", "nothing to replay")
        fresh = Node(LedgerState(config=copy.deepcopy(self.state.config)))
        fresh.state.chain.append_genesis(blocks[0].timestamp)
        if fresh.state.chain.blocks[0].hash != blocks[0].hash:
            raise err("HashMismatch", "genesis block differs")
        for block in blocks[1:]:
            commands = [tx for tx in
                        (Transaction.from_dict(t)
                         for t in block.to_dict()["transactions"])
                        if tx.operation not in EVENT_OPS]
            if len(commands) != 1:
                raise err("CorruptSnapshot",
                          f"block {block.index} holds {len(commands)} commands")
            tx = commands[0]
            # recorded registrations are trusted; the allowlist that
            # approved them may have changed since
            fresh.execute(tx.caller, tx.operation, tx.params,
                          tx.attached_value, block.timestamp,
                          verify_keys=False)
            replayed = fresh.state.chain.blocks[-1]
            if replayed.hash != block.hash:
                raise err("HashMismatch",
                          f"block {block.index} hash diverged on replay")
        return fresh


# -- executors ------------------------------------------------------------------
# each returns (result dict, extra event transactions)


def _ex_bootstrap_admin(state, caller, params, value, verifier):
    key = bytes.fromhex(params["publicKey"])
    # the operator seats the first administrator; no allowlist applies
    address = state.registry.register(
        caller, Role.ADMINISTRATOR, key, params.get("infoCid", ""),
        bootstrap=True)
    state.native.ensure_account(address)
    return {"address": address}, []


def _ex_register_stakeholder(state, caller, params, value, verifier):
    key = bytes.fromhex(params["publicKey"])
    role = parse_role(params["role"])
    address = state.registry.register(
        caller, role, key, params.get("infoCid", ""), verifier=verifier)
    state.native.ensure_account(address)
    return {"address": address}, []


def _ex_remove_stakeholder(state, caller, params, value, verifier):
    state.registry.remove(caller, params["target"])
    return {}, []


def _ex_transfer_native(state, caller, params, value, verifier):
    state.native.transfer(caller, params["to"], int(params["amount"]))
    return {}, []


def _ex_faucet(state, caller, params, value, verifier):
    # the faucet is the only supply source; administrators only
    if not state.registry.is_active_admin(caller):
        raise err("NotAuthorized", f"{caller} is not an active administrator")
    state.native.ensure_account(params["to"])
    state.native.credit(params["to"], int(params["amount"]))
    return {}, []


def _ex_put_object(state, caller, params, value, verifier):
    cid = state.store.put(bytes.fromhex(params["dataHex"]))
    return {"cid": cid}, []


def _ex_build_metadata(state, caller, params, value, verifier):
    cid = build_right_metadata(
        state.store, params["nameOfRight"], params.get("description", ""),
        params.get("documents", []), params.get("extra"))
    return {"cid": cid}, []


def _ex_register_document(state, caller, params, value, verifier):
    prop = state.property_at(params["property"])
    prop.register_document(caller, params["cid"], registry=state.registry,
                           store=state.store)
    return {"documents": len(prop.documents)}, []


def _ex_approved_property(state, caller, params, value, verifier):
    prop = state.property_at(params["property"])
    prop.approved_property(caller, bytes.fromhex(params["parentHash"]),
                           params["property"], registry=state.registry)
    return {"approved": True}, []


def _ex_initialize_factory(state, caller, params, value, verifier):
    if not state.registry.is_active_admin(caller):
        raise err("NotAuthorized", f"{caller} is not an active administrator")
    state.factory.initialize(
        ImplementationVersion(int(params["versionId"]),
                              params.get("behaviorTag", "base")),
        admin=params.get("admin", caller),
        upgrader=params.get("upgrader", caller))
    return {"factory": state.factory.address}, []


def _ex_deploy_property(state, caller, params, value, verifier):
    address = factory_mod.deploy_property(
        state.factory, state.properties, caller,
        treasury=params["treasury"], upgrader=params["upgrader"],
        admin=params["admin"], uri=params["uri"],
        contract_name=params.get("contractName", ""),
        description=params.get("description", ""),
        registry=state.registry, native=state.native)
    prop_id = state.properties[address].property_id
    event = Transaction(
        caller=state.factory.address, operation="DeployedProperty",
        params={"address": address, "propertyId": prop_id})
    return {"address": address, "propertyId": prop_id}, [event]


def _ex_pause(state, caller, params, value, verifier):
    state.factory.pause(caller)
    return {"paused": True}, []


def _ex_unpause(state, caller, params, value, verifier):
    state.factory.unpause(caller)
    return {"paused": False}, []


def _ex_authorize_upgrade(state, caller, params, value, verifier):
    state.factory.authorize_upgrade(
        caller, ImplementationVersion(int(params["versionId"]),
                                      params.get("behaviorTag", "base")))
    return {"version": state.factory.logic.to_dict()}, []


def _ex_mint_nft(state, caller, params, value, verifier):
    prop = state.property_at(params["property"])
    token_id, amount = prop.mint_nft(
        caller, int(params["id"]), params.get("data", ""),
        int(params["price"]), value, registry=state.registry,
        native=state.native, paused=state.factory.paused)
    return {"id": token_id, "amount": amount}, []


def _ex_mint_batch(state, caller, params, value, verifier):
    prop = state.property_at(params["property"])
    ids, amounts = prop.mint_batch(
        caller, [int(i) for i in params["ids"]],
        [int(a) for a in params["amounts"]], params.get("data", ""),
        [int(p) for p in params["prices"]], value,
        registry=state.registry, native=state.native,
        paused=state.factory.paused)
    return {"ids": ids, "amounts": amounts}, []


def _ex_mint_fractional(state, caller, params, value, verifier):
    prop = state.property_at(params["property"])
    frac_id = prop.mint_fractional(
        caller, int(params["rightId"]), int(params["units"]),
        int(params["pricePerUnit"]), registry=state.registry,
        paused=state.factory.paused)
    return {"id": frac_id, "units": int(params["units"])}, []


def _ex_transfer_nft(state, caller, params, value, verifier):
    prop = state.property_at(params["property"])
    prop.transfer_nft(caller, params["to"], int(params["id"]),
                      int(params["amount"]), params.get("data", ""), value,
                      native=state.native)
    return {}, []


def _ex_burn_nft(state, caller, params, value, verifier):
    prop = state.property_at(params["property"])
    prop.burn_nft(caller, params["from"], int(params["id"]),
                  int(params["amount"]))
    return {}, []


def _ex_burn_batch(state, caller, params, value, verifier):
    prop = state.property_at(params["property"])
    prop.burn_batch(caller, params["from"], [int(i) for i in params["ids"]],
                    [int(a) for a in params["amounts"]])
    return {}, []


def _ex_set_price(state, caller, params, value, verifier):
    prop = state.property_at(params["property"])
    prop.set_price(caller, int(params["id"]), int(params["pricePerUnit"]))
    return {}, []


def _ex_distribute(state, caller, params, value, verifier):
    prop = state.property_at(params["property"])
    payouts, remainder = prop.distribute_earnings(
        caller, int(params["rightId"]), int(params["total"]), value,
        native=state.native)
    return {"payouts": payouts, "remainder": remainder}, []


def _ex_set_approval(state, caller, params, value, verifier):
    prop = state.property_at(params["property"])
    prop.tokens.set_approval_for_all(caller, params["operator"],
                                     bool(params["approved"]))
    return {}, []


def _ex_safe_transfer_batch(state, caller, params, value, verifier):
    prop = state.property_at(params["property"])
    prop.tokens.safe_transfer_batch(
        caller, params["from"], params["to"],
        [int(i) for i in params["ids"]], [int(a) for a in params["amounts"]])
    return {}, []


def _ex_consent_swap(state, caller, params, value, verifier):
    prop = state.property_at(params["property"])
    digest = params["digest"]
    prop.tokens.give_consent(caller, digest)
    return {"digest": digest}, []


def _ex_atomic_swap(state, caller, params, value, verifier):
    prop = state.property_at(params["property"])
    party_a, party_b = params["partyA"], params["partyB"]
    if caller not in (party_a, party_b):
        raise err("NotAuthorized", "only a swap party may execute the swap")
    digest = atomic_swap(
        prop.tokens, state.native,
        party_a, [(int(t), int(n)) for t, n in params["legsA"]],
        int(params["valueA"]),
        party_b, [(int(t), int(n)) for t, n in params["legsB"]],
        int(params["valueB"]))
    return {"digest": digest}, []


EXECUTORS = {
    "bootstrapAdmin": _ex_bootstrap_admin,
    "registerStakeholder": _ex_register_stakeholder,
    "removeStakeholder": _ex_remove_stakeholder,
    "transferNative": _ex_transfer_native,
    "faucet": _ex_faucet,
    "putObject": _ex_put_object,
    "buildRightMetadata": _ex_build_metadata,
    "registerDocument": _ex_register_document,
    "approvedProperty": _ex_approved_property,
    "initializeFactory": _ex_initialize_factory,
    "deployProperty": _ex_deploy_property,
    "pause": _ex_pause,
    "unpause": _ex_unpause,
    "authorizeUpgrade": _ex_authorize_upgrade,
    "mintNFT": _ex_mint_nft,
    "mintBatchNFTs": _ex_mint_batch,
    "mintFractional": _ex_mint_fractional,
    "transferNFT": _ex_transfer_nft,
    "burnNFT": _ex_burn_nft,
    "burnBatchNFTs": _ex_burn_batch,
    "setPrice": _ex_set_price,
    "distributeEarnings": _ex_distribute,
    "setApprovalForAll": _ex_set_approval,
    "safeTransferBatch": _ex_safe_transfer_batch,
    "consentSwap": _ex_consent_swap,
    "atomicSwap": _ex_atomic_swap,
}
