"""Command-line entry point.

Grammar: estate <noun> <verb> [args] --as <addr> [--value <n>]
[--timestamp <t>] [--state-dir <dir>] [--json], plus the top-level
`init` and `run` commands. Exit codes: 0 success, 2 parse error,
3 domain error, 4 authorization error.

Every mutating command executes as one block against the persisted
state directory; queries read the state without touching it.
"""

import argparse
import json
import os
import shlex
import sys
import time

from .canonical import canonical_json_bytes
from .errors import LedgerError, err
from .merkle import MerkleProof, MerkleTree, verify_proof
from .node import Node
from .persistence import (StateLock, load_state, read_snapshot, save_state,
                          write_snapshot)
from .storage import cid_digest, resolve_uri
from .tokens import fractional_of, swap_descriptor_digest


class CliParseError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    # argparse exits the process on error; we want an exit code instead
    def error(self, message):
        raise CliParseError(message)


def parse_key(s: str) -> bytes:
    if s.startswith("hex:"):
        try:
            return bytes.fromhex(s[4:])
        except ValueError:
            raise err("ParseError", f"bad hex key {s!r}")
    return s.encode("utf-8")


def parse_token_id(s: str) -> int:
    if s.startswith("frac:"):
        return fractional_of(parse_token_id(s[5:]))
    try:
        return int(s, 16) if s.startswith("0x") else int(s)
    except ValueError:
        raise err("ParseError", f"bad token id {s!r}")


def parse_id_list(s: str) -> list:
    return [parse_token_id(part) for part in s.split(",")] if s else []

def parse_int_list(s: str) -> list:
    try:
        return [int(part) for part in s.split(",")] if s else []
    except ValueError:
        raise err("ParseError", f"bad integer list {s!r}")


def parse_legs(s: str) -> list:
    # "id:amount,id:amount"; ids may themselves contain colons (frac:R)
    legs = []
    if not s:
        return legs
    for part in s.split(","):
        token, sep, amount = part.rpartition(":")
        if not sep:
            raise err("ParseError", f"leg {part!r} is not id:amount")
        try:
            legs.append((parse_token_id(token), int(amount)))
        except ValueError:
            raise err("ParseError", f"bad leg amount in {part!r}")
    return legs


def parse_hex_digest(s: str) -> bytes:
    try:
        digest = bytes.fromhex(s)
    except ValueError:
        raise err("ParseError", f"not hex: {s!r}")
    if len(digest) != 32:
        raise err("ParseError", "digests are 32 bytes")
    return digest


def parse_bool(s: str) -> bool:
    if s.lower() in ("true", "yes", "1"):
        return True
    if s.lower() in ("false", "no", "0"):
        return False
    raise err("ParseError", f"expected true or false, got {s!r}")


def parse_doc(s: str) -> dict:
    # cid|name|description, trailing parts optional
    parts = s.split("|")
    return {"link": parts[0],
            "name": parts[1] if len(parts) > 1 else "",
            "description": parts[2] if len(parts) > 2 else ""}


def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--state-dir", default="estate-state")
    common.add_argument("--as", dest="caller")
    common.add_argument("--value", type=int, default=0)
    common.add_argument("--timestamp", type=int)
    common.add_argument("--json", action="store_true", dest="as_json")

    root = Parser(prog="estate", description=__doc__)
    nouns = root.add_subparsers(dest="noun", required=True)

    def leaf(verbs, name, **kwargs):
        return verbs.add_parser(name, parents=[common], **kwargs)

    p = nouns.add_parser("init", parents=[common])
    p.add_argument("--admin-key", required=True)
    p.add_argument("--info-cid", default="")
    p.add_argument("--allowlist")

    p = nouns.add_parser("run", parents=[common])
    p.add_argument("script")

    verbs = nouns.add_parser("stakeholder").add_subparsers(
        dest="verb", required=True)
    p = leaf(verbs, "register")
    p.add_argument("--role", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--info-cid", default="")
    p = leaf(verbs, "remove")
    p.add_argument("--target", required=True)
    p = leaf(verbs, "show")
    p.add_argument("--address", required=True)
    p = leaf(verbs, "has-role")
    p.add_argument("--address", required=True)
    p.add_argument("--role", required=True)

    verbs = nouns.add_parser("object").add_subparsers(dest="verb",
                                                      required=True)
    p = leaf(verbs, "put")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--file")
    src.add_argument("--data")
    p = leaf(verbs, "get")
    p.add_argument("--cid", required=True)
    p.add_argument("--out")
    p = leaf(verbs, "metadata")
    p.add_argument("--name", required=True)
    p.add_argument("--description", default="")
    p.add_argument("--doc", action="append", default=[])
    p.add_argument("--extra")
    p = leaf(verbs, "resolve")
    p.add_argument("--base-uri", required=True)
    p.add_argument("--id", required=True)

    verbs = nouns.add_parser("merkle").add_subparsers(dest="verb",
                                                      required=True)
    p = leaf(verbs, "root")
    p.add_argument("--leaf", action="append", default=[])
    p.add_argument("--cid", action="append", default=[])
    p.add_argument("--property")
    p = leaf(verbs, "prove")
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--leaf", action="append", default=[])
    p.add_argument("--cid", action="append", default=[])
    p.add_argument("--property")
    p = leaf(verbs, "verify")
    p.add_argument("--root", required=True)
    p.add_argument("--leaf", required=True)
    p.add_argument("--proof", required=True)

    verbs = nouns.add_parser("property").add_subparsers(dest="verb",
                                                        required=True)
    p = leaf(verbs, "adddoc")
    p.add_argument("--property", required=True)
    p.add_argument("--cid", required=True)
    p = leaf(verbs, "approve")
    p.add_argument("--property", required=True)
    p.add_argument("--parent-hash", required=True)
    p = leaf(verbs, "mint")
    p.add_argument("--property", required=True)
    p.add_argument("--id", required=True)
    p.add_argument("--price", type=int, required=True)
    p.add_argument("--data", default="")
    p = leaf(verbs, "mint-batch")
    p.add_argument("--property", required=True)
    p.add_argument("--ids", required=True)
    p.add_argument("--amounts", required=True)
    p.add_argument("--prices", required=True)
    p.add_argument("--data", default="")
    p = leaf(verbs, "fractionalize")
    p.add_argument("--property", required=True)
    p.add_argument("--right-id", required=True)
    p.add_argument("--units", type=int, required=True)
    p.add_argument("--price-per-unit", type=int, required=True)
    p = leaf(verbs, "transfer")
    p.add_argument("--property", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--id", required=True)
    p.add_argument("--amount", type=int, required=True)
    p.add_argument("--data", default="")
    p = leaf(verbs, "burn")
    p.add_argument("--property", required=True)
    p.add_argument("--from", dest="from_addr", required=True)
    p.add_argument("--id", required=True)
    p.add_argument("--amount", type=int, required=True)
    p = leaf(verbs, "burn-batch")
    p.add_argument("--property", required=True)
    p.add_argument("--from", dest="from_addr", required=True)
    p.add_argument("--ids", required=True)
    p.add_argument("--amounts", required=True)
    p = leaf(verbs, "set-price")
    p.add_argument("--property", required=True)
    p.add_argument("--id", required=True)
    p.add_argument("--price-per-unit", type=int, required=True)
    p = leaf(verbs, "distribute")
    p.add_argument("--property", required=True)
    p.add_argument("--right-id", required=True)
    p.add_argument("--total", type=int, required=True)
    p = leaf(verbs, "info")
    p.add_argument("--property", required=True)
    p = leaf(verbs, "id")
    p.add_argument("--property", required=True)
    p = leaf(verbs, "supply")
    p.add_argument("--property", required=True)
    p.add_argument("--id", required=True)
    p = leaf(verbs, "exists")
    p.add_argument("--property", required=True)
    p.add_argument("--id", required=True)
    p = leaf(verbs, "uri")
    p.add_argument("--property", required=True)
    p.add_argument("--id", required=True)

    verbs = nouns.add_parser("token").add_subparsers(dest="verb",
                                                     required=True)
    p = leaf(verbs, "balance")
    p.add_argument("--property", required=True)
    p.add_argument("--owner", required=True)
    p.add_argument("--id", required=True)
    p = leaf(verbs, "approve")
    p.add_argument("--property", required=True)
    p.add_argument("--operator", required=True)
    p.add_argument("--approved", required=True)
    p = leaf(verbs, "transfer")
    p.add_argument("--property", required=True)
    p.add_argument("--from", dest="from_addr", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--ids", required=True)
    p.add_argument("--amounts", required=True)
    for swap_verb in ("consent", "swap"):
        p = leaf(verbs, swap_verb)
        p.add_argument("--property", required=True)
        p.add_argument("--party-a", required=True)
        p.add_argument("--party-b", required=True)
        p.add_argument("--legs-a", default="")
        p.add_argument("--legs-b", default="")
        p.add_argument("--value-a", type=int, default=0)
        p.add_argument("--value-b", type=int, default=0)

    verbs = nouns.add_parser("factory").add_subparsers(dest="verb",
                                                       required=True)
    p = leaf(verbs, "init")
    p.add_argument("--version", type=int, required=True)
    p.add_argument("--tag", default="base")
    p.add_argument("--admin")
    p.add_argument("--upgrader")
    p = leaf(verbs, "deploy")
    p.add_argument("--treasury", required=True)
    p.add_argument("--upgrader", required=True)
    p.add_argument("--admin", required=True)
    p.add_argument("--uri", required=True)
    p.add_argument("--name", default="")
    p.add_argument("--description", default="")
    leaf(verbs, "pause")
    leaf(verbs, "unpause")
    p = leaf(verbs, "upgrade")
    p.add_argument("--version", type=int, required=True)
    p.add_argument("--tag", default="base")
    leaf(verbs, "info")
    leaf(verbs, "proxy-length")

    verbs = nouns.add_parser("chain").add_subparsers(dest="verb",
                                                     required=True)
    leaf(verbs, "verify")
    p = leaf(verbs, "show")
    p.add_argument("--index", type=int)
    leaf(verbs, "replay")
    p = leaf(verbs, "faucet")
    p.add_argument("--to", required=True)
    p.add_argument("--amount", type=int, required=True)
    p = leaf(verbs, "transfer")
    p.add_argument("--to", required=True)
    p.add_argument("--amount", type=int, required=True)
    p = leaf(verbs, "balance")
    p.add_argument("--address", required=True)

    verbs = nouns.add_parser("state").add_subparsers(dest="verb",
                                                     required=True)
    p = leaf(verbs, "digest")
    p.add_argument("--scope", choices=("full", "ledger", "properties"),
                   default="full")
    p = leaf(verbs, "export")
    p.add_argument("--out", required=True)
    p = leaf(verbs, "import")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--force", action="store_true")
    leaf(verbs, "show")

    return root


# -- command execution ---------------------------------------------------------


def _timestamp(args) -> int:
    return args.timestamp if args.timestamp is not None else int(time.time())


def _require_caller(args) -> str:
    if not args.caller:
        raise err("ParseError", "this command needs --as <address>")
    return args.caller


def mutate(args, operation: str, params: dict) -> dict:
    caller = _require_caller(args)
    with StateLock(args.state_dir):
        node = load_state(args.state_dir)
        result = node.execute(caller, operation, params, value=args.value,
                              timestamp=_timestamp(args))
        save_state(args.state_dir, node)
    return result


def _leaves_from_args(args, node: Node = None) -> list:
    leaves = [parse_hex_digest(h) for h in args.leaf]
    leaves.extend(cid_digest(c) for c in args.cid)
    if getattr(args, "property", None):
        if node is None:
            node = load_state(args.state_dir)
        prop = node.state.property_at(args.property)
        leaves.extend(cid_digest(c) for c in prop.documents)
    return leaves


def dispatch(args) -> dict:
    noun, verb = args.noun, getattr(args, "verb", None)

    if noun == "init":
        if os.path.exists(os.path.join(args.state_dir, "state.json")):
            raise err("AlreadyInitialized",
                      f"{args.state_dir} already holds a ledger")
        node = Node()
        if args.allowlist:
            node.state.config["allowlist"] = os.path.abspath(args.allowlist)
        with StateLock(args.state_dir):
            admin = node.init_genesis(parse_key(args.admin_key),
                                      args.info_cid, _timestamp(args))
            save_state(args.state_dir, node)
        return {"admin": admin,
                "genesis": node.state.chain.blocks[0].hash.hex()}

    if noun == "run":
        return run_script(args)

    if noun == "stakeholder":
        if verb == "register":
            return mutate(args, "registerStakeholder",
                          {"role": args.role,
                           "publicKey": parse_key(args.key).hex(),
                           "infoCid": args.info_cid})
        if verb == "remove":
            return mutate(args, "removeStakeholder", {"target": args.target})
        node = load_state(args.state_dir)
        if verb == "show":
            return node.state.registry.get(args.address).to_dict()
        if verb == "has-role":
            from .identity import parse_role
            return {"hasRole": node.state.registry.has_role(
                args.address, parse_role(args.role))}

    if noun == "object":
        if verb == "put":
            if args.file:
                with open(args.file, "rb") as fh:
                    data = fh.read()
            else:
                data = args.data.encode("utf-8")
            return mutate(args, "putObject", {"dataHex": data.hex()})
        if verb == "metadata":
            extra = json.loads(args.extra) if args.extra else None
            return mutate(args, "buildRightMetadata",
                          {"nameOfRight": args.name,
                           "description": args.description,
                           "documents": [parse_doc(d) for d in args.doc],
                           "extra": extra})
        if verb == "get":
            node = load_state(args.state_dir)
            data = node.state.store.get(args.cid)
            if args.out:
                with open(args.out, "wb") as fh:
                    fh.write(data)
                return {"cid": args.cid, "bytes": len(data), "out": args.out}
            try:
                return {"cid": args.cid, "text": data.decode("utf-8")}
            except UnicodeDecodeError:
                return {"cid": args.cid, "hex": data.hex()}
        if verb == "resolve":
            return {"uri": resolve_uri(args.base_uri,
                                       parse_token_id(args.id))}

    if noun == "merkle":
        if verb == "root":
            return {"root": MerkleTree(_leaves_from_args(args)).root.hex()}
        if verb == "prove":
            tree = MerkleTree(_leaves_from_args(args))
            proof = tree.prove(args.index)
            return {"leaf": tree.leaves[args.index].hex(),
                    "root": tree.root.hex(),
                    "proof": proof.to_dict()}
        if verb == "verify":
            raw = args.proof
            if raw.startswith("@"):
                with open(raw[1:], "r", encoding="utf-8") as fh:
                    raw = fh.read()
            try:
                proof = MerkleProof.from_dict(json.loads(raw))
            except (ValueError, KeyError, TypeError):
                raise err("ParseError", "proof is not valid proof JSON")
            ok = verify_proof(parse_hex_digest(args.root),
                              parse_hex_digest(args.leaf), proof)
            return {"valid": ok}

    if noun == "property":
        prop_addr = getattr(args, "property", None)
        if verb == "adddoc":
            return mutate(args, "registerDocument",
                          {"property": prop_addr, "cid": args.cid})
        if verb == "approve":
            parse_hex_digest(args.parent_hash)
            return mutate(args, "approvedProperty",
                          {"property": prop_addr,
                           "parentHash": args.parent_hash})
        if verb == "mint":
            return mutate(args, "mintNFT",
                          {"property": prop_addr,
                           "id": parse_token_id(args.id),
                           "data": args.data, "price": args.price})
        if verb == "mint-batch":
            return mutate(args, "mintBatchNFTs",
                          {"property": prop_addr,
                           "ids": parse_id_list(args.ids),
                           "amounts": parse_int_list(args.amounts),
                           "data": args.data,
                           "prices": parse_int_list(args.prices)})
        if verb == "fractionalize":
            return mutate(args, "mintFractional",
                          {"property": prop_addr,
                           "rightId": parse_token_id(args.right_id),
                           "units": args.units,
                           "pricePerUnit": args.price_per_unit})
        if verb == "transfer":
            return mutate(args, "transferNFT",
                          {"property": prop_addr, "to": args.to,
                           "id": parse_token_id(args.id),
                           "amount": args.amount, "data": args.data})
        if verb == "burn":
            return mutate(args, "burnNFT",
                          {"property": prop_addr, "from": args.from_addr,
                           "id": parse_token_id(args.id),
                           "amount": args.amount})
        if verb == "burn-batch":
            return mutate(args, "burnBatchNFTs",
                          {"property": prop_addr, "from": args.from_addr,
                           "ids": parse_id_list(args.ids),
                           "amounts": parse_int_list(args.amounts)})
        if verb == "set-price":
            return mutate(args, "setPrice",
                          {"property": prop_addr,
                           "id": parse_token_id(args.id),
                           "pricePerUnit": args.price_per_unit})
        if verb == "distribute":
            return mutate(args, "distributeEarnings",
                          {"property": prop_addr,
                           "rightId": parse_token_id(args.right_id),
                           "total": args.total})
        node = load_state(args.state_dir)
        prop = node.state.property_at(prop_addr)
        if verb == "info":
            return prop.to_dict()
        if verb == "id":
            return {"propertyId": prop.get_property_id()}
        if verb == "supply":
            return {"supply": prop.total_supply(parse_token_id(args.id))}
        if verb == "exists":
            return {"exists": prop.exists(parse_token_id(args.id))}
        if verb == "uri":
            return {"uri": prop.uri_of(parse_token_id(args.id))}

    if noun == "token":
        if verb == "approve":
            return mutate(args, "setApprovalForAll",
                          {"property": args.property,
                           "operator": args.operator,
                           "approved": parse_bool(args.approved)})
        if verb == "transfer":
            return mutate(args, "safeTransferBatch",
                          {"property": args.property,
                           "from": args.from_addr, "to": args.to,
                           "ids": parse_id_list(args.ids),
                           "amounts": parse_int_list(args.amounts)})
        if verb in ("consent", "swap"):
            legs_a = parse_legs(args.legs_a)
            legs_b = parse_legs(args.legs_b)
            if verb == "consent":
                digest = swap_descriptor_digest(
                    args.party_a, legs_a, args.value_a,
                    args.party_b, legs_b, args.value_b)
                return mutate(args, "consentSwap",
                              {"property": args.property, "digest": digest})
            return mutate(args, "atomicSwap",
                          {"property": args.property,
                           "partyA": args.party_a, "partyB": args.party_b,
                           "legsA": [[t, n] for t, n in legs_a],
                           "legsB": [[t, n] for t, n in legs_b],
                           "valueA": args.value_a, "valueB": args.value_b})
        if verb == "balance":
            node = load_state(args.state_dir)
            prop = node.state.property_at(args.property)
            ids = parse_id_list(args.id)
            amounts = prop.tokens.balance_of_batch([args.owner] * len(ids),
                                                   ids)
            return {"balances": dict(zip(map(str, ids), amounts))}

    if noun == "factory":
        if verb == "init":
            params = {"versionId": args.version, "behaviorTag": args.tag}
            if args.admin:
                params["admin"] = args.admin
            if args.upgrader:
                params["upgrader"] = args.upgrader
            return mutate(args, "initializeFactory", params)
        if verb == "deploy":
            return mutate(args, "deployProperty",
                          {"treasury": args.treasury,
                           "upgrader": args.upgrader, "admin": args.admin,
                           "uri": args.uri, "contractName": args.name,
                           "description": args.description})
        if verb == "pause":
            return mutate(args, "pause", {})
        if verb == "unpause":
            return mutate(args, "unpause", {})
        if verb == "upgrade":
            return mutate(args, "authorizeUpgrade",
                          {"versionId": args.version,
                           "behaviorTag": args.tag})
        node = load_state(args.state_dir)
        if verb == "info":
            return node.state.factory.to_dict()
        if verb == "proxy-length":
            return {"proxyLength": node.state.factory.proxy_length()}

    if noun == "chain":
        if verb == "faucet":
            return mutate(args, "faucet",
                          {"to": args.to, "amount": args.amount})
        if verb == "transfer":
            return mutate(args, "transferNative",
                          {"to": args.to, "amount": args.amount})
        node = load_state(args.state_dir)
        if verb == "verify":
            ok = node.state.chain.verify()
            if not ok:
                raise err("HashMismatch", "chain verification FAILED")
            return {"chain": "OK", "blocks": len(node.state.chain.blocks)}
        if verb == "show":
            if args.index is not None:
                blocks = node.state.chain.blocks
                if not 0 <= args.index < len(blocks):
                    raise err("IndexOutOfRange",
                              f"block {args.index} of {len(blocks)}")
                return blocks[args.index].to_dict()
            return node.state.chain.to_dict()
        if verb == "replay":
            rebuilt = node.replay()
            if rebuilt.full_digest() != node.full_digest():
                raise err("HashMismatch",
                          "replayed state digest does not match")
            return {"replay": "OK", "digest": node.full_digest()}
        if verb == "balance":
            return {"address": args.address,
                    "balance": node.state.native.balance(args.address)}

    if noun == "state":
        if verb == "import":
            target = os.path.join(args.state_dir, "state.json")
            if os.path.exists(target) and not args.force:
                raise err("AlreadyInitialized",
                          f"{args.state_dir} holds a ledger; use --force")
            node = read_snapshot(args.infile)
            with StateLock(args.state_dir):
                save_state(args.state_dir, node)
            return {"imported": args.infile, "digest": node.full_digest()}
        node = load_state(args.state_dir)
        if verb == "digest":
            if args.scope == "ledger":
                return {"scope": "ledger", "digest": node.ledger_digest()}
            if args.scope == "properties":
                return {"scope": "properties",
                        "digest": node.properties_digest()}
            return {"scope": "full", "digest": node.full_digest()}
        if verb == "export":
            write_snapshot(args.out, node)
            return {"out": args.out, "digest": node.full_digest()}
        if verb == "show":
            return node.state.state_dict()

    raise err("ParseError", f"unhandled command {noun} {verb}")


def run_script(args) -> dict:
    with open(args.script, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    parser = build_parser()
    executed = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = shlex.split(line)
        if tokens[0] == "as":
            if len(tokens) < 3:
                raise err("ParseError", f"line {lineno}: bare caller prefix")
            caller, tokens = tokens[1], tokens[2:]
            if "--as" not in tokens:
                tokens += ["--as", caller]
        if tokens[0] == "run":
            raise err("ParseError", f"line {lineno}: scripts cannot nest")
        try:
            sub = parser.parse_args(tokens)
            sub.state_dir = args.state_dir
            if args.timestamp is not None and sub.timestamp is None:
                sub.timestamp = args.timestamp
            dispatch(sub)
        except CliParseError as exc:
            raise err("ParseError", f"line {lineno}: {exc}")
        except LedgerError as exc:
            raise LedgerError(exc.code, f"line {lineno}: {exc}")
        executed += 1
    node = load_state(args.state_dir)
    return {"script": args.script, "commands": executed,
            "digest": node.full_digest()}


def format_result(result: dict, as_json: bool) -> str:
    if as_json:
        return canonical_json_bytes(result).decode("utf-8")
    lines = []
    for key in sorted(result):
        value = result[key]
        if isinstance(value, (dict, list)):
            value = canonical_json_bytes(value).decode("utf-8")
        lines.append(f"{key}: {value}")
    return "\n".join(lines)


EXIT_CODES = {"ParseError": 2, "NotAuthorized": 4}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except CliParseError as exc:
        print(f"error: ParseError: {exc}", file=sys.stderr)
        return 2
    try:
        result = dispatch(args)
    except CliParseError as exc:
        print(f"error: ParseError: {exc}", file=sys.stderr)
        return 2
    except LedgerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.code, 3)
    print(format_result(result, getattr(args, "as_json", False)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
