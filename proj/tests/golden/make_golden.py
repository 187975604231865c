#!/usr/bin/env python3
"""Independent oracle for tests/golden/ledger_golden.json.

Rebuilds canonical JSON with the Python stdlib (sorted keys, no spaces) and
hashes it with hashlib, without touching the C++ code.
"""
import hashlib
import json
import sys


def canon(v):
    return json.dumps(v, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha(s):
    return hashlib.sha256(s.encode()).hexdigest()


ZERO = "0" * 64


def tx(kind, sender, nonce, payload, submitted_at=0):
    return {"kind": kind, "sender": sender, "nonce": nonce, "submitted_at": submitted_at, "payload": payload}


def tx_id(t):
    return sha(canon({k: v for k, v in t.items() if k != "submitted_at"}))


def state_json(users, urls, height, nonces):
    return {"users": users, "urls": urls, "height": height, "sender_nonces": nonces}


def block_hash(b):
    return sha(canon({k: v for k, v in b.items() if k != "block_hash"}))


def account(vid, name):
    return {"verifier_id": vid, "display_name": name, "rank": 0.0, "skill_points": 0, "votes_cast": 0,
            "votes_correct": 0}


empty_digest = sha(canon(state_json({}, {}, 0, {})))
genesis = {"height": 0, "parent_hash": ZERO, "transactions": [], "proposer": "genesis", "round": 0,
           "state_digest": empty_digest}
genesis["block_hash"] = block_hash(genesis)

url = "http://example.com/login?x=1"
url_id = sha(url)
evidence = "Your account is on hold, confirm at " + url
block1_txs = [
    tx("RegisterUser", "alice", 1, {"display_name": "Alice"}, 5),
    tx("RegisterUser", "bob", 1, {"display_name": "Bob"}, 5),
    tx("SubmitUrl", "alice", 2, {"url": url, "evidence_email": evidence}, 7),
]
state1 = state_json(
    {"alice": account("alice", "Alice"), "bob": account("bob", "Bob")},
    {url_id: {"url_id": url_id, "url": url, "submitter": "alice", "evidence_email": evidence, "votes": [],
              "status": "Unverified", "phish_score": None, "first_block_height": 1}},
    1, {"alice": 2, "bob": 1})
block1 = {"height": 1, "parent_hash": genesis["block_hash"], "transactions": block1_txs, "proposer": "v1",
          "round": 0, "state_digest": sha(canon(state1))}
block1["block_hash"] = block_hash(block1)

json.dump({
    "empty_state_digest": empty_digest,
    "genesis_hash": genesis["block_hash"],
    "url": url,
    "url_id": url_id,
    "register_alice_tx_id": tx_id(block1_txs[0]),
    "register_alice_canonical": canon(block1_txs[0]),
    "block1": block1,
    "block1_state_digest": block1["state_digest"],
    "block1_hash": block1["block_hash"],
}, sys.stdout, indent=2, sort_keys=True)
sys.stdout.write("\n")
