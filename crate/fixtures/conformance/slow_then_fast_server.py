"""Fixture server whose first tools/call answers late (after the client's
timeout) and whose later calls answer instantly. Exercises stale-frame
discarding after a timeout."""
import json
import sys
import time

calls_seen = 0

for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    req = json.loads(line)
    method = req.get("method")
    rid = req.get("id")
    if method == "initialize":
        sys.stdout.write(json.dumps({
            "jsonrpc": "2.0",
            "id": rid,
            "result": {
                "protocolVersion": "2024-11-05",
                "capabilities": {"tools": {}},
                "serverInfo": {"name": "slow-then-fast-fixture", "version": "1.0.0"},
            },
        }) + "\n")
        sys.stdout.flush()
    elif method == "notifications/initialized":
        continue
    elif method == "tools/list":
        sys.stdout.write(json.dumps({"jsonrpc": "2.0", "id": rid, "result": {"tools": [{
            "name": "echo",
            "description": "Echoes text, slowly the first time.",
            "inputSchema": {"type": "object", "properties": {"text": {"type": "string"}}},
        }]}}) + "\n")
        sys.stdout.flush()
    elif method == "tools/call":
        calls_seen += 1
        if calls_seen == 1:
            time.sleep(1.5)
        args = (req.get("params") or {}).get("arguments") or {}
        sys.stdout.write(json.dumps({
            "jsonrpc": "2.0",
            "id": rid,
            "result": {"content": [{"type": "text", "text": args.get("text", "")}], "isError": False},
        }) + "\n")
        sys.stdout.flush()
