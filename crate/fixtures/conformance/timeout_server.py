"""Fixture server that initializes, then hangs forever on tools/call."""
import json
import sys
import time

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
                "serverInfo": {"name": "timeout-fixture", "version": "1.0.0"},
            },
        }) + "\n")
        sys.stdout.flush()
    elif method == "notifications/initialized":
        continue
    elif method == "tools/list":
        sys.stdout.write(json.dumps({"jsonrpc": "2.0", "id": rid, "result": {"tools": [{
            "name": "sleepy",
            "description": "Never answers.",
            "inputSchema": {"type": "object"},
        }]}}) + "\n")
        sys.stdout.flush()
    elif method == "tools/call":
        time.sleep(3600)
