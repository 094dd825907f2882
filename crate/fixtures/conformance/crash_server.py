"""Fixture server that initializes, then dies mid-call without replying."""
import json
import sys

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
                "serverInfo": {"name": "crash-fixture", "version": "1.0.0"},
            },
        }) + "\n")
        sys.stdout.flush()
    elif method == "notifications/initialized":
        continue
    elif method == "tools/list":
        sys.stdout.write(json.dumps({"jsonrpc": "2.0", "id": rid, "result": {"tools": [{
            "name": "doomed",
            "description": "Crashes the server.",
            "inputSchema": {"type": "object"},
        }]}}) + "\n")
        sys.stdout.flush()
    elif method == "tools/call":
        sys.exit(1)
