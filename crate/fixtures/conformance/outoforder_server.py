"""Fixture server that emits a spurious stale-id response before each real
tools/call answer, to exercise response/id matching."""
import json
import sys


def send(payload):
    sys.stdout.write(json.dumps(payload) + "\n")
    sys.stdout.flush()


def main():
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        req = json.loads(line)
        method = req.get("method")
        rid = req.get("id")
        if method == "initialize":
            send({
                "jsonrpc": "2.0",
                "id": rid,
                "result": {
                    "protocolVersion": "2024-11-05",
                    "capabilities": {"tools": {}},
                    "serverInfo": {"name": "outoforder-fixture", "version": "1.0.0"},
                },
            })
        elif method == "notifications/initialized":
            continue
        elif method == "tools/list":
            send({"jsonrpc": "2.0", "id": rid, "result": {"tools": [{
                "name": "echo",
                "description": "Echoes text.",
                "inputSchema": {"type": "object", "properties": {"text": {"type": "string"}}},
            }]}})
        elif method == "tools/call":
            # stale frame first, then an unsolicited notification, then the answer
            send({"jsonrpc": "2.0", "id": 999999, "result": {"content": [{"type": "text", "text": "stale"}]}})
            send({"jsonrpc": "2.0", "method": "notifications/progress", "params": {"progress": 1}})
            args = (req.get("params") or {}).get("arguments") or {}
            send({"jsonrpc": "2.0", "id": rid, "result": {"content": [{"type": "text", "text": args.get("text", "")}], "isError": False}})


if __name__ == "__main__":
    main()
