"""Well-behaved MCP stdio fixture server: two tools, paginated listing."""
import json
import sys

TOOL_PAGES = [
    (
        [
            {
                "name": "echo",
                "description": "Echoes the given text back.",
                "inputSchema": {
                    "type": "object",
                    "properties": {"text": {"type": "string"}},
                    "required": ["text"],
                },
            }
        ],
        "page-2",
    ),
    (
        [
            {
                "name": "reverse",
                "description": "Reverses the given text.",
                "inputSchema": {
                    "type": "object",
                    "properties": {"text": {"type": "string"}},
                    "required": ["text"],
                },
            }
        ],
        None,
    ),
]


def reply(rid, result):
    sys.stdout.write(json.dumps({"jsonrpc": "2.0", "id": rid, "result": result}) + "\n")
    sys.stdout.flush()


def reply_error(rid, code, message):
    sys.stdout.write(
        json.dumps({"jsonrpc": "2.0", "id": rid, "error": {"code": code, "message": message}})
        + "\n"
    )
    sys.stdout.flush()


def handle_call(rid, params):
    name = params.get("name")
    args = params.get("arguments") or {}
    if name == "echo":
        reply(rid, {"content": [{"type": "text", "text": args.get("text", "")}], "isError": False})
    elif name == "reverse":
        reply(rid, {"content": [{"type": "text", "text": args.get("text", "")[::-1]}], "isError": False})
    else:
        reply_error(rid, -32602, "Unknown tool: %s" % name)


def main():
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        req = json.loads(line)
        method = req.get("method")
        rid = req.get("id")
        if method == "initialize":
            reply(
                rid,
                {
                    "protocolVersion": "2024-11-05",
                    "capabilities": {"tools": {}},
                    "serverInfo": {"name": "conformance-fixture", "version": "1.0.0"},
                },
            )
        elif method == "notifications/initialized":
            continue
        elif method == "tools/list":
            cursor = (req.get("params") or {}).get("cursor")
            page_index = 1 if cursor == "page-2" else 0
            tools, next_cursor = TOOL_PAGES[page_index]
            result = {"tools": tools}
            if next_cursor:
                result["nextCursor"] = next_cursor
            reply(rid, result)
        elif method == "tools/call":
            handle_call(rid, req.get("params") or {})
        else:
            reply_error(rid, -32601, "Method not found: %s" % method)


if __name__ == "__main__":
    main()
