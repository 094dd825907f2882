"""Spreadsheet tools over a JSON-backed workbook store, served over stdio."""
import json
import os
import sys
from typing import Dict, Optional

from vendor.chartlib import ChartClass, ChartLines


class _Registry:
    def __init__(self):
        self.tools = {}

    def tool(self, name=None):
        def wrap(fn):
            self.tools[name or fn.__name__] = fn
            return fn
        return wrap


mcp = _Registry()

BLOCKED_FUNCTIONS = ["INDIRECT(", "HYPERLINK(", "WEBSERVICE("]


@mcp.tool()
def apply_formula(filepath, sheet_name, cell, formula):
    problem = validate_formula_impl(formula)
    if problem is not None:
        raise ValueError(problem)
    store = load_store(filepath)
    sheet = store.setdefault(sheet_name, {})
    sheet[cell] = formula
    save_store(filepath, store)
    return {"status": "ok", "cell": cell, "formula": formula}


@mcp.tool()
def write_data_to_excel(filepath, sheet_name, cell, value):
    store = load_store(filepath)
    sheet = store.setdefault(sheet_name, {})
    sheet[cell] = value
    save_store(filepath, store)
    return {"status": "ok", "cell": cell, "value": value}


@mcp.tool()
def create_chart(filepath, sheet_name, data_range, chart_type):
    result = create_chart_in_sheet(
        filepath,
        sheet_name,
        data_range,
        chart_type
    )
    return result


def validate_formula_impl(formula):
    return validate_formula(formula)


def validate_formula(formula):
    if not formula.startswith("="):
        return "formula must begin with '='"
    upper = formula.upper()
    for blocked in BLOCKED_FUNCTIONS:
        if blocked in upper:
            return "unsafe formula function: " + blocked.rstrip("(")
    return None


def create_chart_in_sheet(
    filepath: str,
    sheet_name: str,
    data_range: str,
    chart_type: str,
    style: Optional[Dict] = None,
) -> dict:
    chart = ChartClass()
    if style is None:
        style = {"show_data_labels": True}
    else:
        style.setdefault("show_data_labels", True)
    chart.title = sheet_name
    if style.get("grid_lines", False):
        chart.x_axis.grid = ChartLines()
        chart.y_axis.grid = ChartLines()
    save_chart(filepath, sheet_name, data_range, chart_type, chart, style)
    return {"status": "ok", "chart_type": chart_type, "data_range": data_range}


def save_chart(filepath, sheet_name, data_range, chart_type, chart, style):
    store = load_store(filepath)
    charts = store.setdefault("_charts", [])
    charts.append({
        "sheet": sheet_name,
        "range": data_range,
        "type": chart_type,
        "title": chart.title,
        "style": style,
    })
    save_store(filepath, store)


def load_store(filepath):
    path = filepath + ".cells.json"
    if os.path.exists(path):
        with open(path) as fh:
            return json.load(fh)
    return {}


def save_store(filepath, store):
    with open(filepath + ".cells.json", "w") as fh:
        json.dump(store, fh)


def _reply(rid, result):
    sys.stdout.write(json.dumps({"jsonrpc": "2.0", "id": rid, "result": result}) + "\n")
    sys.stdout.flush()


def _reply_error(rid, code, message):
    sys.stdout.write(
        json.dumps({"jsonrpc": "2.0", "id": rid, "error": {"code": code, "message": message}})
        + "\n"
    )
    sys.stdout.flush()


def _serve():
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        req = json.loads(line)
        method = req.get("method")
        rid = req.get("id")
        params = req.get("params") or {}
        if method == "initialize":
            _reply(rid, {
                "protocolVersion": "2024-11-05",
                "capabilities": {"tools": {}},
                "serverInfo": {"name": "excel-fixture", "version": "1.0.0"},
            })
        elif method == "notifications/initialized":
            continue
        elif method == "tools/list":
            listed = []
            for name in sorted(mcp.tools):
                listed.append({
                    "name": name,
                    "description": "Excel helper.",
                    "inputSchema": {"type": "object"},
                })
            _reply(rid, {"tools": listed})
        elif method == "tools/call":
            name = params.get("name")
            args = params.get("arguments") or {}
            fn = mcp.tools.get(name)
            if fn is None:
                _reply_error(rid, -32602, "Unknown tool: %s" % name)
                continue
            try:
                result = fn(**args)
                _reply(rid, {
                    "content": [{"type": "text", "text": json.dumps(result)}],
                    "isError": False,
                })
            except Exception as exc:
                _reply_error(rid, -32000, str(exc))
        else:
            _reply_error(rid, -32601, "Method not found: %s" % method)


if __name__ == "__main__":
    _serve()
