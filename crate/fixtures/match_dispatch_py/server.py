def dispatch(tool, payload):
    match tool:
        case "status_report":
            region = payload["region"]
            return build_report(region)
        case "usage_stats":
            window = payload.get("window", "7d")
            return compute_stats(window)
    return None


def build_report(region):
    return {"region": region, "status": "green"}


def compute_stats(window):
    return {"window": window, "requests": 1234}
