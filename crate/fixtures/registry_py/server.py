SCHEMA = {"hostname": "string"}


def lookup_handler(hostname):
    return resolve_name(hostname)


def resolve_name(hostname):
    normalized = hostname.strip().lower()
    return {"hostname": normalized, "ip": "192.0.2.1"}


server.registerTool("lookup_dns", SCHEMA, lookup_handler)
