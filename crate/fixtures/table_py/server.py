def fetch_impl(url):
    page = http_get(url)
    return {"url": url, "length": len(page)}


def http_get(url):
    return "<html>" + url + "</html>"


TOOLS = {"fetch": fetch_impl}


def main(name, args):
    handler = TOOLS[name]
    return handler(**args)
