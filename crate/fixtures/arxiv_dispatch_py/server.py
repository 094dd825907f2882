async def call_tool(name, arguments):
    if name == "search_papers":
        query = arguments["query"]
        limit = arguments.get("max_results", 10)
        return handle_search(query, limit)
    elif name == "download_paper":
        paper_id = arguments["paper_id"]
        return handle_download(paper_id)
    raise ValueError("unknown tool: " + name)


def handle_search(query, limit):
    rows = query_index(query)
    return rows[:limit]


def handle_download(paper_id):
    return {"paper_id": paper_id, "path": "/papers/" + paper_id + ".pdf"}


def query_index(query):
    return [{"id": "2301.0001", "title": query}]
