@mcp.tool()
def search_arxiv(query, max_results=10):
    if not query:
        return []
    results = search_handler(query, max_results=max_results)
    return format_result(results)


def search_handler(query, max_results=10, year=None):
    papers = fetch_from_api(query, max_results)
    if max_results is not None:
        papers = papers[:max_results]
    if year is not None:
        papers = [p for p in papers if p["year"] == year]
        papers.sort(key=year_key)
    return papers


def format_result(papers):
    return [{"title": p["title"], "year": p["year"]} for p in papers]
