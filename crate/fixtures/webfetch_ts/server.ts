function fetchPage(url: string, timeoutMs?: number) {
  const deadline = timeoutMs ?? 30000;
  const body = httpGet(url, deadline);
  return summarizeBody(body);
}

function summarizeBody(body: string) {
  return body.slice(0, 2000);
}

const api = getServer();
api.registerTool("fetch_page", { url: "string", "timeoutMs?": "number" }, fetchPage);
