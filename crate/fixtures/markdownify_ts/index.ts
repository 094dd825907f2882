import { toMarkdown } from "./markdown";

function doConvert(url: string): string {
  const page = httpGet(url);
  return toMarkdown(page);
}

function doConvertLocal(filepath: string): string {
  const data = readFileText(filepath);
  return toMarkdown(data);
}

server.registerTool("convert", { url: "string" }, doConvert);
server.registerTool("convert-local", { filepath: "string" }, doConvertLocal);
