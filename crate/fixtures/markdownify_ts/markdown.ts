export function toMarkdown(content: string): string {
  const cleaned = stripTags(content);
  return cleaned.trim();
}

function stripTags(content: string): string {
  return content.replace(/<[^>]+>/g, "");
}
