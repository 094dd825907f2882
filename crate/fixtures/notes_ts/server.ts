class NoteServer {
  @mcp.tool()
  saveNote(args: { title: string; body: string }) {
    return writeNote(args);
  }

  @mcp.tool()
  listNotes() {
    return readIndex();
  }
}

function writeNote(args: { title: string; body: string }) {
  const entry = { title: args.title, body: args.body };
  appendIndex(entry);
  return entry;
}

function readIndex() {
  return loadIndexFile();
}

function appendIndex(entry: { title: string; body: string }) {
  const index = loadIndexFile();
  index.push(entry);
  return index;
}

function loadIndexFile() {
  return [] as { title: string; body: string }[];
}
