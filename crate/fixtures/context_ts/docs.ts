export function fetchDocs(libraryName: string, query: string): string[] {
  const corpus = loadCorpus(libraryName);
  return corpus.filter((doc) => doc.includes(query));
}

function loadCorpus(libraryName: string): string[] {
  return [libraryName + " overview", libraryName + " api reference"];
}
