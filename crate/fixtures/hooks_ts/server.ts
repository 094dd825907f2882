const handlers: Record<string, Function> = {
  "lookup": lookupImpl,
};

function lookupImpl(args: any) {
  return queryIndex(args.term);
}

function queryIndex(term: string) {
  return [term];
}
