// Export/import of the placement configuration.  The on-disk format is
// exactly the configuration document the service accepts in heatmap and
// simulate requests (an array of co-located node ids), so a round trip
// reproduces identical requests.

export function exportConfig(config: string[]): string {
  return JSON.stringify(config);
}

export function importConfig(text: string): string[] {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    throw new Error("configuration is not valid JSON");
  }
  if (!Array.isArray(doc) || !doc.every((e) => typeof e === "string")) {
    throw new Error("configuration must be a JSON array of node ids");
  }
  return doc as string[];
}
