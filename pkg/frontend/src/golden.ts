// Golden export: the user selects observables, the server renders the file.

import type { ModelJson } from "./types.js";

export function observableNames(model: ModelJson): string[] {
  const names: string[] = [];
  for (const comp of model.components) {
    for (const m of comp.machines) names.push(`${comp.name}.${m.name}`);
    for (const v of comp.vars) names.push(`${comp.name}.${v.name}`);
  }
  return names;
}

export function goldenFilename(modelName: string): string {
  return `${modelName}.golden`;
}

export function download(filename: string, text: string): void {
  const blob = new Blob([text], { type: "text/plain" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = filename;
  a.click();
  URL.revokeObjectURL(url);
}
