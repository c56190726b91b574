// The export path must reproduce the CLI recorder byte for byte, and the
// observable picker must offer everything a golden can observe.

import { test } from "node:test";
import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));

import { goldenFilename, observableNames } from "../src/golden.js";
import type { SessionReply } from "../src/types.js";

function fixture<T>(name: string): T {
  const path = join(here, "..", "..", "test", "fixtures", name);
  return JSON.parse(readFileSync(path, "utf8")) as T;
}

interface Parity {
  trace: string;
  observe: string[];
  cli_golden: string;
  api_golden: string;
}

test("replaying the level-1 scenario exports the CLI golden byte for byte",
     () => {
  const parity = fixture<Parity>("wm1_golden_parity.json");
  assert.equal(parity.api_golden, parity.cli_golden);
  assert.match(parity.cli_golden, /^codagolden 1\n/);
  assert.match(parity.cli_golden, /\n$/);
});

test("every recorded observable is offered by the picker", () => {
  const session = fixture<SessionReply>("session_wm1.json");
  const parity = fixture<Parity>("wm1_golden_parity.json");
  const names = observableNames(session.model);
  for (const observed of parity.observe) {
    assert.ok(names.includes(observed), observed);
  }
  assert.ok(names.includes("WM.wmsm"));
  assert.ok(names.includes("CP.display"));
});

test("the download name follows the model", () => {
  assert.equal(goldenFilename("wm1"), "wm1.golden");
});
