/** Spawns the real search service on a random port for tests. */

import { ChildProcess, spawn } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

export interface TestServer {
  baseUrl: string;
  feedbackLog: string;
  stop(): Promise<void>;
}

const FIXTURE_DIR = resolve(dirname(fileURLToPath(import.meta.url)),
                            "../../fixtures/mini-bank");

export async function startServer(): Promise<TestServer> {
  const feedbackLog = join(mkdtempSync(join(tmpdir(), "ksdw-ui-")),
                           "feedback.ndjson");
  const child: ChildProcess = spawn(
    "python3", ["-m", "ksdw.cli", "--config", "workspace.cfg",
                "serve", "--port", "0"],
    {
      cwd: FIXTURE_DIR,
      env: { ...process.env, KSDW_FEEDBACK_LOG: feedbackLog },
      stdio: ["ignore", "pipe", "pipe"],
    },
  );

  let output = "";
  const baseUrl = await new Promise<string>((resolvePromise, rejectPromise) => {
    const timer = setTimeout(
      () => rejectPromise(new Error(`service did not start:\n${output}`)), 20000);
    child.stdout!.on("data", (chunk: Buffer) => {
      output += chunk.toString();
      const match = output.match(/serving on (http:\/\/[\d.]+:\d+)/);
      if (match) {
        clearTimeout(timer);
        resolvePromise(match[1]);
      }
    });
    child.stderr!.on("data", (chunk: Buffer) => {
      output += chunk.toString();
    });
    child.on("exit", (code) => {
      clearTimeout(timer);
      rejectPromise(new Error(`service exited with ${code}:\n${output}`));
    });
  });

  // the port is bound before uvicorn is up; wait for it to answer
  for (let attempt = 0; ; attempt++) {
    try {
      const response = await fetch(`${baseUrl}/schema/tables`);
      if (response.ok) break;
    } catch {
      /* not up yet */
    }
    if (attempt > 200) throw new Error("service never answered");
    await new Promise((r) => setTimeout(r, 50));
  }

  return {
    baseUrl,
    feedbackLog,
    stop: () =>
      new Promise<void>((resolvePromise) => {
        child.on("exit", () => resolvePromise());
        child.kill("SIGINT");
        setTimeout(() => child.kill("SIGKILL"), 3000).unref();
      }),
  };
}

export function feedbackRecords(path: string): Array<Record<string, string>> {
  if (!existsSync(path)) return [];
  return readFileSync(path, "utf-8")
    .split("\n")
    .filter((line) => line.trim())
    .map((line) => JSON.parse(line));
}
