import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    testTimeout: 30000,
    hookTimeout: 60000,
    // the contract and e2e suites each spawn their own service instance
    fileParallelism: false,
  },
});
