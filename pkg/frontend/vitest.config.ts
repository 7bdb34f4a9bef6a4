import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    globalSetup: ["./tests/serve.global.ts"],
    include: ["tests/**/*.test.ts"],
    testTimeout: 30000,
    hookTimeout: 60000,
    // the suite talks to one live server; keep runs serial so documents
    // created by one file never race another file's revision counters
    fileParallelism: false,
  },
});
