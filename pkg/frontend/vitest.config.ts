import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
    // the live-loop test spawns the palpation service and runs a session
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
