import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
    // the session test boots the real Python server, which needs a moment
    testTimeout: 60000,
    hookTimeout: 60000,
  },
});
