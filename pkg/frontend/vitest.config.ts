import { defineConfig } from "vitest/config";

export default defineConfig({
  resolve: {
    // sources use browser-style ".js" specifiers; map them back to the
    // TypeScript files when running under vitest
    alias: [{ find: /^(\.{1,2}\/.*)\.js$/, replacement: "$1" }],
  },
  test: {
    environment: "node",
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
