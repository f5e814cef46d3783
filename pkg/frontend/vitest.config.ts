import { fileURLToPath } from "node:url";

import { defineConfig } from "vitest/config";

export default defineConfig({
    test: {
        include: ["test/**/*.test.ts"],
        environment: "node",
        testTimeout: 30000,
        hookTimeout: 120000,
        env: {
            // The DOM test environment rewrites import.meta.url to an http
            // URL, so file paths must be resolved here instead.
            REPO_ROOT: fileURLToPath(new URL("..", import.meta.url)),
        },
    },
});
