/// <reference types="vitest/config" />
import { defineConfig } from "vite";

// the server mounts the built bundle under /ui/
export default defineConfig({
  base: "/ui/",
  build: { outDir: "dist", emptyOutDir: true },
  server: {
    proxy: { "/api": "http://127.0.0.1:8323" },
  },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    testTimeout: 30000,
    hookTimeout: 60000,
  },
});
