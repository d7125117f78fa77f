import { defineConfig } from 'vitest/config';
import react from '@vitejs/plugin-react';

export default defineConfig({
  base: '/ui/',
  plugins: [react()],
  server: {
    proxy: { '/api': 'http://127.0.0.1:8731' },
  },
  test: {
    environment: 'happy-dom',
    testTimeout: 30000,
    hookTimeout: 60000,
  },
});
