"""Cross-cutting helpers: logging, configuration, formatting and run files."""
