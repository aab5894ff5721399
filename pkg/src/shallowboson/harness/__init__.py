"""CLI, statistical validation, benchmarks and file formats."""
