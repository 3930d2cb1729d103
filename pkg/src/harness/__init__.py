"""Benchmark harness: configuration, timed runs, sweeps, tables and fits."""
