"""Benchmark generators, experiment runner and CLI."""
