"""Experiment harness: set families, batch runner, reports and the CLI."""
