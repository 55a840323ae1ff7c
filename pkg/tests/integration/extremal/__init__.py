"""Integration tests for the extremal construction pipeline."""
