"""Unit tests for the extremal construction."""
