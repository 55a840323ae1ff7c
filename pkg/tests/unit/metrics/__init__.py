"""Unit tests for oscillation metrics."""
