"""Unit tests for configuration."""
