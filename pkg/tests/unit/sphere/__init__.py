"""Unit tests for sphere geometry."""
