"""Unit tests for report rendering and writing."""
