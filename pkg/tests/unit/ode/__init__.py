"""Unit tests for integration and zero finding."""
