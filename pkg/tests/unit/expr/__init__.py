"""Unit tests for coefficient expressions."""
