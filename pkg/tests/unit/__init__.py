"""Unit test suites, one package per area."""
