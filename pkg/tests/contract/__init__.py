"""Contract tests."""

