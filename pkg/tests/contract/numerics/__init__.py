"""Contract tests for the integrator and report ports."""
