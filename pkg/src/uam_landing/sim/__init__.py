"""Closed-loop simulator, scenario configuration and telemetry I/O."""
