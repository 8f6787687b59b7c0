"""Integration tests for pdc-mesh."""
