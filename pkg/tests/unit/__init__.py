"""Unit tests for pdc-mesh."""
