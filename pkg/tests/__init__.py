"""Tests for pdc-mesh."""
