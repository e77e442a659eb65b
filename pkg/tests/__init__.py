"""Tests for haupt."""
