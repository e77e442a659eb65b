"""Computation services: series kernel, forms, catalog, checks."""
