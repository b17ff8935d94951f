"""Exact K-stability calculator."""
