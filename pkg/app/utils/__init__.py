"""Logging and report formatting helpers."""
