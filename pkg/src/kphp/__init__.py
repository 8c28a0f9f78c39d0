"""Unified-transform solution pipeline for the KPI equation on the half-plane."""

__version__ = "0.1.0"
