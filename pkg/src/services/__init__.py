"""Numerical services for wavemaps-splitting."""
