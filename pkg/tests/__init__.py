"""Tests for wavemaps-splitting."""
