"""Tests for defect-control."""
