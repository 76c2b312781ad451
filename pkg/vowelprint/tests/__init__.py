"""Test suite for vowelprint."""
