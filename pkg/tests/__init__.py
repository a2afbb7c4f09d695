"""Test suite for robnet."""
