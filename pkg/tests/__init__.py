"""Test package for Chewing SSL."""
