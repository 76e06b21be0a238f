"""Command-line interface package for Chewing SSL."""
