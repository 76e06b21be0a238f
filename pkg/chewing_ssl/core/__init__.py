"""Core functionality: signal processing, networks, training and evaluation."""
