"""Subcommands of the chewing-ssl CLI, one module per command."""
