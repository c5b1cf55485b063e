"""Command-line routes."""
