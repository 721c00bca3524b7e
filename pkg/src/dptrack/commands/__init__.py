"""CLI commands for dptrack."""
