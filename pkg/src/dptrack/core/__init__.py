"""Core numerical modules for dptrack."""
