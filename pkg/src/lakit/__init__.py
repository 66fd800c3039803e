"""Exact verification kernel for split Lie 2-algebroids, self-dual 2-representations and their matched pairs."""
