"""Exact structure-constant algebra toolkit."""
