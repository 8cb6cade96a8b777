"""Resisting oracles, hard families and information games."""
