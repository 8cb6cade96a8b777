"""Inexact oracles made consistent by under- and outer-approximation."""
