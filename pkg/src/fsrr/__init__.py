"""Fuzzy-controlled scheduling of route requests in mobile ad hoc networks."""

__version__ = "0.1.0"
