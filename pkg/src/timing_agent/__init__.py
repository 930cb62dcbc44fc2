"""Timing report analysis agent: report database, query language, debug graph and planners."""

__version__ = "0.1.0"
