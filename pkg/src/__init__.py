"""Scope Perftest - decide when repeated latency measurements are enough."""

__version__ = "0.1.0"
