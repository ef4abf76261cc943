"""Forecasting software-aging resource exhaustion with a one-hidden-layer MLP."""

__version__ = "0.1.0"
