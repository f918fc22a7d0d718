"""Predefined-time ship guidance, switching obstacle avoidance and an encounter benchmark."""

__version__ = "0.1.0"
