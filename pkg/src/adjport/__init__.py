"""Adjustable passive and active mechanical and electrical one-ports.

Signals, exact-derivative algebra, breakpoint-aware integration, the device
law catalogue, energy accounting and kinematic mechanism models.
"""

from . import devices, numerics, signals

__version__ = "0.1.0"
