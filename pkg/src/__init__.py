"""Monoped co-design toolkit: actuator catalog, CMA-ES co-design and design manifest."""

__version__ = "0.1.0"
