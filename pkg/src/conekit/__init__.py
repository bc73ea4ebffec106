"""Cone-angle geometry toolkit: spherical cone metrics, lifts, flat cones and energy bookkeeping."""

__version__ = "0.1.0"
