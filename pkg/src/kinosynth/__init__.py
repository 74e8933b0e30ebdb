"""Kinematic shortest paths and control synthesis for rigid bodies with
discrete constant-velocity control sets."""

__version__ = "0.1.0"
