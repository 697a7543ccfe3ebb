"""Techno-economic simulation of rooftop PV coupled with EV fleets used as
city-scale storage (PV-only and PV+EV scenarios)."""

__version__ = "0.1.0"
