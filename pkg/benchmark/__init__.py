"""Simulation studies for lattice-assoc."""
