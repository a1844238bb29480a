"""Tests for lattice-assoc."""
