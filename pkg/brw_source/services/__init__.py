"""Numerical services: materials through optimizer."""
