"""Certified error bounds for unitary representations of Lie groups."""
