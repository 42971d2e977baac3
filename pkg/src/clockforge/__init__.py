"""Numerical laboratory for Feynman-Kitaev clock Hamiltonians."""
