"""Numerical subharmonicity, slice-regular calculus and Green functions for quaternionic fields."""

__version__ = "0.1.0"
