"""Rational points on y^2 = x(x^2 + 2^i p^j)(x^2 + 2^(i+1) p^j) by exact descent."""

__version__ = "0.1.0"
