"""vowelprint: fundamental-tone and dual-band harmonic analysis of stressed vowels."""

__version__ = "0.1.0"
