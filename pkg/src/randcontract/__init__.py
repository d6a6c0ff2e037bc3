"""Exact parameterized solvers for Steiner Cut, Multiway Cut-Uncut and Unique Label Cover
built on randomized contractions."""

__version__ = "0.1.0"
