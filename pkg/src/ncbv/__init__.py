"""Exact computational engine for noncommutative Batalin-Vilkovisky
structures at desk scale: stable ribbon graph combinatorics, graph-sum
renormalization group flows, master equation residuals, and the
large-N / Frobenius-algebra correspondence over finite-dimensional
free BV models."""

__version__ = "0.1.0"
