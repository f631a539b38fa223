"""Exact computations around spinor norms, Clifford groups and similitudes."""

__version__ = "0.1.0"
