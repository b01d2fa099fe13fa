"""Executable workbench for operational semantics."""

__version__ = "0.1.0"
