"""Compositional deterministic hybrid systems.

Build hybrid phase spaces, compose open systems by products and
interconnections, compute executions, and verify relatedness of networks.
"""
from __future__ import annotations

__version__ = "0.1.0"
