"""Petri nets with read arcs: process-algebra compilation, failure preorders
under progress and justness, may/must/should testing, the feasibility
scheduler, and timed must-testing."""

from .mset import Multiset

__all__ = ["Multiset"]
__version__ = "0.1.0"
