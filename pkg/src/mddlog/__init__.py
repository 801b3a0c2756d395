"""Containment for monadic disjunctive Datalog and MMSNP."""
__version__ = "0.1.0"
