from .ast import FALSE, TRUE, And, Atomic, Formula, Not, Until, leaves, mnt, size
from .checker import CheckError, Counters, NodeResult, Verdict, check
from .intervals import Endpoint, Interval, IntervalSet, complement, intersect, union, until_set
from .parser import parse

__all__ = [
    "FALSE", "TRUE", "And", "Atomic", "Formula", "Not", "Until", "leaves", "mnt", "size",
    "CheckError", "Counters", "NodeResult", "Verdict", "check",
    "Endpoint", "Interval", "IntervalSet", "complement", "intersect", "union", "until_set", "parse",
]
