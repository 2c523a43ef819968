"""Exact LP relaxations, dual certificates and certified heuristics for Steiner tree."""

from .core import Instance, InstanceClass, classify, metric_closure, mtst, read_instance, write_instance
from .hyper import FullComponent, enumerate_full_components, gain, loss
from .partition import Partition
from .ring import QuadraticNumber, SQRT2, SQRT3

__version__ = "0.1.0"

__all__ = [
    "FullComponent", "Instance", "InstanceClass", "Partition", "QuadraticNumber", "SQRT2", "SQRT3",
    "classify", "enumerate_full_components", "gain", "loss", "metric_closure", "mtst",
    "read_instance", "write_instance",
]
