"""Analog subcircuit identification on flat SPICE netlists."""
from .annotations import HL1, HL2, HL3, AnnotationSet, SubcircuitInstance
from .detectors import identify
from .netlist import Netlist, NetRoles, anonymize, classify_nets, parse_netlist, serialize_netlist

__version__ = "0.1.0"
