"""Design and simulation toolkit for 1-bit, column-biased reconfigurable intelligent surfaces."""

from .core import (ArrayLayout, DirectionTerminal, Frequency, PointTerminal, Scene,
                   electrical_size, element_distances, make_layout, wavenumber)
from .synthesis import PatternMask
from .unitcell import State, UnitCellResponse, default_response

__version__ = "0.1.0"

__all__ = [
    "ArrayLayout", "DirectionTerminal", "Frequency", "PatternMask", "PointTerminal",
    "Scene", "State", "UnitCellResponse", "default_response", "electrical_size",
    "element_distances", "make_layout", "wavenumber",
]
