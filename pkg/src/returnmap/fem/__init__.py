"""Plane-strain finite elements for the slope benchmark."""
from .assembly import Assembler, DofSystem, QuadratureState, assemble, element_arrays
from .elements import QUAD8, TRI3, get_element, strain_displacement
from .io import read_mesh, write_mesh, write_vtk
from .mesh import BoundaryTag, Mesh, SlopeGeometry, generate_slope_mesh, rectangle_mesh

__all__ = [
    "Assembler", "BoundaryTag", "DofSystem", "Mesh", "QUAD8", "QuadratureState",
    "SlopeGeometry", "TRI3", "assemble", "element_arrays", "generate_slope_mesh",
    "get_element", "read_mesh", "rectangle_mesh", "strain_displacement", "write_mesh",
    "write_vtk",
]
