"""Slope stability benchmark: mesh, constraints, gravity load and the limit analysis run."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import presets
from .fem.assembly import Assembler, DofSystem
from .fem.io import element_average, write_vtk
from .fem.mesh import Mesh, SlopeGeometry, generate_slope_mesh
from .solver import (LimitAnalysisResult, LoadSchedule, NewtonSettings,
                     incremental_limit_analysis)


@dataclass
class SlopeRun:
    mesh: Mesh
    dofs: DofSystem
    assembler: Assembler
    load: np.ndarray
    monitor_node: int
    result: LimitAnalysisResult

    @property
    def monitor_dof(self) -> int:
        return int(self.dofs.free_index[2 * self.monitor_node + 1])

    def displacement(self):
        """Nodal displacements ``(n_nodes, 2)`` at the last accepted step."""
        return self.dofs.expand(self.result.u).reshape(-1, 2)

    def write_fields(self, path):
        ne = self.mesh.n_elements
        st = self.result.states
        write_vtk(path, self.mesh,
                  point_data={"displacement": self.displacement()},
                  cell_data={"eps_bar_p": element_average(st.eps_bar_p, ne),
                             "plastic_multiplier": element_average(st.delta_lambda, ne)})


def setup(material, level=1, etype="quad8", geometry=None, threads=1):
    mesh = generate_slope_mesh(level, etype, geometry or SlopeGeometry())
    dofs = DofSystem.from_mesh(mesh)
    asm = Assembler(mesh, dofs, material, threads=threads)
    load = asm.gravity_load(presets.UNIT_WEIGHT)
    monitor = mesh.nearest_node(mesh.geometry.crest)
    return mesh, dofs, asm, load, monitor


def run_slope(material, level=1, etype="quad8", geometry=None,
              schedule: LoadSchedule = LoadSchedule(), settings: NewtonSettings = NewtonSettings(),
              threads=1, progress=None) -> SlopeRun:
    """Incremental limit analysis of the slope under gravity."""
    if isinstance(material, str):
        material = presets.material(material)
    mesh, dofs, asm, load, monitor = setup(material, level, etype, geometry, threads)
    dof = int(dofs.free_index[2 * monitor + 1])
    result = incremental_limit_analysis(asm, load, dof, schedule, settings, progress)
    return SlopeRun(mesh, dofs, asm, load, monitor, result)
