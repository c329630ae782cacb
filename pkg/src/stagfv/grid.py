"""1D primal mesh and its staggered dual mesh.

Scalar unknowns (density, internal energy, pressure) live on the primal
cells; the normal velocity lives on the faces, or equivalently on the dual
cells built around them.  In 1D every face has measure 1, so a cell measure
equals its width and the dual cell of an interior face spans the two
adjacent half-cells.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class Grid:
    """Uniform 1D mesh with face-centred dual cells.

    Faces are indexed 0..n_cells; faces 0 and n_cells lie on the boundary
    and carry zero normal velocity for all time.  Interior face j separates
    cells j-1 and j.
    """

    domain_left: float
    domain_right: float
    n_cells: int
    cell_centers: np.ndarray = field(repr=False)
    face_positions: np.ndarray = field(repr=False)
    cell_width: float

    @property
    def n_faces(self) -> int:
        return self.n_cells + 1

    @property
    def interior_faces(self) -> slice:
        """Index range of the faces that carry a velocity unknown."""
        return slice(1, self.n_cells)

    def cell_measures(self) -> np.ndarray:
        """|K| per cell (equal to the width in 1D)."""
        return np.full(self.n_cells, self.cell_width)

    def face_measures(self) -> np.ndarray:
        """|sigma| per face; dimensionless 1 in 1D."""
        return np.ones(self.n_faces)

    def dual_measures(self) -> np.ndarray:
        """|D_sigma| per face, boundary faces owning a half-cell."""
        meas = np.full(self.n_faces, self.cell_width)
        meas[0] = 0.5 * self.cell_width
        meas[-1] = 0.5 * self.cell_width
        return meas


def build_uniform_grid(domain_left: float, domain_right: float, n_cells: int) -> Grid:
    """Build a uniform grid of ``n_cells`` cells over (domain_left, domain_right)."""
    if not domain_right > domain_left:
        raise ConfigurationError(
            f"domain ({domain_left}, {domain_right}) has non-positive length"
        )
    if n_cells < 2:
        raise ConfigurationError(f"need at least 2 cells, got {n_cells}")
    faces = np.linspace(domain_left, domain_right, n_cells + 1)
    width = (domain_right - domain_left) / n_cells
    centers = 0.5 * (faces[:-1] + faces[1:])
    return Grid(
        domain_left=float(domain_left),
        domain_right=float(domain_right),
        n_cells=int(n_cells),
        cell_centers=centers,
        face_positions=faces,
        cell_width=float(width),
    )


@dataclass(frozen=True)
class MeshMetrics:
    """Mesh regularity numbers entering the remainder bounds.

    h_m: largest cell diameter.
    h_underline_m: min over cells of |K| / sum of its face measures.
    c_m: max over cells and face pairs of (|sigma|+|sigma'|) h_K / |K|.
    f_m: largest number of faces of a cell.
    """

    h_m: float
    h_underline_m: float
    c_m: float
    f_m: int


def mesh_metrics(grid: Grid) -> MeshMetrics:
    """Compute the regularity metrics; written for a general 1D mesh."""
    widths = grid.face_positions[1:] - grid.face_positions[:-1]
    h_m = float(np.max(widths))
    # every 1D cell has two faces of measure 1
    face_sum = 2.0
    h_underline = float(np.min(widths) / face_sum)
    c_m = float(np.max((1.0 + 1.0) * widths / widths))
    return MeshMetrics(h_m=h_m, h_underline_m=h_underline, c_m=c_m, f_m=2)
