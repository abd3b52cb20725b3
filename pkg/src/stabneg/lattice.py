"""Toric-code boundary models and small full-torus models.

Cells of a hypercubic lattice are labelled by a base vertex and a sorted tuple
of directions. Within each cell dimension the order is: direction tuple
(lexicographic), then base vertex with axis 0 varying fastest. Every model
lists its A (X-type) generators first, then its B (Z-type) generators.

Boundary realization: each A cell ``c`` owns one qubit on the A side of the
cut (``up_c``) and each B cell ``p`` owns one qubit on the B side
(``slice_p``). Then

    A_c = X(up_c) * prod_{p : c in dp} X(slice_p)
    B_p = Z(slice_p) * prod_{c in dp} Z(up_c)

which is the toric-code strip next to a flat cut with the far-side qubits
dropped. ``A_c`` and ``B_p`` overlap on two qubits when ``c`` bounds ``p``,
so they commute globally and anticommute once restricted to A.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GuardError, ModelError
from .pauli import Bipartition, CommutationMatrix, PauliOperator, StabilizerModel, commutation_matrix


class LatticeGeometry:
    """Cubical complex on a box of vertices, periodic or open per axis."""

    def __init__(self, shape: Sequence[int], periodic: Sequence[bool] | bool = True):
        self.shape = tuple(int(n) for n in shape)
        self.dimension = len(self.shape)
        if isinstance(periodic, bool):
            periodic = (periodic,) * self.dimension
        self.periodic = tuple(bool(p) for p in periodic)
        for n, per in zip(self.shape, self.periodic):
            if per and n < 2:
                raise ModelError("periodic axes need at least 2 vertices")
            if not per and n < 2:
                raise ModelError("open axes need at least 2 vertices")
        self._cells = {m: self._enumerate(m) for m in range(self.dimension + 1)}
        self._index = {m: {cell: i for i, cell in enumerate(cells)} for m, cells in self._cells.items()}

    @classmethod
    def periodic_cube(cls, dimension: int, L: int) -> "LatticeGeometry":
        return cls((L,) * dimension, True)

    @classmethod
    def fragment(cls, spec) -> "LatticeGeometry":
        """Open sub-lattice: ``"cube"`` or a per-axis vertex count tuple."""
        if spec in ("cube", "single_cube"):
            return cls((2, 2, 2), False)
        if isinstance(spec, dict):
            spec = spec.get("shape")
        try:
            shape = tuple(int(n) for n in spec)
        except TypeError as exc:
            raise ModelError(f"bad fragment spec {spec!r}") from exc
        if len(shape) != 3:
            raise ModelError("a 4d-model fragment is a 3-dimensional box")
        return cls(shape, False)

    def _positions(self, dirs: tuple) -> list[tuple]:
        ranges = []
        for axis, (n, per) in enumerate(zip(self.shape, self.periodic)):
            if per or axis not in dirs:
                ranges.append(range(n))
            else:
                ranges.append(range(n - 1))
        # axis 0 fastest
        return [tuple(reversed(p)) for p in itertools.product(*reversed(ranges))]

    def _enumerate(self, m: int) -> list[tuple]:
        cells = []
        for dirs in itertools.combinations(range(self.dimension), m):
            cells.extend((pos, dirs) for pos in self._positions(dirs))
        return cells

    def cells(self, m: int) -> list[tuple]:
        return list(self._cells[m])

    def count(self, m: int) -> int:
        return len(self._cells[m])

    def _shift(self, pos: tuple, axis: int) -> tuple:
        p = list(pos)
        p[axis] += 1
        if self.periodic[axis]:
            p[axis] %= self.shape[axis]
        return tuple(p)

    def boundary(self, m: int) -> list[list[int]]:
        """For every m-cell, the indices of the (m-1)-cells on its boundary."""
        if m < 1:
            raise ValueError("vertices have no boundary")
        index = self._index[m - 1]
        out = []
        for pos, dirs in self._cells[m]:
            faces = []
            for axis in dirs:
                rest = tuple(d for d in dirs if d != axis)
                faces.append(index[(pos, rest)])
                faces.append(index[(self._shift(pos, axis), rest)])
            out.append(faces)
        return out

    def incidence(self, m: int) -> np.ndarray:
        """GF(2) matrix with rows (m-1)-cells and columns m-cells."""
        mat = np.zeros((self.count(m - 1), self.count(m)), dtype=np.uint8)
        for j, faces in enumerate(self.boundary(m)):
            for i in faces:
                mat[i, j] ^= 1
        return mat

    def euler_characteristic(self) -> int:
        return sum((-1) ** m * self.count(m) for m in range(self.dimension + 1))

    def __repr__(self):
        kind = "periodic" if all(self.periodic) else "open"
        return f"LatticeGeometry(shape={self.shape}, {kind})"


@dataclass(frozen=True)
class BoundaryModel:
    """A boundary stabilizer model with its geometric bookkeeping.

    ``a_cell_dim`` is the cell dimension carrying the A generators; the B
    generators live on cells one dimension higher, and ``boundary[p]`` lists
    the A cells bounding B cell ``p``.
    """

    dimension: int
    L: int
    geometry: LatticeGeometry
    a_cell_dim: int
    a_indices: tuple
    b_indices: tuple
    boundary: tuple
    model: StabilizerModel
    t_a: float
    t_b: float

    @property
    def n_a(self) -> int:
        return len(self.a_indices)

    @property
    def n_b(self) -> int:
        return len(self.b_indices)

    @property
    def k(self) -> int:
        return self.model.k

    def commutation_matrix(self) -> CommutationMatrix:
        return commutation_matrix(self.model)

    def combinatorial_matrix(self) -> CommutationMatrix:
        """The A-B incidence structure written directly as a k x k matrix."""
        k, na = self.k, self.n_a
        bits = np.zeros((k, k), dtype=np.uint8)
        for p, cells in enumerate(self.boundary):
            for c in cells:
                bits[c, na + p] ^= 1
                bits[na + p, c] ^= 1
        return CommutationMatrix(bits)

    def with_couplings(self, t_a: float, t_b: float) -> "BoundaryModel":
        ts = [t_a] * self.n_a + [t_b] * self.n_b
        return BoundaryModel(
            self.dimension, self.L, self.geometry, self.a_cell_dim, self.a_indices,
            self.b_indices, self.boundary, self.model.with_couplings(ts), float(t_a), float(t_b),
        )


def _build_boundary(dimension: int, L: int, geometry: LatticeGeometry, a_dim: int, t_a: float, t_b: float) -> BoundaryModel:
    n_a = geometry.count(a_dim)
    bnd = geometry.boundary(a_dim + 1)
    n_b = len(bnd)
    n = n_a + n_b
    xs = [1 << c for c in range(n_a)]
    zs = []
    for p, cells in enumerate(bnd):
        slice_q = 1 << (n_a + p)
        up = 0
        for c in cells:
            xs[c] ^= slice_q
            up ^= 1 << c
        zs.append(slice_q | up)
    gens = [PauliOperator(n, x, 0) for x in xs] + [PauliOperator(n, 0, z) for z in zs]
    ts = [t_a] * n_a + [t_b] * n_b
    model = StabilizerModel(tuple(gens), tuple(ts), Bipartition(n, frozenset(range(n_a))))
    return BoundaryModel(
        dimension=dimension,
        L=L,
        geometry=geometry,
        a_cell_dim=a_dim,
        a_indices=tuple(range(n_a)),
        b_indices=tuple(range(n_a, n_a + n_b)),
        boundary=tuple(tuple(cells) for cells in bnd),
        model=model,
        t_a=float(t_a),
        t_b=float(t_b),
    )


def _check_L(L: int) -> int:
    if int(L) != L or L < 2:
        raise ModelError(f"linear size must be an integer >= 2, got {L!r}")
    return int(L)


def build_boundary_2d(L: int, t_a: float, t_b: float) -> BoundaryModel:
    """Ring of L stars (sites) and L plaquettes (links); C is a 2L-cycle."""
    L = _check_L(L)
    return _build_boundary(2, L, LatticeGeometry.periodic_cube(1, L), 0, t_a, t_b)


def build_boundary_3d(L: int, t_a: float, t_b: float) -> BoundaryModel:
    """L^2 site generators and 2L^2 link generators on a periodic square lattice."""
    L = _check_L(L)
    return _build_boundary(3, L, LatticeGeometry.periodic_cube(2, L), 0, t_a, t_b)


def build_boundary_4d(L: int | None, t_a: float, t_b: float, fragment=None) -> BoundaryModel:
    """Link (A) and plaquette (B) generators of a 3D cut surface.

    Without ``fragment`` the surface is a periodic L^3 lattice (k = 6 L^3, so
    full tables are refused for every L >= 2). With ``fragment`` the surface
    is an open box such as ``"cube"``.
    """
    if fragment is None:
        L = _check_L(L)
        geom = LatticeGeometry.periodic_cube(3, L)
    else:
        geom = LatticeGeometry.fragment(fragment)
        L = max(geom.shape) - 1
    return _build_boundary(4, L, geom, 1, t_a, t_b)


def interleaved_order(bm: BoundaryModel) -> list[int]:
    """Generator order A_1, B_1, ..., A_L, B_L for the 2d ring."""
    if bm.dimension != 2:
        raise ValueError("interleaved order is defined for the 2d ring only")
    order = []
    for a, b in zip(bm.a_indices, bm.b_indices):
        order.extend([a, b])
    return order


# -- full 2d torus (oracle scale) -------------------------------------------------------


@dataclass(frozen=True)
class TorusModel:
    L: int
    model: StabilizerModel
    star_indices: tuple
    plaquette_indices: tuple
    dropped: tuple


def torus_generators(L: int) -> tuple[list[PauliOperator], list[PauliOperator]]:
    """All L^2 stars and L^2 plaquettes of the periodic 2d toric code.

    Qubits: horizontal link ``h(x, y) = y*L + x`` then vertical link
    ``v(x, y) = L^2 + y*L + x``; the plaquette at ``(x, y)`` has lower-left
    corner ``(x, y)``.
    """
    n = 2 * L * L

    def h(x, y):
        return (y % L) * L + (x % L)

    def v(x, y):
        return L * L + (y % L) * L + (x % L)

    stars, plaqs = [], []
    for y in range(L):
        for x in range(L):
            stars.append(PauliOperator.from_indices(n, x=[h(x, y), h(x - 1, y), v(x, y), v(x, y - 1)]))
            plaqs.append(PauliOperator.from_indices(n, z=[h(x, y), h(x, y + 1), v(x, y), v(x + 1, y)]))
    return stars, plaqs


def torus_cut_region(L: int, cut) -> frozenset:
    """Qubits in region A: links with x < ``cut`` (an int) or an explicit set."""
    if isinstance(cut, (int, np.integer)):
        w = int(cut)
        if not 0 <= w <= L:
            raise ModelError(f"cut width {w} outside [0, {L}]")
        qubits = []
        for y in range(L):
            for x in range(w):
                qubits.append(y * L + x)
                qubits.append(L * L + y * L + x)
        return frozenset(qubits)
    return frozenset(int(q) for q in cut)


def build_2d_torus(L: int, t_a: float, t_b: float, cut=None) -> TorusModel:
    """Full toric code on an L x L torus with the last star and last plaquette dropped."""
    if L not in (2, 3):
        raise GuardError("the full torus builder is limited to oracle scale, L in {2, 3}")
    stars, plaqs = torus_generators(L)
    gens = stars[:-1] + plaqs[:-1]
    ns = len(stars) - 1
    ts = [t_a] * ns + [t_b] * (len(plaqs) - 1)
    region = torus_cut_region(L, L // 2 if cut is None else cut)
    n = 2 * L * L
    model = StabilizerModel(tuple(gens), tuple(ts), Bipartition(n, region))
    return TorusModel(
        L=L,
        model=model,
        star_indices=tuple(range(ns)),
        plaquette_indices=tuple(range(ns, len(gens))),
        dropped=(len(stars) - 1, len(plaqs) - 1),
    )


def css_couplings(model: StabilizerModel, t_a: float, t_b: float) -> tuple:
    """Assign ``t_a`` to pure-X generators and ``t_b`` to pure-Z generators."""
    ts = []
    for i, p in enumerate(model.generators):
        if p.z_mask == 0 and p.x_mask:
            ts.append(t_a)
        elif p.x_mask == 0 and p.z_mask:
            ts.append(t_b)
        else:
            raise ModelError(f"generator {i} is neither pure X nor pure Z")
    return tuple(ts)
