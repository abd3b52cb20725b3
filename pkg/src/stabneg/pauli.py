"""Symplectic bitmask Paulis, bipartitions and the restricted commutation matrix.

Qubit ``q`` corresponds to bit ``q`` of both masks. Masks are plain Python
integers, which covers the single-word case (N <= 64) and arbitrary N with the
same code. Pauli-Y is excluded: a qubit may carry X or Z but never both.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DependentGeneratorsError, ModelError, NonCommutingError


def _mask(indices: Iterable[int], n_qubits: int) -> int:
    m = 0
    for q in indices:
        q = int(q)
        if not 0 <= q < n_qubits:
            raise ModelError(f"qubit index {q} out of range for {n_qubits} qubits")
        m |= 1 << q
    return m


def _indices(mask: int) -> list[int]:
    out = []
    q = 0
    while mask:
        if mask & 1:
            out.append(q)
        mask >>= 1
        q += 1
    return out


@dataclass(frozen=True)
class PauliOperator:
    """Y-free Pauli string stored as an (X-mask, Z-mask) pair."""

    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ModelError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x_mask < 0 or self.z_mask < 0 or (self.x_mask | self.z_mask) & ~full:
            raise ModelError("mask has bits outside the qubit range")
        if self.x_mask & self.z_mask:
            raise ModelError("Pauli-Y (X and Z on the same qubit) is not supported")

    @classmethod
    def from_indices(cls, n_qubits: int, x: Iterable[int] = (), z: Iterable[int] = ()) -> "PauliOperator":
        return cls(n_qubits, _mask(x, n_qubits), _mask(z, n_qubits))

    @classmethod
    def from_string(cls, label: str) -> "PauliOperator":
        """Parse e.g. ``"XIZ"``; character ``q`` acts on qubit ``q``."""
        x = [q for q, ch in enumerate(label) if ch.upper() == "X"]
        z = [q for q, ch in enumerate(label) if ch.upper() == "Z"]
        bad = set(label.upper()) - set("IXZ")
        if bad:
            raise ModelError(f"unsupported Pauli letters {sorted(bad)}")
        return cls.from_indices(len(label), x, z)

    @property
    def support(self) -> int:
        return self.x_mask | self.z_mask

    @property
    def x_indices(self) -> list[int]:
        return _indices(self.x_mask)

    @property
    def z_indices(self) -> list[int]:
        return _indices(self.z_mask)

    def is_identity(self) -> bool:
        return self.support == 0

    def __str__(self) -> str:
        chars = []
        for q in range(self.n_qubits):
            if self.x_mask >> q & 1:
                chars.append("X")
            elif self.z_mask >> q & 1:
                chars.append("Z")
            else:
                chars.append("I")
        return "".join(chars)


@dataclass(frozen=True)
class Bipartition:
    """Region A as a set of qubits; region B is the complement."""

    n_qubits: int
    region_a: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        region = frozenset(int(q) for q in self.region_a)
        object.__setattr__(self, "region_a", region)
        _mask(region, self.n_qubits)

    @property
    def mask_a(self) -> int:
        return _mask(self.region_a, self.n_qubits)

    @property
    def mask_b(self) -> int:
        return ((1 << self.n_qubits) - 1) & ~self.mask_a


def _symplectic(p: PauliOperator, q: PauliOperator) -> int:
    return ((p.x_mask & q.z_mask) ^ (p.z_mask & q.x_mask)).bit_count() & 1


def commutes(p: PauliOperator, q: PauliOperator) -> bool:
    if p.n_qubits != q.n_qubits:
        raise ModelError(f"size mismatch: {p.n_qubits} vs {q.n_qubits} qubits")
    return _symplectic(p, q) == 0


def restrict(p: PauliOperator, b: Bipartition, side: str = "a") -> PauliOperator:
    """Zero both masks outside region A (or outside region B with ``side="b"``)."""
    if p.n_qubits != b.n_qubits:
        raise ModelError(f"size mismatch: {p.n_qubits} vs {b.n_qubits} qubits")
    keep = b.mask_a if side == "a" else b.mask_b
    return PauliOperator(p.n_qubits, p.x_mask & keep, p.z_mask & keep)


class CommutationMatrix:
    """Symmetric zero-diagonal GF(2) matrix of restricted anticommutation."""

    __slots__ = ("k", "bits")

    def __init__(self, bits):
        arr = np.array(bits, dtype=np.uint8) & 1
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ModelError("commutation matrix must be square")
        if not np.array_equal(arr, arr.T):
            raise ModelError("commutation matrix must be symmetric")
        if np.any(np.diag(arr)):
            raise ModelError("commutation matrix must have zero diagonal")
        arr.setflags(write=False)
        self.k = int(arr.shape[0])
        self.bits = arr

    @classmethod
    def zeros(cls, k: int) -> "CommutationMatrix":
        return cls(np.zeros((k, k), dtype=np.uint8))

    def lower_masks(self) -> list[int]:
        """Row ``i`` as a bitmask over columns ``j < i``."""
        out = []
        for i in range(self.k):
            m = 0
            for j in range(i):
                if self.bits[i, j]:
                    m |= 1 << j
            out.append(m)
        return out

    def submatrix(self, indices: Sequence[int]) -> "CommutationMatrix":
        idx = list(indices)
        return CommutationMatrix(self.bits[np.ix_(idx, idx)])

    def permuted(self, perm: Sequence[int]) -> "CommutationMatrix":
        """Matrix of generators reordered so new index ``i`` is old ``perm[i]``."""
        return self.submatrix(perm)

    def __eq__(self, other):
        if not isinstance(other, CommutationMatrix):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())

    def __repr__(self):
        return f"CommutationMatrix(k={self.k}, edges={int(self.bits.sum()) // 2})"


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of integer bit rows."""
    pivots: dict[int, int] = {}
    rank = 0
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top not in pivots:
                pivots[top] = r
                rank += 1
                break
            r ^= pivots[top]
    return rank


def _symplectic_row(p: PauliOperator) -> int:
    return p.x_mask | (p.z_mask << p.n_qubits)


def independence_rank(generators) -> int:
    """GF(2) rank of the k x 2N symplectic generator matrix.

    Accepts a model or a sequence of Paulis. Raises
    :class:`DependentGeneratorsError` naming the first generator that lies in
    the span of the earlier ones.
    """
    gens = list(generators.generators if isinstance(generators, StabilizerModel) else generators)
    pivots: dict[int, int] = {}
    redundant = None
    for idx, p in enumerate(gens):
        r = _symplectic_row(p)
        while r:
            top = r.bit_length() - 1
            if top not in pivots:
                pivots[top] = r
                break
            r ^= pivots[top]
        else:
            if redundant is None:
                redundant = idx
    rank = len(pivots)
    if rank < len(gens):
        raise DependentGeneratorsError(rank, len(gens), redundant)
    return rank


def _coerce_coupling(t) -> float:
    if isinstance(t, str):
        if t.strip().lower() in ("inf", "+inf", "infinity"):
            return 1.0
        raise ModelError(f"bad coupling {t!r}")
    t = float(t)
    if math.isnan(t) or abs(t) > 1.0:
        raise ModelError(f"coupling t={t} outside [-1, 1]")
    return t


@dataclass(frozen=True)
class StabilizerModel:
    """Independent commuting generators with couplings ``t_i = tanh(beta J_i)``.

    ``t_i = 1`` encodes an infinite coupling. Validation runs at construction
    unless ``validate=False`` is passed (used internally by builders that have
    already established the invariants).
    """

    generators: tuple
    couplings: tuple
    bipartition: Bipartition
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        gens = tuple(self.generators)
        ts = tuple(_coerce_coupling(t) for t in self.couplings)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "couplings", ts)
        if len(gens) != len(ts):
            raise ModelError(f"{len(gens)} generators but {len(ts)} couplings")
        n = self.bipartition.n_qubits
        for p in gens:
            if p.n_qubits != n:
                raise ModelError("generator size does not match bipartition")
        if self.validate:
            for i in range(len(gens)):
                for j in range(i + 1, len(gens)):
                    if _symplectic(gens[i], gens[j]):
                        raise NonCommutingError(i, j)
            independence_rank(gens)

    @property
    def n_qubits(self) -> int:
        return self.bipartition.n_qubits

    @property
    def k(self) -> int:
        return len(self.generators)

    def with_couplings(self, couplings) -> "StabilizerModel":
        return StabilizerModel(self.generators, tuple(couplings), self.bipartition, validate=False)

    def with_region(self, region_a) -> "StabilizerModel":
        return StabilizerModel(
            self.generators, self.couplings, Bipartition(self.n_qubits, frozenset(region_a)), validate=False
        )


def commutation_matrix(m: StabilizerModel, side: str = "a") -> CommutationMatrix:
    gens = [restrict(p, m.bipartition, side) for p in m.generators]
    k = len(gens)
    bits = np.zeros((k, k), dtype=np.uint8)
    for i in range(k):
        for j in range(i + 1, k):
            if _symplectic(gens[i], gens[j]):
                bits[i, j] = bits[j, i] = 1
    return CommutationMatrix(bits)


def classify_generators(m: StabilizerModel) -> tuple[list[int], list[int]]:
    """Split generator indices into (bulk, boundary) by support on both sides."""
    a, b = m.bipartition.mask_a, m.bipartition.mask_b
    bulk, boundary = [], []
    for i, p in enumerate(m.generators):
        if p.support & a and p.support & b:
            boundary.append(i)
        else:
            bulk.append(i)
    return bulk, boundary


def realize_from_c(c: CommutationMatrix, couplings=None) -> StabilizerModel:
    """Synthetic model whose restricted commutation matrix is ``c``.

    Every anticommuting pair ``i < j`` gets a qubit in A carrying X for ``i``
    and Z for ``j`` plus a mirror qubit in B with the same letters, so the pair
    commutes globally. Isolated generators get a single X on a fresh A qubit.
    Qubits are laid out edge by edge (A qubit, then its mirror), isolated
    qubits last.
    """
    k = c.k
    edges = [(i, j) for i in range(k) for j in range(i + 1, k) if c.bits[i, j]]
    touched = {i for e in edges for i in e}
    isolated = [i for i in range(k) if i not in touched]
    n = 2 * len(edges) + len(isolated)
    if n == 0:
        raise ModelError("cannot realize an empty commutation matrix")
    xs = [0] * k
    zs = [0] * k
    region = []
    for e, (i, j) in enumerate(edges):
        qa, qb = 2 * e, 2 * e + 1
        region.append(qa)
        xs[i] |= (1 << qa) | (1 << qb)
        zs[j] |= (1 << qa) | (1 << qb)
    for offset, i in enumerate(isolated):
        q = 2 * len(edges) + offset
        region.append(q)
        xs[i] |= 1 << q
    gens = tuple(PauliOperator(n, xs[i], zs[i]) for i in range(k))
    ts = tuple(couplings) if couplings is not None else (1.0,) * k
    return StabilizerModel(gens, ts, Bipartition(n, frozenset(region)))


# -- JSON ---------------------------------------------------------------------


def model_to_dict(m: StabilizerModel) -> dict:
    return {
        "n_qubits": m.n_qubits,
        "region_a": sorted(m.bipartition.region_a),
        "generators": [{"x": p.x_indices, "z": p.z_indices} for p in m.generators],
        "couplings": ["inf" if t == 1.0 else t for t in m.couplings],
    }


def model_from_dict(doc: dict) -> StabilizerModel:
    try:
        n = int(doc["n_qubits"])
        region = frozenset(int(q) for q in doc.get("region_a", []))
        gens = tuple(
            PauliOperator.from_indices(n, g.get("x", []), g.get("z", [])) for g in doc["generators"]
        )
        couplings = doc.get("couplings", [1.0] * len(gens))
    except (KeyError, TypeError, AttributeError) as exc:
        raise ModelError(f"malformed stabilizer model document: {exc}") from exc
    return StabilizerModel(gens, tuple(couplings), Bipartition(n, region))


def model_to_json(m: StabilizerModel, **kwargs) -> str:
    return json.dumps(model_to_dict(m), **kwargs)


def model_from_json(text: str) -> StabilizerModel:
    return model_from_dict(json.loads(text))
