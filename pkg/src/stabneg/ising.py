"""Statistical-mechanics evaluation of boundary negativity spectra.

For a boundary model with A generators on cells ``a`` and B generators on
cells ``p`` (``dp`` = the A cells bounding ``p``), the negativity spectrum is
proportional to the classical sum

    sum_tau prod_a tau_a^((1 - A_a)/2)
            * exp(-K_A sum_a (1 - tau_a)/2 + beta_lambda_B sum_p B_p prod_{a in dp} tau_a)

with ``K_A = -log tanh(beta_lambda_A)``. In 1D ``dp`` is a pair of
neighbouring sites (Ising ring); in 2D it is a link of the square lattice; on
the 3D cut of the 4d model ``a`` runs over links and ``p`` over plaquettes
(Ising gauge theory with matter).

Raw sums drop a positive, sector-independent constant, which
:func:`normalize_table` restores by fixing the total to ``2**k``. The
closed-form branches are returned already in the engine normalization, so they
compare directly with binegativity tables from :mod:`stabneg.spectrum`.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GuardError, ModelError
from .lattice import BoundaryModel, LatticeGeometry
from .spectrum import SectorTable, check_table_size, fwht

MAX_2D_SPINS = 16
MAX_GAUGE_LINKS = 20
MAX_ENUM_K = 22
_LOG_MAX = math.log(np.finfo(float).max)


def field_strength(beta_lambda_a: float) -> float:
    """``K_A = -log tanh(beta_lambda_A)``; infinite coupling gives 0."""
    x = float(beta_lambda_a)
    if math.isnan(x) or x <= 0.0:
        raise ModelError(f"K_A is undefined for beta*lambda_A = {beta_lambda_a}")
    if math.isinf(x):
        return 0.0
    e = math.exp(-2.0 * x)
    return math.log1p(e) - math.log1p(-e)


def _coupling(value) -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return float(value)


@dataclass(frozen=True)
class FieldParams:
    k_a: float
    beta_lambda_b: float

    def __post_init__(self):
        if not self.k_a >= 0.0:
            raise ModelError("K_A must be non-negative")
        if not self.beta_lambda_b >= 0.0:
            raise ModelError("beta*lambda_B must be non-negative")

    @classmethod
    def from_couplings(cls, beta_lambda_a, beta_lambda_b) -> "FieldParams":
        return cls(field_strength(_coupling(beta_lambda_a)), _coupling(beta_lambda_b))

    @property
    def t_a(self) -> float:
        return math.exp(-self.k_a)

    @property
    def t_b(self) -> float:
        return math.tanh(self.beta_lambda_b)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.beta_lambda_b) and math.isfinite(self.k_a)


@dataclass(frozen=True)
class IsingSector:
    """Signs for the A generators and the B generators of a boundary model."""

    a_signs: tuple
    b_signs: tuple

    def __post_init__(self):
        a = tuple(int(s) for s in self.a_signs)
        b = tuple(int(s) for s in self.b_signs)
        if any(s not in (1, -1) for s in a + b):
            raise ModelError("sector signs must be +1 or -1")
        object.__setattr__(self, "a_signs", a)
        object.__setattr__(self, "b_signs", b)

    @classmethod
    def from_mask(cls, mask: int, n_a: int, n_b: int) -> "IsingSector":
        a = tuple(-1 if mask >> i & 1 else 1 for i in range(n_a))
        b = tuple(-1 if mask >> (n_a + p) & 1 else 1 for p in range(n_b))
        return cls(a, b)

    def to_mask(self) -> int:
        mask = 0
        for i, s in enumerate(self.a_signs + self.b_signs):
            if s < 0:
                mask |= 1 << i
        return mask

    @property
    def a_mask(self) -> int:
        return sum(1 << i for i, s in enumerate(self.a_signs) if s < 0)


def _check_sector(sector: IsingSector, n_a: int, n_b: int) -> None:
    if len(sector.a_signs) != n_a or len(sector.b_signs) != n_b:
        raise ModelError(
            f"sector has {len(sector.a_signs)}/{len(sector.b_signs)} signs, "
            f"model needs {n_a}/{n_b}"
        )


# -- 1D transfer matrix --------------------------------------------------------------


def transfer_log(L: int, params: FieldParams, sector: IsingSector) -> tuple[float, float]:
    """``(sign, log|value|)`` of the ring sum via 2x2 transfer matrices.

    The running product is rescaled by its max-norm at every site.
    """
    if L < 2:
        raise ModelError("transfer matrix needs L >= 2")
    if not params.finite:
        raise ModelError("transfer matrix needs finite couplings")
    _check_sector(sector, L, L)
    x = params.beta_lambda_b
    ta = params.t_a
    prod = np.eye(2)
    log_scale = 0.0
    for i in range(L):
        d = np.array([1.0, sector.a_signs[i] * ta])
        bi = sector.b_signs[i]
        bond = np.array([[math.exp(x * bi), math.exp(-x * bi)], [math.exp(-x * bi), math.exp(x * bi)]])
        prod = prod @ (d[:, None] * bond)
        s = float(np.max(np.abs(prod)))
        if s == 0.0:
            return 0.0, -math.inf
        prod /= s
        log_scale += math.log(s)
    tr = float(np.trace(prod))
    if tr == 0.0:
        return 0.0, -math.inf
    return math.copysign(1.0, tr), log_scale + math.log(abs(tr))


def eval_1d_transfer(L: int, params: FieldParams, sector: IsingSector) -> float:
    """Raw ring value; overflows to +-inf where ``transfer_log`` stays finite."""
    return _signed_exp(*transfer_log(L, params, sector))


def table_1d_transfer(L: int, params: FieldParams) -> SectorTable:
    """Raw transfer-matrix value for every sector of the 2d boundary ring."""
    k = 2 * L
    check_table_size(k)
    logs = np.full(1 << k, -np.inf)
    signs = np.zeros(1 << k)
    for mask in range(1 << k):
        signs[mask], logs[mask] = transfer_log(L, params, IsingSector.from_mask(mask, L, L))
    top = np.max(logs)
    vals = signs * np.exp(logs - top)
    return SectorTable(k, vals, 2 * L, "negativity")


# -- enumeration -------------------------------------------------------------------------


def _spin_masks(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def _cell_masks(boundary: Sequence[Sequence[int]]) -> list[int]:
    out = []
    for cells in boundary:
        m = 0
        for c in cells:
            m ^= 1 << c
        out.append(m)
    return out


def _parity_sign(x: np.ndarray) -> np.ndarray:
    return 1.0 - 2.0 * (np.bitwise_count(x) & 1)


def enumerate_log(n_spins: int, boundary, params: FieldParams, sector: IsingSector) -> tuple[float, float]:
    """``(sign, log|value|)`` of the classical sum by brute-force enumeration."""
    if not params.finite:
        raise ModelError("enumeration needs finite couplings")
    _check_sector(sector, n_spins, len(boundary))
    tau = _spin_masks(n_spins)
    expo = -params.k_a * np.bitwise_count(tau).astype(np.float64)
    for b, pm in zip(sector.b_signs, _cell_masks(boundary)):
        expo = expo + params.beta_lambda_b * b * _parity_sign(tau & pm)
    ins = _parity_sign(tau & sector.a_mask)
    top = float(np.max(expo))
    total = float(np.sum(ins * np.exp(expo - top)))
    if total == 0.0:
        return 0.0, -math.inf
    return math.copysign(1.0, total), top + math.log(abs(total))


def _signed_exp(sign: float, logv: float) -> float:
    if sign == 0.0:
        return 0.0
    if logv > _LOG_MAX:
        return sign * math.inf
    return sign * math.exp(logv)


def eval_1d_enum(L: int, params: FieldParams, sector: IsingSector) -> float:
    bnd = LatticeGeometry.periodic_cube(1, L).boundary(1)
    return _signed_exp(*enumerate_log(L, bnd, params, sector))


def eval_2d_enum(L: int, params: FieldParams, sector: IsingSector) -> float:
    """Square-lattice sum over L^2 spins (periodic), guarded at 2^16 terms."""
    if L * L > MAX_2D_SPINS:
        raise GuardError(f"2D enumeration over {L * L} spins exceeds 2^{MAX_2D_SPINS}; use a limit branch")
    bnd = LatticeGeometry.periodic_cube(2, L).boundary(1)
    return _signed_exp(*enumerate_log(L * L, bnd, params, sector))


def _gauge_boundary(geometry: LatticeGeometry) -> list[list[int]]:
    if geometry.dimension != 3:
        raise ModelError("gauge-theory evaluation needs a 3-dimensional geometry")
    n_links = geometry.count(1)
    if n_links > MAX_GAUGE_LINKS:
        raise GuardError(f"{n_links} links exceeds the enumeration limit of {MAX_GAUGE_LINKS}; use a fragment")
    return geometry.boundary(2)


def eval_3d_gauge_enum(geometry: LatticeGeometry, params: FieldParams, sector: IsingSector) -> float:
    """Ising gauge theory with matter: link spins, plaquette couplings."""
    bnd = _gauge_boundary(geometry)
    return _signed_exp(*enumerate_log(geometry.count(1), bnd, params, sector))


def enumeration_table(n_spins: int, boundary, params: FieldParams) -> SectorTable:
    """Raw classical sum for all sectors at once.

    For a fixed B configuration the insertion sum over tau is a character sum,
    i.e. a Walsh-Hadamard transform over the tau bitmask.
    """
    if not params.finite:
        raise ModelError("enumeration needs finite couplings")
    n_b = len(boundary)
    k = n_spins + n_b
    if k > MAX_ENUM_K:
        raise GuardError(f"enumeration table with k={k} exceeds the limit of {MAX_ENUM_K}")
    tau = _spin_masks(n_spins)
    u = np.stack([_parity_sign(tau & pm) for pm in _cell_masks(boundary)], axis=1) if n_b else np.zeros((tau.size, 0))
    bsign = np.stack([_parity_sign(_spin_masks(n_b) & (1 << p)) for p in range(n_b)], axis=1) if n_b else np.zeros((1, 0))
    expo = params.beta_lambda_b * (bsign @ u.T) - params.k_a * np.bitwise_count(tau)[None, :]
    weights = np.exp(expo - np.max(expo))
    vals = fwht(weights).reshape(-1)
    return SectorTable(k, vals, k, "negativity")


def table_2d_enum(L: int, params: FieldParams) -> SectorTable:
    if L * L > MAX_2D_SPINS:
        raise GuardError(f"2D enumeration over {L * L} spins exceeds 2^{MAX_2D_SPINS}")
    bnd = LatticeGeometry.periodic_cube(2, L).boundary(1)
    return enumeration_table(L * L, bnd, params)


def table_3d_gauge(geometry: LatticeGeometry, params: FieldParams) -> SectorTable:
    bnd = _gauge_boundary(geometry)
    return enumeration_table(geometry.count(1), bnd, params)


def ising_table(bm: BoundaryModel, params: FieldParams) -> SectorTable:
    """Raw table for a boundary model through its matching representation."""
    if bm.dimension == 2:
        raw = table_1d_transfer(bm.L, params)
    elif bm.dimension == 3:
        raw = table_2d_enum(bm.L, params)
    else:
        raw = table_3d_gauge(bm.geometry, params)
    return SectorTable(raw.k, raw.values, bm.model.n_qubits, "negativity")


def normalize_table(raw: SectorTable) -> SectorTable:
    """Positive rescaling so that the values sum to ``2**k``."""
    vals = raw.values
    top = float(np.max(np.abs(vals))) if vals.size else 0.0
    if top == 0.0 or not math.isfinite(top):
        raise ModelError("cannot normalize a table with zero or non-finite entries")
    scaled = vals / top
    total = float(np.sum(scaled))
    if not total > 0.0:
        raise ModelError(f"table sum is {total * top:g}; not a valid negativity spectrum")
    return raw.with_values(scaled * (float(1 << raw.k) / total))


# -- infinite-coupling branches ---------------------------------------------------------------


def solve_frustration_free(n_sites: int, edges: Sequence[tuple[int, int]], signs: Sequence[int]):
    """Spins with ``sign_e * tau_i * tau_j = 1`` on every edge, or ``None``.

    A BFS spanning forest fixes the spins (first site of each component +1);
    the remaining edges are then loop-consistency checks.
    """
    adj = [[] for _ in range(n_sites)]
    for (i, j), s in zip(edges, signs):
        adj[i].append((j, s))
        adj[j].append((i, s))
    tau = [0] * n_sites
    for root in range(n_sites):
        if tau[root]:
            continue
        tau[root] = 1
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j, s in adj[i]:
                if tau[j] == 0:
                    tau[j] = s * tau[i]
                    queue.append(j)
    for (i, j), s in zip(edges, signs):
        if s * tau[i] * tau[j] != 1:
            return None
    return np.array(tau, dtype=np.int64)


def _ring_edges(L: int) -> list[tuple[int, int]]:
    return [(i, (i + 1) % L) for i in range(L)]


def negativity_2d_infinite_b(L: int, k_a: float, sector: IsingSector) -> float:
    """Two-configuration spectrum of the ring at infinite ``beta_lambda_B``."""
    _check_sector(sector, L, L)
    tau = solve_frustration_free(L, _ring_edges(L), sector.b_signs)
    if tau is None:
        return 0.0
    a = np.array(sector.a_signs)
    n_minus = int(np.sum(tau < 0))
    insertion = float(np.prod(np.where(a < 0, tau, 1)))
    pa = float(np.prod(a))
    return 2.0**L * insertion * (math.exp(-k_a * n_minus) + pa * math.exp(-k_a * (L - n_minus)))


def closed_form_2d_infinite_b(L: int, k_a: float, bineg_sector: IsingSector) -> float:
    """Binegativity value of the 2d ring at infinite ``beta_lambda_B``.

    ``2**(3L) |exp(-K_A n_-) + (prod a) exp(-K_A n_+)|`` with ``tau`` solving
    ``b_i tau_i tau_{i+1} = 1``; a frustrated ring (``prod b = -1``) gives 0.
    """
    _check_sector(bineg_sector, L, L)
    if k_a < 0:
        raise ModelError("K_A must be non-negative")
    tau = solve_frustration_free(L, _ring_edges(L), bineg_sector.b_signs)
    if tau is None:
        return 0.0
    n_minus = int(np.sum(tau < 0))
    pa = float(np.prod(bineg_sector.a_signs))
    return 2.0 ** (3 * L) * abs(math.exp(-k_a * n_minus) + pa * math.exp(-k_a * (L - n_minus)))


def closed_form_2d_table(L: int, k_a: float) -> SectorTable:
    k = 2 * L
    check_table_size(k)
    vals = [closed_form_2d_infinite_b(L, k_a, IsingSector.from_mask(m, L, L)) for m in range(1 << k)]
    return SectorTable(k, vals, 2 * L, "binegativity")


def _matter_free_sum(n_spins: int, boundary, t_b: float, sector: IsingSector) -> float:
    k = n_spins + len(boundary)
    tau = _spin_masks(n_spins)
    w = np.ones(tau.size)
    for b, pm in zip(sector.b_signs, _cell_masks(boundary)):
        w = w * (1.0 + t_b * b * _parity_sign(tau & pm))
    ins = _parity_sign(tau & sector.a_mask)
    return 2.0**k * abs(float(np.sum(ins * w)))


def _beta_to_t(beta_lambda_b: float) -> float:
    x = _coupling(beta_lambda_b)
    if not x >= 0.0:
        raise ModelError("beta*lambda_B must be non-negative")
    return 1.0 if math.isinf(x) else math.tanh(x)


def closed_form_3d_point_forbidden(L: int, beta_lambda_b: float, bineg_sector: IsingSector) -> float:
    """Binegativity of the 3d boundary at infinite ``beta_lambda_A``.

    ``2**k |sum_tau prod_i tau_i^((1-a_i)/2) prod_<ij> (1 + tanh(beta_lambda_B) b_ij tau_i tau_j)|``,
    i.e. the absolute 2D Ising correlation in per-bond normalization.
    """
    if L * L > MAX_2D_SPINS:
        raise GuardError(f"2D enumeration over {L * L} spins exceeds 2^{MAX_2D_SPINS}")
    bnd = LatticeGeometry.periodic_cube(2, L).boundary(1)
    _check_sector(bineg_sector, L * L, len(bnd))
    return _matter_free_sum(L * L, bnd, _beta_to_t(beta_lambda_b), bineg_sector)


def closed_form_4d_matter_free(geometry: LatticeGeometry, beta_lambda_b: float, bineg_sector: IsingSector) -> float:
    """Binegativity of the 4d boundary at infinite ``beta_lambda_A``.

    Same form as the 3d case with link spins and plaquette products; the
    flat-configuration constraint factor is a positive constant folded into
    ``2**k``.
    """
    bnd = _gauge_boundary(geometry)
    _check_sector(bineg_sector, geometry.count(1), len(bnd))
    return _matter_free_sum(geometry.count(1), bnd, _beta_to_t(beta_lambda_b), bineg_sector)


def matter_free_table(n_spins: int, boundary, beta_lambda_b: float) -> SectorTable:
    """All-sector version of the matter-free closed form (3d and 4d)."""
    t_b = _beta_to_t(beta_lambda_b)
    n_b = len(boundary)
    k = n_spins + n_b
    if k > MAX_ENUM_K:
        raise GuardError(f"closed-form table with k={k} exceeds the limit of {MAX_ENUM_K}")
    tau = _spin_masks(n_spins)
    bconf = _spin_masks(n_b)
    w = np.ones((bconf.size, tau.size))
    for p, pm in enumerate(_cell_masks(boundary)):
        bp = _parity_sign(bconf & (1 << p))
        w *= 1.0 + t_b * bp[:, None] * _parity_sign(tau & pm)[None, :]
    vals = 2.0**k * np.abs(fwht(w)).reshape(-1)
    return SectorTable(k, vals, k, "binegativity")


def closed_form_table(bm: BoundaryModel, beta_lambda_b: float = None, k_a: float = None) -> SectorTable:
    """Closed-form binegativity table for a boundary model.

    2d: infinite ``beta_lambda_B`` branch (needs ``k_a``).
    3d/4d: infinite ``beta_lambda_A`` branch (needs ``beta_lambda_b``).
    """
    if bm.dimension == 2:
        raw = closed_form_2d_table(bm.L, k_a)
    else:
        if bm.dimension == 4:
            _gauge_boundary(bm.geometry)
        raw = matter_free_table(bm.n_a, bm.boundary, beta_lambda_b)
    return SectorTable(raw.k, raw.values, bm.model.n_qubits, "binegativity")
