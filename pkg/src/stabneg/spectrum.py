"""Negativity and binegativity sector tables for stabilizer Gibbs states.

Normalization used throughout: for a model with ``N`` qubits and ``k``
independent generators, a negativity table ``f`` holds
``f(theta) = sum_s psi(s) prod_i (t_i theta_i)^s_i``. The corresponding
eigenvalue of the partial transpose is ``f(theta) / 2**N`` with multiplicity
``2**(N - k)``. A binegativity table ``b`` holds
``b(g) = sum_theta |f_t(theta * g)| f_1(theta)`` and maps to eigenvalues
``b(g) / 2**(N + k)`` with the same multiplicity.

Sector ``mask`` has bit ``i`` set when the ``i``-th sign is ``-1``; sign-wise
products of sectors are XORs of masks.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GuardError, ModelError
from .pauli import CommutationMatrix, StabilizerModel, classify_generators, commutation_matrix

MAX_K = 26
DEFAULT_EPS = 1e-9
SCHEMA_VERSION = 1

_NAIVE_BLOCK = 1 << 22


def check_table_size(k: int) -> None:
    if k > MAX_K:
        raise GuardError(
            f"k={k} sector labels exceed the full-table limit of {MAX_K}; "
            "use a fragment or an infinite-coupling closed form instead"
        )


@dataclass(frozen=True)
class SectorTable:
    """``2**k`` real values indexed by sign-sector bitmask.

    ``kind`` is ``"negativity"`` or ``"binegativity"`` and fixes how values
    map to physical eigenvalues.
    """

    k: int
    values: np.ndarray
    n_qubits: int
    kind: str = "negativity"

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.shape != (1 << self.k,):
            raise ModelError(f"table for k={self.k} needs {1 << self.k} values, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def scale(self) -> float:
        """Divisor taking a table value to a physical eigenvalue."""
        bits = self.n_qubits + (self.k if self.kind == "binegativity" else 0)
        return 2.0**bits

    @property
    def multiplicity(self) -> int:
        return 1 << (self.n_qubits - self.k)

    def physical(self) -> np.ndarray:
        return self.values / self.scale

    def eigenvalues(self) -> np.ndarray:
        """Sorted physical eigenvalue multiset (each sector repeated)."""
        return np.sort(np.repeat(self.physical(), self.multiplicity))

    def with_values(self, values) -> "SectorTable":
        return SectorTable(self.k, values, self.n_qubits, self.kind)


# -- sign function and weights -------------------------------------------------


def sign_psi(s: int, c: CommutationMatrix) -> int:
    """``(-1) ** sum_{i<j} s_i C_ij s_j`` for the sector bitmask ``s``."""
    if s < 0 or s >> c.k:
        raise ModelError(f"bitmask {s} does not fit k={c.k}")
    parity = 0
    for i, low in enumerate(c.lower_masks()):
        if s >> i & 1:
            parity ^= (s & low).bit_count() & 1
    return -1 if parity else 1


def psi_table(c: CommutationMatrix) -> np.ndarray:
    """``sign_psi`` for every bitmask, built by doubling over the top bit."""
    check_table_size(c.k)
    par = np.zeros(1, dtype=np.uint8)
    for i, low in enumerate(c.lower_masks()):
        lower = np.arange(1 << i, dtype=np.int64)
        extra = (np.bitwise_count(lower & low) & 1).astype(np.uint8)
        par = np.concatenate([par, par ^ extra])
    return 1 - 2 * par.astype(np.int8)


def _coupling_products(t: np.ndarray) -> np.ndarray:
    prod = np.ones(1)
    for ti in t:
        prod = np.concatenate([prod, prod * ti])
    return prod


def _as_couplings(t, k: int) -> np.ndarray:
    arr = np.asarray(t, dtype=np.float64).reshape(-1)
    if arr.shape != (k,):
        raise ModelError(f"expected {k} couplings, got {arr.shape[0]}")
    if np.any(np.abs(arr) > 1.0) or np.any(np.isnan(arr)):
        raise ModelError("couplings must satisfy |t| <= 1")
    return arr


# -- Walsh-Hadamard -------------------------------------------------------------


def fwht(values) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis.

    The trailing length must be a power of two; applying it twice multiplies
    by that length.
    """
    a = np.array(values, dtype=np.float64)
    n = a.shape[-1]
    if n < 1 or n & (n - 1):
        raise ModelError(f"length {n} is not a power of two")
    lead = a.shape[:-1]
    h = 1
    while h < n:
        a = a.reshape(lead + (n // (2 * h), 2, h))
        lo = a[..., 0, :]
        hi = a[..., 1, :]
        a = np.stack((lo + hi, lo - hi), axis=-2)
        h *= 2
    return a.reshape(lead + (n,))


def _parity_block(rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    return 1.0 - 2.0 * (np.bitwise_count(rows[:, None] & cols[None, :]) & 1)


# -- spectra ------------------------------------------------------------------------


def negativity_spectrum(c: CommutationMatrix, t, n_qubits: int, method: str = "fwht") -> SectorTable:
    """Negativity table for restricted commutation ``c`` and couplings ``t``.

    ``method="naive"`` evaluates the double sum directly in O(4**k).
    """
    k = c.k
    check_table_size(k)
    t = _as_couplings(t, k)
    w = psi_table(c) * _coupling_products(t)
    if method == "fwht":
        f = fwht(w)
    elif method == "naive":
        idx = np.arange(1 << k, dtype=np.int64)
        block = max(1, _NAIVE_BLOCK >> k)
        f = np.empty(1 << k)
        for start in range(0, 1 << k, block):
            theta = idx[start : start + block]
            f[start : start + block] = np.sum(_parity_block(theta, idx) * w[None, :], axis=1)
    else:
        raise ValueError(f"unknown method {method!r}")
    return SectorTable(k, f, n_qubits, "negativity")


def _check_pair(f_t: SectorTable, f_1: SectorTable) -> None:
    if f_t.k != f_1.k or f_t.n_qubits != f_1.n_qubits:
        raise ModelError(
            f"table shapes differ: (k={f_t.k}, N={f_t.n_qubits}) vs (k={f_1.k}, N={f_1.n_qubits})"
        )
    check_table_size(f_t.k)


def binegativity_spectrum(f_t: SectorTable, f_1: SectorTable) -> SectorTable:
    """``b(g) = sum_theta |f_t(theta*g)| f_1(theta)`` by the direct double loop."""
    _check_pair(f_t, f_1)
    k = f_t.k
    a = np.abs(f_t.values)
    c1 = f_1.values
    idx = np.arange(1 << k, dtype=np.int64)
    block = max(1, _NAIVE_BLOCK >> k)
    b = np.empty(1 << k)
    for start in range(0, 1 << k, block):
        g = idx[start : start + block]
        b[start : start + block] = np.sum(a[idx[None, :] ^ g[:, None]] * c1[None, :], axis=1)
    return SectorTable(k, b, f_t.n_qubits, "binegativity")


def binegativity_fwht(f_t: SectorTable, f_1: SectorTable) -> SectorTable:
    """Same correlation as :func:`binegativity_spectrum` in O(k 2**k)."""
    _check_pair(f_t, f_1)
    prod = fwht(np.abs(f_t.values)) * fwht(f_1.values)
    b = fwht(prod) / float(1 << f_t.k)
    return SectorTable(f_t.k, b, f_t.n_qubits, "binegativity")


# -- scalar quantities -----------------------------------------------------------------


def log_in_base(x: float, base="2") -> float:
    base = str(base)
    if base == "2":
        return math.log2(x)
    if base == "e":
        return math.log(x)
    raise ValueError(f"log base must be '2' or 'e', got {base!r}")


def trace_norm(f_t: SectorTable) -> float:
    return float(np.sum(np.abs(f_t.values))) / float(1 << f_t.k)


def entanglement_negativity(f_t: SectorTable, base="2") -> float:
    return log_in_base(trace_norm(f_t), base)


@dataclass(frozen=True)
class PptReport:
    e_n: float
    trace_norm: float
    lambda_min: float
    z_rho: float
    log_z: float
    cost_equals_negativity: bool
    tolerance_used: float
    log_base: str = "2"

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "log_base": self.log_base,
            "e_n": self.e_n,
            "trace_norm": self.trace_norm,
            "lambda_min": self.lambda_min,
            "z_rho": self.z_rho,
            "log_z": self.log_z,
            "cost_equals_negativity": self.cost_equals_negativity,
            "tolerance_used": self.tolerance_used,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def is_nonnegative(b: SectorTable, eps: float = DEFAULT_EPS) -> bool:
    """A sector counts as negative only below ``-eps * max|b|``."""
    vals = b.values
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    return bool(np.min(vals) >= -eps * scale)


def ppt_report(f_t: SectorTable, b: SectorTable, tolerance: float = DEFAULT_EPS, base="2") -> PptReport:
    """Negativity, the binegativity minimum and the PPT-cost upper bound."""
    if f_t.k != b.k or f_t.n_qubits != b.n_qubits:
        raise ModelError("negativity and binegativity tables are inconsistent")
    tn = trace_norm(f_t)
    lam = float(np.min(b.values)) / b.scale
    dim = 2.0**f_t.n_qubits
    z = tn + dim * max(0.0, -lam)
    e_n, log_z = log_in_base(tn, base), log_in_base(z, base)
    # A sector inside the relative band still moves log Z; the flag also
    # requires the two bounds to coincide within the tolerance.
    equal = is_nonnegative(b, tolerance) and abs(log_z - e_n) <= tolerance
    return PptReport(
        e_n=e_n,
        trace_norm=tn,
        lambda_min=lam,
        z_rho=z,
        log_z=log_z,
        cost_equals_negativity=equal,
        tolerance_used=tolerance,
        log_base=str(base),
    )


# -- model-level helpers ---------------------------------------------------------------------


def model_tables(m: StabilizerModel, method: str = "fwht") -> tuple[SectorTable, SectorTable, SectorTable]:
    """Return ``(f_t, f_1, b)`` for a model."""
    c = commutation_matrix(m)
    check_table_size(c.k)
    f_t = negativity_spectrum(c, m.couplings, m.n_qubits)
    f_1 = negativity_spectrum(c, np.ones(c.k), m.n_qubits)
    if method == "fwht":
        b = binegativity_fwht(f_t, f_1)
    else:
        b = binegativity_spectrum(f_t, f_1)
    return f_t, f_1, b


def analyze(m: StabilizerModel, tolerance: float = DEFAULT_EPS, base="2") -> PptReport:
    f_t, _, b = model_tables(m)
    return ppt_report(f_t, b, tolerance, base)


def _scatter(sub: np.ndarray, positions) -> np.ndarray:
    out = np.zeros_like(sub)
    for j, pos in enumerate(positions):
        out |= ((sub >> j) & 1) << pos
    return out


@dataclass(frozen=True)
class BoundaryReduction:
    """Boundary-only negativity table plus the bulk factor that completes it.

    The full tables factor exactly as
    ``f_t(theta) = prod_bulk (1 + t_i theta_i) * f_boundary(theta_boundary)`` and
    ``b(g) = prod_bulk 2 (1 + t_i g_i) * b_boundary(g_boundary)``; the bulk
    factors are non-negative, so the sign verdict comes from the boundary alone.
    """

    bulk: tuple
    boundary: tuple
    bulk_couplings: tuple
    k_full: int
    table: SectorTable
    binegativity: SectorTable = field(repr=False)

    def nonnegative(self, eps: float = DEFAULT_EPS) -> bool:
        return is_nonnegative(self.binegativity, eps)

    def _bulk_factor(self, per_site) -> np.ndarray:
        fac = np.ones(1)
        for t in self.bulk_couplings:
            plus, minus = per_site(t)
            fac = np.concatenate([fac * plus, fac * minus])
        return fac

    def _expand(self, boundary_values: np.ndarray, per_site) -> np.ndarray:
        fac = self._bulk_factor(per_site)
        full = np.zeros(1 << self.k_full)
        bulk_idx = _scatter(np.arange(fac.size, dtype=np.int64), self.bulk)
        bdy_idx = _scatter(np.arange(boundary_values.size, dtype=np.int64), self.boundary)
        full[bulk_idx[:, None] | bdy_idx[None, :]] = fac[:, None] * boundary_values[None, :]
        return full

    def expand_negativity(self) -> np.ndarray:
        """Full-model negativity table assembled from the boundary table."""
        return self._expand(self.table.values, lambda t: (1.0 + t, 1.0 - t))

    def expand_binegativity(self) -> np.ndarray:
        return self._expand(self.binegativity.values, lambda t: (2.0 * (1.0 + t), 2.0 * (1.0 - t)))


def boundary_reduced_spectrum(m: StabilizerModel) -> BoundaryReduction:
    bulk, boundary = classify_generators(m)
    c = commutation_matrix(m)
    if bulk and np.any(c.bits[bulk, :]):
        raise ModelError("bulk generator anticommutes after restriction")
    cb = c.submatrix(boundary)
    ts = np.asarray(m.couplings)
    f_t = negativity_spectrum(cb, ts[boundary], m.n_qubits)
    f_1 = negativity_spectrum(cb, np.ones(len(boundary)), m.n_qubits)
    b = binegativity_fwht(f_t, f_1)
    return BoundaryReduction(
        bulk=tuple(bulk),
        boundary=tuple(boundary),
        bulk_couplings=tuple(float(ts[i]) for i in bulk),
        k_full=m.k,
        table=f_t,
        binegativity=b,
    )


# -- serialization -------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def table_to_csv(table: SectorTable) -> str:
    buf = io.StringIO()
    buf.write(
        f"# stabneg sector table schema={SCHEMA_VERSION} kind={table.kind} "
        f"k={table.k} n_qubits={table.n_qubits} scale=2^{int(math.log2(table.scale))}\n"
    )
    buf.write("sector,value\n")
    width = max(table.k, 1)
    for mask, v in enumerate(table.values):
        buf.write(f"{mask:0{width}b},{_fmt(v)}\n")
    return buf.getvalue()


def table_from_csv(text: str) -> SectorTable:
    meta = {}
    rows = []
    for line in text.splitlines():
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    key, val = tok.split("=", 1)
                    meta[key] = val
            continue
        if not line or line.startswith("sector"):
            continue
        bits, val = line.split(",")
        rows.append((int(bits, 2), float(val)))
    k = int(meta["k"])
    values = np.zeros(1 << k)
    for mask, v in rows:
        values[mask] = v
    return SectorTable(k, values, int(meta["n_qubits"]), meta.get("kind", "negativity"))


def table_to_dict(table: SectorTable) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": table.kind,
        "k": table.k,
        "n_qubits": table.n_qubits,
        "values": [float(v) for v in table.values],
    }


def table_from_dict(doc: dict) -> SectorTable:
    return SectorTable(int(doc["k"]), doc["values"], int(doc["n_qubits"]), doc.get("kind", "negativity"))
