"""Dense-matrix ground truth for small models (N <= 12 qubits).

Y-free Paulis are real symmetric, so every operator here is real symmetric and
a symmetric eigensolver suffices. Qubit 0 is the leftmost Kronecker factor.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import GuardError, ModelError, VerificationMismatch
from .pauli import Bipartition, PauliOperator, StabilizerModel
from .spectrum import entanglement_negativity, model_tables, trace_norm

MAX_DENSE_QUBITS = 12
SYMMETRY_TOL = 1e-12

_I = np.eye(2)
_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def _guard(n: int) -> None:
    if n > MAX_DENSE_QUBITS:
        raise GuardError(f"{n} qubits exceeds the dense-oracle limit of {MAX_DENSE_QUBITS}")


def pauli_matrix(p: PauliOperator) -> np.ndarray:
    _guard(p.n_qubits)
    out = np.ones((1, 1))
    for q in range(p.n_qubits):
        if p.x_mask >> q & 1:
            f = _X
        elif p.z_mask >> q & 1:
            f = _Z
        else:
            f = _I
        out = np.kron(out, f)
    return out


def _signed_columns(p: PauliOperator) -> tuple[np.ndarray, np.ndarray]:
    """Row index and sign of the single nonzero entry in each column of p."""
    P = pauli_matrix(p)
    rows = np.argmax(np.abs(P), axis=0)
    return rows, P[rows, np.arange(P.shape[1])]


def gibbs_dense(m: StabilizerModel) -> np.ndarray:
    """``2**-N prod_i (1 + t_i theta_i)``.

    Each Pauli matrix is a signed permutation, so right-multiplying by
    ``1 + t theta`` is a column gather instead of a full matrix product.
    """
    _guard(m.n_qubits)
    dim = 1 << m.n_qubits
    rho = np.eye(dim)
    for p, t in zip(m.generators, m.couplings):
        rows, signs = _signed_columns(p)
        rho = rho + t * rho[:, rows] * signs
    rho /= dim
    return 0.5 * (rho + rho.T)


def partial_transpose(M: np.ndarray, b: Bipartition) -> np.ndarray:
    n = b.n_qubits
    dim = 1 << n
    if M.shape != (dim, dim):
        raise ModelError(f"matrix shape {M.shape} does not match {n} qubits")
    axes = list(range(2 * n))
    for q in b.region_a:
        axes[q], axes[n + q] = axes[n + q], axes[q]
    return M.reshape((2,) * (2 * n)).transpose(axes).reshape(dim, dim)


def _check_symmetric(M: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if np.max(np.abs(M - M.T)) > SYMMETRY_TOL * scale:
        raise ModelError("matrix is not symmetric")


def matrix_abs(M: np.ndarray) -> np.ndarray:
    _check_symmetric(M)
    w, v = np.linalg.eigh(M)
    out = (v * np.abs(w)) @ v.T
    return 0.5 * (out + out.T)


def eigvalsh(M: np.ndarray) -> np.ndarray:
    _check_symmetric(M)
    return np.linalg.eigvalsh(M)


@dataclass
class VerificationRecord:
    n_qubits: int
    k: int
    tolerance: float
    deviations: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    passed: bool = True
    failing: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def verify_model(m: StabilizerModel, tolerance: float = 1e-10, raise_on_mismatch: bool = True) -> VerificationRecord:
    """Compare every engine quantity of ``m`` against dense linear algebra."""
    _guard(m.n_qubits)
    f_t, _, b = model_tables(m)
    rho = gibbs_dense(m)
    pt = partial_transpose(rho, m.bipartition)
    _check_symmetric(pt)
    ev_pt, vecs = np.linalg.eigh(pt)
    abs_pt = (vecs * np.abs(ev_pt)) @ vecs.T
    bineg = partial_transpose(0.5 * (abs_pt + abs_pt.T), m.bipartition)

    ev_bineg = eigvalsh(bineg)
    dense_tn = float(np.sum(np.abs(ev_pt)))
    engine_tn = trace_norm(f_t)

    rec = VerificationRecord(n_qubits=m.n_qubits, k=m.k, tolerance=tolerance)
    rec.deviations = {
        "negativity_spectrum": float(np.max(np.abs(ev_pt - f_t.eigenvalues()))),
        "binegativity_spectrum": float(np.max(np.abs(ev_bineg - b.eigenvalues()))),
        "trace_norm": float(abs(dense_tn - engine_tn)),
        "entanglement_negativity": float(abs(np.log2(dense_tn) - entanglement_negativity(f_t))),
        "lambda_min": abs(float(ev_bineg[0]) - float(np.min(b.values)) / b.scale),
    }
    rec.values = {
        "trace_norm": float(engine_tn),
        "e_n_bits": float(entanglement_negativity(f_t)),
        "lambda_min": float(np.min(b.values)) / b.scale,
        "dense_trace_norm": dense_tn,
        "dense_lambda_min": float(ev_bineg[0]),
    }
    rec.failing = [q for q, d in rec.deviations.items() if not d <= tolerance]
    rec.passed = not rec.failing
    if raise_on_mismatch and rec.failing:
        q = rec.failing[0]
        raise VerificationMismatch(q, rec.deviations[q], tolerance, rec)
    return rec
