"""Operator and superoperator algebra on small Hilbert spaces.

Operators are plain ``(d, d)`` complex numpy arrays. Superoperators are
``(d**2, d**2)`` arrays acting on column-stacked vectorizations, so the map
``X -> A @ X @ B`` has matrix ``kron(B.T, A)``. This convention is global and
is never switched anywhere in the package.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

MIN_DIM = 2
MAX_DIM = 8

STRUCT_TOL = 1e-12
RANDOM_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)

NAMED_OPERATORS = {
    "identity": IDENTITY2,
    "sigma_x": SIGMA_X,
    "sigma_y": SIGMA_Y,
    "sigma_z": SIGMA_Z,
    "sigma_plus": SIGMA_PLUS,
    "sigma_minus": SIGMA_MINUS,
}


class DimensionError(ValueError):
    """Operand dimensions are inconsistent or outside the supported range."""


def as_operator(a, dim: int | None = None) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {a.shape[0]}")
    return a


def superop_dim(L: np.ndarray) -> int:
    """Hilbert-space dimension ``d`` of a ``(d**2, d**2)`` superoperator."""
    L = np.asarray(L)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise DimensionError(f"expected a square superoperator, got shape {L.shape}")
    d = int(round(np.sqrt(L.shape[0])))
    if d * d != L.shape[0]:
        raise DimensionError(f"superoperator size {L.shape[0]} is not a perfect square")
    return d


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def vec(x: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(x).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    return v.reshape((d, d), order="F")


def apply(L: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Apply superoperator ``L`` to operator ``x``."""
    d = superop_dim(L)
    x = as_operator(x, d)
    return unvec(L @ vec(x), d)


def apply_batch(L: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Apply ``L`` to a stack of operators with shape ``(n, d, d)``."""
    d = superop_dim(L)
    xs = np.asarray(xs, dtype=complex)
    # row-major reshape of the transposed matrices gives column stacking
    flat = np.swapaxes(xs, -1, -2).reshape(xs.shape[0], d * d)
    out = flat @ L.T
    return np.swapaxes(out.reshape(xs.shape[0], d, d), -1, -2)


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt product ``Tr(a^dagger b)``."""
    a = as_operator(a)
    b = as_operator(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def traceless_part(a: np.ndarray) -> np.ndarray:
    a = as_operator(a)
    d = a.shape[0]
    return a - np.trace(a) / d * np.eye(d)


def is_hermitian(a: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    a = np.asarray(a)
    return bool(np.max(np.abs(a - dag(a)), initial=0.0) <= tol)


class BasisKind(str, Enum):
    ELEMENTARY = "elementary"
    GELL_MANN = "gell_mann"


@dataclass(frozen=True)
class OperatorBasis:
    """Hilbert-Schmidt orthonormal operator basis with ``d**2`` elements.

    For the Gell-Mann kind, element 0 is ``identity / sqrt(d)`` and the
    remaining elements are Hermitian and traceless.
    """

    dim: int
    elements: np.ndarray
    kind: BasisKind

    def __len__(self) -> int:
        return self.elements.shape[0]

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def gram(self) -> np.ndarray:
        e = self.elements.reshape(len(self), -1)
        return np.conj(e) @ e.T

    def coefficients(self, x: np.ndarray) -> np.ndarray:
        """Expansion coefficients ``Tr(F_a^dagger x)``."""
        x = as_operator(x, self.dim)
        return np.einsum("aij,ij->a", np.conj(self.elements), x)

    def reconstruct(self, coeffs: np.ndarray) -> np.ndarray:
        return np.einsum("a,aij->ij", coeffs, self.elements)

    def traceless(self) -> np.ndarray:
        """The Hermitian traceless sub-basis (Gell-Mann kind only)."""
        if self.kind is not BasisKind.GELL_MANN:
            raise ValueError("traceless sub-basis is only defined for the Gell-Mann basis")
        return self.elements[1:]


def _check_dim(d: int) -> None:
    if not isinstance(d, (int, np.integer)) or not MIN_DIM <= d <= MAX_DIM:
        raise DimensionError(f"unsupported dimension {d!r}; supported range is {MIN_DIM}..{MAX_DIM}")


def elementary_units(d: int) -> np.ndarray:
    """All ``|j><k|`` with index ``j * d + k``."""
    e = np.zeros((d * d, d, d), dtype=complex)
    for j in range(d):
        for k in range(d):
            e[j * d + k, j, k] = 1.0
    return e


def gell_mann_matrices(d: int) -> np.ndarray:
    """Normalized generalized Gell-Mann matrices, identity first.

    Ordering: identity, then for every pair ``j < k`` the symmetric and the
    antisymmetric element, then the ``d - 1`` diagonal ones. For ``d = 2``
    this reproduces the Pauli matrices in x, y, z order.
    """
    mats = [np.eye(d, dtype=complex) / np.sqrt(d)]
    r2 = np.sqrt(2.0)
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1 / r2
            a = np.zeros((d, d), dtype=complex)
            a[j, k] = -1j / r2
            a[k, j] = 1j / r2
            mats.extend([s, a])
    for l in range(1, d):
        diag = np.zeros(d, dtype=complex)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.diag(diag) / np.sqrt(l * (l + 1)))
    return np.array(mats)


def make_basis(d: int, kind: BasisKind | str = BasisKind.GELL_MANN) -> OperatorBasis:
    _check_dim(d)
    kind = BasisKind(kind)
    if kind is BasisKind.ELEMENTARY:
        elements = elementary_units(d)
    else:
        elements = gell_mann_matrices(d)
    elements.setflags(write=False)
    return OperatorBasis(dim=d, elements=elements, kind=kind)


def superop_from_sandwich(terms: Iterable[tuple[complex, np.ndarray, np.ndarray]]) -> np.ndarray:
    """Matrix of ``X -> sum_i w_i * left_i @ X @ right_i``."""
    terms = list(terms)
    if not terms:
        raise ValueError("at least one sandwich term is required")
    d = as_operator(terms[0][1]).shape[0]
    out = np.zeros((d * d, d * d), dtype=complex)
    for w, left, right in terms:
        left = as_operator(left, d)
        right = as_operator(right, d)
        out += w * np.kron(right.T, left)
    return out


def commutator_superop(h: np.ndarray) -> np.ndarray:
    """Matrix of ``X -> -i [h, X]``."""
    h = as_operator(h)
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


def dissipator_superop(op: np.ndarray, rate: float = 1.0) -> np.ndarray:
    """Matrix of ``X -> rate * (op X op^dag - 1/2 {op^dag op, X})``."""
    op = as_operator(op)
    eye = np.eye(op.shape[0])
    ldl = dag(op) @ op
    return rate * (np.kron(op.conj(), op) - 0.5 * np.kron(eye, ldl) - 0.5 * np.kron(ldl.T, eye))


def lindblad_generator(h: np.ndarray, jumps: Sequence[tuple[float, np.ndarray]] = ()) -> np.ndarray:
    """Generator ``-i[h, .] + sum_i rate_i D[L_i]``; rates may be negative."""
    h = as_operator(h)
    if not is_hermitian(h):
        raise ValueError("Hamiltonian must be Hermitian")
    L = commutator_superop(h)
    for rate, op in jumps:
        if np.iscomplexobj(rate) and abs(np.imag(rate)) > 0:
            raise ValueError("jump rates must be real")
        L = L + dissipator_superop(as_operator(op, h.shape[0]), float(np.real(rate)))
    return L


@dataclass(frozen=True)
class HTPCheck:
    hermiticity_preserving: bool
    trace_annihilating: bool
    hermiticity_residual: float
    trace_residual: float

    def __bool__(self) -> bool:
        return self.hermiticity_preserving and self.trace_annihilating


def check_htp(L: np.ndarray, tol: float = RANDOM_TOL, n_samples: int = 20, seed: int = 0) -> HTPCheck:
    """Probe Hermiticity preservation and trace annihilation on random inputs.

    Residuals are absolute, measured on standard-normal random operators from
    a fixed seed so the check is reproducible.
    """
    d = superop_dim(L)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_samples, d, d)) + 1j * rng.standard_normal((n_samples, d, d))
    herm = (z + dag(z)) / 2
    out_h = apply_batch(L, herm)
    herm_res = float(np.max(np.abs(out_h - dag(out_h))))
    out_z = apply_batch(L, z)
    tr_res = float(np.max(np.abs(np.trace(out_z, axis1=1, axis2=2))))
    return HTPCheck(herm_res <= tol, tr_res <= tol, herm_res, tr_res)


def random_hermitian(d: int, rng: np.random.Generator, traceless: bool = False) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (z + dag(z)) / 2
    return traceless_part(h) if traceless else h


def random_htp_generator(d: int, rng: np.random.Generator) -> np.ndarray:
    """Random Hermiticity-preserving, trace-annihilating generator.

    Built from a random Hermitian Hamiltonian and a random Hermitian (not
    necessarily positive) coefficient matrix on the traceless Gell-Mann
    sub-basis, which spans every such generator.
    """
    basis = gell_mann_matrices(d)[1:]
    h = random_hermitian(d, rng)
    a = random_hermitian(d * d - 1, rng)
    L = commutator_superop(h)
    eye = np.eye(d)
    for i, fi in enumerate(basis):
        for j, fj in enumerate(basis):
            if a[i, j] == 0:
                continue
            fjd_fi = dag(fj) @ fi
            L = L + a[i, j] * (
                np.kron(fj.conj(), fi) - 0.5 * np.kron(eye, fjd_fi) - 0.5 * np.kron(fjd_fi.T, eye)
            )
    return L


# -- JSON wire format -------------------------------------------------------

def operator_to_json(a: np.ndarray) -> dict:
    a = as_operator(a)
    flat = a.reshape(-1)
    return {"dim": int(a.shape[0]), "re": flat.real.tolist(), "im": flat.imag.tolist()}


def superop_to_json(L: np.ndarray) -> dict:
    d = superop_dim(L)
    flat = np.asarray(L, dtype=complex).reshape(-1)
    return {"dim": d, "vec": "column", "re": flat.real.tolist(), "im": flat.imag.tolist()}


def _flat_from_json(obj: dict) -> tuple[int, np.ndarray]:
    try:
        d = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed operator JSON: {exc}") from exc
    if re.shape != im.shape:
        raise ValueError("re and im arrays differ in length")
    return d, re + 1j * im


def operator_from_json(obj) -> np.ndarray:
    if isinstance(obj, str):
        try:
            return NAMED_OPERATORS[obj].copy()
        except KeyError:
            raise ValueError(f"unknown named operator {obj!r}") from None
    d, flat = _flat_from_json(obj)
    if flat.size != d * d:
        raise ValueError(f"operator JSON of dim {d} needs {d * d} entries, got {flat.size}")
    return flat.reshape(d, d)


def superop_from_json(obj: dict) -> np.ndarray:
    d, flat = _flat_from_json(obj)
    if flat.size != d**4:
        raise ValueError(f"superoperator JSON of dim {d} needs {d ** 4} entries, got {flat.size}")
    if obj.get("vec", "column") != "column":
        raise ValueError("only column-stacking vectorization is supported")
    return flat.reshape(d * d, d * d)
