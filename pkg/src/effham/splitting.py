"""Minimal-dissipation splitting of time-local generators.

Every Hermiticity-preserving, trace-annihilating generator ``L`` is split as
``L = -i[K, .] + D`` where ``K`` is the traceless effective Hamiltonian picked
out by the Haar-averaged scalar product on generators. Several equivalent
routes to ``K`` are provided; they are cross-checked in the test-suite.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .superop import (
    RANDOM_TOL,
    as_operator,
    check_htp,
    commutator_superop,
    dag,
    dissipator_superop,
    elementary_units,
    gell_mann_matrices,
    operator_to_json,
    superop_dim,
    unvec,
    vec,
)

JUMP_THRESHOLD = 1e-12
MC_CHUNK = 10_000


class NotHTPError(ValueError):
    """Input generator is not Hermiticity-preserving and trace-annihilating."""

    def __init__(self, check):
        self.check = check
        super().__init__(
            "generator is not Hermiticity-preserving/trace-annihilating "
            f"(hermiticity residual {check.hermiticity_residual:.3e}, "
            f"trace residual {check.trace_residual:.3e})"
        )


def _require_htp(L: np.ndarray, tol: float | None) -> int:
    d = superop_dim(L)
    if tol is not None:
        chk = check_htp(L, tol=tol)
        if not chk:
            raise NotHTPError(chk)
    return d


def _hermitian_part(a: np.ndarray) -> np.ndarray:
    return (a + dag(a)) / 2


def effective_hamiltonian(L: np.ndarray, tol: float | None = RANDOM_TOL) -> np.ndarray:
    """Effective Hamiltonian from the elementary-unit sum.

    ``K = 1/(2 i d) * sum_jk [ |j><k| , L(|k><j|) ]``. Pass ``tol=None`` to
    skip the HTP validation (used internally on already-checked input).
    """
    d = _require_htp(L, tol)
    L4 = np.asarray(L).reshape(d, d, d, d, order="F")
    # L4[a, b, c, e] = <a| L(|c><e|) |b>; the sum needs c = k, e = j.
    # sum_jk |j><k| L(|k><j|) -> (j, b) entry: sum_k L4[k, b, k, j]
    # sum_jk L(|k><j|) |j><k| -> (a, k) entry: sum_j L4[a, j, k, j]
    left = np.einsum("kbkj->jb", L4)
    right = np.einsum("ajkj->ak", L4)
    k = (left - right) / (2j * d)
    return _hermitian_part(k)


def effective_hamiltonian_su(L: np.ndarray, tol: float | None = RANDOM_TOL) -> np.ndarray:
    """Effective Hamiltonian from the traceless su(d) generators.

    Uses ``sigma_j`` normalized as ``Tr(sigma_j sigma_k) = d delta_jk`` so that
    ``K = 1/(2 i d**2) * sum_j [sigma_j, L(sigma_j)]``.
    """
    d = _require_htp(L, tol)
    sig = gell_mann_matrices(d)[1:] * np.sqrt(d)
    out = np.zeros((d, d), dtype=complex)
    for s in sig:
        ls = unvec(L @ vec(s), d)
        out += s @ ls - ls @ s
    return _hermitian_part(out / (2j * d * d))


def effective_hamiltonian_pseudokraus(terms: Sequence[tuple[complex, np.ndarray, np.ndarray]]) -> np.ndarray:
    """Effective Hamiltonian of ``X -> sum w V X W`` without building ``L``.

    ``K = 1/(2 i d) * sum w (Tr(V) W - Tr(W) V)``.
    """
    terms = list(terms)
    if not terms:
        raise ValueError("at least one term is required")
    d = as_operator(terms[0][1]).shape[0]
    out = np.zeros((d, d), dtype=complex)
    for w, v, wr in terms:
        v = as_operator(v, d)
        wr = as_operator(wr, d)
        out += w * (np.trace(v) * wr - np.trace(wr) * v)
    return out / (2j * d)


def fidelity_weights(L: np.ndarray, tol: float | None = RANDOM_TOL) -> np.ndarray:
    """Average fidelities between ``L`` and each normalized basis commutator.

    Returns the ``d**2 - 1`` weights ``F_j`` of the traceless, HS-normalized
    Gell-Mann elements ``H_j``, computed from the exact Haar second moment
    ``avg |psi><psi|^{(x)2} = (1 + SWAP) / (d (d + 1))``. The effective
    Hamiltonian is ``(d + 1)/2 * sum_j F_j H_j``.
    """
    d = _require_htp(L, tol)
    units = elementary_units(d)
    h_basis = gell_mann_matrices(d)[1:]
    # L(|k><j|) for every pair; the |j><j| x |k><k| moment term drops because H(1) = 0
    images = {}
    for j in range(d):
        for k in range(d):
            images[j, k] = unvec(L @ vec(units[k * d + j]), d)
    weights = np.empty(len(h_basis))
    for n, hj in enumerate(h_basis):
        acc = 0.0j
        for j in range(d):
            for k in range(d):
                e_jk = units[j * d + k]
                ham_img = -1j * (hj @ e_jk - e_jk @ hj)
                acc += np.trace(ham_img @ images[j, k])
        weights[n] = acc.real / (d * (d + 1))
    return weights


def k_from_fidelity_weights(weights: np.ndarray, d: int) -> np.ndarray:
    h_basis = gell_mann_matrices(d)[1:]
    return (d + 1) / 2 * np.einsum("j,jab->ab", np.asarray(weights), h_basis)


@dataclass(frozen=True)
class GeneratorSplit:
    """Canonical split ``L = -i[k, .] + dissipator``.

    ``kossakowski`` is expressed on the traceless Gell-Mann sub-basis and
    ``jumps`` holds its eigen-decomposition as ``(rate, operator)`` pairs with
    unit Hilbert-Schmidt norm operators; rates may be negative.
    """

    k: np.ndarray
    dissipator: np.ndarray
    kossakowski: np.ndarray
    jumps: list = field(default_factory=list)

    def reconstruct(self) -> np.ndarray:
        return commutator_superop(self.k) + self.dissipator

    def jump_dissipator(self) -> np.ndarray:
        d = self.k.shape[0]
        out = np.zeros((d * d, d * d), dtype=complex)
        for rate, op in self.jumps:
            out += dissipator_superop(op, rate)
        return out

    def to_json(self) -> dict:
        kos = np.asarray(self.kossakowski).reshape(-1)
        return {
            "k": operator_to_json(self.k),
            "kossakowski": {
                "dim": int(self.kossakowski.shape[0]),
                "re": kos.real.tolist(),
                "im": kos.imag.tolist(),
            },
            "jumps": [{"rate": float(r), "op": operator_to_json(op)} for r, op in self.jumps],
        }


def kossakowski_matrix(dissipator: np.ndarray) -> np.ndarray:
    """Coefficients ``a_ij`` of ``D(X) = sum a_ij F_i X F_j^dag + ...`` on traceless ``F``."""
    d = superop_dim(dissipator)
    basis = gell_mann_matrices(d)
    # kron(conj(F_b), F_a) is HS-orthonormal on superoperator space
    n = len(basis)
    c = np.empty((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            c[a, b] = np.vdot(np.kron(basis[b].conj(), basis[a]), dissipator)
    kos = c[1:, 1:]
    return (kos + dag(kos)) / 2


def split(L: np.ndarray, tol: float | None = RANDOM_TOL, threshold: float = JUMP_THRESHOLD) -> GeneratorSplit:
    L = np.asarray(L, dtype=complex)
    d = _require_htp(L, tol)
    k = effective_hamiltonian(L, tol=None)
    dissipator = L - commutator_superop(k)
    kos = kossakowski_matrix(dissipator)
    rates, vecs = np.linalg.eigh(kos)
    scale = np.max(np.abs(rates), initial=0.0)
    traceless = gell_mann_matrices(d)[1:]
    jumps = []
    for rate, v in zip(rates, vecs.T):
        if scale == 0.0 or abs(rate) < threshold * scale:
            continue
        jumps.append((float(rate), np.einsum("i,iab->ab", v, traceless)))
    for arr in (k, dissipator, kos):
        arr.setflags(write=False)
    return GeneratorSplit(k=k, dissipator=dissipator, kossakowski=kos, jumps=jumps)


def _mc_chunk(L: np.ndarray, d: int, seed: int, index: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))
    psi = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    proj = psi[:, :, None] * psi.conj()[:, None, :]
    flat = np.swapaxes(proj, 1, 2).reshape(n, d * d)
    img = np.swapaxes((flat @ L.T).reshape(n, d, d), 1, 2)
    prod = proj @ img
    samples = (d + 1) * (prod - dag(prod)) / 2j
    return samples.sum(axis=0), (samples.real**2).sum(axis=0) + 1j * (samples.imag**2).sum(axis=0)


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("EFFHAM_THREADS")
    return max(1, int(env)) if env else 1


def haar_mc_effective_hamiltonian(
    L: np.ndarray, samples: int = 100_000, seed: int = 0, workers: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo estimate ``(d + 1) * Im avg(P L(P))`` over Haar pure states.

    Samples are drawn in fixed-size chunks, each from its own Philox stream
    keyed by ``(seed, chunk index)``, and reduced in chunk order, so results
    are bit-identical for any worker count. Returns the estimate and the
    per-entry standard error (modulus of the real and imaginary parts).
    """
    if samples < 1000:
        raise ValueError("at least 1000 samples are required")
    L = np.asarray(L, dtype=complex)
    d = superop_dim(L)
    sizes = [MC_CHUNK] * (samples // MC_CHUNK)
    if samples % MC_CHUNK:
        sizes.append(samples % MC_CHUNK)
    jobs = [(L, d, seed, i, n) for i, n in enumerate(sizes)]
    n_workers = min(_worker_count(workers), len(jobs))
    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            parts = list(pool.map(lambda a: _mc_chunk(*a), jobs))
    else:
        parts = [_mc_chunk(*a) for a in jobs]
    total = np.zeros((d, d), dtype=complex)
    total_sq = np.zeros((d, d), dtype=complex)
    for s, sq in parts:
        total += s
        total_sq += sq
    mean = total / samples
    var_re = total_sq.real / samples - mean.real**2
    var_im = total_sq.imag / samples - mean.imag**2
    stderr = np.sqrt(np.clip(var_re, 0, None) * samples / (samples - 1) + np.clip(var_im, 0, None) * samples / (samples - 1))
    return mean, stderr / np.sqrt(samples)
