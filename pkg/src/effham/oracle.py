"""Brute-force reference dynamics of a qubit coupled to a few bosonic modes.

The full Hamiltonian ``H = (omega/2) sigma_z + sum w_j a_j^dag a_j +
lam A (x) sum g_j (a_j + a_j^dag)`` is diagonalized once in a truncated Fock
space. The reduced map ``Phi_t`` is obtained by propagating ``|k><j| (x) rho_E``
and tracing out the modes; the time-local generator is
``L_t = dPhi_t/dt Phi_t^{-1}``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .bath import BathSpec, CoherentMean, DiscreteModes, integrated_noise
from .perturbation import KSeries, SpinModel
from .splitting import effective_hamiltonian
from .superop import SIGMA_Z, commutator_superop, dag, dissipator_superop, unvec, vec

MAX_TOTAL_DIM = 4096
SINGULAR_TOL = 1e-8
TRUNCATION_TOL = 1e-8


class TruncationError(RuntimeError):
    """Fock truncation too small for the requested horizon."""


class DimensionCapError(ValueError):
    """System plus truncated bath exceeds the dense-simulation cap."""


class MapSingularityError(RuntimeError):
    """The dynamical map is not invertible at some time."""

    def __init__(self, t: float, smin: float):
        self.t = t
        self.smin = smin
        super().__init__(f"dynamical map is singular at t = {t} (smallest singular value {smin:.3e})")


def _annihilation(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n)), 1).astype(complex)


def _embed(op: np.ndarray, site: int, dims: Sequence[int]) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for i, n in enumerate(dims):
        out = np.kron(out, op if i == site else np.eye(n))
    return out


def _mode_state(w: float, beta: float, alpha: complex, n: int) -> np.ndarray:
    """Truncated (displaced) thermal state of one mode, renormalized to unit trace."""
    if math.isinf(beta):
        pops = np.zeros(n)
        pops[0] = 1.0
    else:
        pops = np.exp(-beta * w * np.arange(n))
    rho = np.diag(pops).astype(complex)
    if alpha != 0:
        # displace in a padded space so the truncation edge does not distort D(alpha)
        big = n + 40
        a = _annihilation(big)
        disp = expm(alpha * dag(a) - np.conj(alpha) * a)
        pad = np.zeros((big, big), dtype=complex)
        pad[:n, :n] = rho
        rho = (disp @ pad @ dag(disp))[:n, :n]
    return rho / np.trace(rho).real


@dataclass(frozen=True)
class DiscreteBathSim:
    """Few-mode bath for exact simulation.

    ``modes`` holds ``(g_j, w_j)``; ``displacements`` (optional) the coherent
    amplitudes of the initial state. ``beta = inf`` starts from the vacuum.
    """

    modes: tuple
    fock_cutoff: int = 8
    beta: float = math.inf
    displacements: tuple | None = None

    def __post_init__(self):
        modes = tuple((float(g), float(w)) for g, w in self.modes)
        if not modes:
            raise ValueError("at least one mode is required")
        if any(w <= 0 for _, w in modes):
            raise ValueError("mode frequencies must be positive")
        if self.fock_cutoff < 2:
            raise ValueError("fock_cutoff must be at least 2")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        object.__setattr__(self, "modes", modes)
        if self.displacements is not None:
            disp = tuple(complex(a) for a in self.displacements)
            if len(disp) != len(modes):
                raise ValueError("one displacement per mode is required")
            object.__setattr__(self, "displacements", disp)

    @property
    def total_dim(self) -> int:
        return 2 * self.fock_cutoff ** len(self.modes)

    @property
    def env_dim(self) -> int:
        return self.fock_cutoff ** len(self.modes)

    def with_cutoff(self, n: int) -> "DiscreteBathSim":
        return DiscreteBathSim(self.modes, n, self.beta, self.displacements)

    def bath_spec(self) -> BathSpec:
        """Gaussian bath with the same two-point function and mean."""
        j = DiscreteModes(self.modes)
        mean = CoherentMean(j, self.displacements) if self.displacements is not None else None
        return BathSpec(j, self.beta, mean)

    @classmethod
    def from_bath(cls, bath: BathSpec, fock_cutoff: int = 8) -> "DiscreteBathSim":
        if not isinstance(bath.j, DiscreteModes):
            raise ValueError("exact simulation needs a discrete-mode bath")
        disp = tuple(bath.mean.displacements) if bath.has_mean else None
        return cls(bath.j.modes, fock_cutoff, bath.beta, disp)

    def env_state(self) -> np.ndarray:
        n = self.fock_cutoff
        disp = self.displacements or (0j,) * len(self.modes)
        rho = np.eye(1, dtype=complex)
        for (_, w), a in zip(self.modes, disp):
            rho = np.kron(rho, _mode_state(w, self.beta, a, n))
        return rho

    def hamiltonian(self, model: SpinModel) -> np.ndarray:
        n = self.fock_cutoff
        dims = [2] + [n] * len(self.modes)
        h = _embed(model.h_system, 0, dims)
        coupling = np.zeros_like(h)
        a = _annihilation(n)
        for i, (g, w) in enumerate(self.modes):
            ai = _embed(a, i + 1, dims)
            h = h + w * dag(ai) @ ai
            coupling = coupling + g * (ai + dag(ai))
        return h + model.lam * _embed(model.coupling_op, 0, dims) @ coupling


@dataclass
class DynamicalMapSeries:
    """Reduced maps, their time derivatives and the time-local generators."""

    times: np.ndarray
    maps: np.ndarray
    derivatives: np.ndarray
    generators: list = field(default_factory=list)
    truncation_change: float | None = None


def _partial_trace_env(rho: np.ndarray, d_env: int) -> np.ndarray:
    return np.einsum("iaja->ij", rho.reshape(2, d_env, 2, d_env))


def _propagate(sim: DiscreteBathSim, model: SpinModel, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = sim.hamiltonian(model)
    energies, vecs = np.linalg.eigh(h)
    rho_env = sim.env_state()
    d_env = sim.env_dim
    maps = np.empty((len(times), 4, 4), dtype=complex)
    derivs = np.empty_like(maps)
    inputs = []
    for col in range(4):
        unit = unvec(np.eye(4)[:, col], 2)
        x = np.kron(unit, rho_env)
        inputs.append(dag(vecs) @ x @ vecs)
    for it, t in enumerate(times):
        ph = np.exp(-1j * energies * t)
        for col, x_eig in enumerate(inputs):
            rho_eig = ph[:, None] * x_eig * np.conj(ph)[None, :]
            rho = vecs @ rho_eig @ dag(vecs)
            # d rho / dt = -i [H, rho], evaluated in the eigenbasis
            drho = vecs @ (-1j * (energies[:, None] - energies[None, :]) * rho_eig) @ dag(vecs)
            maps[it, :, col] = vec(_partial_trace_env(rho, d_env))
            derivs[it, :, col] = vec(_partial_trace_env(drho, d_env))
    return maps, derivs


def simulate_map(sim: DiscreteBathSim, model: SpinModel, times: Sequence[float],
                 check_truncation: bool = True) -> DynamicalMapSeries:
    """Exact reduced maps ``Phi_t`` and their derivatives on ``times``.

    With ``check_truncation`` the run is repeated at twice the Fock cutoff
    and the largest change of any map entry must stay below ``1e-8``.
    """
    if sim.total_dim > MAX_TOTAL_DIM:
        raise DimensionCapError(f"total dimension {sim.total_dim} exceeds the cap {MAX_TOTAL_DIM}")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(times < 0):
        raise ValueError("times must be a one-dimensional array of non-negative values")
    maps, derivs = _propagate(sim, model, times)
    change = None
    if check_truncation:
        ref, _ = _propagate(sim.with_cutoff(2 * sim.fock_cutoff), model, times)
        change = float(np.max(np.abs(ref - maps)))
        if change > TRUNCATION_TOL:
            raise TruncationError(
                f"doubling the Fock cutoff changes the map by {change:.3e} > {TRUNCATION_TOL:g}"
            )
    return DynamicalMapSeries(times=times, maps=maps, derivatives=derivs, truncation_change=change)


def finite_difference_derivatives(maps: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Centered differences (second-order one-sided at the ends) on a uniform grid."""
    times = np.asarray(times, dtype=float)
    if len(times) < 3:
        raise ValueError("at least three times are needed")
    return np.gradient(maps, times, axis=0, edge_order=2)


def generator_from_map(series: DynamicalMapSeries, derivative: str = "exact") -> list:
    """``L_t = dPhi/dt Phi^{-1}`` at every time of ``series``.

    ``derivative="exact"`` uses the propagated ``-i[H, rho]``;
    ``"finite_difference"`` differentiates the sampled maps instead.
    """
    if derivative == "exact":
        dphi = series.derivatives
    elif derivative == "finite_difference":
        dphi = finite_difference_derivatives(series.maps, series.times)
    else:
        raise ValueError(f"unknown derivative method {derivative!r}")
    gens = []
    for t, phi, dp in zip(series.times, series.maps, dphi):
        smin = np.linalg.svd(phi, compute_uv=False)[-1]
        if smin < SINGULAR_TOL:
            raise MapSingularityError(float(t), float(smin))
        # L Phi = dPhi  ->  Phi^T L^T = dPhi^T
        gens.append(np.linalg.solve(phi.T, dp.T).T)
    series.generators = gens
    return gens


def exact_dephasing_generator(bath: BathSpec, model: SpinModel, t: float) -> np.ndarray:
    """Exact generator for ``A = sigma_z`` and a zero-mean Gaussian bath.

    ``L_t = -i[(omega/2) sigma_z, .] + gamma(t) (sigma_z . sigma_z - .)``
    with ``gamma(t) = 2 lam**2 int_0^t Re C(u) du``.
    """
    if model.coupling_kind != "sigma_z":
        raise ValueError("the exact dephasing generator needs a sigma_z coupling")
    if bath.has_mean:
        raise ValueError("the exact dephasing generator needs a zero-mean bath")
    gamma = dephasing_rate(bath, model.lam, t)
    return commutator_superop(model.h_system) + dissipator_superop(SIGMA_Z / np.sqrt(2), 2 * gamma)


def dephasing_rate(bath: BathSpec, lam: float, t: float) -> float:
    return 2 * lam**2 * integrated_noise(bath, t)


@dataclass
class OracleReport:
    """Exact-versus-series comparison on a common time grid."""

    times: np.ndarray
    k_exact: np.ndarray
    residuals: dict
    lam: float
    half_residuals: dict | None = None
    exponents: dict | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "lambda": self.lam,
            "times": self.times.tolist(),
            "k_exact": [{"re": k.real.tolist(), "im": k.imag.tolist()} for k in self.k_exact],
            "residuals": {str(n): r.tolist() for n, r in self.residuals.items()},
        }
        if self.half_residuals is not None:
            out["half_lambda_residuals"] = {str(n): r.tolist() for n, r in self.half_residuals.items()}
            out["scaling_exponents"] = {str(n): e.tolist() for n, e in self.exponents.items()}
        out.update(self.meta)
        return out

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    def to_csv(self, path) -> None:
        """Scaling summary: one row per (time, order)."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "order", "residual", "residual_half_lambda", "exponent"])
            for n, res in self.residuals.items():
                for i, t in enumerate(self.times):
                    half = self.half_residuals[n][i] if self.half_residuals else float("nan")
                    exp = self.exponents[n][i] if self.exponents else float("nan")
                    w.writerow([f"{t:.17g}", n, f"{res[i]:.17g}", f"{half:.17g}", f"{exp:.17g}"])


def _residuals(series: DynamicalMapSeries, kseries: KSeries) -> tuple[np.ndarray, dict]:
    if kseries.frame != "schrodinger":
        raise ValueError("the oracle compares Schrödinger-frame series")
    if len(series.times) != len(kseries.times) or np.max(np.abs(series.times - kseries.times), initial=0) > 1e-12:
        raise ValueError("time grids of the exact and perturbative runs differ")
    gens = series.generators or generator_from_map(series)
    k_exact = np.array([effective_hamiltonian(L, tol=1e-8) for L in gens])
    res = {n: np.linalg.norm(k_exact - kseries.partial_sums[n], axis=(1, 2)) for n in range(kseries.max_order + 1)}
    return k_exact, res


def oracle_compare(series: DynamicalMapSeries, kseries: KSeries,
                   half_series: DynamicalMapSeries | None = None,
                   half_kseries: KSeries | None = None) -> OracleReport:
    """Residuals ``||K_exact - sum_{j<=n} lam**j K_j||`` (Frobenius) per order.

    With a second run at half the coupling, ``exponents[n] = log2`` of the
    residual ratio, the observed power of ``lam`` of the truncation error.
    """
    k_exact, res = _residuals(series, kseries)
    report = OracleReport(times=series.times, k_exact=k_exact, residuals=res, lam=kseries.lam)
    if (half_series is None) != (half_kseries is None):
        raise ValueError("both half-coupling runs are required for scaling exponents")
    if half_series is not None:
        if not math.isclose(half_kseries.lam, kseries.lam / 2, rel_tol=1e-12):
            raise ValueError("the paired run must use half the coupling")
        _, half = _residuals(half_series, half_kseries)
        report.half_residuals = half
        with np.errstate(divide="ignore", invalid="ignore"):
            report.exponents = {n: np.log2(res[n] / half[n]) for n in res}
    return report
