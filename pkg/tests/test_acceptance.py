"""Acceptance criteria, each checked at its stated tolerance and runtime budget."""
import time

import numpy as np
import pytest

from effham.bath import BathSpec, OhmicExp
from effham.oracle import DiscreteBathSim, generator_from_map, oracle_compare, simulate_map
from effham.perturbation import Expansion, SpinModel, k_series
from effham.quadrature import QuadratureScheme
from effham.splitting import (
    effective_hamiltonian,
    effective_hamiltonian_pseudokraus,
    effective_hamiltonian_su,
    fidelity_weights,
    haar_mc_effective_hamiltonian,
    k_from_fidelity_weights,
    split,
)
from effham.superop import SIGMA_X, SIGMA_Z, commutator_superop, random_htp_generator

from conftest import random_lindblad

OHMIC = BathSpec(OhmicExp(0.1, 5.0), beta=2.0)
MODES = ((0.3, 2.0), (0.25, 3.1))
SIM = DiscreteBathSim(MODES, fock_cutoff=8, beta=2.0)


def _sandwich_terms(L):
    """``L = sum c E_ab . E_ce`` over matrix units, with ``c = L[e d + a, c d + b]``."""
    d = int(round(np.sqrt(L.shape[0])))
    units = np.eye(d * d).reshape(d, d, d, d)  # units[a, b] = E_ab
    terms = []
    for a in range(d):
        for b in range(d):
            for c in range(d):
                for e in range(d):
                    w = L[e * d + a, c * d + b]
                    if w != 0:
                        terms.append((w, units[a, b], units[c, e]))
    return terms


def _generators(n, dims, seed):
    rng = np.random.default_rng(seed)
    return [random_htp_generator(int(rng.choice(dims)), rng) for _ in range(n)]


def _offdiag(k):
    return np.max(np.abs(k[..., [0, 1], [1, 0]]))


def test_extraction(criterion):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        L, h = random_lindblad(int(rng.choice([2, 3, 4, 5])), rng)
        worst = max(worst, np.linalg.norm(effective_hamiltonian(L) - h))
    elapsed = time.perf_counter() - start
    criterion(1, worst <= 1e-10 and elapsed < 10, f"max |K - H| = {worst:.2e}, {elapsed:.1f} s")


def test_route_invariance(criterion):
    start = time.perf_counter()
    worst = 0.0
    for L in _generators(100, [2, 3, 4, 5], 2):
        d = int(round(np.sqrt(L.shape[0])))
        routes = [
            effective_hamiltonian(L),
            effective_hamiltonian_su(L),
            effective_hamiltonian_pseudokraus(_sandwich_terms(L)),
            k_from_fidelity_weights(fidelity_weights(L), d),
        ]
        for i in range(4):
            for j in range(i):
                worst = max(worst, np.max(np.abs(routes[i] - routes[j])))
    elapsed = time.perf_counter() - start
    criterion(2, worst <= 1e-12 and elapsed < 10, f"max pairwise deviation {worst:.2e}, {elapsed:.1f} s")


def test_haar_mc(criterion):
    start = time.perf_counter()
    worst = 0.0
    for i, L in enumerate(_generators(20, [2, 3], 3)):
        est, err = haar_mc_effective_hamiltonian(L, samples=100_000, seed=i)
        worst = max(worst, np.max(np.abs(est - effective_hamiltonian(L)) / err))
    elapsed = time.perf_counter() - start
    criterion(3, worst <= 5 and elapsed < 60, f"max deviation {worst:.2f} standard errors, {elapsed:.1f} s")


def test_minimal_dissipation(criterion):
    gens = _generators(100, [2, 3, 4, 5], 2) + _generators(20, [2, 3], 3)
    k_dis = recon = 0.0
    for L in gens:
        s = split(L)
        k_dis = max(k_dis, np.linalg.norm(effective_hamiltonian(s.dissipator)))
        recon = max(recon, np.linalg.norm(L - (commutator_superop(s.k) + s.dissipator)))
    criterion(4, k_dis <= 1e-10 and recon <= 1e-10, f"|K(D)| = {k_dis:.2e}, reconstruction {recon:.2e}")


def _order_terms(model, T, times):
    engine = Expansion(model, OHMIC, T, QuadratureScheme(T / 400))
    return {n: np.array([engine.k_order(n, t) for t in times]) for n in range(1, 5)}


def _oracle_k(model, times):
    series = simulate_map(SIM, model, times)
    generator_from_map(series)
    return np.array([effective_hamiltonian(L, tol=1e-8) for L in series.generators])


def test_pure_dephasing(criterion):
    start = time.perf_counter()
    T, times = 2.0, [0.5, 1.0, 2.0]
    terms = _order_terms(SpinModel(1.0, SIGMA_Z), T, times)
    worst = max(np.max(np.linalg.norm(terms[n], axis=(1, 2))) for n in terms)
    k_exact = _oracle_k(SpinModel(1.0, SIGMA_Z, lam=0.5), np.linspace(0.25, 4.0, 16))
    oracle = np.max(np.abs(k_exact - 0.5 * SIGMA_Z))
    elapsed = time.perf_counter() - start
    criterion(5, worst <= 1e-6 and oracle <= 1e-6 and elapsed < 300,
              f"max |K_n| = {worst:.2e}, oracle {oracle:.2e}, {elapsed:.1f} s")


def test_unbiased_spin(criterion):
    start = time.perf_counter()
    T, times = 2.0, [0.5, 1.0, 2.0]
    terms = _order_terms(SpinModel(1.0, SIGMA_X), T, times)
    odd = max(np.max(np.abs(terms[1])), np.max(np.abs(terms[3])))
    off = max(_offdiag(terms[2]), _offdiag(terms[4]))
    even = min(np.max(np.abs(terms[2])), np.max(np.abs(terms[4])))
    k_exact = _oracle_k(SpinModel(1.0, SIGMA_X, lam=0.5), np.linspace(0.25, 4.0, 16))
    oracle = _offdiag(k_exact)
    elapsed = time.perf_counter() - start
    ok = odd <= 1e-8 and off <= 1e-6 and even > 1e-6 and oracle <= 1e-5 and elapsed < 600
    criterion(6, ok, f"odd {odd:.2e}, even off-diagonal {off:.2e}, oracle off-diagonal {oracle:.2e}, "
                     f"{elapsed:.1f} s")


def test_second_order_routes(criterion):
    T = 2.0
    times = np.linspace(0.1, T, 20)
    worst = 0.0
    scale = 0.0
    for a in (SIGMA_Z, SIGMA_X):
        engine = Expansion(SpinModel(1.0, a), OHMIC, T, QuadratureScheme(T / 4000))
        for t in times:
            ks = [engine.k2_closed_form(t), engine.k_order(2, t), engine.k_order_symmetry_resolved(2, t)]
            scale = max(scale, np.max(np.abs(ks[1])))
            worst = max(worst, *(np.max(np.abs(ks[i] - ks[j])) for i, j in ((0, 1), (0, 2), (1, 2))))
    criterion(7, worst <= 1e-6, f"max deviation {worst:.2e} (|K2| up to {scale:.2e})")


def _scaling(sim, order, lam, t, h):
    runs = []
    for l in (lam, lam / 2):
        m = SpinModel(1.0, SIGMA_X, lam=l)
        runs += [simulate_map(sim, m, [t]), k_series(m, sim.bath_spec(), order, [t], h)]
    report = oracle_compare(*runs)
    return report.residuals[order][0] / report.half_residuals[order][0]


def test_lambda_scaling(criterion):
    start = time.perf_counter()
    t = 2.0
    thermal = _scaling(SIM, 2, 0.2, t, t / 40000)
    displaced = DiscreteBathSim(MODES, fock_cutoff=10, beta=2.0, displacements=(0.3 + 0.1j, -0.2j))
    mean = _scaling(displaced, 1, 0.2, t, t / 400)
    elapsed = time.perf_counter() - start
    ok = abs(thermal / 16 - 1) <= 0.2 and abs(mean / 4 - 1) <= 0.2 and elapsed < 900
    criterion(8, ok, f"order-2 ratio {thermal:.2f} (target 16), order-1 ratio with mean {mean:.2f} "
                     f"(target 4), {elapsed:.1f} s")


def test_quadrature_convergence(criterion):
    t = 2.0
    m = SpinModel(1.0, SIGMA_X)
    k = [Expansion(m, OHMIC, t, QuadratureScheme(t / n)).k_order(2, t) for n in (50, 100, 200)]
    p = np.log2(np.linalg.norm(k[0] - k[1]) / np.linalg.norm(k[1] - k[2]))
    criterion(9, p >= 1.8, f"observed order {p:.2f}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
