import json

import numpy as np
import pytest
from scipy.linalg import expm

from effham.bath import BathSpec, DiscreteModes, OhmicExp
from effham.oracle import (
    DimensionCapError,
    DiscreteBathSim,
    DynamicalMapSeries,
    MapSingularityError,
    TruncationError,
    dephasing_rate,
    exact_dephasing_generator,
    generator_from_map,
    oracle_compare,
    simulate_map,
)
from effham.perturbation import SpinModel, k_series
from effham.splitting import effective_hamiltonian
from effham.superop import SIGMA_X, SIGMA_Z, commutator_superop, lindblad_generator, unvec, vec

TIMES = np.linspace(0, 2, 9)


def _choi(phi):
    d = 2
    c = np.zeros((d * d, d * d), complex)
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d))
            e[i, j] = 1
            c += np.kron(e, unvec(phi @ vec(e), d))
    return c


def test_zero_coupling_gives_unitary_maps():
    sim = DiscreteBathSim(((0.3, 1.5),), fock_cutoff=4, beta=2.0)
    m = SpinModel(1.2, SIGMA_X, lam=0.0)
    series = simulate_map(sim, m, TIMES)
    gens = generator_from_map(series)
    for t, phi, L in zip(TIMES, series.maps, gens):
        assert np.allclose(phi, expm(commutator_superop(m.h_system) * t), atol=1e-12)
        assert np.allclose(L, commutator_superop(m.h_system), atol=1e-12)


def test_maps_are_cptp():
    sim = DiscreteBathSim(((0.3, 2.0), (0.25, 3.1)), fock_cutoff=6, beta=2.0, displacements=(0.2, 0.1j))
    series = simulate_map(sim, SpinModel(1.0, SIGMA_X, lam=0.5), TIMES, check_truncation=False)
    assert np.allclose(series.maps[0], np.eye(4), atol=1e-12)
    trace_row = vec(np.eye(2)).conj()
    for phi in series.maps:
        assert np.allclose(trace_row @ phi, trace_row, atol=1e-12)
        assert np.linalg.eigvalsh(_choi(phi)).min() >= -1e-10


def test_single_mode_dephasing_coherence():
    g, w0, lam = 0.4, 1.7, 0.5
    sim = DiscreteBathSim(((g, w0),), fock_cutoff=14)
    series = simulate_map(sim, SpinModel(1.0, SIGMA_Z, lam=lam), TIMES)
    # coherence |rho_01(t)| = exp(-4 lam^2 g^2 (1 - cos w0 t) / w0^2)
    rho0 = np.array([[0.5, 0.5], [0.5, 0.5]])
    for t, phi in zip(TIMES, series.maps):
        coh = abs(unvec(phi @ vec(rho0))[0, 1]) / 0.5
        assert coh == pytest.approx(np.exp(-4 * lam**2 * g**2 * (1 - np.cos(w0 * t)) / w0**2), abs=1e-10)


def test_dephasing_rate_single_mode():
    g, w0, lam = 0.4, 1.7, 0.3
    bath = BathSpec(DiscreteModes(((g, w0),)))
    assert dephasing_rate(bath, lam, 0.0) == 0
    for t in (0.3, 1.1, 2.5):
        assert dephasing_rate(bath, lam, t) == pytest.approx(2 * lam**2 * g**2 * np.sin(w0 * t) / w0, abs=1e-14)


def test_exact_dephasing_generator_matches_simulation():
    sim = DiscreteBathSim(((0.3, 2.0), (0.25, 3.1)), fock_cutoff=8, beta=2.0)
    m = SpinModel(1.0, SIGMA_Z, lam=0.5)
    series = simulate_map(sim, m, TIMES[1:])
    bath = sim.bath_spec()
    for t, L in zip(series.times, generator_from_map(series)):
        assert np.max(np.abs(L - exact_dephasing_generator(bath, m, t))) <= 1e-10
        assert np.allclose(effective_hamiltonian(L), 0.5 * SIGMA_Z, atol=1e-12)


def test_exact_dephasing_preconditions():
    bath = BathSpec(DiscreteModes(((0.3, 2.0),)))
    with pytest.raises(ValueError):
        exact_dephasing_generator(bath, SpinModel(1.0, SIGMA_X), 1.0)
    mean_bath = DiscreteBathSim(((0.3, 2.0),), displacements=(0.1,)).bath_spec()
    with pytest.raises(ValueError):
        exact_dephasing_generator(mean_bath, SpinModel(1.0, SIGMA_Z), 1.0)


def test_finite_difference_recovers_semigroup():
    L0 = lindblad_generator(0.7 * SIGMA_Z, [(0.3, SIGMA_X), (0.1, SIGMA_Z)])
    times = np.linspace(0, 1, 201)
    maps = np.array([expm(L0 * t) for t in times])
    series = DynamicalMapSeries(times=times, maps=maps, derivatives=np.array([L0 @ p for p in maps]))
    for L in generator_from_map(series, derivative="finite_difference")[1:-1]:
        assert np.max(np.abs(L - L0)) <= 1e-4
    for L in generator_from_map(series):
        assert np.max(np.abs(L - L0)) <= 1e-12
    with pytest.raises(ValueError):
        generator_from_map(series, derivative="spline")


def test_truncation_error():
    sim = DiscreteBathSim(((0.8, 1.0),), fock_cutoff=3, beta=0.5)
    with pytest.raises(TruncationError):
        simulate_map(sim, SpinModel(1.0, SIGMA_X), [1.0])


def test_dimension_cap():
    sim = DiscreteBathSim(((0.1, 1.0), (0.1, 2.0), (0.1, 3.0)), fock_cutoff=13)
    assert sim.total_dim > 4096
    with pytest.raises(DimensionCapError):
        simulate_map(sim, SpinModel(1.0), [1.0])


def test_singular_map():
    phi = np.diag([1.0, 0.0, 0.0, 1.0]).astype(complex)
    series = DynamicalMapSeries(times=np.array([1.0]), maps=phi[None], derivatives=np.zeros((1, 4, 4)))
    with pytest.raises(MapSingularityError):
        generator_from_map(series)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        DiscreteBathSim((), fock_cutoff=4)
    with pytest.raises(ValueError):
        DiscreteBathSim(((0.1, -1.0),))
    with pytest.raises(ValueError):
        DiscreteBathSim(((0.1, 1.0),), displacements=(0.1, 0.2))
    with pytest.raises(ValueError):
        DiscreteBathSim.from_bath(BathSpec(OhmicExp(0.1, 5.0)))


def test_oracle_compare_zero_coupling(tmp_path):
    sim = DiscreteBathSim(((0.3, 2.0),), fock_cutoff=4, beta=2.0)
    m = SpinModel(1.0, SIGMA_X, lam=0.0)
    times = TIMES[1:]
    report = oracle_compare(simulate_map(sim, m, times), k_series(m, sim.bath_spec(), 2, times, 0.05))
    for n in range(3):
        assert np.max(report.residuals[n]) <= 1e-10
    report.to_json(tmp_path / "r.json")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["lambda"] == 0.0 and len(doc["residuals"]["2"]) == len(times)
    report.to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "t,order,residual,residual_half_lambda,exponent" and len(lines) == 1 + 3 * len(times)


def test_oracle_scaling_second_order():
    sim = DiscreteBathSim(((0.3, 2.0), (0.25, 3.1)), fock_cutoff=8, beta=2.0)
    bath = sim.bath_spec()
    times = [1.0, 2.0]
    runs = []
    for lam in (0.2, 0.1):
        m = SpinModel(1.0, SIGMA_X, lam=lam)
        runs += [simulate_map(sim, m, times), k_series(m, bath, 2, times, 2.0 / 2000)]
    report = oracle_compare(*runs)
    # odd orders vanish here, so the order-2 remainder is O(lam^4)
    assert np.all(np.abs(report.exponents[2] - 4) < 0.3)
    assert np.all(np.abs(report.exponents[0] - 2) < 0.3)


def test_oracle_compare_checks_inputs():
    sim = DiscreteBathSim(((0.3, 2.0),), fock_cutoff=6, beta=2.0)
    m = SpinModel(1.0, SIGMA_X, lam=0.1)
    series = simulate_map(sim, m, [0.5, 1.0])
    ks = k_series(m, sim.bath_spec(), 1, [0.5, 1.0], 0.1)
    with pytest.raises(ValueError):
        oracle_compare(series, k_series(m, sim.bath_spec(), 1, [0.5, 1.0], 0.1, frame="interaction"))
    with pytest.raises(ValueError):
        oracle_compare(series, k_series(m, sim.bath_spec(), 1, [0.5], 0.1))
    with pytest.raises(ValueError):
        oracle_compare(series, ks, series)
    with pytest.raises(ValueError):
        oracle_compare(series, ks, series, ks)
