import math

import numpy as np
import pytest

from mqsim.initstate import (
    PLUS,
    CoherentStateSpec,
    WignerGaussian,
    coherent_wavefunction,
    kvn_state_from_wigner,
    spin_product_state,
)
from mqsim.kvn import ClassicalHamiltonianSpec, EvolutionFactor, HamiltonianFactors, build_kvn_generator
from mqsim.models import ModelParams, build_model, build_quantum_model, kvn_layout, quantum_layout
from mqsim.observables import phase_space_means
from mqsim.oracles import SectorForce, classical_trajectory
from mqsim.propagator import (
    DenseExponential,
    EvolveSettings,
    SplitStepper,
    dense_generator,
    evolve,
    expm_evolve,
    strang_step,
)
from mqsim.state import FactorLayout, GridAxis, MqsState, inner, make_state

from conftest import random_complex


def oscillator(n=32, L=6.0, w=1.0):
    lay = FactorLayout(0, (GridAxis(n, L),))
    ax = lay.axes[0]
    h = HamiltonianFactors((EvolutionFactor((False,), 0.5 * w * ax.points ** 2, "V"),
                            EvolutionFactor((True,), 0.5 * w * ax.wavenumbers ** 2, "T")), lay)
    return lay, h


def test_settings_validation():
    with pytest.raises(ValueError):
        EvolveSettings(dt=0, n_steps=1)
    with pytest.raises(ValueError):
        EvolveSettings(dt=1, n_steps=0)
    with pytest.raises(ValueError):
        EvolveSettings(dt=1, n_steps=1, record_every=0)


def test_commuting_factors_are_exact(rng):
    lay = FactorLayout(1, (GridAxis(16, 3.0),))
    x = lay.axes[0].points
    a = np.multiply.outer([1.0, -1.0], x ** 2)
    b = np.multiply.outer([0.3, 0.5], np.sin(x))
    h = HamiltonianFactors((EvolutionFactor((False,), a), EvolutionFactor((False,), b)), lay)
    psi = make_state(lay, random_complex(rng, lay.dim))
    dt = 2.7
    out = strang_step(psi, h, dt)
    exact = psi.tensor * np.exp(-1j * dt * (a + b))
    np.testing.assert_allclose(out.tensor, exact, atol=1e-12)


def test_step_preserves_norm(rng):
    lay, h = oscillator()
    psi = make_state(lay, random_complex(rng, lay.dim))
    for order in ("first", "strang"):
        assert abs(strang_step(psi, h, 0.3, order).norm - 1) <= 1e-12


def test_strang_local_error_is_third_order():
    lay, h = oscillator()
    psi = coherent_wavefunction(CoherentStateSpec(1.0, 0.3), lay.axes[0])
    D = DenseExponential(dense_generator(h))
    T = 2 * math.pi
    errs = []
    for dt in (T / 1000, T / 2000):
        err = np.linalg.norm(strang_step(psi, h, dt).amplitudes - expm_evolve(psi, D, dt).amplitudes)
        errs.append(err)
    assert errs[0] <= 1e-6
    # third-order local error: halving dt divides it by ~8
    assert 6.0 <= errs[0] / errs[1] <= 10.0


def test_first_order_global_error_is_first_order():
    lay, h = oscillator()
    psi = coherent_wavefunction(CoherentStateSpec(1.0, 0.0), lay.axes[0])
    D = DenseExponential(dense_generator(h))
    errs = []
    for n in (200, 400):
        out = SplitStepper(h, 1.0 / n, "first").step(psi, n)
        errs.append(np.linalg.norm(out.amplitudes - expm_evolve(psi, D, 1.0).amplitudes))
    assert 1.7 <= errs[0] / errs[1] <= 2.3


def test_merged_steps_match_single_steps(rng):
    lay, h = oscillator()
    psi = make_state(lay, random_complex(rng, lay.dim))
    st = SplitStepper(h, 0.01)
    one_by_one = psi
    for _ in range(7):
        one_by_one = st.step(one_by_one)
    np.testing.assert_allclose(st.step(psi, 7).amplitudes, one_by_one.amplitudes, atol=1e-13)


def test_evolve_zero_hamiltonian(rng):
    lay = FactorLayout(1, (GridAxis(8, 1.0),))
    h = HamiltonianFactors((EvolutionFactor((False,), np.zeros(lay.shape)),
                            EvolutionFactor((True,), np.zeros(lay.shape))), lay)
    psi = make_state(lay, random_complex(rng, lay.dim))

    def overlap(t, s):
        return {"fidelity": abs(inner(psi, s)) ** 2}

    ser = evolve(psi, h, EvolveSettings(0.1, 20, record_every=5), [overlap])
    assert ser.complete
    np.testing.assert_allclose(ser.column("fidelity"), 1.0, atol=1e-13)
    np.testing.assert_allclose(ser.final_state.amplitudes, psi.amplitudes, atol=1e-13)


def test_evolve_record_schedule():
    lay, h = oscillator(16, 4.0)
    psi = coherent_wavefunction(CoherentStateSpec(0.5, 0), lay.axes[0])
    seen = []
    ser = evolve(psi, h, EvolveSettings(0.01, 10, record_every=4), [lambda t, s: seen.append(t) or 0.0])
    assert ser.steps == [0, 4, 8, 10]
    assert ser.times == pytest.approx([0.0, 0.04, 0.08, 0.1])
    assert len(seen) == 4


def test_evolve_observer_failure_flags_incomplete():
    lay, h = oscillator(16, 4.0)
    psi = coherent_wavefunction(CoherentStateSpec(0.5, 0), lay.axes[0])

    def boom(t, s):
        if t > 0.05:
            raise RuntimeError("observer exploded")
        return {"t": t}

    ser = evolve(psi, h, EvolveSettings(0.01, 10, record_every=2), [boom])
    assert not ser.complete
    assert ser.steps == [0, 2, 4]
    assert "exploded" in ser.error
    assert isinstance(ser.exception, RuntimeError)


def test_evolve_is_deterministic(params):
    lay = kvn_layout(32, 14.0)
    h = build_model("kvn", params, lay)
    psi = spin_product_state(PLUS, PLUS, kvn_state_from_wigner(WignerGaussian(1.4, 0), *lay.axes))
    obs = lambda t, s: {"re": s.amplitudes.real.sum(), "im": s.amplitudes.imag.sum()}  # noqa: E731
    a = evolve(psi, h, EvolveSettings(1e-3, 50, record_every=10), [obs])
    b = evolve(psi, h, EvolveSettings(1e-3, 50, record_every=10), [obs])
    assert a.records == b.records


def test_input_state_not_mutated(params):
    lay = quantum_layout(32, 14.0)
    h = build_quantum_model(params, lay)
    psi = spin_product_state(PLUS, PLUS, coherent_wavefunction(CoherentStateSpec(1, 0), lay.axes[0]))
    before = psi.amplitudes.copy()
    evolve(psi, h, EvolveSettings(1e-3, 5))
    np.testing.assert_array_equal(psi.amplitudes, before)


def test_quantum_oscillator_returns_after_period(params):
    lay = quantum_layout(128, 14.0)
    h = build_quantum_model(params, lay)
    T = params.period
    for spins in (([1, 0], [1, 0]), ([0, 1], [1, 0]), ([1, 0], [0, 1]), ([0, 1], [0, 1])):
        psi = spin_product_state(*spins, coherent_wavefunction(CoherentStateSpec(1, 0), lay.axes[0]))
        out = SplitStepper(h, T / 1000).step(psi, 1000)
        assert abs(inner(psi, out)) >= 0.999


def test_quantum_return_matches_dense_oracle(params):
    lay = quantum_layout(32, 14.0)
    h = build_quantum_model(params, lay)
    psi = spin_product_state([1, 0], [1, 0], coherent_wavefunction(CoherentStateSpec(1, 0), lay.axes[0]))
    exact = expm_evolve(psi, dense_generator(h), params.period)
    split = SplitStepper(h, params.period / 1000).step(psi, 1000)
    # n=32 undersamples the orbit, so only agreement with the exact flow is asserted
    assert abs(abs(inner(psi, split)) - abs(inner(psi, exact))) < 1e-5
    assert np.linalg.norm(split.amplitudes - exact.amplitudes) < 1e-4


def test_kvn_oscillator_quarter_period():
    p = ModelParams(omega=2 * math.pi * 1.59)
    lay = kvn_layout(128, 10.0)
    h = build_model("kvn", p, lay)
    w = WignerGaussian(1.5, -0.5)
    psi = spin_product_state([1, 0], [1, 0], kvn_state_from_wigner(w, *lay.axes))
    out = SplitStepper(h, p.period / 1000).step(psi, 250)
    m_pi, m_xi, _ = phase_space_means(out)
    ref = classical_trajectory(w.Pi0, w.xi0, SectorForce(1, 1, 0.0), p.omega, p.period / 4)
    # quarter turn clockwise: (Pi, xi) -> (xi, -Pi)
    assert ref == pytest.approx((-0.5, -1.5), abs=1e-12)
    assert abs(m_pi - ref[0]) <= 1e-4 and abs(m_xi - ref[1]) <= 1e-4


def test_dense_generator_spin_only():
    lay = FactorLayout(2)
    wa = 0.7
    h = HamiltonianFactors((EvolutionFactor((), wa * np.array([[1.0, 1.0], [-1.0, -1.0]])),), lay)
    G = dense_generator(h)
    np.testing.assert_allclose(G, np.diag([wa, wa, -wa, -wa]))


def test_dense_generator_oscillator_spectrum():
    n = 16
    lay, h = oscillator(n, math.sqrt(math.pi * n / 2), w=1.3)
    G = dense_generator(h)
    assert np.max(np.abs(G - G.conj().T)) <= 1e-12
    ev = np.linalg.eigvalsh(G)[:4]
    np.testing.assert_allclose(ev, 1.3 * (np.arange(4) + 0.5), rtol=1e-5)


def test_dense_generator_kvn_spectrum():
    c, n, L = 2.0, 32, 7.0
    lay = FactorLayout(0, (GridAxis(n, L, "Pi"), GridAxis(n, L, "Xi")))
    h = build_kvn_generator(ClassicalHamiltonianSpec(lambda P, X, s: c * P, lambda P, X, s: c * X), lay)
    G = dense_generator(h)
    assert np.max(np.abs(G - G.conj().T)) <= 1e-12
    w, v = np.linalg.eigh(G)
    Pi, Xi = np.meshgrid(lay.axes[0].points, lay.axes[1].points, indexing="ij")
    outer = ((Pi ** 2 + Xi ** 2) > (0.7 * L) ** 2).ravel()
    localized = np.sum(np.abs(v[outer]) ** 2, axis=0) < 1e-3
    assert localized.sum() >= 20
    ratio = w[localized] / c
    assert np.max(np.abs(ratio - np.round(ratio))) < 1e-8


def test_dense_generator_cap(params):
    h = build_model("kvn", params, kvn_layout(64, 14.0))
    with pytest.raises(ValueError, match="limited"):
        dense_generator(h)


def test_dense_generator_matches_factor_action(params, rng):
    lay = kvn_layout(8, 5.0)
    h = build_model("kvn", params, lay)
    G = dense_generator(h)
    psi = make_state(lay, random_complex(rng, lay.dim))
    # first-order finite difference of the exact factor phases
    eps = 1e-7
    approx = psi.tensor
    for f in h:
        approx = f.apply_tensor(approx, lay.spin_count, eps)
    deriv = (approx.ravel() - psi.amplitudes) / (-1j * eps)
    np.testing.assert_allclose(G @ psi.amplitudes, deriv, rtol=0, atol=1e-4 * np.abs(deriv).max())


def test_expm_identity_and_diagonal(rng):
    lay = FactorLayout(0, (GridAxis(8, 1.0),))
    psi = make_state(lay, random_complex(rng, 8))
    G = np.diag(rng.normal(size=8))
    np.testing.assert_allclose(expm_evolve(psi, G, 0.0).amplitudes, psi.amplitudes, atol=1e-14)
    out = expm_evolve(psi, G, 0.4)
    np.testing.assert_allclose(out.amplitudes, np.exp(-0.4j * np.diag(G)) * psi.amplitudes, atol=1e-14)


def test_expm_group_property(rng):
    lay = FactorLayout(0, (GridAxis(16, 1.0),))
    A = random_complex(rng, (16, 16))
    G = A + A.conj().T
    psi = make_state(lay, random_complex(rng, 16))
    twice = expm_evolve(expm_evolve(psi, G, 0.05), G, 0.05)
    once = expm_evolve(psi, G, 0.1)
    np.testing.assert_allclose(twice.amplitudes, once.amplitudes, atol=1e-10)
    assert abs(once.norm - 1) < 1e-10


def test_expm_rejects_non_hermitian(rng):
    lay = FactorLayout(0, (GridAxis(8, 1.0),))
    psi = make_state(lay, np.ones(8))
    with pytest.raises(ValueError, match="Hermitian"):
        expm_evolve(psi, random_complex(rng, (8, 8)), 1.0)


def test_dense_exponential_finds_sector_blocks(params):
    h = build_model("quantum", params, quantum_layout(16, 14.0))
    D = DenseExponential(dense_generator(h))
    assert len(D.blocks) == 4


def test_strang_second_order_convergence_quantum(params):
    lay = quantum_layout(32, 14.0)
    h = build_quantum_model(params, lay)
    psi = spin_product_state(PLUS, PLUS, coherent_wavefunction(CoherentStateSpec(1, 0), lay.axes[0]))
    T = params.period
    exact = expm_evolve(psi, dense_generator(h), T)
    errs = [np.linalg.norm(SplitStepper(h, T / n).step(psi, n).amplitudes - exact.amplitudes)
            for n in (500, 1000)]
    assert 3.0 <= errs[0] / errs[1] <= 5.0
