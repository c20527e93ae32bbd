import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mqsim.state import (
    FactorLayout,
    GridAxis,
    axis_dft,
    boundary_leakage,
    inner,
    make_state,
)

from conftest import random_complex


def test_grid_axis_samples_and_ladder():
    ax = GridAxis(8, 2.0)
    np.testing.assert_allclose(ax.points, -2.0 + 0.5 * np.arange(8))
    m = np.array([0, 1, 2, 3, -4, -3, -2, -1])
    np.testing.assert_allclose(ax.wavenumbers, np.pi / 2.0 * m)
    assert 2.0 not in ax.points


@pytest.mark.parametrize("n", [4, 12, 0, 7])
def test_grid_axis_rejects_bad_size(n):
    with pytest.raises(ValueError):
        GridAxis(n, 1.0)


def test_layout_dimension():
    lay = FactorLayout(2, (GridAxis(8, 1.0), GridAxis(16, 1.0, "Xi")))
    assert lay.shape == (2, 2, 8, 16)
    assert lay.dim == 4 * 8 * 16


def test_make_state_basis():
    s = make_state(FactorLayout(1), [1, 0])
    np.testing.assert_array_equal(s.amplitudes, [1, 0])
    assert s.norm == 1.0


def test_make_state_normalizes_uniform():
    s = make_state(FactorLayout(0, (GridAxis(8, 1.0),)), np.ones(8))
    np.testing.assert_allclose(s.amplitudes, np.full(8, 1 / np.sqrt(8)))


def test_make_state_errors():
    lay = FactorLayout(1, (GridAxis(8, 1.0),))
    with pytest.raises(ValueError, match="dimension"):
        make_state(lay, np.ones(8))
    with pytest.raises(ValueError, match="zero"):
        make_state(lay, np.zeros(16))


def test_make_state_does_not_alias_input():
    v = np.ones(8, dtype=complex)
    s = make_state(FactorLayout(0, (GridAxis(8, 1.0),)), v)
    s.amplitudes[0] = 5
    assert v[0] == 1


def test_dft_of_constant_is_delta():
    lay = FactorLayout(0, (GridAxis(8, 3.0),))
    out = axis_dft(make_state(lay, np.ones(8)), 0)
    expected = np.zeros(8)
    expected[0] = 1
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)


def test_dft_plane_wave_matches_direct_sum():
    ax = GridAxis(8, 3.0)
    x = ax.points
    k1 = ax.wavenumbers[1]
    psi = np.exp(1j * k1 * x) / np.sqrt(8)
    # direct DFT definition, independent of numpy.fft
    n = 8
    direct = np.array([sum(psi[j] * np.exp(-2j * np.pi * j * m / n) for j in range(n))
                       for m in range(n)]) / np.sqrt(n)
    out = axis_dft(make_state(FactorLayout(0, (ax,)), psi), 0).amplitudes
    np.testing.assert_allclose(out, direct, atol=1e-14)
    assert np.argmax(np.abs(out)) == 1
    assert abs(abs(out[1]) - 1) < 1e-14


def test_dft_roundtrip_and_bad_axis(rng):
    lay = FactorLayout(2, (GridAxis(8, 1.0), GridAxis(16, 1.0, "Xi")))
    s = make_state(lay, random_complex(rng, lay.dim))
    for ax in (0, 1):
        back = axis_dft(axis_dft(s, ax, "forward"), ax, "inverse")
        np.testing.assert_allclose(back.amplitudes, s.amplitudes, atol=1e-12)
    with pytest.raises(IndexError):
        axis_dft(s, 2)
    with pytest.raises(ValueError):
        axis_dft(s, 0, "sideways")


def test_dft_only_touches_named_axis(rng):
    lay = FactorLayout(1, (GridAxis(8, 1.0), GridAxis(8, 1.0, "Xi")))
    psi = np.zeros(lay.shape, dtype=complex)
    psi[1, :, 3] = random_complex(rng, 8)
    out = axis_dft(make_state(lay, psi), 0).tensor
    assert np.all(out[0] == 0)
    assert np.all(out[1, :, [0, 1, 2, 4, 5, 6, 7]] == 0)


def test_axis_dft_does_not_mutate_input(rng):
    lay = FactorLayout(0, (GridAxis(8, 1.0),))
    s = make_state(lay, random_complex(rng, 8))
    before = s.amplitudes.copy()
    axis_dft(s, 0)
    np.testing.assert_array_equal(s.amplitudes, before)


@settings(max_examples=30, deadline=None)
@given(n_exp=st.integers(3, 5), seed=st.integers(0, 2**32 - 1))
def test_dft_unitary(n_exp, seed):
    rng = np.random.default_rng(seed)
    lay = FactorLayout(1, (GridAxis(2 ** n_exp, 2.0),))
    a = make_state(lay, random_complex(rng, lay.dim))
    b = make_state(lay, random_complex(rng, lay.dim))
    lhs = inner(axis_dft(a, 0), axis_dft(b, 0))
    assert abs(lhs - inner(a, b)) <= 1e-12


def test_dft_axes_commute(rng):
    lay = FactorLayout(1, (GridAxis(16, 1.0), GridAxis(32, 2.0, "Xi")))
    s = make_state(lay, random_complex(rng, lay.dim))
    a = axis_dft(axis_dft(s, 0), 1)
    b = axis_dft(axis_dft(s, 1), 0)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)


def test_inner_basics(rng):
    lay = FactorLayout(1)
    zero, one = make_state(lay, [1, 0]), make_state(lay, [0, 1])
    assert inner(zero, zero) == 1
    assert inner(zero, one) == 0
    psi = make_state(FactorLayout(0, (GridAxis(8, 1.0),)), random_complex(rng, 8))
    i_psi = type(psi)(psi.layout, 1j * psi.amplitudes)
    assert abs(inner(psi, i_psi) - 1j) < 1e-15
    aa = inner(psi, psi)
    assert aa.imag == 0 and aa.real > 0


def test_inner_layout_mismatch():
    a = make_state(FactorLayout(1), [1, 0])
    b = make_state(FactorLayout(0, (GridAxis(8, 1.0),)), np.ones(8))
    with pytest.raises(ValueError):
        inner(a, b)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(1e-6, 1e6))
def test_make_state_norm_is_one(seed, scale):
    rng = np.random.default_rng(seed)
    lay = FactorLayout(2, (GridAxis(8, 1.0),))
    s = make_state(lay, scale * random_complex(rng, lay.dim))
    assert abs(np.linalg.norm(s.amplitudes) - 1) <= 1e-12


def test_boundary_leakage():
    ax = GridAxis(16, 4.0)
    lay = FactorLayout(0, (ax,))
    psi = np.zeros(16)
    psi[0] = psi[8] = 1
    assert boundary_leakage(make_state(lay, psi)) == pytest.approx(0.5)
    psi = np.zeros(16)
    psi[8] = 1
    assert boundary_leakage(make_state(lay, psi)) == 0
