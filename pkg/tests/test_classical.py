import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bellforge.classical import (DeterministicStrategy, classical_report, enumerate_bound, strategy_count,
                                 strategy_value)
from bellforge.numeric import CapacityError
from bellforge.polynomial import catalog, from_coefficients, mermin

SQ3 = np.sqrt(3)
W = np.exp(2j * np.pi / 3)
SEEDS = st.integers(0, 2**32 - 1)


def brute_force(coeffs, d):
    """Re/Im extrema by plain loops, last party's last setting varying slowest."""
    n, s = coeffs.ndim, coeffs.shape[0]
    vals = []
    for flat in itertools.product(range(d), repeat=n * s):
        o = np.array(flat[::-1]).reshape(n, s)
        v = 0j
        for idx in itertools.product(range(s), repeat=n):
            term = coeffs[idx]
            for k in range(n):
                term = term * W ** o[k, idx[k]]
            v += term
        vals.append(v)
    vals = np.array(vals)
    return vals.real.max(), vals.real.min(), vals.imag.max(), vals.imag.min()


class TestStrategyValue:
    def test_chsh_all_plus(self):
        strat = DeterministicStrategy(np.zeros((2, 2), dtype=int), 2)
        assert strategy_value(catalog("chsh"), strat) == 2

    def test_c223_all_zero(self):
        # outcome index 0 is the root 1, so the value is the coefficient sum 2w - 2
        strat = DeterministicStrategy(np.zeros((2, 2), dtype=int), 3)
        assert strategy_value(catalog("c223"), strat) == pytest.approx(2 * W - 2)

    def test_c223_symbolic(self):
        # a(w b - b') + a'(w b' - b) with outcomes a=w, a'=1, b=w^2, b'=w
        a, ap, b, bp = W, 1, W**2, W
        expected = a * (W * b - bp) + ap * (W * bp - b)
        strat = DeterministicStrategy(np.array([[1, 0], [2, 1]]), 3)
        assert strategy_value(catalog("c223"), strat) == pytest.approx(expected)

    def test_zero(self):
        p = from_coefficients(2, 2, 3, np.zeros(4))
        assert strategy_value(p, DeterministicStrategy(np.array([[1, 2], [0, 1]]), 3)) == 0

    def test_c223h_residue_alphabet(self):
        # outcome indices 0, 1, 2 carry the values 0, 1, -1
        p = catalog("c223h")
        strat = DeterministicStrategy(np.zeros((2, 2), dtype=int), 3)
        assert strategy_value(p, strat) == pytest.approx(2.0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            strategy_value(catalog("c333"), DeterministicStrategy(np.zeros((2, 2), dtype=int), 3))

    def test_range(self):
        with pytest.raises(ValueError):
            DeterministicStrategy(np.array([[0, 3]]), 3)

    def test_index_round_trip(self):
        for i in (0, 17, 80):
            assert DeterministicStrategy.from_index(i, 2, 2, 3).index() == i


class TestBounds:
    def test_chsh(self):
        value, witness = enumerate_bound(catalog("chsh"))
        assert value == 2
        assert strategy_value(catalog("chsh"), witness).real == 2

    def test_c223(self):
        assert enumerate_bound(catalog("c223"), "Amax")[0] == pytest.approx(SQ3, abs=1e-12)

    def test_c423(self):
        rep = classical_report(catalog("c423"))
        assert rep.Amax == pytest.approx(3 * SQ3, abs=1e-9) and rep.Amin == pytest.approx(-6 * SQ3, abs=1e-9)
        assert rep.pattern_flags() == {"min_is_minus_two_max": True, "sqrt3_between_maxima": True}

    def test_c623(self):
        rep = classical_report(catalog("c623"))
        assert [rep.Amax, rep.Amin, rep.Hmax, rep.Hmin] == pytest.approx([9 * SQ3, -18 * SQ3, 27, -27], abs=1e-9)

    def test_c233(self):
        assert classical_report(catalog("c233")).Hmax == pytest.approx(4.5, abs=1e-12)

    def test_c433ghz(self):
        rep = classical_report(catalog("c433ghz"))
        assert rep.Hmax == pytest.approx(13.5, abs=1e-9) and rep.Hmin == pytest.approx(-27, abs=1e-9)
        assert rep.count == 3**12

    def test_svetlichny_and_mermin(self):
        assert classical_report(catalog("svetlichny3")).Hmax == 4
        rep = classical_report(mermin(3))
        assert rep.Hmax * rep.display_scale == 2

    @pytest.mark.parametrize("d", [3, 4, 5])
    def test_c22d(self, d):
        assert classical_report(catalog(f"c22d:{d}")).Hmax == pytest.approx(2, abs=1e-9)

    def test_witnesses_achieve(self):
        p = catalog("c333")
        rep = classical_report(p)
        for obj, strat in rep.witnesses.items():
            v = strategy_value(p, strat)
            assert (v.real if obj[0] == "H" else v.imag) == pytest.approx(rep.values[obj], abs=1e-12)

    def test_first_witness_in_counter_order(self):
        value, witness = enumerate_bound(catalog("chsh"))
        first = next(i for i in range(16)
                     if strategy_value(catalog("chsh"), DeterministicStrategy.from_index(i, 2, 2, 2)).real == value)
        assert witness.index() == first

    def test_guard(self):
        with pytest.raises(CapacityError, match="531441"):
            enumerate_bound(catalog("c433ghz"), guard=1000)
        assert strategy_count(catalog("c433ghz")) == 531441

    def test_objective(self):
        with pytest.raises(ValueError):
            enumerate_bound(catalog("chsh"), "max")

    def test_report_dict(self):
        out = classical_report(mermin(3)).to_dict()
        assert out["values"]["Hmax"] == 2 and out["witnesses"]["Hmax"]


class TestProperties:
    @settings(max_examples=60)
    @given(SEEDS)
    def test_brute_force_oracle(self, seed):
        rng = np.random.default_rng(seed)
        c = rng.integers(-3, 4, size=(2, 2)) + 1j * rng.integers(-3, 4, size=(2, 2))
        p = from_coefficients(2, 2, 3, c)
        rep = classical_report(p)
        hmax, hmin, amax, amin = brute_force(p.coeffs, 3)
        assert (rep.Hmax, rep.Hmin, rep.Amax, rep.Amin) == pytest.approx((hmax, hmin, amax, amin), abs=1e-12)

    @settings(max_examples=60)
    @given(SEEDS, st.integers(1, 27), st.integers(1, 4))
    def test_chunk_determinism(self, seed, chunks, workers):
        rng = np.random.default_rng(seed)
        c = rng.integers(-2, 3, size=(2, 2, 2)) + 1j * rng.integers(-2, 3, size=(2, 2, 2))
        p = from_coefficients(3, 2, 3, c)
        ref = classical_report(p, chunks=1, workers=1)
        rep = classical_report(p, chunks=chunks, workers=workers)
        assert rep.values == ref.values
        assert {k: w.index() for k, w in rep.witnesses.items()} == {k: w.index() for k, w in ref.witnesses.items()}

    @settings(max_examples=50)
    @given(SEEDS, st.integers(0, 1), st.integers(1, 2))
    def test_outcome_phase_covariance(self, seed, party, shift):
        rng = np.random.default_rng(seed)
        c = rng.integers(-3, 4, size=(2, 2)) + 1j * rng.integers(-3, 4, size=(2, 2))
        p = from_coefficients(2, 2, 3, c)
        values, shifted = [], []
        for i in range(strategy_count(p)):
            strat = DeterministicStrategy.from_index(i, 2, 2, 3)
            moved = strat.outcomes.copy()
            moved[party] = (moved[party] + shift) % 3
            values.append(strategy_value(p, strat))
            shifted.append(strategy_value(p, DeterministicStrategy(moved, 3)))
        # the shift permutes strategies and rotates each value by w^shift
        assert np.allclose(shifted, W**shift * np.array(values))
        key = lambda z: (round(z.real, 9), round(z.imag, 9))
        assert sorted(map(key, shifted)) == sorted(map(key, values))
        rotated = from_coefficients(2, 2, 3, W**shift * c)
        assert classical_report(rotated).values == pytest.approx(classical_report(p).values, abs=1e-12)
