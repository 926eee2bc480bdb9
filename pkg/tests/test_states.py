import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bellforge.linalg import kron, purity, reduced_state
from bellforge.numeric import ContractError, UnknownNameError
from bellforge.operators import fourier, omega
from bellforge.states import (PureState, ame43, apply_local, framed_quasi_ghz, ghz, ghz_frame, parse_state,
                              quasi_ghz, reduction_purities, state_from_json)

from conftest import random_unitary

W = omega(3)
GAMMA_CGLMP = (np.sqrt(11) - np.sqrt(3)) / 2


def basis_index(digits, d):
    return sum(x * d ** (len(digits) - 1 - k) for k, x in enumerate(digits))


class TestConstructors:
    def test_bell(self):
        assert np.allclose(ghz(2, 2).amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))

    def test_norm(self):
        assert np.linalg.norm(ghz(3, 3).amplitudes) == pytest.approx(1.0)

    def test_big_endian(self):
        psi = quasi_ghz(2, 2.0)
        assert psi.amplitudes[basis_index((1, 1), 3)] == pytest.approx(2 / np.sqrt(6))

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_quasi_at_one_is_ghz(self, n):
        assert np.allclose(quasi_ghz(n, 1.0).amplitudes, ghz(n, 3).amplitudes)

    def test_quasi_cglmp(self):
        psi = quasi_ghz(2, GAMMA_CGLMP).amplitudes
        norm = np.sqrt(2 + GAMMA_CGLMP**2)
        assert psi[0] == pytest.approx(1 / norm) and psi[4] == pytest.approx(GAMMA_CGLMP / norm)

    @pytest.mark.parametrize("gamma", [0.0, -1.0])
    def test_quasi_bad_gamma(self, gamma):
        with pytest.raises(ValueError):
            quasi_ghz(2, gamma)

    def test_ame_amplitudes(self):
        psi = ame43()
        assert psi.amplitudes[0] == pytest.approx(1 / 9)
        for i, j, k, l in itertools.product(range(3), repeat=4):
            expected = W ** (j * (i - k) + l * (i + k)) / 9
            assert psi.amplitudes[basis_index((i, j, k, l), 3)] == pytest.approx(expected)

    def test_norm_contract(self):
        with pytest.raises(ContractError):
            PureState(1, 2, [1.0, 1.0])
        with pytest.raises(ValueError):
            PureState(2, 2, [1.0, 0, 0])


class TestPurities:
    def test_product(self):
        v = np.zeros(27)
        v[0] = 1
        rep = reduction_purities(PureState(3, 3, v))
        assert all(p == pytest.approx(1.0) for p in rep.values(1))

    def test_ghz43(self):
        rep = reduction_purities(ghz(4, 3))
        assert np.allclose(rep.values(2), 1 / 3) and np.allclose(rep.values(1), 1 / 3)
        assert len(rep.values(2)) == 6

    def test_ghz63(self):
        assert np.allclose(reduction_purities(ghz(6, 3)).values(3), 1 / 3)

    def test_ame(self):
        rep = reduction_purities(ame43())
        assert np.allclose(rep.values(1), 1 / 3, atol=1e-10)
        assert np.allclose(rep.values(2), 1 / 9, atol=1e-10)

    def test_quasi_continuity(self):
        gammas = np.linspace(0.5, 2.0, 31)
        p = [purity(reduced_state(quasi_ghz(2, g).amplitudes, [0], 2, 3)) for g in gammas]
        assert np.max(np.abs(np.diff(p))) < 0.02
        assert purity(reduced_state(quasi_ghz(2, 1.0).amplitudes, [0], 2, 3)) == pytest.approx(1 / 3)

    def test_summary_and_dict(self):
        rep = reduction_purities(ghz(4, 3))
        lo, hi = rep.summary()[2]
        assert lo == pytest.approx(1 / 3) and hi == pytest.approx(1 / 3)
        assert set(rep.to_dict()) == {"1", "2"}


class TestApplyLocal:
    def test_identity(self):
        psi = ame43()
        assert np.allclose(apply_local([np.eye(3)] * 4, psi).amplitudes, psi.amplitudes)

    def test_fourier_on_bell(self):
        phi = apply_local([np.eye(3), fourier(3)], ghz(2, 3)).tensor()
        expected = np.array([[W ** (j * k) for k in range(3)] for j in range(3)]) / 3
        assert np.allclose(phi, expected)

    def test_ifff_ghz(self):
        phi = apply_local([np.eye(3)] + [fourier(3)] * 3, ghz(4, 3))
        assert np.linalg.norm(phi.amplitudes) == pytest.approx(1.0)
        t = phi.tensor()
        for i, j, k, l in itertools.product(range(3), repeat=4):
            assert t[i, j, k, l] == pytest.approx(W ** (i * (j + k + l)) / 9)

    def test_matches_kron(self, rng):
        us = [random_unitary(rng, 3) for _ in range(3)]
        psi = quasi_ghz(3, 1.3)
        assert np.allclose(apply_local(us, psi).amplitudes, kron(us) @ psi.amplitudes)

    def test_non_unitary(self):
        with pytest.raises(ContractError):
            apply_local([np.eye(3), 2 * np.eye(3)], ghz(2, 3))

    @given(st.integers(0, 2**32 - 1))
    def test_purity_invariance(self, seed):
        rng = np.random.default_rng(seed)
        psi = PureState.normalized(4, 3, rng.normal(size=81) + 1j * rng.normal(size=81))
        moved = apply_local([random_unitary(rng, 3) for _ in range(4)], psi)
        a, b = reduction_purities(psi), reduction_purities(moved)
        for size in (1, 2):
            assert np.allclose(a.values(size), b.values(size), atol=1e-10)


class TestGhzFrame:
    @pytest.mark.parametrize("n,gamma", [(2, GAMMA_CGLMP), (3, 1.186), (4, 0.6)])
    def test_recovers_hidden_frames(self, rng, n, gamma):
        frames = [random_unitary(rng, 3) for _ in range(n)]
        psi = apply_local(frames, quasi_ghz(n, gamma))
        found, coef, residual = ghz_frame(psi)
        assert residual < 1e-8
        assert coef / coef[0] == pytest.approx([1, gamma, 1], abs=1e-8)
        rebuilt = framed_quasi_ghz(found, gamma)
        assert abs(np.vdot(rebuilt.amplitudes, psi.amplitudes)) == pytest.approx(1.0, abs=1e-9)

    def test_single_party(self):
        with pytest.raises(ValueError):
            ghz_frame(PureState(1, 3, [1, 0, 0]))


class TestParse:
    def test_registry(self):
        assert parse_state("ghz:4,3").n == 4
        assert parse_state("quasi:2,0.5").amplitudes[4] == pytest.approx(0.5 / np.sqrt(2.25))
        assert parse_state("ame43").label == "ame43"
        assert parse_state("bell+").d == 2 and parse_state("bell+:3").d == 3

    @pytest.mark.parametrize("bad", ["w:3", "ghz:x", "quasi:2,-1"])
    def test_unknown(self, bad):
        with pytest.raises(UnknownNameError):
            parse_state(bad)

    def test_json_round_trip(self, tmp_path):
        psi = ame43()
        path = tmp_path / "s.json"
        path.write_text(json.dumps(psi.to_dict()))
        back = parse_state(str(path))
        assert np.allclose(back.amplitudes, psi.amplitudes, atol=1e-15) and back.n == 4

    def test_bare_list(self):
        psi = state_from_json([[1, 0], [0, 0], [0, 0], [1, 0]])
        assert (psi.n, psi.d) == (2, 2)
