import numpy as np
import pytest

from moutard.dirac import (
    DiracPair,
    OmegaMatrix,
    SeedPair,
    SingularGridError,
    assemble_omega,
    det_field,
    omega_column,
    omega_row,
    singular_mask,
    transform,
    transform_conjugate_solution,
    transform_solution,
    transform_u,
    transform_v,
)
from moutard.grid import Domain, GridError, GridField, sample


def _const_pair(d, value):
    f = GridField.constant(d, value)
    return f, GridField(d, np.conj(f.values))


def _ga_seed(d, psi, psip):
    """Lifted constant-seed pair."""
    p1, p2 = _const_pair(d, psi)
    q1, q2 = _const_pair(d, psip)
    return SeedPair(p1, p2, q1, q2)


def _family_seeds(d):
    """The two-seed constant family used by the circle-pole example."""
    return [_ga_seed(d, 1.0, 1.0), _ga_seed(d, 1j, 1j)]


_FAMILY_CONSTANTS = 1j * np.array([[0.0, 2.0], [-2.0, 0.0]])


class TestAssemble:
    def test_single_constant_seed(self):
        d = Domain(-1, 1, -1, 1, 33, 33)
        om = assemble_omega([_ga_seed(d, 1.0, 1.0)], [[1j]], anchor=0j, imaginary=True)
        expected = 2j * d.zgrid().imag + 1j
        assert np.max(np.abs(om.entry(0, 0).values - expected)) < 1e-13

    def test_two_seed_family_matrix(self):
        d = Domain(-2, 2, -2, 2, 33, 33)
        om = assemble_omega(_family_seeds(d), _FAMILY_CONSTANTS, anchor=0j, imaginary=True)
        z = d.zgrid()
        # entries[k][j]: row k, column j
        np.testing.assert_allclose(om.entries[0][0].values, 2j * z.imag, atol=1e-13)
        np.testing.assert_allclose(om.entries[0][1].values, 2j * z.real - 2j, atol=1e-13)
        np.testing.assert_allclose(om.entries[1][0].values, 2j * z.real + 2j, atol=1e-13)
        np.testing.assert_allclose(om.entries[1][1].values, -2j * z.imag, atol=1e-13)

    def test_zero_seeds_give_constant_matrix(self):
        d = Domain(-1, 1, -1, 1, 17, 17)
        zero = GridField.constant(d, 0.0)
        seed = SeedPair(zero, zero, zero, zero)
        om = assemble_omega([seed], [[2.5j]], imaginary=True)
        assert np.all(om.entry(0, 0).values == 2.5j)

    def test_domain_mismatch(self):
        a = _ga_seed(Domain(-1, 1, -1, 1, 17, 17), 1.0, 1.0)
        b = _ga_seed(Domain(-1, 1, -1, 1, 33, 33), 1.0, 1.0)
        with pytest.raises(GridError):
            assemble_omega([a, b])

    def test_matrix_must_be_square(self):
        d = Domain(-1, 1, -1, 1, 17, 17)
        f = GridField.constant(d, 1.0)
        with pytest.raises(GridError):
            OmegaMatrix(((f, f),))


class TestDet:
    def test_single_entry(self):
        d = Domain(-1, 1, -1, 1, 17, 17)
        entry = sample(lambda z: z + 2j, d)
        det = det_field(OmegaMatrix(((entry,),)))
        np.testing.assert_array_equal(det.values, entry.values)

    def test_diagonal(self):
        d = Domain(-1, 1, -1, 1, 17, 17)
        a = sample(lambda z: z + 3, d)
        b = sample(lambda z: 1j * z - 1, d)
        zero = GridField.constant(d, 0.0)
        det = det_field(OmegaMatrix(((a, zero), (zero, b))))
        np.testing.assert_allclose(det.values, a.values * b.values, rtol=1e-14)

    def test_family_determinant(self):
        d = Domain(-2, 2, -2, 2, 65, 65)
        om = assemble_omega(_family_seeds(d), _FAMILY_CONSTANTS, anchor=0j, imaginary=True)
        det = det_field(om)
        expected = 4 * np.abs(d.zgrid()) ** 2 - 4  # oracle: 4y^2 + 4(x^2 - 1)
        assert np.max(np.abs(det.values - expected)) < 1e-12


class TestTransformU:
    def test_single_seed_line_pole(self):
        # pole line y = -1/2 lies outside this domain
        d = Domain(-1, 1, -0.4, 1, 65, 65)
        om = assemble_omega([_ga_seed(d, 1.0, 1.0)], [[1j]], anchor=0j, imaginary=True)
        u_t = transform_u(om, [_ga_seed(d, 1.0, 1.0)], GridField.constant(d, 0.0))
        expected = -1j / (2 * d.zgrid().imag + 1)
        assert np.max(np.abs(u_t.values - expected)) < 1e-13

    def test_family_against_independent_solver(self):
        d = Domain(-2, 2, -2, 2, 33, 33)
        seeds = _family_seeds(d)
        om = assemble_omega(seeds, _FAMILY_CONSTANTS, anchor=0j, imaginary=True)
        u_t = transform_u(om, seeds, GridField.constant(d, 0.0))
        rng = np.random.default_rng(0)
        a = om.stack().reshape(d.shape + (2, 2))
        col = np.array([1.0, -1j])
        row = np.array([1.0, 1j])
        for _ in range(10):
            j = int(rng.integers(1, d.n_y - 1))
            i = int(rng.integers(1, d.n_x - 1))
            if np.isnan(u_t.values[j, i]):
                continue
            oracle = row @ np.linalg.solve(a[j, i], col)
            assert u_t.values[j, i] == pytest.approx(oracle, rel=1e-11, abs=1e-12)

    def test_zero_seeds_identity(self):
        d = Domain(-1, 1, -1, 1, 17, 17)
        zero = GridField.constant(d, 0.0)
        seed = SeedPair(zero, zero, zero, zero)
        om = assemble_omega([seed], [[1j]], imaginary=True)
        u = sample(lambda z: np.sin(z.real) + 1j * z.imag, d)
        u_t = transform_u(om, [seed], u)
        np.testing.assert_array_equal(u_t.values, u.values)


class TestTransformV:
    def test_reduced_inputs_conjugate_pairing(self):
        d = Domain(-1, 1, -0.4, 1, 33, 33)
        seeds = [_ga_seed(d, 1.0 + 0.5j, 2.0 - 1j)]
        om = assemble_omega(seeds, [[1j]], anchor=0j, imaginary=True)
        u = GridField.constant(d, 0.0)
        u_t = transform_u(om, seeds, u)
        v_t = transform_v(om, seeds, u.conj())
        assert np.max(np.abs(v_t.values - np.conj(u_t.values))) == 0.0

    def test_explicit_value(self):
        d = Domain(-1, 1, -0.4, 1, 33, 33)
        seeds = [_ga_seed(d, 1.0, 1.0)]
        om = assemble_omega(seeds, [[1j]], anchor=0j, imaginary=True)
        v_t = transform_v(om, seeds, GridField.constant(d, 0.0))
        expected = np.conj(-1j / (2 * d.zgrid().imag + 1))
        assert np.max(np.abs(v_t.values - expected)) < 1e-13

    def test_zero_seeds_identity(self):
        d = Domain(-1, 1, -1, 1, 17, 17)
        zero = GridField.constant(d, 0.0)
        seed = SeedPair(zero, zero, zero, zero)
        om = assemble_omega([seed], [[1j]], imaginary=True)
        v = sample(lambda z: z**2, d)
        np.testing.assert_array_equal(transform_v(om, [seed], v).values, v.values)


class TestTransformSolutions:
    def test_annihilation(self):
        d = Domain(-1, 1, -0.4, 1, 33, 33)
        seeds = [_ga_seed(d, 1.0, 1.0)]
        om = assemble_omega(seeds, [[1j]], anchor=0j, imaginary=True)
        target = seeds[0].solution()
        col = omega_column(target, seeds, [1j], anchor=0j, imaginary=True)
        psi_t = transform_solution(om, seeds, target, col)
        assert np.max(np.abs(psi_t.psi1.values)) < 1e-14
        assert np.max(np.abs(psi_t.psi2.values)) < 1e-14

    def test_hand_value(self):
        d = Domain(-1, 1, -0.4, 1, 65, 65)
        seeds = [_ga_seed(d, 1.0, 1.0)]
        om = assemble_omega(seeds, [[1j]], anchor=0j, imaginary=True)
        ones = GridField.constant(d, 1.0)
        target = DiracPair(ones, ones)
        col = omega_column(target, seeds, [0j], anchor=0j, imaginary=True)
        psi_t = transform_solution(om, seeds, target, col)
        expected = 1.0 / (2 * d.zgrid().imag + 1)
        assert np.max(np.abs(psi_t.psi1.values - expected)) < 1e-13

    def test_zero_seeds_identity(self):
        d = Domain(-1, 1, -1, 1, 17, 17)
        zero = GridField.constant(d, 0.0)
        seed = SeedPair(zero, zero, zero, zero)
        om = assemble_omega([seed], [[1j]], imaginary=True)
        target = DiracPair(sample(lambda z: z, d), sample(lambda z: np.conj(z), d))
        col = omega_column(target, [seed], [0j], imaginary=True)
        psi_t = transform_solution(om, [seed], target, col)
        np.testing.assert_array_equal(psi_t.psi1.values, target.psi1.values)

    def test_conjugate_annihilation(self):
        d = Domain(-2, 2, -2, 2, 33, 33)
        seeds = _family_seeds(d)
        om = assemble_omega(seeds, _FAMILY_CONSTANTS, anchor=0j, imaginary=True)
        target = seeds[1].conjugate_solution()
        # constants of column k = 2 of the matrix
        row_consts = [_FAMILY_CONSTANTS[0][1], _FAMILY_CONSTANTS[1][1]]
        row = omega_row(target, seeds, row_consts, anchor=0j, imaginary=True)
        psip_t = transform_conjugate_solution(om, seeds, target, row)
        keep = ~np.isnan(psip_t.psi1.values)
        assert np.max(np.abs(psip_t.psi1.values[keep])) < 1e-12

    def test_conjugate_zero_seeds_identity(self):
        d = Domain(-1, 1, -1, 1, 17, 17)
        zero = GridField.constant(d, 0.0)
        seed = SeedPair(zero, zero, zero, zero)
        om = assemble_omega([seed], [[1j]], imaginary=True)
        target = DiracPair(sample(lambda z: z**2, d), sample(lambda z: 1j * z, d))
        row = omega_row(target, [seed], [0j], imaginary=True)
        psip_t = transform_conjugate_solution(om, [seed], target, row)
        np.testing.assert_array_equal(psip_t.psi1.values, target.psi1.values)
        np.testing.assert_array_equal(psip_t.psi2.values, target.psi2.values)

    def test_conjugate_hand_value(self):
        d = Domain(-1, 1, -0.4, 1, 65, 65)
        seeds = [_ga_seed(d, 1.0, 1.0)]
        om = assemble_omega(seeds, [[1j]], anchor=0j, imaginary=True)
        ones = GridField.constant(d, 1.0)
        target = DiracPair(ones, ones)
        row = omega_row(target, seeds, [0j], anchor=0j, imaginary=True)
        psip_t = transform_conjugate_solution(om, seeds, target, row)
        expected = 1.0 / (2 * d.zgrid().imag + 1)
        assert np.max(np.abs(psip_t.psi1.values - expected)) < 1e-13


class TestFullTransform:
    def test_mask_matches_threshold(self):
        d = Domain(-2, 2, -2, 2, 65, 65)
        seeds = _family_seeds(d)
        u = GridField.constant(d, 0.0)
        ones = GridField.constant(d, 1.0)
        target = DiracPair(ones, ones)
        res = transform(seeds, u, u.conj(), target, target, _FAMILY_CONSTANTS,
                        anchor=0j, imaginary=True)
        mask, eps = singular_mask(res.det, 1e-8)
        np.testing.assert_array_equal(res.mask, mask)
        np.testing.assert_array_equal(res.mask, np.abs(res.det.values) < eps)
        assert res.mask.sum() == 4  # grid nodes exactly on the unit circle
        for fld in (res.u_t, res.v_t, res.psi_t.psi1, res.psip_t.psi1):
            assert np.all(np.isnan(fld.values[res.mask]))
            assert np.all(np.isfinite(fld.values[~res.mask]))

    def test_carries_residual_certificates(self):
        d = Domain(-1, 1, -0.4, 1, 33, 33)
        seeds = [_ga_seed(d, 1.0, 1.0)]
        ones = GridField.constant(d, 1.0)
        u = GridField.constant(d, 0.0)
        res = transform(seeds, u, u.conj(), DiracPair(ones, ones), DiracPair(ones, ones),
                        [[1j]], [0j], [0j], anchor=0j, imaginary=True)
        assert set(res.residuals) == {"dirac", "dirac_conj"}
        assert res.residuals["dirac"] < 2.0  # pole-adjacent stencil constant; order tested elsewhere

    def test_identity_when_no_seeds(self):
        d = Domain(-1, 1, -1, 1, 17, 17)
        u = sample(lambda z: z, d)
        v = sample(lambda z: np.conj(z), d)
        target = DiracPair(u, v)
        res = transform([], u, v, target, target)
        np.testing.assert_array_equal(res.u_t.values, u.values)
        np.testing.assert_array_equal(res.psi_t.psi1.values, u.values)
        assert not res.mask.any()
        assert np.all(res.det.values == 1.0)

    def test_non_reduced_certificates_converge(self):
        # mixed holomorphic/antiholomorphic seeds with a real constant:
        # exercises the system-level route outside the reduced symmetry class
        from moutard.verify import max_norm, residual_dirac, residual_dirac_conjugate

        maxes = []
        for n in (33, 65):
            d = Domain(-1, 1, -1, 1, n, n)
            z = sample(lambda t: t, d)
            zb = sample(np.conj, d)
            one = GridField.constant(d, 1.0)
            zero = GridField.constant(d, 0.0)
            seed = SeedPair(z, zb, one, one)
            target = DiracPair(one, zero)
            res = transform([seed], zero, zero, target, target, [[1.0]], [0.0], [0.0])
            assert not res.mask.any()
            r = residual_dirac(res.u_t, res.v_t, res.psi_t)
            rc = residual_dirac_conjugate(res.u_t, res.v_t, res.psip_t)
            maxes.append(max(max_norm(r, res.mask), max_norm(rc, res.mask)))
        assert 3.0 <= maxes[0] / maxes[1] <= 5.0

    def test_all_singular_raises(self):
        d = Domain(-1, 1, -1, 1, 17, 17)
        zero = GridField.constant(d, 0.0)
        seed = SeedPair(zero, zero, zero, zero)
        with pytest.raises(SingularGridError):
            transform([seed], zero, zero, DiracPair(zero, zero), DiracPair(zero, zero))
