import numpy as np
import pytest

from moutard.grid import (
    Domain,
    GridError,
    GridField,
    SampleError,
    bilinear_value,
    dbar,
    dz,
    sample,
)


@pytest.fixture
def unit_domain():
    return Domain(-1.0, 1.0, -1.0, 1.0, 33, 33)


class TestDomain:
    def test_rejects_tiny_grids(self):
        with pytest.raises(GridError):
            Domain(0, 1, 0, 1, 2, 5)
        with pytest.raises(GridError):
            Domain(0, 1, 0, 1, 5, 2)

    def test_rejects_empty_extent(self):
        with pytest.raises(GridError):
            Domain(1, 0, 0, 1, 5, 5)
        with pytest.raises(GridError):
            Domain(0, 1, 1, 1, 5, 5)

    def test_spacing(self):
        d = Domain(0, 1, 0, 2, 5, 9)
        assert d.h_x == pytest.approx(0.25)
        assert d.h_y == pytest.approx(0.25)
        assert d.shape == (9, 5)

    def test_node_index_roundtrip(self, unit_domain):
        j, i = unit_domain.node_index(0.5 - 0.25j)
        assert unit_domain.node(j, i) == 0.5 - 0.25j

    def test_node_index_off_grid(self, unit_domain):
        with pytest.raises(GridError):
            unit_domain.node_index(0.501 + 0j)
        with pytest.raises(GridError):
            unit_domain.node_index(5.0 + 0j)

    def test_center_index(self):
        d = Domain(-1, 1, -0.4, 1, 65, 65)
        j, i = d.center_index()
        assert d.xs()[i] == 0.0
        assert d.ys()[j] == pytest.approx(0.3)

    def test_refine_keeps_box(self, unit_domain):
        fine = unit_domain.refine()
        assert fine.n_x == 65 and fine.n_y == 65
        assert fine.h_x == pytest.approx(unit_domain.h_x / 2)


class TestSample:
    def test_identity_corners(self):
        d = Domain(0, 1, 0, 1, 3, 3)
        f = sample(lambda z: z, d)
        assert f.values[0, 0] == 0
        assert f.values[0, 2] == 1
        assert f.values[2, 0] == 1j
        assert f.values[2, 2] == 1 + 1j

    def test_constant(self, unit_domain):
        f = sample(lambda z: 1.0, unit_domain)
        assert np.all(f.values == 1.0)

    def test_square_value(self):
        d = Domain(0, 2, 0, 2, 3, 3)
        f = sample(lambda z: z**2, d)
        j, i = d.node_index(1 + 1j)
        assert f.values[j, i] == pytest.approx(2j)

    def test_failure_names_node(self):
        d = Domain(-1, 1, -1, 1, 5, 5)
        with pytest.raises(SampleError, match=r"x=0.*y=0"):
            sample(lambda z: 1.0 / z, d)

    def test_scalar_only_callable(self, unit_domain):
        import cmath

        f = sample(lambda z: cmath.exp(complex(z)), unit_domain)
        assert f.values[16, 16] == pytest.approx(1.0)

    def test_expression_division_failure_names_node(self):
        from moutard.expr import parse

        d = Domain(-1, 1, -1, 1, 5, 5)
        with pytest.raises(SampleError, match=r"x=0.*y=0"):
            sample(parse("1/z"), d)


class TestWirtinger:
    def test_dbar_holomorphic_linear(self, unit_domain):
        f = sample(lambda z: z, unit_domain)
        assert np.max(np.abs(dbar(f).values)) < 1e-13

    def test_dbar_antiholomorphic(self, unit_domain):
        f = sample(lambda z: np.conj(z), unit_domain)
        assert np.max(np.abs(dbar(f).values - 1.0)) < 1e-13

    def test_dbar_modulus_squared(self, unit_domain):
        f = sample(lambda z: z * np.conj(z), unit_domain)
        assert np.max(np.abs(dbar(f).values - unit_domain.zgrid())) < 1e-12

    def test_dz_mirrors(self, unit_domain):
        assert np.max(np.abs(dz(sample(lambda z: z, unit_domain)).values - 1.0)) < 1e-13
        assert np.max(np.abs(dz(sample(lambda z: np.conj(z), unit_domain)).values)) < 1e-13

    def test_dz_quadratic_exact(self, unit_domain):
        f = sample(lambda z: z**2, unit_domain)
        expected = 2 * unit_domain.zgrid()
        assert np.max(np.abs(dz(f).values - expected)) < 1e-12

    def test_quadratic_in_zbar_exact_everywhere(self, unit_domain):
        # one-sided boundary stencils are also exact on quadratics
        f = sample(lambda z: np.conj(z) ** 2, unit_domain)
        expected = 2 * np.conj(unit_domain.zgrid())
        assert np.max(np.abs(dbar(f).values - expected)) < 1e-12
        assert np.max(np.abs(dz(f).values)) < 1e-12

    def test_conjugation_identity(self, unit_domain):
        rng = np.random.default_rng(7)
        vals = rng.standard_normal(unit_domain.shape) + 1j * rng.standard_normal(unit_domain.shape)
        f = GridField(unit_domain, vals)
        lhs = dbar(f.conj()).values
        rhs = np.conj(dz(f).values)
        assert np.max(np.abs(lhs - rhs)) == 0.0

    def test_second_order_convergence(self):
        errs = []
        for d in (Domain(-1, 1, -1, 1, 33, 33), Domain(-1, 1, -1, 1, 65, 65)):
            f = sample(lambda z: np.exp(z), d)
            errs.append(np.max(np.abs(dbar(f).values[1:-1, 1:-1])))
        ratio = errs[0] / errs[1]
        assert 3.5 <= ratio <= 4.5


class TestGridField:
    def test_values_read_only(self, unit_domain):
        f = GridField.constant(unit_domain, 1.0)
        with pytest.raises(ValueError):
            f.values[0, 0] = 2.0

    def test_shape_mismatch(self, unit_domain):
        with pytest.raises(GridError):
            GridField(unit_domain, np.zeros((3, 3)))

    def test_arithmetic(self, unit_domain):
        f = GridField.constant(unit_domain, 2.0)
        g = GridField.constant(unit_domain, 1j)
        assert np.all((f + g).values == 2 + 1j)
        assert np.all((f - g).values == 2 - 1j)
        assert np.all((f * g).values == 2j)
        assert np.all((f / 2).values == 1.0)
        assert np.all((1 - f).values == -1.0)
        assert np.all((-f).values == -2.0)
        assert np.all(g.conj().values == -1j)

    def test_domain_mismatch(self, unit_domain):
        other = Domain(-1, 1, -1, 1, 17, 17)
        with pytest.raises(GridError):
            GridField.constant(unit_domain, 1.0) + GridField.constant(other, 1.0)


class TestBilinear:
    def test_node_exact(self, unit_domain):
        f = sample(lambda z: z**3, unit_domain)
        assert bilinear_value(f, 0.5 - 0.25j) == f.values[unit_domain.node_index(0.5 - 0.25j)]

    def test_bilinear_profile_exact(self, unit_domain):
        f = sample(lambda z: 2 + 3 * z.real + 1j * z.imag + 0.5 * z.real * z.imag, unit_domain)
        p = 0.1234 + 0.4321j
        expected = 2 + 3 * p.real + 1j * p.imag + 0.5 * p.real * p.imag
        assert bilinear_value(f, p) == pytest.approx(expected, abs=1e-14)

    def test_outside_rejected(self, unit_domain):
        with pytest.raises(GridError):
            bilinear_value(GridField.constant(unit_domain, 1.0), 2 + 0j)
