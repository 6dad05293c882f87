import numpy as np
import pytest

from admflux.catalog import CatalogSpec, build, laplacian_u, rt_violator, standard_catalog, translated
from admflux.curvature import scalar_curvature
from admflux.errors import ConfigError
from admflux.invariants import adm_mass_at
from admflux.metric_field import decay_report, jet2_batch
from admflux.surfaces import sphere_quadrature

from conftest import sample_points


class TestBuild:
    def test_flat_jets(self):
        field = build(CatalogSpec(kind="flat"))
        jet = field.jet_at(np.array([1.0, 2.0, 3.0]))
        assert np.array_equal(jet.g, np.eye(3))
        assert not jet.dg.any() and not jet.ddg.any()
        assert field.metadata["expected_mass"] == 0.0
        assert field.metadata["globally_smooth"]

    def test_schwarzschild_metadata(self, catalog):
        meta = catalog["schwarzschild"].metadata
        assert meta["expected_mass"] == 1.0
        assert meta["scalar_flat"]
        assert not meta["globally_smooth"]
        assert np.array_equal(catalog["schwarzschild-translated"].metadata["expected_center"],
                              [1.0, 2.0, 3.0])

    def test_translation_is_composition(self, catalog, rng):
        centered = catalog["schwarzschild"]
        shifted = catalog["schwarzschild-translated"]
        c = np.array([1.0, 2.0, 3.0])
        for x in sample_points(rng, 10, r_min=10.0, r_max=40.0):
            a = shifted.jet_at(x)
            b = centered.jet_at(x - c)
            assert np.array_equal(a.g, b.g)
            assert np.array_equal(a.dg, b.dg)
            assert np.array_equal(a.ddg, b.ddg)

    def test_translated_helper(self):
        spec = CatalogSpec(kind="schwarzschild", mass=1.0, center=(1.0, 0.0, 0.0))
        moved = translated(spec, (0.0, 2.0, 0.0))
        assert moved.center == (1.0, 2.0, 0.0)

    def test_schwarzschild_five_dimensional(self):
        # u = 1 + 1/(2 rho^3), metric u^(4/3) delta; flux mass m u^(1/3) -> m
        field = build(CatalogSpec(kind="schwarzschild", dim=5, mass=1.0))
        x = np.zeros(5)
        x[0] = 2.0
        u = 1 + 1 / (2 * 2.0**3)
        jet = field.jet_at(x)
        assert jet.g[0, 0] == pytest.approx(u ** (4.0 / 3.0), rel=1e-13)
        for r in (10.0, 100.0):
            got = adm_mass_at(field, sphere_quadrature(5, r, order=12))
            expected = 1.0 * (1 + 1 / (2 * r**3)) ** (1.0 / 3.0)
            assert got == pytest.approx(expected, rel=1e-10)
        assert field.metadata["expected_mass"] == 1.0

    def test_conformal_mass_metadata(self):
        field = build(CatalogSpec(kind="conformal", u_coeffs=((1, 1.0), (2, 1.0))))
        assert field.metadata["expected_mass"] == 2.0
        slow = build(CatalogSpec(kind="conformal", dim=5, u_coeffs=((1, 1.0),)))
        assert slow.metadata["expected_mass"] is None

    def test_harmonic_conformal_scalar_flat(self, rng):
        field = build(CatalogSpec(kind="conformal", u_coeffs=((1, 0.7),)))
        assert field.metadata["scalar_flat"]
        for x in sample_points(rng, 100):
            assert abs(scalar_curvature(field.jet_at(x))) < 1e-9

    def test_laplacian_helper(self, catalog):
        spec = catalog["conformal"].metadata["spec"]
        pts = np.array([[5.0, 0.0, 0.0], [0.0, 10.0, 0.0]])
        got = laplacian_u(spec, pts)
        assert np.allclose(got, [2.0 / 5.0**4, 2.0 / 10.0**4], rtol=1e-13)

    def test_perturbed_inherits_base_smoothness(self, catalog):
        assert catalog["perturbed-gaussian"].metadata["globally_smooth"]
        bumped_schw = build(
            CatalogSpec(
                kind="perturbed",
                base=CatalogSpec(kind="schwarzschild", mass=1.0),
                bump_amplitude=0.01,
            )
        )
        assert not bumped_schw.metadata["globally_smooth"]

    def test_perturbed_parity_parts(self, rng):
        for parity, sign in (("even", 1.0), ("odd", -1.0)):
            field = build(
                CatalogSpec(
                    kind="perturbed",
                    base=CatalogSpec(kind="flat"),
                    bump_amplitude=0.05,
                    bump_width=2.0,
                    bump_location=(4.0, 1.0, 0.0),
                    bump_parity=parity,
                )
            )
            for x in sample_points(rng, 5):
                here = field.jet_at(x)
                there = field.jet_at(-x)
                assert np.allclose(here.h, sign * there.h, atol=1e-15)


class TestRtViolator:
    def test_decay_verdicts(self):
        field = rt_violator(3, amplitude=0.5)
        radii = [10.0, 10.0**1.5, 100.0, 10.0**2.5, 1000.0]
        odd = decay_report(field, radii, tau=1.5, part="odd")
        assert not odd.ok
        # the weighted sup is constant by scale invariance of the deviation
        assert np.allclose(odd.sups[:, 0], 0.5, rtol=1e-12)
        assert decay_report(field, radii, tau=0.5, part="all").ok

    def test_flux_mass_vanishes_by_parity(self):
        field = rt_violator(3, amplitude=0.5)
        got = adm_mass_at(field, sphere_quadrature(3, 100.0, order=16))
        assert abs(got) < 1e-13
        assert field.metadata["expected_mass"] == 0.0

    def test_dimension_guard(self):
        with pytest.raises(ConfigError):
            rt_violator(2)


class TestCatalogWideProperties:
    def test_all_fields_satisfy_mass_hypothesis_decay(self, catalog):
        radii = [10.0, 10.0**1.5, 100.0, 10.0**2.5, 1000.0]
        for name, field in catalog.items():
            rep = decay_report(field, radii, tau=0.5, part="all")
            assert rep.ok, name

    def test_jets_vectorize_consistently(self, catalog, rng):
        pts = sample_points(rng, 7)
        for field in catalog.values():
            g, dg, ddg = jet2_batch(field, pts)
            assert g.shape == (7, 3, 3)
            assert dg.shape == (7, 3, 3, 3)
            assert ddg.shape == (7, 3, 3, 3, 3)


class TestValidation:
    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            build(CatalogSpec(kind="kerr"))

    def test_dimension_too_small(self):
        with pytest.raises(ConfigError):
            build(CatalogSpec(kind="flat", dim=2))

    def test_conformal_needs_coefficients(self):
        with pytest.raises(ConfigError):
            build(CatalogSpec(kind="conformal"))

    def test_conformal_bad_power(self):
        with pytest.raises(ConfigError):
            build(CatalogSpec(kind="conformal", u_coeffs=((0, 1.0),)))

    def test_conformal_negative_factor(self):
        with pytest.raises(ConfigError):
            build(CatalogSpec(kind="conformal", u_coeffs=((1, -5.0),), inner_radius=1.0))

    def test_perturbed_needs_base(self):
        with pytest.raises(ConfigError):
            build(CatalogSpec(kind="perturbed"))

    def test_perturbed_amplitude_bound(self):
        with pytest.raises(ConfigError):
            build(
                CatalogSpec(
                    kind="perturbed", base=CatalogSpec(kind="flat"), bump_amplitude=1.5
                )
            )

    def test_standard_catalog_is_three_dimensional(self):
        with pytest.raises(ConfigError):
            standard_catalog(dim=4)
