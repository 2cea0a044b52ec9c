import numpy as np
import pytest
from conftest import interior_region, ratio_table

from minsurf.algebra import ScalarEps
from minsurf.errors import NonMinimal, SignatureError
from minsurf.fundata import (
    FundamentalData,
    NotApplicable,
    arctan_c_residual,
    compat_residuals,
    crop_to_mask,
    curvature_from_data,
    extract,
    f_norm_identity,
    field_sup,
    fundata_from_json,
    fundata_to_json,
    gauge_rotate,
    grad_c_residual,
    lap_c_residual,
    log_sqrt_residual,
    restrict,
    se_sup,
)
from minsurf.immersion import GridSpec, ImmersionGrid
from minsurf.surfaces import build_example, make_geodesic_product, stereographic


def flat_lagrangian(n=17, h=0.05, gamma=1 / np.sqrt(2)):
    Z = np.zeros((n, n))
    c = lambda v: ScalarEps(np.full((n, n), v), Z.copy(), -1)  # noqa: E731
    return FundamentalData(p=0, eps=-1, b=1, hx=h, hy=h,
                           u=Z.copy(), C1=Z.copy(), C2=Z.copy(),
                           gamma1=c(gamma), gamma2=c(gamma),
                           f1=c(0.0), f2=c(0.0), A=c(0.0),
                           mask=np.ones((n, n), bool))


class TestExtract:
    def test_geodesic_product_values(self):
        spec = GridSpec.from_box(33, 33, (0, 1), (0, 1))
        F = make_geodesic_product(0, ("space", "space"), spec)
        D = extract(F)
        m = D.mask
        assert field_sup(D.C1, m) < 1e-9
        assert field_sup(D.C2, m) < 1e-9
        assert se_sup(D.f1, m) < 1e-9
        assert se_sup(D.f2, m) < 1e-9
        # |gamma_j|^2 = 1/2 for the flat Lagrangian product (the FD
        # chord factor sin(h)/h shifts e^{2u} by O(h^2))
        h2 = max(F.hx, F.hy) ** 2
        assert field_sup(D.gamma1.abs2() - 0.5, m) < h2
        assert field_sup(D.gamma2.abs2() - 0.5, m) < h2

    def test_complex_curve_reduced_data(self):
        F = build_example("holo:2z1-safe", nx=33)
        D = extract(F)
        assert D.complex1[D.mask].all()
        assert se_sup(D.gamma1, D.mask) == 0.0
        assert se_sup(D.f1, D.mask) == 0.0
        assert field_sup(D.C1 ** 2 - 1.0, D.mask) == 0.0
        # gamma_2 carries the Prop-7 style reduced data
        assert np.abs(D.gamma2.abs2()[D.mask & ~D.complex2]).min() > 1e-3

    def test_nonminimal_rejected(self):
        spec = GridSpec.from_box(17, 17, (-0.5, 0.5), (-0.5, 0.5))
        X, Y = spec.mesh()
        vals = np.stack([stereographic(X, Y),
                         stereographic(X / 2 + 0.2 * X ** 2, Y / 2)], axis=2)
        F = ImmersionGrid(0, 1, vals, spec.hx, spec.hy, spec.origin)
        with pytest.raises(NonMinimal):
            extract(F)

    def test_riemannian_forces_b(self):
        F = build_example("holo:2z1-safe", nx=17)
        with pytest.raises(SignatureError):
            extract(F, b=-1)

    def test_roundtrip_family(self, family_cache):
        # extract(reconstruct(D)) reproduces gauge-invariant fields at O(h^2)
        from minsurf.frenet import roundtrip_report
        D = family_cache("A1", 33)
        rt = roundtrip_report(D)
        h2 = max(D.hx, D.hy) ** 2
        assert rt.max() < 30 * h2


class TestGauge:
    def test_identity_at_zero(self, family_cache):
        D = family_cache("C1", 33)
        G = gauge_rotate(D, 0.0)
        assert se_sup(G.gamma1 - D.gamma1, D.mask) < 1e-15
        assert se_sup(G.f2 - D.f2, D.mask) < 1e-15

    @pytest.mark.parametrize("eps_src", ["C1", "B1"])
    def test_double_rotation(self, family_cache, eps_src):
        D = family_cache(eps_src, 33)
        G = gauge_rotate(gauge_rotate(D, 0.37), -0.37)
        assert se_sup(G.gamma1 - D.gamma1, D.mask) < 1e-12
        assert se_sup(G.gamma2 - D.gamma2, D.mask) < 1e-12
        assert se_sup(G.f1 - D.f1, D.mask) < 1e-12

    def test_modulus_invariant_riemannian(self, family_cache):
        D = family_cache("A1", 33)
        G = gauge_rotate(D, 1.1)
        assert field_sup(G.gamma1.abs2() - D.gamma1.abs2(), D.mask) < 1e-12
        assert field_sup(G.f2.abs2() - D.f2.abs2(), D.mask) < 1e-12

    def test_commutes_with_residuals(self, family_cache):
        D = family_cache("A1", 33)
        r0 = compat_residuals(D)
        r1 = compat_residuals(gauge_rotate(D, 0.81))
        for k in r0.norms:
            if np.isfinite(r0.norms[k]):
                assert abs(r1.norms[k] - r0.norms[k]) <= 1e-10

    def test_field_theta_shifts_A(self, family_cache):
        # non-constant theta: residuals still vanish because A picks up
        # the connection term i theta_z
        D = family_cache("A1", 33)
        xs, _ = GridSpec(33, 33, D.hx, D.hy, D.origin).axes()
        theta = 0.3 * np.sin(2.0 * xs)[:, None] * np.ones(D.shape)
        G = gauge_rotate(D, theta)
        r0 = compat_residuals(D)
        r1 = compat_residuals(G)
        assert r1.max() < 5 * r0.max() + 1e-6


class TestCompat:
    def test_lagrangian_exact(self):
        D = flat_lagrangian()
        rep = compat_residuals(D)
        assert rep.max() < 1e-12

    def test_corrupted_gamma_flagged(self):
        D = flat_lagrangian()
        bad = FundamentalData(**{**D.copy_fields(),
                                 "gamma1": 1.1 * D.gamma1})
        rep = compat_residuals(bad)
        # |1.1 gamma|^2 - |gamma|^2 = 0.21 |gamma|^2 = 0.105
        assert rep.norms["gammanorsec_1"] == pytest.approx(0.21 * 0.5, rel=1e-9)

    @pytest.mark.parametrize("name,box", [
        ("geodesic-product", None),
        ("geodesic-product:ds2-mixed", None),
        ("holo:2z1", ((0.8, 1.4), (-0.3, 0.3))),
        ("paraholo:z2", ((-0.25, 0.25), (1.8, 2.2))),
    ])
    def test_extracted_residual_convergence(self, name, box):
        from minsurf.surfaces import EXAMPLES, build_example
        norms = {}
        for n in (33, 65):
            if box is None:
                F = build_example(name, nx=n)
            else:
                spec = GridSpec.from_box(n, n, box[0], box[1])
                F = EXAMPLES[name].builder(spec)
            D = extract(F)
            # fixed physical margin: 3.5 coarse-grid cells on both grids
            margin = 3.5 * max(F.hx, F.hy) * (n - 1) / 32
            reg = interior_region(F, margin)
            norms[n] = compat_residuals(D, region=reg).norms
        ratios = ratio_table(norms[33], norms[65], floor=1e-9)
        assert ratios, name
        assert min(ratios.values()) > 3.5, (name, ratios)

    def test_a_consistency_small(self, family_cache):
        D = family_cache("B1", 65)
        rep = compat_residuals(D)
        assert rep.norms["a_consistency"] < 1e-4


class TestDataLevelTheorems:
    def test_lagrangian_equivalence_extracted(self):
        # C_m ~ 0 on a patch forces both Kahler functions ~ 0
        for name in ("geodesic-product", "geodesic-product:ds2-mixed"):
            F = build_example(name, nx=33)
            D = extract(F)
            tau = 10 * max(F.hx, F.hy) ** 2
            assert field_sup(D.C1, D.mask) <= tau
            assert field_sup(D.C2, D.mask) <= tau
            assert se_sup(D.f1, D.mask) <= tau
            assert se_sup(D.f2, D.mask) <= tau

    def test_totally_geodesic_classification(self):
        # data with f1 = f2 = 0: constant Kahler functions, both 0 or 1
        for name in ("geodesic-product", "slice:first"):
            F = build_example(name, nx=33)
            D = extract(F)
            tau = 10 * max(F.hx, F.hy) ** 2
            for C in (D.C1, D.C2):
                vals = C[D.mask]
                assert np.nanstd(vals) <= tau
                mean = abs(np.nanmean(vals))
                assert min(mean, abs(mean - 1.0)) <= tau


class TestIdentities:
    def test_f_norm_trivial_and_marker(self):
        D = flat_lagrangian()
        out = f_norm_identity(D)
        assert field_sup(out[1], D.mask) < 1e-12
        F = build_example("slice:first", nx=17)
        D = extract(F)
        assert f_norm_identity(D) is NotApplicable

    @pytest.mark.parametrize("theorem", ["A1", "A2", "B1", "B2", "C1", "C2"])
    def test_family_identity_battery(self, family_cache, theorem):
        norms = {}
        for n in (33, 65):
            D = family_cache(theorem, n)
            K, Kp = curvature_from_data(D)
            vals = {}
            for j in (1, 2):
                vals[f"grad{j}"] = field_sup(grad_c_residual(D, j, K, Kp))
                vals[f"lap{j}"] = field_sup(lap_c_residual(D, j, K, Kp))
            fn = f_norm_identity(D, K, Kp)
            for j in (1, 2):
                vals[f"fnorm{j}"] = field_sup(fn[j])
            norms[n] = vals
        ratios = ratio_table(norms[33], norms[65])
        assert min(ratios.values()) > 3.0, (theorem, ratios)

    def test_arctan_riemannian_p1(self, family_cache):
        D = family_cache("C1", 65)
        for j in (1, 2):
            r = field_sup(arctan_c_residual(D, j))
            assert r < 50 * max(D.hx, D.hy) ** 2

    def test_arctan_lorentzian_p_even(self, family_cache):
        D = family_cache("C2", 65)
        for j in (1, 2):
            r = field_sup(arctan_c_residual(D, j))
            assert r < 50 * max(D.hx, D.hy) ** 2

    def test_log_sqrt_riemannian_p1(self, family_cache):
        D = family_cache("C1", 65)
        for m in (1, 2):
            r = field_sup(log_sqrt_residual(D, m))
            assert r < 50 * max(D.hx, D.hy) ** 2


class TestSerialization:
    def test_json_roundtrip(self, family_cache):
        D = family_cache("C1", 33)
        doc = fundata_to_json(D)
        E = fundata_from_json(doc)
        assert np.array_equal(np.where(D.mask, D.u, 0.0),
                              np.where(E.mask, E.u, 0.0))
        assert np.array_equal(np.where(D.mask, D.gamma1.re, 0.0),
                              np.where(E.mask, E.gamma1.re, 0.0))
        assert (E.p, E.eps, E.b) == (D.p, D.eps, D.b)

    def test_restrict_window(self, family_cache):
        D = family_cache("C1", 33)
        E = restrict(D, (4, 20, 5, 25))
        assert E.shape == (16, 20)
        assert E.origin == (D.origin[0] + 4 * D.hx, D.origin[1] + 5 * D.hy)
        assert np.array_equal(E.u, D.u[4:20, 5:25])

    def test_crop_to_mask(self):
        D = flat_lagrangian(n=17)
        D.mask[:3, :] = False
        D.mask[:, -2:] = False
        i0, i1, j0, j1 = crop_to_mask(D)
        assert D.mask[i0:i1, j0:j1].all()
        assert (i1 - i0) >= 5 and (j1 - j0) >= 5


class TestHopfCrossCheck:
    def test_theta_equals_gamma_product(self, family_cache):
        # the Hopf quantity from the immersion matches -eps b gamma1 gamma2 / 2
        from minsurf.frenet import reconstruct
        from minsurf.immersion import hopf_fields
        D = family_cache("A1", 33)
        grid, _ = reconstruct(D)
        E = extract(grid)
        theta, _ = hopf_fields(grid)
        pred = (-E.eps * E.b * 0.5) * E.gamma1 * E.gamma2
        diff = ScalarEps(theta.re - pred.re, theta.im - pred.im, 1)
        h2 = max(E.hx, E.hy) ** 2
        assert se_sup(diff, E.mask) < 50 * h2
