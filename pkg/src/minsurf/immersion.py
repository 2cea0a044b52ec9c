"""Sampled immersions F = (F1, F2) on rectangular parameter grids.

All derivatives are second-order central differences; derived fields
(conformal factor, Kahler functions, curvatures) live on the interior
of gradually shrinking stencils and are nan elsewhere.  Degenerate and
negative-definite points are first-class outcomes: they are flagged and
excluded from residual norms rather than raised mid-sweep.

Conventions: <F_x,F_x> = eps <F_y,F_y> = e^{2u} > 0, <F_x,F_y> = 0,
z = x + i y with i^2 = -eps, so d/dz = (d/dx - eps i d/dy)/2 and the
induced Laplacian is  D f = 4 eps e^{-2u} f_{z zbar}.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from ._frames import structure_oriented_frame
from .algebra import ScalarEps, inner_arr
from .errors import (
    BoundaryError,
    DegenerateMetric,
    NegativeDefiniteMetric,
    NonMinimal,
)
from .product import J_product, g_inner

DEG_TOL_BASE = 1e-7  # scaled by squared chart extent


# ---------------------------------------------------------------------------
# grid container
# ---------------------------------------------------------------------------

@dataclass
class GridSpec:
    """Rectangular parameter grid: nx x ny samples with spacings hx, hy."""

    nx: int
    ny: int
    hx: float
    hy: float
    origin: tuple = (0.0, 0.0)

    @classmethod
    def from_box(cls, nx, ny, x_range, y_range) -> "GridSpec":
        hx = (x_range[1] - x_range[0]) / (nx - 1)
        hy = (y_range[1] - y_range[0]) / (ny - 1)
        return cls(nx, ny, hx, hy, (x_range[0], y_range[0]))

    def axes(self):
        xs = self.origin[0] + self.hx * np.arange(self.nx)
        ys = self.origin[1] + self.hy * np.arange(self.ny)
        return xs, ys

    def mesh(self):
        xs, ys = self.axes()
        return np.meshgrid(xs, ys, indexing="ij")


@dataclass
class ImmersionGrid:
    """Sampled map into S2_p x S2_p; values has shape (nx, ny, 2, 3)."""

    p: int
    eps: int
    values: np.ndarray
    hx: float
    hy: float
    origin: tuple = (0.0, 0.0)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 4 or self.values.shape[2:] != (2, 3):
            raise ValueError("values must have shape (nx, ny, 2, 3)")
        if self.nx < 5 or self.ny < 5:
            raise ValueError("grids must be at least 5 x 5")
        self._cache = {}

    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def ny(self) -> int:
        return self.values.shape[1]

    @property
    def spec(self) -> GridSpec:
        return GridSpec(self.nx, self.ny, self.hx, self.hy, self.origin)

    def axes(self):
        return self.spec.axes()

    def quadric_residual(self) -> float:
        """max |<F_k, F_k>_p - 1| over both factors and all samples."""
        n = inner_arr(self.values, self.values, self.p)
        return float(np.max(np.abs(n - 1.0)))

    def deg_tol(self) -> float:
        xs, ys = self.axes()
        scale = max(1.0, np.max(np.abs(xs)), np.max(np.abs(ys)))
        return DEG_TOL_BASE * scale * scale

    def _cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]


# ---------------------------------------------------------------------------
# finite differences (interior valid, nan boundary)
# ---------------------------------------------------------------------------

def d_x(a: np.ndarray, hx: float) -> np.ndarray:
    out = np.full_like(a, np.nan)
    out[1:-1] = (a[2:] - a[:-2]) / (2.0 * hx)
    return out


def d_y(a: np.ndarray, hy: float) -> np.ndarray:
    out = np.full_like(a, np.nan)
    out[:, 1:-1] = (a[:, 2:] - a[:, :-2]) / (2.0 * hy)
    return out


def d_xx(a: np.ndarray, hx: float) -> np.ndarray:
    out = np.full_like(a, np.nan)
    out[1:-1] = (a[2:] - 2.0 * a[1:-1] + a[:-2]) / (hx * hx)
    return out


def d_yy(a: np.ndarray, hy: float) -> np.ndarray:
    out = np.full_like(a, np.nan)
    out[:, 1:-1] = (a[:, 2:] - 2.0 * a[:, 1:-1] + a[:, :-2]) / (hy * hy)
    return out


def d_xy(a: np.ndarray, hx: float, hy: float) -> np.ndarray:
    out = np.full_like(a, np.nan)
    out[1:-1, 1:-1] = (a[2:, 2:] - a[2:, :-2] - a[:-2, 2:] + a[:-2, :-2]) \
        / (4.0 * hx * hy)
    return out


def d_x_full(a: np.ndarray, hx: float) -> np.ndarray:
    """d/dx with second-order one-sided stencils at the edges."""
    out = np.empty_like(a)
    out[1:-1] = (a[2:] - a[:-2]) / (2.0 * hx)
    out[0] = (-3.0 * a[0] + 4.0 * a[1] - a[2]) / (2.0 * hx)
    out[-1] = (3.0 * a[-1] - 4.0 * a[-2] + a[-3]) / (2.0 * hx)
    return out


def d_y_full(a: np.ndarray, hy: float) -> np.ndarray:
    out = np.empty_like(a)
    out[:, 1:-1] = (a[:, 2:] - a[:, :-2]) / (2.0 * hy)
    out[:, 0] = (-3.0 * a[:, 0] + 4.0 * a[:, 1] - a[:, 2]) / (2.0 * hy)
    out[:, -1] = (3.0 * a[:, -1] - 4.0 * a[:, -2] + a[:, -3]) / (2.0 * hy)
    return out


def dz_field_full(f, hx: float, hy: float, eps: int) -> ScalarEps:
    """d/dz with one-sided edge stencils (full-grid validity)."""
    if isinstance(f, ScalarEps):
        fx = ScalarEps(d_x_full(f.re, hx), d_x_full(f.im, hx), eps)
        fy = ScalarEps(d_y_full(f.re, hy), d_y_full(f.im, hy), eps)
    else:
        fx = ScalarEps(d_x_full(f, hx), np.zeros_like(f), eps)
        fy = ScalarEps(d_y_full(f, hy), np.zeros_like(f), eps)
    return (fx - eps * ScalarEps(0.0, 1.0, eps) * fy) * 0.5


def dz_field(f, hx: float, hy: float, eps: int) -> ScalarEps:
    """d/dz of a real or ScalarEps grid field, central differences."""
    if isinstance(f, ScalarEps):
        fx = ScalarEps(d_x(f.re, hx), d_x(f.im, hx), eps)
        fy = ScalarEps(d_y(f.re, hy), d_y(f.im, hy), eps)
    else:
        fx = ScalarEps(d_x(f, hx), np.zeros_like(f), eps)
        fy = ScalarEps(d_y(f, hy), np.zeros_like(f), eps)
    return (fx - eps * ScalarEps(0.0, 1.0, eps) * fy) * 0.5


def dzbar_field(f, hx: float, hy: float, eps: int) -> ScalarEps:
    if isinstance(f, ScalarEps):
        fx = ScalarEps(d_x(f.re, hx), d_x(f.im, hx), eps)
        fy = ScalarEps(d_y(f.re, hy), d_y(f.im, hy), eps)
    else:
        fx = ScalarEps(d_x(f, hx), np.zeros_like(f), eps)
        fy = ScalarEps(d_y(f, hy), np.zeros_like(f), eps)
    return (fx + eps * ScalarEps(0.0, 1.0, eps) * fy) * 0.5


def laplacian_induced(f: np.ndarray, u: np.ndarray, eps: int,
                      hx: float, hy: float) -> np.ndarray:
    """Induced-metric Laplacian D f = 4 eps e^{-2u} f_{z zbar} of a real field."""
    fzzb = (d_xx(f, hx) + eps * d_yy(f, hy)) / 4.0
    return 4.0 * eps * np.exp(-2.0 * u) * fzzb


def grad_norm2_induced(f: np.ndarray, u: np.ndarray, eps: int,
                       hx: float, hy: float) -> np.ndarray:
    """|grad f|^2 = e^{-2u} (f_x^2 + eps f_y^2) for the induced metric."""
    return np.exp(-2.0 * u) * (d_x(f, hx) ** 2 + eps * d_y(f, hy) ** 2)


# ---------------------------------------------------------------------------
# jets and first-order data
# ---------------------------------------------------------------------------

@dataclass
class GridJets:
    Fx: np.ndarray
    Fy: np.ndarray
    Fxx: np.ndarray
    Fxy: np.ndarray
    Fyy: np.ndarray


def jets(F: ImmersionGrid) -> GridJets:
    """Whole-grid first and second central differences of the samples."""
    def make():
        V = F.values
        return GridJets(d_x(V, F.hx), d_y(V, F.hy),
                        d_xx(V, F.hx), d_xy(V, F.hx, F.hy), d_yy(V, F.hy))
    return F._cached("jets", make)


def _check_interior(F: ImmersionGrid, i: int, j: int, ring: int = 1):
    if not (ring <= i < F.nx - ring and ring <= j < F.ny - ring):
        raise BoundaryError(
            f"index ({i},{j}) lacks a {ring}-ring of interior neighbors")


def jet(F: ImmersionGrid, i: int, j: int):
    """(F_x, F_y, F_xx, F_xy, F_yy) at an interior sample, as (2,3) arrays."""
    _check_interior(F, i, j)
    J = jets(F)
    return (J.Fx[i, j], J.Fy[i, j], J.Fxx[i, j], J.Fxy[i, j], J.Fyy[i, j])


@dataclass
class ConformalFields:
    gxx: np.ndarray
    gyy: np.ndarray
    gxy: np.ndarray
    e2u: np.ndarray
    u: np.ndarray
    eps_sign: np.ndarray      # sign(gxx * gyy); 0 where degenerate
    iso_residual: np.ndarray
    ok: np.ndarray            # non-degenerate, positive e^{2u}
    degenerate: np.ndarray    # |gxx| or |gyy| below tolerance
    negdef: np.ndarray        # gxx < 0 (negative-definite/flipped metric)


def conformal_fields(F: ImmersionGrid) -> ConformalFields:
    def make():
        J = jets(F)
        p = F.p
        gxx = g_inner(J.Fx, J.Fx, p)
        gyy = g_inner(J.Fy, J.Fy, p)
        gxy = g_inner(J.Fx, J.Fy, p)
        tol = F.deg_tol()
        with np.errstate(invalid="ignore"):
            degenerate = (np.abs(gxx) <= tol) | (np.abs(gyy) <= tol)
            negdef = (gxx < -tol)
            ok = np.isfinite(gxx) & ~degenerate & ~negdef
            eps_sign = np.where(degenerate | ~np.isfinite(gxx), 0.0,
                                np.sign(gxx * gyy))
            e2u = np.where(ok, gxx, np.nan)
            u = 0.5 * np.log(np.where(ok, np.abs(e2u), 1.0))
            u[~ok] = np.nan
            iso = np.maximum(np.abs(gxx - eps_sign * gyy), np.abs(gxy)) \
                / np.abs(np.where(ok, e2u, 1.0))
            iso[~ok] = np.nan
        return ConformalFields(gxx, gyy, gxy, e2u, u, eps_sign, iso,
                               ok, degenerate, negdef)
    return F._cached("conformal", make)


def conformal_data(F: ImmersionGrid, i: int, j: int):
    """(eps, u, iso_residual) at an interior point.

    Raises DegenerateMetric where |<F_x,F_x>| is below the chart
    tolerance and NegativeDefiniteMetric where <F_x,F_x> < 0 (only the
    positive convention e^{2u} > 0 is implemented).
    """
    _check_interior(F, i, j)
    C = conformal_fields(F)
    if C.degenerate[i, j]:
        raise DegenerateMetric(f"metric degenerates at sample ({i},{j})")
    if C.negdef[i, j]:
        raise NegativeDefiniteMetric(
            f"<F_x,F_x> < 0 at sample ({i},{j}); negative-definite or "
            "axis-swapped Lorentzian charts are not supported")
    return int(C.eps_sign[i, j]), float(C.u[i, j]), float(C.iso_residual[i, j])


# ---------------------------------------------------------------------------
# Kahler functions, Jacobians, classification
# ---------------------------------------------------------------------------

def kahler_fields(F: ImmersionGrid):
    """(C1, C2) grid fields from the isothermal pullback formulas."""
    def make():
        J = jets(F)
        C = conformal_fields(F)
        p = F.p
        from .algebra import j_arr
        w1 = inner_arr(j_arr(F.values[..., 0, :], J.Fx[..., 0, :], p),
                       J.Fy[..., 0, :], p)
        w2 = inner_arr(j_arr(F.values[..., 1, :], J.Fx[..., 1, :], p),
                       J.Fy[..., 1, :], p)
        den = C.eps_sign * C.e2u
        with np.errstate(invalid="ignore", divide="ignore"):
            C1 = (w1 - w2) / den
            C2 = (w1 + w2) / den
        return C1, C2
    return F._cached("kahler", make)


def kahler_functions(F: ImmersionGrid, i: int, j: int):
    """(C1, C2) at an interior, non-degenerate sample."""
    conformal_data(F, i, j)  # raises on degenerate points
    C1, C2 = kahler_fields(F)
    return float(C1[i, j]), float(C2[i, j])


def jacobians(C1, C2):
    """Factor Jacobians ((C1+C2)/2, (-C1+C2)/2)."""
    return (C1 + C2) / 2.0, (-C1 + C2) / 2.0


@dataclass
class PointClass:
    is_lagrangian_1: bool
    is_lagrangian_2: bool
    is_complex_1: bool
    is_complex_2: bool
    is_degenerate: bool
    C1: float
    C2: float


def class_tol(F: ImmersionGrid, u) -> np.ndarray:
    """Classification threshold 10 h^2 scaled by e^{-2u} where that exceeds 1."""
    h2 = max(F.hx, F.hy) ** 2
    return 10.0 * h2 * np.maximum(1.0, np.exp(-2.0 * np.asarray(u)))


def classify_point(F: ImmersionGrid, i: int, j: int, tol=None) -> PointClass:
    _check_interior(F, i, j)
    C = conformal_fields(F)
    if not C.ok[i, j]:
        return PointClass(False, False, False, False, True,
                          float("nan"), float("nan"))
    C1f, C2f = kahler_fields(F)
    c1, c2 = float(C1f[i, j]), float(C2f[i, j])
    if tol is None:
        tol = float(class_tol(F, C.u[i, j]))
    eps = int(C.eps_sign[i, j])
    s = (-1.0) ** (F.p + 1)
    return PointClass(
        is_lagrangian_1=abs(c1) <= tol,
        is_lagrangian_2=abs(c2) <= tol,
        is_complex_1=abs(eps * c1 * c1 + s) <= tol,
        is_complex_2=abs(eps * c2 * c2 + s) <= tol,
        is_degenerate=False,
        C1=c1, C2=c2,
    )


# ---------------------------------------------------------------------------
# second fundamental form, curvatures, structural identities
# ---------------------------------------------------------------------------

def second_fundamental_fields(F: ImmersionGrid):
    """Whole-grid coordinate second fundamental form and mean curvature.

    Returns (h11, h12, h22, H) as (nx,ny,2,3) arrays; valid on the ok
    mask of the conformal fields intersected with the interior.
    """
    def make():
        J = jets(F)
        C = conformal_fields(F)
        p = F.p
        V = F.values

        def proj(D):
            # remove flat-space normal components (factor positions) ...
            out = D.copy()
            for k in (0, 1):
                coef = inner_arr(D[..., k, :], V[..., k, :], p)
                out[..., k, :] = D[..., k, :] - coef[..., None] * V[..., k, :]
            # ... then surface-tangential components
            with np.errstate(invalid="ignore"):
                cx = g_inner(out, J.Fx, p) / C.gxx
                cy = g_inner(out, J.Fy, p) / C.gyy
            out = out - cx[..., None, None] * J.Fx - cy[..., None, None] * J.Fy
            return out

        h11 = proj(J.Fxx)
        h12 = proj(J.Fxy)
        h22 = proj(J.Fyy)
        with np.errstate(invalid="ignore"):
            e2u = C.e2u
            eps = C.eps_sign
            H = 0.5 * (h11 + eps[..., None, None] * h22) / e2u[..., None, None]
        return h11, h12, h22, H
    return F._cached("second_ff", make)


def second_fundamental_form(F: ImmersionGrid, i: int, j: int):
    """(h11, h12, h22, H, Hnorm2) at an interior non-degenerate sample."""
    conformal_data(F, i, j)
    h11, h12, h22, H = second_fundamental_fields(F)
    Hn2 = float(g_inner(H[i, j], H[i, j], F.p))
    return h11[i, j], h12[i, j], h22[i, j], H[i, j], Hn2


def mean_curvature_residual(F: ImmersionGrid) -> np.ndarray:
    """Euclidean length of the mean curvature vector per sample (nan=invalid)."""
    _, _, _, H = second_fundamental_fields(F)
    return np.sqrt(np.einsum("...ki,...ki->...", H, H))


def oriented_frame(F: ImmersionGrid, b: int = 1):
    """Grid-wide oriented normal frame (cached per b)."""
    def make():
        J = jets(F)
        return structure_oriented_frame(F.values, J.Fx, J.Fy, F.p, F.eps, b)
    return F._cached(f"frame_{b}", make)


def curvatures(F: ImmersionGrid, i: int, j: int, b: int = 1):
    """(K, Kperp) with K from the conformal-factor Laplacian and Kperp
    from the Ricci commutator of the shape operators."""
    _check_interior(F, i, j, ring=2)
    C = conformal_fields(F)
    if not C.ok[i, j]:
        raise DegenerateMetric(f"degenerate sample ({i},{j})")
    eps = int(C.eps_sign[i, j])
    # K = -4 e^{-2u} u_{z zbar}: the Gauss curvature of the induced
    # metric (the eps-weighted variant is eps*K; see curvature_from_data)
    u = C.u
    uxx = (u[i + 1, j] - 2 * u[i, j] + u[i - 1, j]) / F.hx ** 2
    uyy = (u[i, j + 1] - 2 * u[i, j] + u[i, j - 1]) / F.hy ** 2
    if not np.isfinite(uxx + uyy):
        raise DegenerateMetric(f"degenerate neighbor ring at ({i},{j})")
    K = -np.exp(-2.0 * u[i, j]) * (uxx + eps * uyy)

    h11, h12, h22, H = second_fundamental_fields(F)
    emu = np.exp(-C.u[i, j])
    J = jets(F)
    e1 = emu * J.Fx[i, j]
    e2 = emu * J.Fy[i, j]
    Nfield, Ntfield, badf, _ = oriented_frame(F, b)
    if badf[i, j]:
        raise DegenerateMetric(f"no normal frame at sample ({i},{j})")
    N, Nt = Nfield[i, j], Ntfield[i, j]
    he = np.empty((2, 2, 2, 3))
    he[0, 0] = emu * emu * h11[i, j]
    he[0, 1] = he[1, 0] = emu * emu * h12[i, j]
    he[1, 1] = emu * emu * h22[i, j]
    enorm = np.array([1.0, eps])

    def shape_op(v):
        # matrix of A_v in the (e1, e2) frame: A_v e_i = sum_j M[j,i] e_j
        M = np.empty((2, 2))
        for a in range(2):
            for c in range(2):
                M[c, a] = g_inner(he[a, c], v, F.p) / enorm[c]
        return M

    A1 = shape_op(N)
    A2 = shape_op(Nt)
    Cm = A2 @ A1 - A1 @ A2
    # Kperp = G([A_v2, A_v1] e1, e2) with v1 = N, v2 = Ntilde
    Kperp = Cm[1, 0] * enorm[1]
    return float(K), float(Kperp)


def gauss_equation_residual(F: ImmersionGrid, i: int, j: int) -> float:
    """|K - eps (-1)^p C1 C2 - 2|H|^2 + |h|^2 / 2| at an interior sample."""
    K, _ = curvatures(F, i, j)
    C = conformal_fields(F)
    eps = int(C.eps_sign[i, j])
    C1f, C2f = kahler_fields(F)
    h11, h12, h22, H = second_fundamental_fields(F)
    emu2 = np.exp(-2.0 * C.u[i, j])
    hee = [emu2 * h11[i, j], emu2 * h12[i, j], emu2 * h22[i, j]]
    habs2 = (g_inner(hee[0], hee[0], F.p) + g_inner(hee[2], hee[2], F.p)
             + 2.0 * eps * g_inner(hee[1], hee[1], F.p))
    Hn2 = g_inner(H[i, j], H[i, j], F.p)
    sgn = (-1.0) ** F.p
    return float(abs(K - eps * sgn * C1f[i, j] * C2f[i, j]
                     - 2.0 * Hn2 + habs2 / 2.0))


def fz_field(F: ImmersionGrid) -> ScalarEps:
    """F_z = (F_x - eps i F_y)/2 as a ScalarEps-valued product-vector field."""
    J = jets(F)
    return ScalarEps(J.Fx / 2.0, -F.eps * J.Fy / 2.0, F.eps)


def hopf_fields(F: ImmersionGrid):
    """Hopf quantity theta = G(J1 F_z, J2 F_z)/2 and its dbar-derivative."""
    def make():
        Fz = fz_field(F)
        base = F.values
        J1Fz = J_product(1, base, Fz, F.p)
        J2Fz = J_product(2, base, Fz, F.p)
        theta = g_inner(J1Fz, J2Fz, F.p) * 0.5
        dbar = dzbar_field(theta, F.hx, F.hy, F.eps)
        return theta, dbar
    return F._cached("hopf", make)


def hopf_differential(F: ImmersionGrid, i: int, j: int,
                      minimal_tol: float = None):
    """(theta, dbar_residual) at an interior sample of a minimal immersion."""
    _check_interior(F, i, j, ring=2)
    conformal_data(F, i, j)
    if minimal_tol is None:
        minimal_tol = 50.0 * max(F.hx, F.hy) ** 2
    Hres = mean_curvature_residual(F)[i, j]
    if not np.isfinite(Hres) or Hres > minimal_tol:
        raise NonMinimal(
            f"|H| = {Hres:.3e} exceeds tolerance {minimal_tol:.3e}")
    theta, dbar = hopf_fields(F)
    th = ScalarEps(theta.re[i, j], theta.im[i, j], F.eps)
    res = np.sqrt(abs(dbar.re[i, j] ** 2 + dbar.im[i, j] ** 2))
    return th, float(res)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

GRID_SCHEMA = "minsurf-grid-1"


def grid_to_json(F: ImmersionGrid, path=None):
    doc = {
        "schema": GRID_SCHEMA,
        "p": F.p,
        "eps": F.eps,
        "nx": F.nx,
        "ny": F.ny,
        "hx": F.hx,
        "hy": F.hy,
        "origin": list(F.origin),
        "values": F.values.tolist(),
    }
    if path is not None:
        with open(path, "w") as fh:
            json.dump(doc, fh)
    return doc


def grid_from_json(src) -> ImmersionGrid:
    if isinstance(src, dict):
        doc = src
    else:
        with open(src) as fh:
            doc = json.load(fh)
    if doc.get("schema") != GRID_SCHEMA:
        raise ValueError(f"not a {GRID_SCHEMA} document")
    return ImmersionGrid(int(doc["p"]), int(doc["eps"]),
                         np.array(doc["values"], dtype=float),
                         float(doc["hx"]), float(doc["hy"]),
                         tuple(doc["origin"]))


def grid_to_csv(F: ImmersionGrid, path):
    xs, ys = F.axes()
    with open(path, "w", newline="") as fh:
        fh.write(f"# {GRID_SCHEMA} p={F.p} eps={F.eps} nx={F.nx} ny={F.ny} "
                 f"hx={F.hx!r} hy={F.hy!r} ox={F.origin[0]!r} oy={F.origin[1]!r}\n")
        wr = csv.writer(fh)
        wr.writerow(["i", "j", "x", "y", "a1", "a2", "a3", "b1", "b2", "b3"])
        for i in range(F.nx):
            for j in range(F.ny):
                v = F.values[i, j]
                wr.writerow([i, j, repr(float(xs[i])), repr(float(ys[j])),
                             *[repr(float(c)) for c in v[0]],
                             *[repr(float(c)) for c in v[1]]])


def grid_from_csv(path) -> ImmersionGrid:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith(f"# {GRID_SCHEMA}"):
            raise ValueError(f"not a {GRID_SCHEMA} csv file")
        kv = dict(tok.split("=") for tok in header.split()[2:])
        nx, ny = int(kv["nx"]), int(kv["ny"])
        rd = csv.reader(fh)
        next(rd)  # column header
        vals = np.empty((nx, ny, 2, 3))
        for row in rd:
            i, j = int(row[0]), int(row[1])
            vals[i, j, 0] = [float(c) for c in row[4:7]]
            vals[i, j, 1] = [float(c) for c in row[7:10]]
    return ImmersionGrid(int(kv["p"]), int(kv["eps"]), vals,
                         float(kv["hx"]), float(kv["hy"]),
                         (float(kv["ox"]), float(kv["oy"])))


def grid_to_obj(F: ImmersionGrid, path_factor1, path_factor2):
    """Write one quad mesh per factor (vertex coordinates are ambient R^3)."""
    for k, path in ((0, path_factor1), (1, path_factor2)):
        with open(path, "w") as fh:
            fh.write(f"# minsurf factor {k + 1} mesh {F.nx}x{F.ny}\n")
            for i in range(F.nx):
                for j in range(F.ny):
                    v = F.values[i, j, k]
                    fh.write(f"v {v[0]:.12g} {v[1]:.12g} {v[2]:.12g}\n")
            for i in range(F.nx - 1):
                for j in range(F.ny - 1):
                    a = i * F.ny + j + 1
                    b = (i + 1) * F.ny + j + 1
                    fh.write(f"f {a} {b} {b + 1} {a + 1}\n")
