"""Sinh/sin-Gordon layer: solvers, the (v,w) <-> (C1,C2) dictionary, and
the explicit one-parameter families of minimal fundamental data.

Equation kinds (always a pair of real fields v, w):

    sinh_plus :  v_zzb + sinh(2v)/2 = 0   and the same for w
    sinh_minus:  v_zzb - sinh(2v)/2 = 0   and the same for w
    sin_mixed :  v_zzb + sin(2v)/2 = 0    and  w_zzb - sin(2w)/2 = 0

For eps = +1 the conformal variable is complex and 4 v_zzb = v_xx + v_yy
(elliptic, damped-Newton with Dirichlet data); for eps = -1 it is
para-complex and 4 v_zzb = v_xx - v_yy (hyperbolic, leapfrog marching in
y from initial data on y = 0).  An optional forcing turns either solver
into a manufactured-solution test bench: the discrete equation is
v_zzb + (s/2) N(2v) = forcing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .algebra import ScalarEps, exp_eps, unit_i
from .errors import (
    BranchMismatch,
    CFLViolation,
    DomainViolation,
    EmptyMask,
)
from .fundata import FundamentalData
from .immersion import GridSpec, dz_field

KINDS = {
    "sinh_plus": (np.sinh, np.cosh, (1.0, 1.0)),
    "sinh_minus": (np.sinh, np.cosh, (-1.0, -1.0)),
    "sinh_mixed": (np.sinh, np.cosh, (1.0, -1.0)),
    "sin_mixed": (np.sin, np.cos, (1.0, -1.0)),
}

OVERFLOW_GUARD = 350.0


@dataclass
class GordonSolution:
    eq_kind: str
    eps: int
    v: np.ndarray
    w: np.ndarray
    hx: float
    hy: float
    origin: tuple = (0.0, 0.0)
    residual_norm: float = float("nan")
    mask: np.ndarray = None
    converged: bool = True
    iterations: tuple = (0, 0)
    # exact first derivatives when the construction provides them
    v_x: np.ndarray = None
    v_y: np.ndarray = None
    w_x: np.ndarray = None
    w_y: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mask is None:
            self.mask = np.ones(np.asarray(self.v).shape, dtype=bool)

    @property
    def spec(self) -> GridSpec:
        n, m = self.v.shape
        return GridSpec(n, m, self.hx, self.hy, self.origin)

    def dz(self, which: str) -> ScalarEps:
        """d/dz of v or w, using exact derivatives when available."""
        f = self.v if which == "v" else self.w
        fx = self.v_x if which == "v" else self.w_x
        fy = self.v_y if which == "v" else self.w_y
        if fx is not None and fy is not None:
            i = unit_i(self.eps)
            return (ScalarEps(fx, 0.0, self.eps)
                    - self.eps * i * ScalarEps(fy, 0.0, self.eps)) * 0.5
        return dz_field(f, self.hx, self.hy, self.eps)


def discrete_residual(kind: str, eps: int, u: np.ndarray, hx, hy,
                      forcing=None) -> np.ndarray:
    """Centered-difference residual of v_zzb + (s/2) N(2v) - f, interior."""
    N, _, signs = KINDS[kind]
    s = signs[0]
    return _component_residual(N, s, eps, u, hx, hy, forcing)


def _component_residual(N, s, eps, u, hx, hy, forcing=None):
    out = np.full_like(u, np.nan)
    with np.errstate(over="ignore", invalid="ignore"):
        uxx = (u[2:, 1:-1] - 2 * u[1:-1, 1:-1] + u[:-2, 1:-1]) / hx ** 2
        uyy = (u[1:-1, 2:] - 2 * u[1:-1, 1:-1] + u[1:-1, :-2]) / hy ** 2
        uzzb = (uxx + eps * uyy) / 4.0
        r = uzzb + 0.5 * s * N(2.0 * u[1:-1, 1:-1])
        if forcing is not None:
            r = r - forcing[1:-1, 1:-1]
    out[1:-1, 1:-1] = r
    return out


# ---------------------------------------------------------------------------
# elliptic path: damped Newton on the 5-point discretization
# ---------------------------------------------------------------------------

def _newton_elliptic(N, dN, s, spec: GridSpec, bc, forcing,
                     max_iter, tol):
    nx, ny = spec.nx, spec.ny
    X, Y = spec.mesh()
    g = np.asarray(bc(X, Y), dtype=float) * np.ones((nx, ny))
    f = np.zeros((nx, ny)) if forcing is None else \
        np.asarray(forcing(X, Y), dtype=float) * np.ones((nx, ny))

    hx, hy = spec.hx, spec.hy
    ni, nj = nx - 2, ny - 2
    idx = lambda i, j: i * nj + j  # noqa: E731  (interior indexing)

    # 5-point Laplacian on the interior (Dirichlet rows eliminated)
    main = np.full(ni * nj, -2.0 / hx ** 2 - 2.0 / hy ** 2)
    Lap = sp.lil_matrix((ni * nj, ni * nj))
    Lap.setdiag(main)
    for i in range(ni):
        for j in range(nj):
            k = idx(i, j)
            if i > 0:
                Lap[k, idx(i - 1, j)] = 1.0 / hx ** 2
            if i < ni - 1:
                Lap[k, idx(i + 1, j)] = 1.0 / hx ** 2
            if j > 0:
                Lap[k, idx(i, j - 1)] = 1.0 / hy ** 2
            if j < nj - 1:
                Lap[k, idx(i, j + 1)] = 1.0 / hy ** 2
    Lap = Lap.tocsr()

    def bdry_contrib():
        c = np.zeros((ni, nj))
        c[0, :] += g[0, 1:-1] / hx ** 2
        c[-1, :] += g[-1, 1:-1] / hx ** 2
        c[:, 0] += g[1:-1, 0] / hy ** 2
        c[:, -1] += g[1:-1, -1] / hy ** 2
        return c.ravel()

    bc_vec = bdry_contrib()
    fi = f[1:-1, 1:-1].ravel()

    def residual(ui):
        # 4 * (v_zzb + s/2 N(2v) - f) = Lap v + 2 s N(2v) - 4 f
        return Lap @ ui + bc_vec + 2.0 * s * N(2.0 * ui) - 4.0 * fi

    # initial iterate: harmonic extension of the boundary data (+forcing)
    u0 = spla.spsolve(Lap.tocsc(), 4.0 * fi - bc_vec)
    ui = u0
    r = residual(ui)
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        rn = np.max(np.abs(r))
        if rn <= 4.0 * tol:
            converged = True
            break
        J = Lap + sp.diags(4.0 * s * dN(2.0 * ui))
        try:
            du = spla.spsolve(J.tocsc(), -r)
        except Exception:
            break
        # Armijo backtracking on the residual norm
        lam, ok = 1.0, False
        r2 = np.linalg.norm(r)
        for _ in range(30):
            un = ui + lam * du
            rn_ = residual(un)
            if np.linalg.norm(rn_) <= (1.0 - 1e-4 * lam) * r2:
                ui, r, ok = un, rn_, True
                break
            lam *= 0.5
        if not ok:
            break
    else:
        it = max_iter
    if np.max(np.abs(r)) <= 4.0 * tol:
        converged = True

    u = g.copy()
    u[1:-1, 1:-1] = ui.reshape(ni, nj)
    return u, converged, it


# ---------------------------------------------------------------------------
# hyperbolic path: explicit leapfrog marching in y
# ---------------------------------------------------------------------------

def _leapfrog(N, s, spec: GridSpec, init, bc, forcing):
    nx, ny = spec.nx, spec.ny
    hx, hy = spec.hx, spec.hy
    if hy > hx + 1e-14:
        raise CFLViolation(f"leapfrog requires hy <= hx (hy={hy}, hx={hx})")
    xs, ys = spec.axes()
    X, Y = spec.mesh()
    f = np.zeros((nx, ny)) if forcing is None else \
        np.asarray(forcing(X, Y), dtype=float) * np.ones((nx, ny))
    v0_fn, vy0_fn = init
    u = np.empty((nx, ny))
    u[:, 0] = v0_fn(xs)
    vy0 = vy0_fn(xs)

    def dxx(col):
        out = np.zeros(nx)
        out[1:-1] = (col[2:] - 2 * col[1:-1] + col[:-2]) / hx ** 2
        return out

    # second-order first step; PDE: v_yy = v_xx + 2 s N(2v) - 4 f
    acc0 = dxx(u[:, 0]) + 2.0 * s * N(2.0 * u[:, 0]) - 4.0 * f[:, 0]
    u[:, 1] = u[:, 0] + hy * vy0 + 0.5 * hy ** 2 * acc0
    u[0, 1] = bc(xs[0], ys[1])
    u[-1, 1] = bc(xs[-1], ys[1])
    for j in range(1, ny - 1):
        acc = dxx(u[:, j]) + 2.0 * s * N(2.0 * u[:, j]) - 4.0 * f[:, j]
        u[:, j + 1] = 2.0 * u[:, j] - u[:, j - 1] + hy ** 2 * acc
        u[0, j + 1] = bc(xs[0], ys[j + 1])
        u[-1, j + 1] = bc(xs[-1], ys[j + 1])
    return u


# ---------------------------------------------------------------------------
# public solver
# ---------------------------------------------------------------------------

def solve_gordon(kind: str, eps: int, spec: GridSpec,
                 boundary=None, initial=None, forcing=None,
                 max_iter: int = 40, tol: float = 1e-11) -> GordonSolution:
    """Solve the chosen Gordon pair on the grid.

    eps=+1: ``boundary`` = (g_v, g_w) Dirichlet callables (x, y).
    eps=-1: ``initial`` = ((v0, vy0), (w0, wy0)) callables of x on y=0 and
    ``boundary`` supplies the two x-edge columns.  ``forcing`` is an
    optional pair of callables adding a right-hand side to each equation.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown equation kind {kind!r}")
    N, dN, signs = KINDS[kind]
    fv = fw = None
    if forcing is not None:
        fv, fw = forcing

    if eps == 1:
        if boundary is None:
            raise ValueError("elliptic solve requires Dirichlet boundary data")
        gv, gw = boundary
        v, cv, iv = _newton_elliptic(N, dN, signs[0], spec, gv, fv, max_iter, tol)
        w, cw, iw = _newton_elliptic(N, dN, signs[1], spec, gw, fw, max_iter, tol)
        converged = cv and cw
        iters = (iv, iw)
    elif eps == -1:
        if initial is None or boundary is None:
            raise ValueError("hyperbolic solve requires initial and boundary data")
        (vi, wi) = initial
        gv, gw = boundary
        v = _leapfrog(N, signs[0], spec, vi, gv, fv)
        w = _leapfrog(N, signs[1], spec, wi, gw, fw)
        converged, iters = True, (spec.ny, spec.ny)
    else:
        raise ValueError("eps must be +1 or -1")

    X, Y = spec.mesh()
    fva = None if fv is None else np.asarray(fv(X, Y), dtype=float) * np.ones_like(v)
    fwa = None if fw is None else np.asarray(fw(X, Y), dtype=float) * np.ones_like(w)
    rv = _component_residual(N, signs[0], eps, v, spec.hx, spec.hy, fva)
    rw = _component_residual(N, signs[1], eps, w, spec.hx, spec.hy, fwa)
    res = float(max(np.nanmax(np.abs(rv)), np.nanmax(np.abs(rw))))
    return GordonSolution(kind, eps, v, w, spec.hx, spec.hy, spec.origin,
                          res, None, converged, iters)


def solution_from_fields(kind: str, eps: int, spec: GridSpec, v, w,
                         v_x=None, v_y=None, w_x=None, w_y=None,
                         forcing=None) -> GordonSolution:
    """Wrap externally computed (v, w) fields (closed forms, ODE oracles)."""
    N, _, signs = KINDS[kind]
    rv = _component_residual(N, signs[0], eps, np.asarray(v, float),
                             spec.hx, spec.hy, forcing)
    rw = _component_residual(N, signs[1], eps, np.asarray(w, float),
                             spec.hx, spec.hy, forcing)
    res = float(max(np.nanmax(np.abs(rv)), np.nanmax(np.abs(rw))))
    return GordonSolution(kind, eps, np.asarray(v, float), np.asarray(w, float),
                          spec.hx, spec.hy, spec.origin, res, None, True, (0, 0),
                          v_x, v_y, w_x, w_y)


# ---------------------------------------------------------------------------
# the (v, w) <-> (C1, C2) dictionary
# ---------------------------------------------------------------------------

def vw_from_C(C1, C2, branch: str):
    """Invert the Kahler-function dictionary on the chosen branch.

    coth: C_j = coth(v + (-1)^j w); tanh: C_j = tanh(v + (-1)^j w);
    tan: C1 = tan(v + w), C2 = tan(v - w).
    """
    C1 = np.asarray(C1, dtype=float)
    C2 = np.asarray(C2, dtype=float)
    if branch == "coth":
        if np.any(C1 ** 2 <= 1.0) or np.any(C2 ** 2 <= 1.0):
            raise BranchMismatch("coth branch requires C_j^2 > 1")
        a1 = np.arctanh(1.0 / C1)   # = v - w
        a2 = np.arctanh(1.0 / C2)   # = v + w
    elif branch == "tanh":
        if np.any(C1 ** 2 >= 1.0) or np.any(C2 ** 2 >= 1.0):
            raise BranchMismatch("tanh branch requires C_j^2 < 1")
        a1 = np.arctanh(C1)
        a2 = np.arctanh(C2)
    elif branch == "tan":
        a2 = np.arctan(C1)          # = v + w
        a1 = np.arctan(C2)          # = v - w
    else:
        raise ValueError(f"unknown branch {branch!r}")
    v = (a2 + a1) / 2.0
    w = (a2 - a1) / 2.0
    return v, w


# ---------------------------------------------------------------------------
# the explicit families
# ---------------------------------------------------------------------------

# theorem -> (eps, p, b, equation kind, branch, norm of the phase q(t))
# The equation kinds for A2/B1/B2 are the ones under which the generated
# data satisfies the full first-order compatibility system in this
# package's orientation convention for the para-complex variable.
FAMILY_TABLE = {
    "A1": (1, 0, 1, "sinh_plus", "coth", 1),
    "A2": (-1, 1, 1, "sinh_minus", "coth", -1),
    "B1": (-1, 1, 1, "sinh_mixed", "tanh", -1),
    "B2": (-1, 1, 1, "sinh_plus", "coth", 1),
    "C1": (1, 1, 1, "sin_mixed", "tan", 1),
    "C2": (-1, 0, 1, "sin_mixed", "tan", 1),
}


def family_phase(eps: int, t: float, qnorm: int) -> ScalarEps:
    """Constant phase of the 1-parameter family.

    qnorm=+1: the norm-preserving rotation (cos + i sin for eps=1,
    cosh + i sinh for eps=-1); qnorm=-1: the frame factor exp_eps, whose
    para modulus is -1 (needed when |gamma|^2 < 0 on the family).
    """
    if qnorm == 1:
        if eps == 1:
            return ScalarEps(np.cos(t / 2.0), np.sin(t / 2.0), 1)
        return ScalarEps(np.cosh(t / 2.0), np.sinh(t / 2.0), -1)
    return exp_eps(t / 2.0, eps)


def family_mask(theorem: str, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Admissible region of the chosen family, inequalities verbatim."""
    Sp, Sm = v + w, v - w
    if theorem == "A1":
        return v ** 2 - w ** 2 > 0
    if theorem == "A2":
        return v ** 2 - w ** 2 < 0
    if theorem == "B1":
        return (np.abs(Sm) < 1.0) & (np.abs(Sp) < 1.0)
    if theorem == "B2":
        return (v ** 2 - w ** 2 > 0) & (np.abs(Sm) > 1.0) & (np.abs(Sp) > 1.0)
    if theorem in ("C1", "C2"):
        return (np.abs(Sm) < np.pi / 2) & (np.abs(Sp) < np.pi / 2)
    raise ValueError(f"unknown theorem {theorem!r}")


def _sqrt_signed(r: np.ndarray, eps: int) -> ScalarEps:
    """sqrt of a real field inside the eps-scalars: i*sqrt(-r) where r < 0."""
    pos = r >= 0
    re = np.where(pos, np.sqrt(np.abs(r)), 0.0)
    im = np.where(pos, 0.0, np.sqrt(np.abs(r)))
    return ScalarEps(re, im, eps)


def build_family(theorem: str, sol: GordonSolution, t: float = 0.0,
                 strict: bool = False) -> FundamentalData:
    """Fundamental data of the 1-parameter family attached to a Gordon pair."""
    if theorem not in FAMILY_TABLE:
        raise ValueError(f"unknown theorem {theorem!r}")
    eps, p, b, kind, branch, qnorm = FAMILY_TABLE[theorem]
    if sol.eq_kind != kind:
        raise ValueError(
            f"{theorem} needs a {kind} solution, got {sol.eq_kind}")
    if sol.eps != eps:
        raise ValueError(
            f"{theorem} needs an eps={eps:+d} solution, got {sol.eps:+d}")

    v, w = sol.v, sol.w
    Sp, Sm = v + w, v - w
    if np.any(np.abs(Sp) > OVERFLOW_GUARD) or np.any(np.abs(Sm) > OVERFLOW_GUARD):
        raise DomainViolation("|v +- w| exceeds the overflow guard 350")
    mask = family_mask(theorem, v, w) & sol.mask
    if strict and not np.all(mask):
        i, j = np.argwhere(~mask)[0]
        raise DomainViolation(
            f"grid point ({i},{j}) violates the {theorem} region inequalities")
    if not np.any(mask):
        raise EmptyMask(f"no grid point satisfies the {theorem} region")

    vz = sol.dz("v")
    wz = sol.dz("w")
    Spz = vz + wz
    Smz = vz - wz
    i_unit = unit_i(eps)
    q = family_phase(eps, t, qnorm)

    with np.errstate(invalid="ignore", divide="ignore"):
        if branch == "coth":
            C1 = 1.0 / np.tanh(Sm)
            C2 = 1.0 / np.tanh(Sp)
            e2u = 4.0 * np.sinh(Sp) * np.sinh(Sm)
            if theorem == "A2":
                e2u = -e2u
            r1 = np.sinh(Sp) / np.sinh(Sm)
            r2 = np.sinh(Sm) / np.sinh(Sp)
            cothp, cothm = 1.0 / np.tanh(Sp), 1.0 / np.tanh(Sm)
            A = 0.5 * (ScalarEps(cothp, 0.0, eps) * Spz
                       - ScalarEps(cothm, 0.0, eps) * Smz)
            uz = 0.5 * (ScalarEps(cothp, 0.0, eps) * Spz
                        + ScalarEps(cothm, 0.0, eps) * Smz)
            g1 = np.sqrt(2.0) * q * _sqrt_signed(r1, eps)
            g2 = np.sqrt(2.0) * q * _sqrt_signed(r2, eps)
            f1 = -i_unit * g1 * Smz
            f2 = -i_unit * g2 * Spz
        elif branch == "tanh":
            C1 = np.tanh(Sm)
            C2 = np.tanh(Sp)
            e2u = 4.0 * np.cosh(Sp) * np.cosh(Sm)
            r1 = np.cosh(Sp) / np.cosh(Sm)
            r2 = np.cosh(Sm) / np.cosh(Sp)
            A = 0.5 * (ScalarEps(np.tanh(Sp), 0.0, eps) * Spz
                       - ScalarEps(np.tanh(Sm), 0.0, eps) * Smz)
            uz = 0.5 * (ScalarEps(np.tanh(Sp), 0.0, eps) * Spz
                        + ScalarEps(np.tanh(Sm), 0.0, eps) * Smz)
            g1 = np.sqrt(2.0) * q * _sqrt_signed(r1, eps)
            g2 = np.sqrt(2.0) * q * _sqrt_signed(r2, eps)
            f1 = -i_unit * g1 * Smz
            f2 = -i_unit * g2 * Spz
        else:  # tan branch (C families)
            C1 = np.tan(Sp)
            C2 = np.tan(Sm)
            e2u = 4.0 * np.cos(Sp) * np.cos(Sm)
            r1 = np.cos(Sm) / np.cos(Sp)
            r2 = np.cos(Sp) / np.cos(Sm)
            A = 0.5 * (ScalarEps(np.tan(Sp), 0.0, eps) * Spz
                       - ScalarEps(np.tan(Sm), 0.0, eps) * Smz)
            uz = -0.5 * (ScalarEps(np.tan(Sp), 0.0, eps) * Spz
                         + ScalarEps(np.tan(Sm), 0.0, eps) * Smz)
            g1 = np.sqrt(2.0) * q * _sqrt_signed(r1, eps)
            g2 = np.sqrt(2.0) * q * _sqrt_signed(r2, eps)
            f1 = i_unit * g1 * Spz
            f2 = i_unit * g2 * Smz

        u = np.where(mask, 0.5 * np.log(np.where(mask, e2u, 1.0)), np.nan)

    def masked(z: ScalarEps) -> ScalarEps:
        return ScalarEps(np.where(mask, z.re, np.nan),
                         np.where(mask, z.im, np.nan), eps)

    D = FundamentalData(p, eps, b, sol.hx, sol.hy, u,
                        np.where(mask, C1, np.nan), np.where(mask, C2, np.nan),
                        masked(g1), masked(g2), masked(f1), masked(f2),
                        masked(A), mask, None, None, sol.origin,
                        masked(uz), {}, {"theorem": theorem, "t": t})
    return D
