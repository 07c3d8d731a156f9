"""Ground states of the stationary system

    -Δu + ω₁u = (|u|^{2p} + β|u|^{p-1}|v|^{p+1}) u
    -Δv + ω₂v = (|v|^{2p} + β|v|^{p-1}|u|^{p+1}) v

computed two independent ways: a radial shooting oracle for scalar profiles and
a Nehari-constrained gradient flow on the periodic grid.
"""
from __future__ import annotations

import enum
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft, special
from scipy.interpolate import CubicHermiteSpline

from .functionals import FieldPair, Norms, PhysParams, norms, _J_from_norms, _pohozaev_from_norms
from .grid import ConfigurationError, Grid

log = logging.getLogger(__name__)

__all__ = [
    "RadialProfile",
    "shoot_scalar_radial",
    "sample_profile",
    "nehari_project",
    "elliptic_residual",
    "StartFamily",
    "GroundStateKind",
    "GroundState",
    "MinimizationStalled",
    "minimize_action",
    "gn_constant_from_ground_state",
    "gn_constant_routes",
    "build_test_pair_zhat",
    "weak_form_certificate",
    "action_identities",
    "CERT_TOL",
]

CERT_TOL = 1e-6

_SPHERE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}


# ---------------------------------------------------------------------------
# radial shooting oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialProfile:
    """Positive radial solution ``z`` of ``-Δz + z = a |z|^{2p} z``.

    Samples ``values``/``slopes`` live on ``r = 0, dr, ..., r_max``.  Past
    ``r_match`` they come from an inward integration of the decaying branch;
    beyond ``r_max`` the profile is ``c r^{-ν} K_ν(r)`` with ``ν = (n-2)/2``.
    """

    n: int
    p: float
    a: float
    r: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    r_match: float
    tail_coeff: float
    dr: float

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    @property
    def z0(self) -> float:
        return float(self.values[0])

    @property
    def derivative_at_origin(self) -> float:
        return float(self.slopes[0])

    def _tail(self, r):
        nu = 0.5 * (self.n - 2)
        return self.tail_coeff * r ** (-nu) * special.kv(nu, r)

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        spline = CubicHermiteSpline(self.r, self.values, self.slopes)
        inner = r <= self.r_max
        out = np.empty_like(r)
        out[inner] = spline(r[inner])
        out[~inner] = self._tail(r[~inner])
        return out

    def mass(self) -> float:
        from scipy.integrate import simpson

        w = self.r ** (self.n - 1) if self.n > 1 else np.ones_like(self.r)
        return _SPHERE_AREA[self.n] * float(simpson(self.values**2 * w, x=self.r))

    def ode_residual(self) -> np.ndarray:
        """Residual of the radial ODE on ``[2dr, 0.9 r_max]`` (4th-order differences)."""
        r, z, w, h = self.r, self.values, self.slopes, self.dr
        i1 = 2
        i2 = int(0.9 * self.r_max / h)
        dw = (-w[i1 + 2 : i2 + 3] + 8 * w[i1 + 1 : i2 + 2] - 8 * w[i1 - 1 : i2] + w[i1 - 2 : i2 - 1]) / (12 * h)
        rr = r[i1 : i2 + 1]
        zz = z[i1 : i2 + 1]
        return dw + (self.n - 1) / rr * w[i1 : i2 + 1] - zz + self.a * np.abs(zz) ** (2 * self.p) * zz

    def scaled(self, c: float) -> np.ndarray:
        return c * self.values


_FINE_STEPS = 100
_FINE_SUB = 64


def _shoot(n, p, a, z0, dr, r_max, record=False):
    """RK4 from the origin; returns (+1 crossed zero | -1 turned up | 0 undecided, arrays)."""
    q = 2.0 * p
    nm1 = n - 1.0
    # series z = z0 + c2 r^2 + c4 r^4 about the regular singular point
    zpp0 = (z0 - a * z0 ** (q + 1)) / n
    c2 = 0.5 * zpp0
    c4 = (1.0 - a * (q + 1) * z0**q) * c2 / (4.0 * (n + 2))
    r = dr
    z = z0 + c2 * dr**2 + c4 * dr**4
    w = 2 * c2 * dr + 4 * c4 * dr**3
    nsteps = int(round(r_max / dr))
    if record:
        zs = [z0, z]
        ws = [0.0, w]

    def f(r, z, w):
        return w, -nm1 / r * w + z - a * abs(z) ** q * z

    def rk4(r, z, w, h):
        h2 = 0.5 * h
        k1z, k1w = f(r, z, w)
        k2z, k2w = f(r + h2, z + h2 * k1z, w + h2 * k1w)
        k3z, k3w = f(r + h2, z + h2 * k2z, w + h2 * k2w)
        k4z, k4w = f(r + h, z + h * k3z, w + h * k3w)
        return z + h / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z), w + h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w)

    status = 0
    for i in range(1, nsteps):
        if i < _FINE_STEPS:
            # the (n-1)/r term makes the first steps stiff; sub-step them
            h = dr / _FINE_SUB
            for j in range(_FINE_SUB):
                z, w = rk4(r + j * h, z, w, h)
        else:
            z, w = rk4(r, z, w, dr)
        r = (i + 1) * dr
        if record:
            zs.append(z)
            ws.append(w)
        if z < 0:
            status = 1
            break
        if w > 0:
            status = -1
            break
    if record:
        return status, np.array(zs), np.array(ws)
    return status, None, None


def _inward_tail(n, p, a, r, i_m, z_match):
    """Decaying branch integrated inward from ``r_max`` to ``r[i_m]``.

    Starts from ``c r^{-ν} K_ν(r)``, where the nonlinearity is below round-off,
    and tunes ``c`` by secant so the value at ``r[i_m]`` equals ``z_match``.
    """
    nu = 0.5 * (n - 2)
    q = 2.0 * p
    nm1 = n - 1.0
    dr = r[1] - r[0]
    rs = r[i_m:][::-1]

    def f(r, z, w):
        return w, -nm1 / r * w + z - a * abs(z) ** q * z

    def integrate(c):
        z = c * rs[0] ** (-nu) * special.kv(nu, rs[0])
        w = -c * rs[0] ** (-nu) * special.kv(nu + 1, rs[0])
        zs = np.empty(len(rs))
        ws = np.empty(len(rs))
        zs[0], ws[0] = z, w
        h = -dr
        h2 = 0.5 * h
        for i in range(1, len(rs)):
            rr = rs[i - 1]
            k1z, k1w = f(rr, z, w)
            k2z, k2w = f(rr + h2, z + h2 * k1z, w + h2 * k1w)
            k3z, k3w = f(rr + h2, z + h2 * k2z, w + h2 * k2w)
            k4z, k4w = f(rr + h, z + h * k3z, w + h * k3w)
            z += h / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z)
            w += h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w)
            zs[i], ws[i] = z, w
        return zs[::-1], ws[::-1]

    c0 = z_match / (rs[-1] ** (-nu) * special.kv(nu, rs[-1]))
    zs, ws = integrate(c0)
    c1 = c0 * z_match / zs[0]
    for _ in range(8):
        zs1, ws1 = integrate(c1)
        if abs(zs1[0] - z_match) <= 1e-15 * z_match or zs1[0] == zs[0]:
            break
        c0, c1, zs = c1, c1 + (c1 - c0) * (z_match - zs1[0]) / (zs1[0] - zs[0]), zs1
    return zs1, ws1, c1


@lru_cache(maxsize=32)
def shoot_scalar_radial(n: int, p: float, a: float = 1.0, r_max: float = 25.0, dr: float = 1e-3) -> RadialProfile:
    """Ground-state profile by bisection on ``z(0)``.

    Too large a ``z(0)`` makes the solution cross zero, too small makes it
    turn back up; the bisection is run to the last representable bracket and
    the tail is continued analytically past the point where the two
    bracketing shots separate.
    """
    if n not in (1, 2, 3):
        raise ConfigurationError(f"dimension must be 1, 2 or 3, got {n}")
    if not p > 0 or (n >= 3 and p >= 2.0 / (n - 2)):
        raise ConfigurationError(f"no ground state for n={n}, p={p}")
    if not a > 0:
        raise ConfigurationError("nonlinearity coefficient must be positive")

    lo = a ** (-1.0 / (2 * p)) * (1 + 1e-9)
    hi = 2.0 * lo
    for _ in range(60):
        if _shoot(n, p, a, hi, dr, r_max)[0] == 1:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise RuntimeError("no ground state bracket found")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        status = _shoot(n, p, a, mid, dr, r_max)[0]
        if status == 1:
            hi = mid
        elif status == -1:
            lo = mid
        else:
            lo = hi = mid
            break

    _, z_lo, w_lo = _shoot(n, p, a, lo, dr, r_max, record=True)
    _, z_hi, w_hi = _shoot(n, p, a, hi, dr, r_max, record=True)
    m = min(len(z_lo), len(z_hi))
    z_lo, z_hi, w_lo, w_hi = z_lo[:m], z_hi[:m], w_lo[:m], w_hi[:m]
    bad = (np.abs(z_hi - z_lo) > 1e-9 * np.abs(z_lo)) | (z_lo <= 0) | (z_hi <= 0) | (w_lo[:m] > 0) | (w_hi > 0)
    bad[0] = False
    i_m = (int(np.argmax(bad)) if bad.any() else m) - 1
    if i_m < 10:
        raise RuntimeError("no ground state bracket found")

    npts = int(round(r_max / dr)) + 1
    r = dr * np.arange(npts)
    z = np.empty(npts)
    w = np.empty(npts)
    z[: i_m + 1] = 0.5 * (z_lo[: i_m + 1] + z_hi[: i_m + 1])
    w[: i_m + 1] = 0.5 * (w_lo[: i_m + 1] + w_hi[: i_m + 1])
    zt, wt, c = _inward_tail(n, p, a, r, i_m, z[i_m])
    z[i_m + 1 :] = zt[1:]
    w[i_m + 1 :] = wt[1:]
    r_m = r[i_m]
    prof = RadialProfile(n, p, a, r, z, w, float(r_m), float(c), dr)
    log.debug("shooting n=%d p=%g a=%g: z0=%.16g, match at r=%.3f", n, p, a, prof.z0, r_m)
    return prof


def sample_profile(grid: Grid, prof: RadialProfile, omega: float = 1.0) -> np.ndarray:
    """``omega^{1/(2p)} z(sqrt(omega) |x|)``, the profile for frequency ``omega``."""
    return omega ** (1.0 / (2 * prof.p)) * prof(math.sqrt(omega) * grid.r)


# ---------------------------------------------------------------------------
# Nehari projection and elliptic residual
# ---------------------------------------------------------------------------


def nehari_project(s: FieldPair, P: PhysParams) -> FieldPair:
    """Rescale ``s`` onto the Nehari manifold by homogeneity."""
    nm = norms(s, P)
    if nm.K == 0.0:
        raise ValueError("cannot project trivial pair")
    return s.scaled((nm.A / nm.K) ** (1.0 / (2 * P.p)))


def _forces(u, v, P: PhysParams):
    au, av = np.abs(u), np.abs(v)
    p = P.p
    if p == 1.0:
        au2, av2 = au * au, av * av
        return (au2 + P.beta * av2) * u, (av2 + P.beta * au2) * v
    with np.errstate(divide="ignore", invalid="ignore"):
        cu = np.where(au > 0, au ** (p - 1) * av ** (p + 1), 0.0)
        cv = np.where(av > 0, av ** (p - 1) * au ** (p + 1), 0.0)
    return (au ** (2 * p) + P.beta * cu) * u, (av ** (2 * p) + P.beta * cv) * v


def elliptic_residual(s: FieldPair, P: PhysParams) -> tuple[np.ndarray, np.ndarray]:
    g = s.grid
    fu, fv = _forces(s.phi, s.psi, P)
    ru = -g.laplacian(s.phi) + P.omega1 * s.phi - fu
    rv = -g.laplacian(s.psi) + P.omega2 * s.psi - fv
    return ru, rv


# ---------------------------------------------------------------------------
# gradient flow on the Nehari manifold
# ---------------------------------------------------------------------------


class GroundStateKind(str, enum.Enum):
    SCALAR_FIRST = "scalar_first"
    SCALAR_SECOND = "scalar_second"
    VECTOR = "vector"

    @property
    def is_scalar(self) -> bool:
        return self is not GroundStateKind.VECTOR


@dataclass(frozen=True)
class StartFamily:
    """Which initial guesses the flow is started from.

    ``scalar`` adds ``(z, 0)`` and ``(0, z)``, ``zhat`` adds ``(ẑ, ẑ)``, and
    ``n_random`` seeded mixtures ``(a z + bumps, b z + bumps)`` follow.
    """

    scalar: bool = True
    zhat: bool = True
    n_random: int = 3
    seed: int = 0
    noise: float = 0.05


@dataclass
class Candidate:
    label: str
    index: int
    u: np.ndarray
    v: np.ndarray
    action: float
    residual: float
    iterations: int
    converged: bool


@dataclass
class GroundState:
    pair: FieldPair
    params: PhysParams
    action_m: float
    masses: tuple[float, float]
    gn_constant: float
    nehari_res: float
    pohozaev_res: float
    weak_res: tuple[float, float]
    kind: GroundStateKind
    residual: float = 0.0
    start: str = ""
    iterations: int = 0
    seed: int = 0
    ties: list[dict] = field(default_factory=list)

    @property
    def grid(self) -> Grid:
        return self.pair.grid

    @property
    def total_mass(self) -> float:
        return self.masses[0] + self.masses[1]

    @property
    def weighted_mass(self) -> float:
        return self.params.omega1 * self.masses[0] + self.params.omega2 * self.masses[1]

    @property
    def certificate_max_residual(self) -> float:
        return max(abs(self.nehari_res), abs(self.pohozaev_res), *map(abs, self.weak_res))

    @property
    def certified(self) -> bool:
        return self.certificate_max_residual < CERT_TOL

    def summary(self) -> dict:
        P = self.params
        return {
            "params": {"n": P.n, "p": P.p, "beta": P.beta, "omega1": P.omega1, "omega2": P.omega2},
            "grid": {"n": self.grid.n, "points": self.grid.points, "box_length": self.grid.box_length},
            "kind": self.kind.value,
            "action_m": self.action_m,
            "masses": list(self.masses),
            "gn_constant": self.gn_constant,
            "certificates": {
                "nehari": self.nehari_res,
                "pohozaev": self.pohozaev_res,
                "weak_form": list(self.weak_res),
                "elliptic_residual_max": self.residual,
                "certified": self.certified,
            },
            "start": self.start,
            "iterations": self.iterations,
            "seed": self.seed,
            "ties": self.ties,
        }


class MinimizationStalled(RuntimeError):
    def __init__(self, msg, best: Candidate | None = None):
        super().__init__(msg)
        self.best = best


class _Flow:
    """Sobolev-preconditioned gradient flow of the action, reprojected onto Nehari."""

    def __init__(self, grid: Grid, P: PhysParams):
        self.g = grid
        self.P = P
        self.op_u = grid.rk2 + P.omega1
        self.op_v = grid.rk2 + P.omega2
        self._c = grid.cell_volume / grid.size

    def quad(self, uh, op):
        return self._c * float(np.sum(self.g.rweights * op * np.abs(uh) ** 2))

    def project(self, u, v):
        """Nehari scaling factor and the resulting action."""
        uh, vh = fft.rfftn(u), fft.rfftn(v)
        A = self.quad(uh, self.op_u) + self.quad(vh, self.op_v)
        P = self.P
        au, av = np.abs(u), np.abs(v)
        q = 2 * P.p + 2
        K = self.g.integrate(au**q + av**q + 2 * P.beta * (au * av) ** (P.p + 1))
        if K == 0.0:
            raise ValueError("cannot project trivial pair")
        s = (A / K) ** (1.0 / (2 * P.p))
        return s, P.p / (2 * P.p + 2) * s * s * A

    def gradient(self, u, v):
        """Preconditioned gradient and max-norm residual of the elliptic system."""
        fu, fv = _forces(u, v, self.P)
        shape = u.shape
        uh, vh = fft.rfftn(u), fft.rfftn(v)
        fuh, fvh = fft.rfftn(fu), fft.rfftn(fv)
        ru = fft.irfftn(self.op_u * uh - fuh, s=shape)
        rv = fft.irfftn(self.op_v * vh - fvh, s=shape)
        gu = u - fft.irfftn(fuh / self.op_u, s=shape)
        gv = v - fft.irfftn(fvh / self.op_v, s=shape)
        scale = max(float(np.max(np.abs(u))), float(np.max(np.abs(v))))
        res = max(float(np.max(np.abs(ru))), float(np.max(np.abs(rv)))) / scale
        return gu, gv, res

    def run(self, u, v, *, max_iter: int, tol: float, label: str = "", index: int = 0) -> Candidate:
        s, action = self.project(u, v)
        u, v = s * u, s * v
        tau = 1.0
        res = math.inf
        it = 0
        for it in range(1, max_iter + 1):
            gu, gv, res = self.gradient(u, v)
            if res < tol:
                break
            for _ in range(40):
                cu, cv = u - tau * gu, v - tau * gv
                s, a_new = self.project(cu, cv)
                if a_new <= action * (1 + 1e-13):
                    break
                tau *= 0.5
            else:
                log.debug("%s: backtracking exhausted at iteration %d", label, it)
                break
            u, v, action = s * cu, s * cv, a_new
            tau = min(1.0, 1.5 * tau)
        converged = res < tol
        return Candidate(label, index, u, v, action, res, it, converged)


def _scalar_start(grid: Grid, P: PhysParams) -> tuple[np.ndarray, np.ndarray]:
    prof = shoot_scalar_radial(P.n, P.p, 1.0)
    return sample_profile(grid, prof, P.omega1), sample_profile(grid, prof, P.omega2)


def _random_bumps(grid: Grid, rng: np.random.Generator, count: int = 4) -> np.ndarray:
    out = np.zeros(grid.shape)
    for _ in range(count):
        centre = rng.uniform(-1.0, 1.0, size=grid.n)
        width = rng.uniform(0.7, 1.5)
        amp = rng.normal()
        d2 = sum((c - x0) ** 2 for c, x0 in zip(grid.coords, centre))
        out += amp * np.exp(-d2 / (2 * width**2))
    return out


def _starts(grid: Grid, P: PhysParams, fam: StartFamily):
    zu, zv = _scalar_start(grid, P)
    zero = np.zeros(grid.shape)
    out = []
    if fam.scalar:
        out.append(("(z,0)", zu, zero))
        out.append(("(0,z)", zero, zv))
    if fam.zhat:
        c = (1.0 + P.beta) ** (-1.0 / (2 * P.p))
        out.append(("(zhat,zhat)", c * zu, c * zv))
    rng = np.random.default_rng(fam.seed)
    peak = float(np.max(zu))
    for i in range(fam.n_random):
        a, b = rng.uniform(0.2, 1.0, size=2)
        u = a * zu + fam.noise * peak * _random_bumps(grid, rng)
        v = b * zv + fam.noise * peak * _random_bumps(grid, rng)
        out.append((f"random{i}", u, v))
    return out


def _kind(mu: float, mv: float) -> GroundStateKind:
    if mv < 1e-8 * mu:
        return GroundStateKind.SCALAR_FIRST
    if mu < 1e-8 * mv:
        return GroundStateKind.SCALAR_SECOND
    return GroundStateKind.VECTOR


def _certify(pair: FieldPair, P: PhysParams) -> tuple[Norms, float, float, tuple[float, float]]:
    nm = norms(pair, P)
    neh = (nm.A - nm.K) / nm.A
    poh = _pohozaev_from_norms(nm, P.n) / (P.n / (2 * P.p + 2) * nm.K)
    wu = (nm.grad_u + P.omega1 * nm.mass_u - nm.nl_u - P.beta * nm.cross) / nm.A
    wv = (nm.grad_v + P.omega2 * nm.mass_v - nm.nl_v - P.beta * nm.cross) / nm.A
    return nm, neh, poh, (wu, wv)


def _ground_state(grid: Grid, P: PhysParams, cand: Candidate, seed: int) -> GroundState:
    pair = FieldPair(grid, cand.u, cand.v)
    nm, neh, poh, weak = _certify(pair, P)
    gs = GroundState(
        pair=pair,
        params=P,
        action_m=cand.action,
        masses=(nm.mass_u, nm.mass_v),
        gn_constant=math.nan,
        nehari_res=neh,
        pohozaev_res=poh,
        weak_res=weak,
        kind=_kind(nm.mass_u, nm.mass_v),
        residual=cand.residual,
        start=cand.label,
        iterations=cand.iterations,
        seed=seed,
    )
    try:
        gs.gn_constant = gn_constant_from_ground_state(gs)
    except ValueError:
        pass
    return gs


def minimize_action(
    P: PhysParams,
    grid: Grid,
    starts: StartFamily | None = None,
    *,
    max_iter: int = 3000,
    tol: float = 1e-10,
    workers: int = 1,
    tie_rtol: float = 1e-9,
) -> GroundState:
    """Least-action solution over a seeded multi-start family.

    Every start is flowed independently; the lowest converged action wins,
    ties going to the earliest start.  Converged candidates of a different
    kind within ``tie_rtol`` of the winner are listed in ``ties``.
    """
    if grid.n != P.n:
        raise ConfigurationError("grid dimension does not match params")
    if P.n >= 3 and P.p >= P.energy_critical_power:
        raise ConfigurationError("no ground state at or above the energy-critical power")
    fam = starts or StartFamily()
    flow = _Flow(grid, P)
    jobs = _starts(grid, P, fam)

    def run(item):
        i, (label, u, v) = item
        return flow.run(u, v, max_iter=max_iter, tol=tol, label=label, index=i)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            cands = list(ex.map(run, enumerate(jobs)))
    else:
        cands = [run(item) for item in enumerate(jobs)]
    for c in cands:
        log.debug("start %-12s converged=%s action=%.12g res=%.2e iters=%d", c.label, c.converged, c.action, c.residual, c.iterations)

    done = [c for c in cands if c.converged]
    if not done:
        best = min(cands, key=lambda c: c.residual)
        raise MinimizationStalled(
            f"minimization stalled: best residual {best.residual:.3e} from {best.label}", best
        )
    m = min(c.action for c in done)
    winner = next(c for c in done if c.action <= m * (1 + 1e-12))
    gs = _ground_state(grid, P, winner, fam.seed)
    for c in done:
        if c is winner or abs(c.action - winner.action) > tie_rtol * abs(winner.action):
            continue
        k = _kind(grid.integrate(c.u**2), grid.integrate(c.v**2))
        if k.is_scalar != gs.kind.is_scalar:
            gs.ties.append({"start": c.label, "kind": k.value, "action": c.action})
    if not gs.certified:
        log.warning("ground state certificates above %.0e: max residual %.2e", CERT_TOL, gs.certificate_max_residual)
    return gs


# ---------------------------------------------------------------------------
# sharp GN constant and certificates
# ---------------------------------------------------------------------------


def _mec(m: float, n: int, p: float) -> float:
    pn = p * n
    return (
        m**p * n ** (pn / 2) * (2 * p + 2 - pn) ** (p + 1 - pn / 2) / (2 * (p + 1) * p ** (p - pn / 2))
    )


def gn_constant_routes(g: GroundState) -> dict[str, float]:
    """``1/C`` from the action, from the quotient J, and (critical case) from the mass."""
    P = g.params
    n, p = P.n, P.p
    if abs(p * n - (2 * p + 2)) < 1e-12:
        raise ValueError("formula degenerate at energy-critical exponent")
    out = {"mec": _mec(g.action_m, n, p), "J": _J_from_norms(norms(g.pair, P), n)}
    if P.critical:
        out["meccr"] = n / (n + 2) * g.weighted_mass ** (2.0 / n)
    return out


def gn_constant_from_ground_state(g: GroundState) -> float:
    """Sharp Gagliardo-Nirenberg constant ``C`` from the ground-state action."""
    routes = gn_constant_routes(g)
    inv = routes["mec"]
    if "meccr" in routes and abs(routes["meccr"] - inv) > CERT_TOL * inv:
        warnings.warn(
            f"critical-case GN routes disagree: {inv!r} vs {routes['meccr']!r}", RuntimeWarning, stacklevel=2
        )
    return 1.0 / inv


def build_test_pair_zhat(P: PhysParams, grid: Grid) -> FieldPair:
    """``(ẑ, ẑ)`` with ``ẑ = (1+β)^{-1/(2p)} z`` sampled from the shooting profile."""
    if grid.n != P.n:
        raise ConfigurationError("grid dimension does not match params")
    prof = shoot_scalar_radial(P.n, P.p, 1.0)
    c = (1.0 + P.beta) ** (-1.0 / (2 * P.p))
    return FieldPair(grid, c * sample_profile(grid, prof, P.omega1), c * sample_profile(grid, prof, P.omega2))


def weak_form_certificate(g: GroundState) -> tuple[float, float]:
    """Per-component weak-form identities, residuals relative to the total quadratic part."""
    return _certify(g.pair, g.params)[3]


def action_identities(g: GroundState) -> tuple[float, float, float]:
    """Ratios ``G/(n m)``, ``M/((2-n+2/p) m)``, ``K/((2p+2)/p m)``; all 1 at a ground state."""
    P = g.params
    nm = norms(g.pair, P)
    m = g.action_m
    n, p = P.n, P.p
    return nm.grad / (n * m), nm.weighted_mass / ((2 - n + 2 / p) * m), nm.K / ((2 * p + 2) / p * m)
