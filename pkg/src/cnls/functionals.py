"""Scalar functionals of a field pair: masses, energy, GN quotient, action,
Nehari/Pohozaev residuals and the variance with its time derivatives.

All functionals use the frequency-weighted forms; ``omega1 = omega2 = 1``
recovers the unweighted system.  The coupling enters every functional as
``2 beta ||uv||_{p+1}^{p+1}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, astuple

import numpy as np

from .grid import ConfigurationError, Grid

__all__ = [
    "PhysParams",
    "FieldPair",
    "ScalingParams",
    "DiagnosticsRecord",
    "Norms",
    "norms",
    "mass_pair",
    "coupling_K",
    "energy",
    "gn_quotient_J",
    "action_I",
    "nehari_residual",
    "pohozaev_residual",
    "variance",
    "variance_rate",
    "variance_accel",
    "scale_pair",
    "diagnostics",
    "ScalingError",
]

CRITICAL_TOL = 1e-12


@dataclass(frozen=True)
class PhysParams:
    n: int
    p: float
    beta: float
    omega1: float = 1.0
    omega2: float = 1.0

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ConfigurationError(f"dimension must be 1, 2 or 3, got {self.n}")
        if not self.p >= 0:
            raise ConfigurationError(f"p must be >= 0, got {self.p}")
        # beta = 0 is allowed as the decoupled limit.
        if not self.beta >= 0:
            raise ConfigurationError(f"beta must be >= 0, got {self.beta}")
        if not (self.omega1 > 0 and self.omega2 > 0):
            raise ConfigurationError("omega1 and omega2 must be positive")

    @property
    def critical_power(self) -> float:
        return 2.0 / self.n

    @property
    def energy_critical_power(self) -> float:
        return math.inf if self.n <= 2 else 2.0 / (self.n - 2)

    @property
    def critical(self) -> bool:
        return abs(self.p - self.critical_power) <= CRITICAL_TOL

    @property
    def subcritical(self) -> bool:
        return self.p < self.critical_power and not self.critical

    @property
    def supercritical(self) -> bool:
        return (not self.critical) and self.critical_power < self.p < self.energy_critical_power

    def with_(self, **changes) -> "PhysParams":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(changes)
        return PhysParams(**d)


@dataclass
class FieldPair:
    grid: Grid
    phi: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=complex)
        self.psi = np.asarray(self.psi, dtype=complex)
        self.grid.check_shape(self.phi)
        self.grid.check_shape(self.psi)

    @classmethod
    def zeros(cls, grid: Grid) -> "FieldPair":
        return cls(grid, grid.zeros(), grid.zeros())

    def swapped(self) -> "FieldPair":
        return FieldPair(self.grid, self.psi.copy(), self.phi.copy())

    def scaled(self, c: float) -> "FieldPair":
        return FieldPair(self.grid, c * self.phi, c * self.psi)

    def copy(self) -> "FieldPair":
        return FieldPair(self.grid, self.phi.copy(), self.psi.copy())

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.phi)) and np.all(np.isfinite(self.psi)))


@dataclass(frozen=True)
class ScalingParams:
    mu: float
    lam: float

    def __post_init__(self):
        if not (self.mu > 0 and self.lam > 0):
            raise ConfigurationError("scaling factors must be strictly positive")


@dataclass
class DiagnosticsRecord:
    t: float
    mass_phi: float
    mass_psi: float
    grad_phi_sq: float
    grad_psi_sq: float
    energy: float
    coupling_K: float
    variance: float
    variance_rate: float
    variance_accel: float
    tail_fraction: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_row(self) -> list[float]:
        return list(astuple(self))

    @property
    def mass(self) -> float:
        return self.mass_phi + self.mass_psi

    @property
    def grad_sq(self) -> float:
        return self.grad_phi_sq + self.grad_psi_sq


@dataclass(frozen=True)
class Norms:
    """Primitive integrals every pair functional is built from."""

    mass_u: float
    mass_v: float
    grad_u: float
    grad_v: float
    nl_u: float  # ||u||_{2p+2}^{2p+2}
    nl_v: float
    cross: float  # ||uv||_{p+1}^{p+1}
    beta: float
    p: float
    omega1: float
    omega2: float

    @property
    def grad(self) -> float:
        return self.grad_u + self.grad_v

    @property
    def mass(self) -> float:
        return self.mass_u + self.mass_v

    @property
    def weighted_mass(self) -> float:
        return self.omega1 * self.mass_u + self.omega2 * self.mass_v

    @property
    def K(self) -> float:
        return self.nl_u + 2.0 * self.beta * self.cross + self.nl_v

    @property
    def A(self) -> float:
        """Quadratic part ``||grad u||^2 + ||grad v||^2 + w1||u||^2 + w2||v||^2``."""
        return self.grad + self.weighted_mass


def norms(s: FieldPair, P: PhysParams) -> Norms:
    g = s.grid
    q = 2 * P.p + 2
    au = np.abs(s.phi)
    av = np.abs(s.psi)
    return Norms(
        mass_u=g.integrate(au * au),
        mass_v=g.integrate(av * av),
        grad_u=g.gradient_norm_sq(s.phi),
        grad_v=g.gradient_norm_sq(s.psi),
        nl_u=g.integrate(au**q),
        nl_v=g.integrate(av**q),
        cross=g.integrate((au * av) ** (P.p + 1)),
        beta=P.beta,
        p=P.p,
        omega1=P.omega1,
        omega2=P.omega2,
    )


def mass_pair(s: FieldPair) -> tuple[float, float]:
    g = s.grid
    return g.lp_power(s.phi, 2), g.lp_power(s.psi, 2)


def coupling_K(s: FieldPair, P: PhysParams) -> float:
    return norms(s, P).K


def energy(s: FieldPair, P: PhysParams) -> float:
    nm = norms(s, P)
    return 0.5 * nm.grad - nm.K / (2 * P.p + 2)


def _J_from_norms(nm: Norms, n: int) -> float:
    p = nm.p
    if nm.K == 0.0:
        raise ValueError("J undefined on trivial pair")
    return nm.grad ** (p * n / 2) * nm.weighted_mass ** (p + 1 - p * n / 2) / nm.K


def gn_quotient_J(s: FieldPair, P: PhysParams) -> float:
    """Weinstein-type quotient whose infimum is ``1/C``."""
    return _J_from_norms(norms(s, P), P.n)


def action_I(s: FieldPair, P: PhysParams) -> float:
    nm = norms(s, P)
    return 0.5 * nm.A - nm.K / (2 * P.p + 2)


def nehari_residual(s: FieldPair, P: PhysParams) -> float:
    nm = norms(s, P)
    if nm.A == 0.0 and nm.K == 0.0:
        raise ValueError("Nehari excludes (0,0)")
    return nm.A - nm.K


def pohozaev_residual(s: FieldPair, P: PhysParams) -> float:
    return _pohozaev_from_norms(norms(s, P), P.n)


def _pohozaev_from_norms(nm: Norms, n: int) -> float:
    return 0.5 * (n - 2) * nm.grad + 0.5 * n * nm.weighted_mass - n / (2 * nm.p + 2) * nm.K


def variance(s: FieldPair, *, check_boundary: bool = True) -> float:
    g = s.grid
    dens = np.abs(s.phi) ** 2 + np.abs(s.psi) ** 2
    if check_boundary:
        g.warn_if_boundary(s.phi, s.psi, what="variance")
    return g.integrate(g.r2 * dens)


def variance_rate(s: FieldPair, *, check_boundary: bool = True) -> float:
    g = s.grid
    if check_boundary:
        g.warn_if_boundary(s.phi, s.psi, what="variance")
    integrand = g.x_dot_grad(s.phi) * np.conj(s.phi) + g.x_dot_grad(s.psi) * np.conj(s.psi)
    return 4.0 * g.integrate(integrand.imag)


def _variance_accel_from_norms(nm: Norms, n: int) -> float:
    p = nm.p
    K = nm.K
    direct = 8.0 * nm.grad - 4.0 * n * p / (p + 1) * K
    E = 0.5 * nm.grad - K / (2 * p + 2)
    rewritten = 16.0 * E - 8.0 * (n * p - 2) / (2 * p + 2) * K
    scale = 8.0 * nm.grad + 4.0 * n * p / (p + 1) * K
    if abs(direct - rewritten) > 1e-10 * max(scale, np.finfo(float).tiny):
        raise ArithmeticError(f"V'' formulas disagree: {direct!r} vs {rewritten!r}")
    return direct


def variance_accel(s: FieldPair, P: PhysParams) -> float:
    return _variance_accel_from_norms(norms(s, P), P.n)


class ScalingError(ValueError):
    """Rescaled field is not resolved on the grid."""


def scale_pair(s: FieldPair, sc: ScalingParams, P: PhysParams | None = None) -> FieldPair:
    """``(mu u(lam x), mu v(lam x))`` by spectral resampling on the same grid.

    The masses of the result are checked against ``mu^2 lam^-n`` times the
    originals; a mismatch or a spectral tail above 1e-6 raises
    :class:`ScalingError`.
    """
    g = s.grid
    out = FieldPair(g, sc.mu * g.dilate(s.phi, sc.lam), sc.mu * g.dilate(s.psi, sc.lam))
    if sc.mu == 1.0 and sc.lam == 1.0:
        return out
    m_old = mass_pair(s)
    m_new = mass_pair(out)
    if m_new[0] + m_new[1] > 0:
        tail = g.spectral_tail_fraction(out.phi, out.psi)
        if tail > 1e-6:
            raise ScalingError(f"scaling under-resolved (tail fraction {tail:.2e})")
    factor = sc.mu**2 * sc.lam ** (-g.n)
    for a, b in zip(m_old, m_new):
        if abs(b - factor * a) > 1e-8 * max(factor * (m_old[0] + m_old[1]), np.finfo(float).tiny):
            raise ScalingError(f"scaling under-resolved (mass {b!r} vs expected {factor * a!r})")
    return out


def diagnostics(s: FieldPair, P: PhysParams, t: float = 0.0) -> DiagnosticsRecord:
    nm = norms(s, P)
    E = 0.5 * nm.grad - nm.K / (2 * P.p + 2)
    if nm.mass > 0:
        tail = s.grid.spectral_tail_fraction(s.phi, s.psi)
    else:
        tail = 0.0
    return DiagnosticsRecord(
        t=float(t),
        mass_phi=nm.mass_u,
        mass_psi=nm.mass_v,
        grad_phi_sq=nm.grad_u,
        grad_psi_sq=nm.grad_v,
        energy=E,
        coupling_K=nm.K,
        variance=variance(s, check_boundary=False),
        variance_rate=variance_rate(s, check_boundary=False),
        variance_accel=_variance_accel_from_norms(nm, P.n),
        tail_fraction=tail,
    )
