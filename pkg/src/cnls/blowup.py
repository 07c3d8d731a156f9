"""Pseudo-conformal blow-up family, virial certificate and the mass-trap inequality."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .functionals import FieldPair, PhysParams, ScalingParams, energy, scale_pair, variance, variance_rate
from .grid import ConfigurationError, Grid
from .groundstate import GroundState

__all__ = [
    "BlowupCertificate",
    "virial_certificate",
    "explicit_blowup_pair",
    "explicit_blowup_time_derivative",
    "explicit_blowup_residual",
    "schrodinger_residual",
    "explicit_gradient_sq",
    "mass_trap_check",
]


@dataclass(frozen=True)
class BlowupCertificate:
    applicable: bool
    energy: float
    v0: float
    v1: float
    t_upper: float
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def virial_certificate(s0: FieldPair, P: PhysParams) -> BlowupCertificate:
    """Upper bound on the existence time from the exact quadratic variance.

    At the critical power ``V(t) = V(0) + V'(0) t + 8 E t^2``; with ``E < 0``
    it has one positive root, which bounds the lifetime of the solution.
    """
    E = energy(s0, P)
    v0 = variance(s0)
    v1 = variance_rate(s0)
    if not P.critical:
        return BlowupCertificate(False, E, v0, v1, math.inf, "no certificate off the critical power")
    if not E < 0:
        return BlowupCertificate(False, E, v0, v1, math.inf, "no certificate for non-negative energy")
    disc = v1 * v1 - 32.0 * E * v0
    t_upper = (-v1 - math.sqrt(disc)) / (16.0 * E)
    return BlowupCertificate(True, E, v0, v1, t_upper, "variance vanishes by t_upper")


def _omegas(g: GroundState, omega) -> tuple[float, float]:
    if omega is None:
        return g.params.omega1, g.params.omega2
    w1, w2 = omega
    return float(w1), float(w2)


def _check_family(t: float, g: GroundState) -> None:
    if t >= 1.0:
        raise ValueError(f"past blow-up time: t={t} >= 1")
    if t < 0.0:
        raise ValueError(f"time must be non-negative, got {t}")
    if not g.params.critical:
        raise ConfigurationError("explicit family needs a ground state at p = 2/n")


def _profile_and_phase(t: float, g: GroundState, omega):
    grid = g.grid
    tau = 1.0 - t
    prof = scale_pair(g.pair, ScalingParams(tau ** (-grid.n / 2), 1.0 / tau))
    w = _omegas(g, omega)
    thetas = [-(grid.r2 - 4.0 * wj) / (4.0 * tau) for wj in w]
    return prof, thetas


def explicit_blowup_pair(t: float, g: GroundState, omega=None) -> FieldPair:
    """``(1-t)^{-n/2} exp(-i(|x|^2 - 4 w_j)/(4(1-t))) (U, V)(x/(1-t))`` on the grid.

    The profile is dilated spectrally, so a model that is no longer resolved
    raises :class:`~cnls.functionals.ScalingError`.
    """
    _check_family(t, g)
    prof, (th1, th2) = _profile_and_phase(t, g, omega)
    return FieldPair(g.grid, np.exp(1j * th1) * prof.phi, np.exp(1j * th2) * prof.psi)


def explicit_blowup_time_derivative(t: float, g: GroundState, omega=None) -> FieldPair:
    """Analytic ``d/dt`` of :func:`explicit_blowup_pair`.

    With ``W`` the amplitude-scaled dilated profile and ``theta`` the phase,
    ``d/dt = e^{i theta} [ (n/2 + i theta) W + x.grad W ] / (1-t)``.
    """
    _check_family(t, g)
    grid = g.grid
    tau = 1.0 - t
    prof, thetas = _profile_and_phase(t, g, omega)
    out = []
    for W, th in zip((prof.phi, prof.psi), thetas):
        dW = ((0.5 * grid.n + 1j * th) * W + grid.x_dot_grad(W)) / tau
        out.append(np.exp(1j * th) * dW)
    return FieldPair(grid, *out)


def schrodinger_residual(s: FieldPair, dt_s: FieldPair, P: PhysParams) -> FieldPair:
    """``i d_t phi + lap phi + (|phi|^{2p} + beta |psi|^{p+1} |phi|^{p-1}) phi`` and its mirror."""
    from .dynamics import nonlinear_frequencies

    g = s.grid
    wa, wb = nonlinear_frequencies(s.phi, s.psi, P)
    r1 = 1j * dt_s.phi + g.laplacian(s.phi) + wa * s.phi
    r2 = 1j * dt_s.psi + g.laplacian(s.psi) + wb * s.psi
    return FieldPair(g, r1, r2)


def explicit_blowup_residual(t: float, g: GroundState, omega=None) -> float:
    """Max-norm residual of the system on the explicit family at time ``t``."""
    s = explicit_blowup_pair(t, g, omega)
    ds = explicit_blowup_time_derivative(t, g, omega)
    res = schrodinger_residual(s, ds, g.params)
    return float(max(np.max(np.abs(res.phi)), np.max(np.abs(res.psi))))


def explicit_gradient_sq(t: float, g: GroundState) -> float:
    """Closed form ``G_U/(1-t)^2 + V_U/4`` of the family's total gradient norm."""
    from .functionals import norms

    nm = norms(g.pair, g.params)
    V = variance(g.pair, check_boundary=False)
    return nm.grad / (1.0 - t) ** 2 + V / 4.0


def mass_trap_check(f: np.ndarray, grid: Grid) -> tuple[float, float]:
    """``(||h||^2, (2/n) || |x| h || ||grad h||)``; the first never exceeds the second."""
    grid.check_shape(f)
    grid.warn_if_boundary(f, what="mass trap")
    lhs = grid.lp_power(f, 2)
    if lhs == 0.0:
        return 0.0, 0.0
    xm = grid.integrate(grid.r2 * np.abs(f) ** 2)
    gm = grid.gradient_norm_sq(f)
    return lhs, (2.0 / grid.n) * math.sqrt(xm) * math.sqrt(gm)
