"""Strang-split spectral time stepping for the coupled focusing NLS system.

The nonlinear sub-flow leaves ``|phi|`` and ``|psi|`` unchanged pointwise, so it
is solved exactly by a phase rotation; the linear sub-flow is diagonal in
Fourier space.  Both are unitary, which pins the masses to round-off.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft

from .functionals import DiagnosticsRecord, FieldPair, PhysParams, diagnostics, energy, mass_pair
from .grid import ConfigurationError

log = logging.getLogger(__name__)

__all__ = [
    "StepSchedule",
    "BlowupPolicy",
    "Verdict",
    "Trajectory",
    "IntegrationOverflow",
    "nonlinear_frequencies",
    "SplitStepper",
    "step_strang",
    "adaptive_dt",
    "evolve",
    "CauchyClass",
    "classify_cauchy_data",
]


class IntegrationOverflow(ArithmeticError):
    def __init__(self, step: int, msg: str = "non-finite field"):
        super().__init__(f"{msg} at step {step}")
        self.step = step


@dataclass(frozen=True)
class StepSchedule:
    dt: float
    t_end: float
    output_every: int = 1
    adapt: bool = False
    dt_min: float = 1e-9

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0:
            raise ConfigurationError(f"t_end must be positive, got {self.t_end}")
        if self.output_every < 1:
            raise ConfigurationError("output_every must be >= 1")
        if self.dt_min > self.dt:
            raise ConfigurationError("dt_min must not exceed dt")


@dataclass(frozen=True)
class BlowupPolicy:
    grad_growth_factor: float = 1e6
    tail_max: float = 1e-2

    def __post_init__(self):
        if not self.grad_growth_factor > 1.0:
            raise ConfigurationError("grad_growth_factor must exceed 1")
        if not self.tail_max > 0:
            raise ConfigurationError("tail_max must be positive")


class Verdict(str, enum.Enum):
    COMPLETED = "completed"
    BLOWUP_DETECTED = "blowup_detected"
    RESOLUTION_LOST = "resolution_lost"


@dataclass
class Trajectory:
    records: list[DiagnosticsRecord]
    final_state: FieldPair
    verdict: Verdict
    t_star: float | None = None
    steps: int = 0
    reason: str = ""

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def _cross(a: np.ndarray, b: np.ndarray, p: float) -> np.ndarray:
    """``|b|^{p+1} |a|^{p-1}``, taken as 0 where ``a = 0``."""
    if p == 1.0:
        return b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        out = b ** (p + 1) * a ** (p - 1)
    return np.where(a > 0, out, 0.0)


def nonlinear_frequencies(phi: np.ndarray, psi: np.ndarray, P: PhysParams) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise rotation rates ``|phi|^{2p} + beta |psi|^{p+1} |phi|^{p-1}`` and its mirror."""
    a = np.abs(phi)
    b = np.abs(psi)
    if P.p == 1.0:
        a2, b2 = a * a, b * b
        return a2 + P.beta * b2, b2 + P.beta * a2
    wa = a ** (2 * P.p) + P.beta * _cross(a, b, P.p)
    wb = b ** (2 * P.p) + P.beta * _cross(b, a, P.p)
    return wa, wb


class SplitStepper:
    """Reusable Strang stepper; caches the linear propagator per step size."""

    def __init__(self, grid, P: PhysParams, *, nonlinear: bool = True):
        self.grid = grid
        self.P = P
        self.nonlinear = nonlinear
        self._dt = None
        self._prop = None

    def _propagator(self, dt: float) -> np.ndarray:
        if dt != self._dt:
            self._prop = np.exp(-1j * dt * self.grid.k2)
            self._dt = dt
        return self._prop

    def rotate(self, phi, psi, tau):
        if not self.nonlinear:
            return phi, psi
        wa, wb = nonlinear_frequencies(phi, psi, self.P)
        return phi * np.exp(1j * tau * wa), psi * np.exp(1j * tau * wb)

    def step(self, phi: np.ndarray, psi: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
        prop = self._propagator(dt)
        phi, psi = self.rotate(phi, psi, 0.5 * dt)
        phi = fft.ifftn(prop * fft.fftn(phi))
        psi = fft.ifftn(prop * fft.fftn(psi))
        return self.rotate(phi, psi, 0.5 * dt)


def step_strang(s: FieldPair, dt: float, P: PhysParams, *, nonlinear: bool = True, step_index: int = 0) -> FieldPair:
    """One Strang step ``N(dt/2) L(dt) N(dt/2)``; negative ``dt`` runs backwards."""
    phi, psi = SplitStepper(s.grid, P, nonlinear=nonlinear).step(s.phi, s.psi, dt)
    out = FieldPair(s.grid, phi, psi)
    if not out.is_finite():
        raise IntegrationOverflow(step_index)
    return out


def _max_frequency(s: FieldPair, P: PhysParams) -> float:
    wa, wb = nonlinear_frequencies(s.phi, s.psi, P)
    if P.p < 1.0:
        # |phi|^{p-1} is singular at zeros of phi, where the rotation is irrelevant.
        a = np.abs(s.phi)
        b = np.abs(s.psi)
        wa = np.where(a > 1e-6 * max(a.max(), 1e-300), wa, 0.0)
        wb = np.where(b > 1e-6 * max(b.max(), 1e-300), wb, 0.0)
    return float(max(wa.max(initial=0.0), wb.max(initial=0.0)))


def adaptive_dt(s: FieldPair, P: PhysParams, dt_base: float, dt_min: float = 0.0, c_phase: float = 0.1) -> float:
    """Cap the nonlinear phase advance per step at ``c_phase`` radians."""
    w = _max_frequency(s, P)
    dt = dt_base if w == 0.0 else min(dt_base, c_phase / w)
    return max(dt, dt_min)


def evolve(
    s0: FieldPair,
    P: PhysParams,
    sched: StepSchedule,
    pol: BlowupPolicy | None = None,
    *,
    nonlinear: bool = True,
) -> Trajectory:
    """Integrate to ``sched.t_end`` with diagnostics and blow-up detection.

    The gradient and tail gates are checked after every step.  Blow-up is
    declared when the total gradient norm exceeds ``grad_growth_factor``
    times its initial value while the spectral tail is still trusted;
    a tail above ``tail_max`` on its own means resolution was lost.
    """
    pol = pol or BlowupPolicy()
    g = s0.grid
    tail0 = g.spectral_tail_fraction(s0.phi, s0.psi)
    if tail0 >= pol.tail_max:
        raise ValueError(f"initial data under-resolved (tail fraction {tail0:.2e})")
    g.warn_if_boundary(s0.phi, s0.psi, what="initial data")

    stepper = SplitStepper(g, P, nonlinear=nonlinear)
    rec0 = diagnostics(s0, P, 0.0)
    records = [rec0]
    grad0 = rec0.grad_sq
    phi, psi = s0.phi.copy(), s0.psi.copy()
    t = 0.0
    steps = 0
    verdict = Verdict.COMPLETED
    t_star = None
    reason = ""
    # tolerance on the final time so that t_end/dt steps land exactly
    t_eps = 1e-12 * sched.t_end

    while t < sched.t_end - t_eps:
        if sched.adapt:
            dt = adaptive_dt(FieldPair(g, phi, psi), P, sched.dt)
            if dt < sched.dt_min:
                verdict, t_star = Verdict.RESOLUTION_LOST, t
                reason = f"adaptive step {dt:.3e} below dt_min"
                break
        else:
            dt = sched.dt
        dt = min(dt, sched.t_end - t)
        phi, psi = stepper.step(phi, psi, dt)
        steps += 1
        if sched.adapt or dt != sched.dt:
            t += dt
        else:
            t = steps * sched.dt
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(psi))):
            verdict, t_star = Verdict.RESOLUTION_LOST, t
            reason = str(IntegrationOverflow(steps))
            break

        phih, psih = fft.fftn(phi), fft.fftn(psi)
        grad = g.cell_volume / g.size * float(np.sum(g.k2 * (np.abs(phih) ** 2 + np.abs(psih) ** 2)))
        pw = np.abs(phih) ** 2 + np.abs(psih) ** 2
        tail = float(np.sum(pw[g.tail_mask])) / float(np.sum(pw))

        halt = None
        if grad > pol.grad_growth_factor * grad0 and tail <= pol.tail_max:
            halt = Verdict.BLOWUP_DETECTED
            reason = f"gradient grew by {grad / grad0:.3g}"
        elif tail > pol.tail_max:
            halt = Verdict.RESOLUTION_LOST
            reason = f"spectral tail {tail:.3e} above {pol.tail_max:.1e}"

        if halt is not None or steps % sched.output_every == 0 or t >= sched.t_end - t_eps:
            records.append(diagnostics(FieldPair(g, phi, psi), P, t))
        if halt is not None:
            verdict, t_star = halt, t
            break

    log.debug("evolve: %s after %d steps at t=%.6g", verdict.value, steps, t)
    return Trajectory(records, FieldPair(g, phi, psi), verdict, t_star, steps, reason)


class CauchyClass(str, enum.Enum):
    GLOBAL_SUBCRITICAL = "global_subcritical"
    GLOBAL_SMALL_MASS = "global_small_mass"
    BLOWUP_NEGATIVE_ENERGY = "blowup_negative_energy"
    UNDETERMINED = "undetermined"


def classify_cauchy_data(s0: FieldPair, P: PhysParams, gn_constant: float | None = None) -> CauchyClass:
    """A-priori classification from mass, energy and the sharp GN constant.

    ``gn_constant`` is required in the critical case ``p = 2/n``.
    """
    if P.n >= 3 and P.p > P.energy_critical_power:
        raise ValueError("outside local well-posedness range")
    if P.subcritical:
        return CauchyClass.GLOBAL_SUBCRITICAL
    if not P.critical:
        return CauchyClass.UNDETERMINED
    if gn_constant is None or not gn_constant > 0:
        raise ValueError("critical classification needs the GN constant")
    m = sum(mass_pair(s0))
    if m ** (2.0 / P.n) < (P.p + 1) / gn_constant:
        return CauchyClass.GLOBAL_SMALL_MASS
    if energy(s0, P) < 0:
        return CauchyClass.BLOWUP_NEGATIVE_ENERGY
    return CauchyClass.UNDETERMINED
