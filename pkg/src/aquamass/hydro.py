"""Flow regime and actuation numbers for towing debris.

Drag uses the quadratic law ``0.5 * rho * v**2 * cd * area`` with the frame's
total segmented area as the reference area. Motor torque is
``k * I * (V - k_prime * omega)`` and the pull on the debris is torque over
drum radius.
"""
import logging
import math
import warnings
from dataclasses import dataclass

from .errors import DomainError, RegenerativeRegime

log = logging.getLogger(__name__)

DEFAULT_CD = 1.0


def _check(name, value, allow_zero=False):
    ok = math.isfinite(value) and (value >= 0 if allow_zero else value > 0)
    if not ok:
        bound = ">= 0" if allow_zero else "> 0"
        raise DomainError(f"{name} must be finite and {bound}, got {value!r}")


@dataclass(frozen=True)
class FluidEnvironment:
    rho: float
    v: float
    L: float
    mu: float
    turbulence_intensity: float = 0.0

    def __post_init__(self):
        _check("rho", self.rho)
        _check("v", self.v, allow_zero=True)
        _check("L", self.L)
        _check("mu", self.mu)


@dataclass(frozen=True)
class MotorSpec:
    k: float
    k_prime: float
    radius: float

    def __post_init__(self):
        _check("k", self.k)
        _check("k_prime", self.k_prime, allow_zero=True)
        _check("radius", self.radius)


@dataclass(frozen=True)
class MotorState:
    current: float
    voltage: float
    omega: float

    def __post_init__(self):
        _check("current", self.current, allow_zero=True)
        _check("omega", self.omega, allow_zero=True)
        if not math.isfinite(self.voltage):
            raise DomainError("voltage must be finite")


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    margin_n: float
    pull_n: float
    drag_n: float
    torque_nm: float
    reynolds: float
    regenerative: bool

    def to_dict(self):
        return {
            "verdict": "feasible" if self.feasible else "infeasible",
            "margin_n": self.margin_n,
            "pull_n": self.pull_n,
            "drag_n": self.drag_n,
            "torque_nm": self.torque_nm,
            "reynolds": self.reynolds,
            "regenerative": self.regenerative,
        }


def reynolds(env):
    if env.mu <= 0:
        raise DomainError("dynamic viscosity must be positive")
    return (env.rho * env.v * env.L) / env.mu


def drag_force(env, area_m2, cd=DEFAULT_CD):
    if area_m2 < 0:
        raise DomainError("area must be non-negative")
    if not cd > 0:
        raise DomainError("drag coefficient must be positive")
    return 0.5 * env.rho * env.v ** 2 * cd * area_m2


def _torque(spec, state):
    return spec.k * state.current * (state.voltage - spec.k_prime * state.omega)


def motor_torque(spec, state):
    """Shaft torque in N*m; negative values warn with :class:`RegenerativeRegime`."""
    torque = _torque(spec, state)
    if torque < 0:
        warnings.warn(f"negative motor torque {torque:g} N*m", RegenerativeRegime, stacklevel=2)
    return torque


def pull_force(torque, radius):
    if not radius > 0:
        raise DomainError("radius must be positive")
    return torque / radius


def feasibility(record, env, spec, state, cd=DEFAULT_CD):
    """Can the motor out-pull the drag on everything segmented in ``record``?"""
    torque = _torque(spec, state)
    if env.turbulence_intensity:
        log.info("turbulence intensity %g (informational)", env.turbulence_intensity)
    pull = pull_force(torque, spec.radius)
    drag = drag_force(env, record.total_area_m2, cd)
    return Feasibility(
        feasible=pull >= drag,
        margin_n=pull - drag,
        pull_n=pull,
        drag_n=drag,
        torque_nm=torque,
        reynolds=reynolds(env),
        regenerative=torque < 0,
    )
