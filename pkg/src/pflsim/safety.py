"""Power-and-force-limiting computations.

Covers the body-region database, the two-body reduced mass, the maximum safe
relative velocity, the three effective-mass methods, and a 1D spring-impact
oracle used to validate the force-limit model end to end.
"""

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import NonPositiveMass, SingularInertia, UnknownRegion

_MOBILITY_EPS = 1e-12


@dataclass(frozen=True)
class BodyRegion:
    """One row of the body model; ``k`` is stored as printed, in N/mm."""

    name: str
    f_max: float
    k: float
    m_h: float

    @property
    def k_si(self):
        """Spring constant in N/m."""
        return self.k * 1000.0


def _load_regions():
    doc = json.loads(resources.files("pflsim").joinpath("data/iso_ts_15066_body.json").read_text())
    table = {}
    for row in doc["regions"]:
        region = BodyRegion(row["name"], float(row["f_max"]), float(row["k"]), float(row["m_h"]))
        table[region.name] = region
    return table


BODY_REGIONS = _load_regions()


def body_region(name):
    """Look up one of the 12 canonical regions (case/whitespace-insensitive)."""
    key = " ".join(str(name).lower().split())
    try:
        return BODY_REGIONS[key]
    except KeyError:
        raise UnknownRegion(
            f"unknown body region {name!r}; known: {sorted(BODY_REGIONS)}"
        ) from None


def reduced_mass(m_h, m_r):
    """Two-body reduced mass (1/m_h + 1/m_r)^-1."""
    if m_h <= 0 or m_r <= 0:
        raise NonPositiveMass(f"masses must be positive, got m_h={m_h}, m_r={m_r}")
    return 1.0 / (1.0 / m_h + 1.0 / m_r)


def v_rel_max(region, m_r):
    """Maximum safe relative speed toward ``region`` for robot effective mass m_r."""
    mu = reduced_mass(region.m_h, m_r)
    return region.f_max / math.sqrt(mu * region.k_si)


@dataclass(frozen=True)
class EffectiveMassMethod:
    """Tagged selector: 'iso_conservative' (payload), 'operational_space', 'reduced' (lam).

    'reduced' scales a base method by lam; the base defaults to the
    operational-space mass and may be set to 'iso_conservative' so reduction
    suites can be compared against a conservative-capped baseline.
    """

    method: str = "operational_space"
    payload: float = 0.0
    lam: float = 1.0
    base: str = "operational_space"

    _NAMES = ("iso_conservative", "operational_space", "reduced")

    def __post_init__(self):
        if self.method not in self._NAMES:
            raise ValueError(f"method must be one of {self._NAMES}")
        if self.base not in ("iso_conservative", "operational_space"):
            raise ValueError("base must be 'iso_conservative' or 'operational_space'")
        if self.payload < 0:
            raise ValueError("payload must be >= 0")
        if self.method == "reduced" and not 0.0 <= self.lam < 1.0:
            raise ValueError("reduction factor must satisfy 0 <= lambda < 1")

    @classmethod
    def from_dict(cls, doc):
        return cls(doc.get("method", "operational_space"),
                   payload=doc.get("payload", 0.0),
                   lam=doc.get("lambda", doc.get("lam", 1.0)),
                   base=doc.get("base", "operational_space"))


def operational_space_mass(model, q, u):
    """Khatib effective mass (u^T Jv M^-1 Jv^T u)^-1 along unit direction u."""
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-6:
        raise ValueError("direction u must be a unit vector")
    Jv = model.jacobian(q)[: model.pos_dim, :]
    M = model.mass_matrix(q)
    Ju = Jv.T @ u
    mobility = float(Ju @ np.linalg.solve(M, Ju))
    if mobility <= _MOBILITY_EPS:
        raise SingularInertia(f"direction structurally immobile (u^T J M^-1 J^T u = {mobility:.3e})")
    return 1.0 / mobility


def effective_mass(method, model, q, u):
    """Robot effective mass per the selected method.

    iso_conservative: half the total moving mass plus payload (configuration
    independent). operational_space: Khatib mass along u. reduced: lambda
    times the base method's value (operational-space unless configured).
    """
    if method.method == "iso_conservative":
        return float(np.sum(model.masses)) / 2.0 + method.payload
    if method.method == "reduced" and method.base == "iso_conservative":
        return method.lam * (float(np.sum(model.masses)) / 2.0 + method.payload)
    m = operational_space_mass(model, q, u)
    if method.method == "reduced":
        return method.lam * m
    return m


def simulate_impact_1d(v, mu, k, steps_per_quarter=2000):
    """Integrate a point mass mu hitting a linear spring k at speed v.

    Returns the peak spring force; analytically v*sqrt(mu*k). Serves as the
    independent oracle closing the loop on the velocity-limit formula.
    """
    if v <= 0 or mu <= 0 or k <= 0:
        raise ValueError("v, mu, k must all be positive")
    omega = math.sqrt(k / mu)
    dt = (math.pi / (2.0 * omega)) / steps_per_quarter
    x, vel = 0.0, v
    peak = 0.0
    # RK4 on [x, v]; stop once the mass separates (x back through 0)
    while True:
        def deriv(state):
            return (state[1], -(k / mu) * state[0])

        s = (x, vel)
        k1 = deriv(s)
        k2 = deriv((s[0] + 0.5 * dt * k1[0], s[1] + 0.5 * dt * k1[1]))
        k3 = deriv((s[0] + 0.5 * dt * k2[0], s[1] + 0.5 * dt * k2[1]))
        k4 = deriv((s[0] + dt * k3[0], s[1] + dt * k3[1]))
        x = x + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        vel = vel + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        peak = max(peak, k * x)
        if x <= 0.0 and vel < 0.0:
            return peak
