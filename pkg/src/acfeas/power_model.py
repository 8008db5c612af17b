"""Steady-state AC power flow on tree networks with unit voltage magnitudes.

All angles are in radians. Line flows are never stored: they are derived from
the bus phase angles, so a :class:`PhaseSolution` is the complete description
of an operating point and the feasibility check reduces to load balance,
generator sign and angle-bound constraints.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Mapping, Sequence

DEFAULT_TOLERANCE = 1e-9


class NetworkError(ValueError):
    """Raised when a network fails validation."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid network: " + "; ".join(self.violations))


class SolutionError(ValueError):
    """Raised when a phase-angle assignment does not match its network."""


@dataclass(frozen=True)
class LineParams:
    """Electrical parameters of one line (per unit).

    Construction does not validate; use :meth:`violations` or
    :func:`validate_network` so that bad inputs can be reported rather than
    raised.
    """

    susceptance: float
    conductance: float
    delta_max: float

    def violations(self) -> list[str]:
        out = []
        b, g, d = self.susceptance, self.conductance, self.delta_max
        if not (math.isfinite(b) and math.isfinite(g) and math.isfinite(d)):
            out.append(f"non-finite parameter (b={b}, g={g}, delta_max={d})")
            return out
        if b > 0:
            out.append(f"susceptance {b} > 0")
        if g < 0:
            out.append(f"conductance {g} < 0")
        if b == 0 and g == 0:
            out.append("susceptance and conductance are both zero")
        if not 0 < d <= math.pi / 2:
            out.append(f"delta_max {d} outside (0, pi/2]")
        return out

    @property
    def admittance_sq(self) -> float:
        return self.susceptance**2 + self.conductance**2


class BusKind(enum.Enum):
    GENERATOR = "generator"
    LOAD = "load"


@dataclass(frozen=True)
class Bus:
    id: str
    kind: BusKind
    p_demand: float | None = None
    q_demand: float | None = None

    @classmethod
    def generator(cls, bus_id: str) -> "Bus":
        return cls(bus_id, BusKind.GENERATOR)

    @classmethod
    def load(cls, bus_id: str, p_demand: float = 0.0, q_demand: float = 0.0) -> "Bus":
        return cls(bus_id, BusKind.LOAD, float(p_demand), float(q_demand))

    @property
    def is_load(self) -> bool:
        return self.kind is BusKind.LOAD


@dataclass(frozen=True)
class Line:
    a: str
    b: str
    params: LineParams

    @property
    def name(self) -> str:
        return f"{self.a}-{self.b}"


@dataclass(frozen=True)
class NetworkInstance:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "lines", tuple(self.lines))

    def bus(self, bus_id: str) -> Bus:
        for bus in self.buses:
            if bus.id == bus_id:
                return bus
        raise KeyError(bus_id)

    @cached_property
    def violations(self) -> tuple[str, ...]:
        return tuple(_network_violations(self))

    @property
    def loads(self) -> list[Bus]:
        return [bus for bus in self.buses if bus.is_load]

    @property
    def generators(self) -> list[Bus]:
        return [bus for bus in self.buses if not bus.is_load]


@dataclass(frozen=True)
class PhaseSolution:
    """Phase angle (radians) for every bus of a network."""

    angles: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(
            self, "angles", MappingProxyType({str(k): float(v) for k, v in self.angles.items()})
        )

    def __eq__(self, other):
        if not isinstance(other, PhaseSolution):
            return NotImplemented
        return dict(self.angles) == dict(other.angles)

    def __hash__(self):
        return hash(tuple(sorted(self.angles.items())))


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    load_residuals: Mapping[str, tuple[float, float]]
    generator_injections: Mapping[str, float]
    angle_violations: list[tuple[Line, float]] = field(default_factory=list)
    tolerance_used: float = DEFAULT_TOLERANCE

    @property
    def max_residual(self) -> float:
        return max(
            (max(abs(p), abs(q)) for p, q in self.load_residuals.values()), default=0.0
        )


def line_flow(params: LineParams, delta: float) -> tuple[float, float]:
    """Real and reactive flow leaving the sending bus.

    ``delta`` is the sending-minus-receiving angle difference. The angle bound
    is not enforced here.
    """
    one_minus_cos = 1.0 - math.cos(delta)
    sin_d = math.sin(delta)
    b, g = params.susceptance, params.conductance
    p = g * one_minus_cos - b * sin_d
    q = -b * one_minus_cos - g * sin_d
    return p, q


def apparent_power_squared(params: LineParams, delta: float) -> float:
    p, q = line_flow(params, delta)
    return p * p + q * q


def capacity_from_delta_max(params: LineParams) -> float:
    """Thermal capacity equivalent to the line's angle bound.

    Evaluates ``2(g^2 + b^2)(1 - cos(delta_max))`` with the half-angle form of
    ``1 - cos`` so that small bounds keep full relative precision.
    """
    half = math.sin(params.delta_max / 2.0)
    return 4.0 * params.admittance_sq * half * half


def delta_max_from_capacity(susceptance: float, conductance: float, capacity: float) -> float:
    """Angle bound in (0, pi/2] implied by a thermal capacity.

    Returns pi/2 when the capacity exceeds ``2(b^2 + g^2)``, otherwise
    ``arccos(1 - s / (2(b^2 + g^2)))``, computed as the equivalent
    ``2 asin(sqrt(s / (4(b^2 + g^2))))``.
    """
    y2 = susceptance**2 + conductance**2
    if y2 == 0:
        raise ValueError("susceptance and conductance are both zero")
    if not capacity > 0 or not math.isfinite(capacity):
        raise ValueError(f"capacity must be positive and finite, got {capacity}")
    if capacity > 2.0 * y2:
        return math.pi / 2
    return min(2.0 * math.asin(math.sqrt(capacity / (4.0 * y2))), math.pi / 2)


def validate_network(net: NetworkInstance) -> list[str]:
    """Return human-readable invariant violations; empty means valid."""
    return list(net.violations)


def _network_violations(net: NetworkInstance) -> list[str]:
    violations: list[str] = []
    ids: dict[str, Bus] = {}
    if not net.buses:
        violations.append("network has no buses")
    for bus in net.buses:
        if bus.id in ids:
            violations.append(f"bus {bus.id}: duplicate id")
            continue
        ids[bus.id] = bus
        if bus.is_load:
            for name, value in (("p_demand", bus.p_demand), ("q_demand", bus.q_demand)):
                if value is None or not math.isfinite(value):
                    violations.append(f"bus {bus.id}: load {name} missing or non-finite")
        elif bus.p_demand is not None or bus.q_demand is not None:
            violations.append(f"bus {bus.id}: generator carries demand fields")

    # union-find over resolvable, non-duplicate lines
    parent = {bus_id: bus_id for bus_id in ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    seen_pairs = set()
    for line in net.lines:
        for problem in line.params.violations():
            violations.append(f"line {line.name}: {problem}")
        missing = [e for e in (line.a, line.b) if e not in ids]
        if missing:
            violations.append(f"line {line.name}: unknown bus {', '.join(missing)}")
            continue
        if line.a == line.b:
            violations.append(f"line {line.name}: both endpoints are the same bus")
            continue
        pair = frozenset((line.a, line.b))
        if pair in seen_pairs:
            violations.append(f"line {line.name}: duplicate line between {line.a} and {line.b}")
            continue
        seen_pairs.add(pair)
        ra, rb = find(line.a), find(line.b)
        if ra == rb:
            violations.append(f"line {line.name}: closes a cycle")
        else:
            parent[ra] = rb

    roots = {find(bus_id) for bus_id in ids}
    if len(roots) > 1:
        violations.append(f"network is disconnected ({len(roots)} components)")
    return violations


def check_feasibility(
    net: NetworkInstance, sol: PhaseSolution, tolerance: float = DEFAULT_TOLERANCE
) -> FeasibilityReport:
    """Check a phase-angle assignment against the AC feasibility constraints.

    A load residual passes when ``|residual| <= tolerance * (1 + |demand|)``;
    generators need real injection ``>= -tolerance``; each line needs
    ``|delta| - delta_max <= tolerance``. Reactive injection at generators is
    unconstrained.
    """
    if not tolerance > 0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    violations = validate_network(net)
    if violations:
        raise NetworkError(violations)
    angles = sol.angles
    missing = [bus.id for bus in net.buses if bus.id not in angles]
    if missing:
        raise SolutionError(f"missing angle for bus {', '.join(missing)}")
    extra = sorted(set(angles) - {bus.id for bus in net.buses})
    if extra:
        raise SolutionError(f"angle given for unknown bus {', '.join(extra)}")
    bad = [k for k, v in angles.items() if not math.isfinite(v)]
    if bad:
        raise SolutionError(f"non-finite angle for bus {', '.join(bad)}")

    p_out = {bus.id: 0.0 for bus in net.buses}
    q_out = {bus.id: 0.0 for bus in net.buses}
    angle_violations = []
    for line in net.lines:
        delta = angles[line.a] - angles[line.b]
        p_ab, q_ab = line_flow(line.params, delta)
        p_ba, q_ba = line_flow(line.params, -delta)
        p_out[line.a] += p_ab
        q_out[line.a] += q_ab
        p_out[line.b] += p_ba
        q_out[line.b] += q_ba
        excess = abs(delta) - line.params.delta_max
        if excess > tolerance:
            angle_violations.append((line, excess))

    feasible = not angle_violations
    load_residuals = {}
    injections = {}
    for bus in net.buses:
        if bus.is_load:
            rp = p_out[bus.id] - bus.p_demand
            rq = q_out[bus.id] - bus.q_demand
            load_residuals[bus.id] = (rp, rq)
            if abs(rp) > tolerance * (1 + abs(bus.p_demand)) or abs(rq) > tolerance * (
                1 + abs(bus.q_demand)
            ):
                feasible = False
        else:
            injections[bus.id] = p_out[bus.id]
            if p_out[bus.id] < -tolerance:
                feasible = False
    return FeasibilityReport(
        feasible=feasible,
        load_residuals=load_residuals,
        generator_injections=injections,
        angle_violations=angle_violations,
        tolerance_used=tolerance,
    )
