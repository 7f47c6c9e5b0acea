"""
Physical parameters, coupling constant and quasi-particle dispersion.

Default units are dimensionless with ``hbar = m = 1``.  SI inputs are
accepted with ``units="si"`` (``hbar`` in J s, ``m`` in kg, ``a`` in m,
``rho`` in m^-3) and can be rescaled with :func:`to_dimensionless`.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import constants

from fermicoh.errors import ConfigurationError, DomainError
from fermicoh.grassmann import GrassmannAlgebra, substitute_bilinears

UNIT_SYSTEMS = ("dimensionless", "si")
GAPLESS_TOLERANCE = 1e-9
DILUTENESS_THRESHOLD = 0.1
CSV_HEADER = ("k", "E_k", "eps_k", "gapless")


@dataclass(frozen=True)
class PhysicalParams:
    hbar: float = 1.0
    m: float = 1.0
    a: float = 0.0
    rho: float = 1.0
    units: str = "dimensionless"

    def __post_init__(self):
        if self.units not in UNIT_SYSTEMS:
            raise ConfigurationError(f"unknown unit system {self.units!r}")
        if not self.m > 0:
            raise ConfigurationError(f"mass must be positive, got {self.m}")
        if not self.rho > 0:
            raise ConfigurationError(f"density must be positive, got {self.rho}")
        if not self.hbar > 0:
            raise ConfigurationError(f"hbar must be positive, got {self.hbar}")

    @classmethod
    def si(cls, m: float, a: float, rho: float) -> PhysicalParams:
        return cls(hbar=constants.hbar, m=m, a=a, rho=rho, units="si")

    @property
    def diluteness(self) -> float:
        """``|a| rho^(1/3)``."""
        return abs(self.a) * self.rho ** (1.0 / 3.0)

    @property
    def interparticle_distance(self) -> float:
        return self.rho ** (-1.0 / 3.0)

    def to_dict(self) -> dict:
        return asdict(self)


def coupling(params: PhysicalParams) -> float:
    """``g = 4 pi hbar^2 a / m``; negative for attractive interactions."""
    return 4.0 * math.pi * params.hbar ** 2 * params.a / params.m


def free_energy(params: PhysicalParams, k):
    """``E_k = hbar^2 k^2 / 2m``; works elementwise on arrays."""
    return params.hbar ** 2 * np.square(k) / (2.0 * params.m)


def critical_coupling(params: PhysicalParams, k: float) -> float:
    """Coupling at which the quasi-particle energy at ``k`` vanishes: ``-E_k / 2 rho``."""
    return -float(free_energy(params, k)) / (2.0 * params.rho)


def critical_scattering_length(params: PhysicalParams, k: float) -> float:
    return critical_coupling(params, k) * params.m / (4.0 * math.pi * params.hbar ** 2)


@dataclass(frozen=True)
class Dispersion:
    params: PhysicalParams
    g: float
    k: tuple[float, ...]
    E_k: tuple[float, ...]
    eps_k: tuple[float, ...]
    gapless: tuple[bool, ...]
    tolerance: float = field(default=GAPLESS_TOLERANCE, compare=False)

    @property
    def gap(self) -> float:
        """Quasi-particle energy at zero momentum, ``2 rho g``."""
        return 2.0 * self.params.rho * self.g

    def gapless_points(self) -> list[float]:
        return [k for k, flag in zip(self.k, self.gapless) if flag]

    def to_dict(self) -> dict:
        p = self.params
        return {
            "params": {"hbar": p.hbar, "m": p.m, "a": p.a, "rho": p.rho, "units": p.units},
            "g": self.g,
            "gap": self.gap,
            "points": [
                {"k": k, "E_k": e, "eps_k": q, "gapless": f}
                for k, e, q, f in zip(self.k, self.E_k, self.eps_k, self.gapless)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> Dispersion:
        params = PhysicalParams(**data["params"])
        pts = data["points"]
        return cls(
            params=params,
            g=float(data["g"]),
            k=tuple(float(p["k"]) for p in pts),
            E_k=tuple(float(p["E_k"]) for p in pts),
            eps_k=tuple(float(p["eps_k"]) for p in pts),
            gapless=tuple(bool(p["gapless"]) for p in pts),
        )

    @classmethod
    def from_json(cls, text: str) -> Dispersion:
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        return format_csv(zip(self.k, self.E_k, self.eps_k, self.gapless))


def _g9(x: float) -> str:
    return f"{x:.9g}"


def format_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for k, e, q, f in rows:
        w.writerow([_g9(k), _g9(e), _g9(q), "true" if f else "false"])
    return buf.getvalue()


def parse_csv(text: str) -> list[tuple[float, float, float, bool]]:
    """Rows of a dispersion CSV as ``(k, E_k, eps_k, gapless)``."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    rows = []
    for row in reader:
        if not row:
            continue
        k, e, q, f = row
        if f not in ("true", "false"):
            raise ValueError(f"bad gapless flag {f!r}")
        rows.append((float(k), float(e), float(q), f == "true"))
    return rows


def dispersion(params: PhysicalParams, g: float, k_grid: Sequence[float],
               tolerance: float = GAPLESS_TOLERANCE) -> Dispersion:
    """``eps_k = hbar^2 k^2 / 2m + 2 rho g`` on a grid of momentum magnitudes."""
    k = np.asarray(k_grid, dtype=float)
    if k.ndim != 1 or k.size == 0:
        raise ConfigurationError("momentum grid must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(k)) or np.any(k < 0):
        raise ConfigurationError("momentum grid must hold finite non-negative magnitudes")
    e_k = free_energy(params, k)
    eps = e_k + 2.0 * params.rho * g
    # negative eps beyond the critical coupling is reported as is
    flags = np.abs(eps) <= tolerance
    return Dispersion(
        params=params, g=float(g),
        k=tuple(float(x) for x in k),
        E_k=tuple(float(x) for x in e_k),
        eps_k=tuple(float(x) for x in eps),
        gapless=tuple(bool(x) for x in flags),
        tolerance=tolerance,
    )


def momentum_grid(kmin: float, kmax: float, points: int) -> np.ndarray:
    if points < 1:
        raise ConfigurationError(f"grid needs at least one point, got {points}")
    if kmin < 0 or kmax < kmin:
        raise ConfigurationError(f"invalid grid bounds [{kmin}, {kmax}]")
    return np.linspace(kmin, kmax, points)


def lowest_order_energy(params: PhysicalParams, k_F: float, N_F: float,
                        v0_over_volume: float | None = None) -> tuple[float, float]:
    """
    Energy of the macroscopic mode alone: ``(E_F, mu)`` with ``E_F = mu N_F``.

    The quartic term ``y*_F y*_F y_F y_F`` is built in the Grassmann algebra
    and vanishes there, so only the kinetic bilinear survives; the bilinear
    is then replaced by ``N_F``.
    """
    if N_F < 0:
        raise DomainError(f"N_F must be non-negative, got {N_F}")
    mu = float(free_energy(params, k_F))
    alg = GrassmannAlgebra(1)
    ys, y = alg.ystar(0), alg.y(0)
    interaction = ys * ys * y * y
    assert interaction.is_zero()
    v0 = coupling(params) if v0_over_volume is None else v0_over_volume
    energy = mu * (ys * y) + (0.5 * v0) * interaction
    return substitute_bilinears(energy, {0: N_F}).real, mu


@dataclass(frozen=True)
class RegimeReport:
    diluteness: float
    threshold: float
    dilute: bool
    range_ratio: float | None = None

    @property
    def valid(self) -> bool:
        ok = self.dilute
        if self.range_ratio is not None:
            ok = ok and self.range_ratio < self.threshold
        return ok


def regime_check(params: PhysicalParams, r0: float | None = None,
                 threshold: float = DILUTENESS_THRESHOLD) -> RegimeReport:
    """Advisory diluteness check ``|a| rho^(1/3) < threshold`` (and ``r0/d`` if given)."""
    d = params.diluteness
    ratio = None if r0 is None else r0 / params.interparticle_distance
    return RegimeReport(diluteness=d, threshold=threshold, dilute=d < threshold, range_ratio=ratio)


@dataclass(frozen=True)
class Scales:
    length: float
    energy: float

    @property
    def wavenumber(self) -> float:
        return 1.0 / self.length

    @property
    def coupling(self) -> float:
        return self.energy * self.length ** 3


def to_dimensionless(params: PhysicalParams, length_unit: float | None = None) -> tuple[PhysicalParams, Scales]:
    """
    Rescale to ``hbar = m = 1`` with lengths in units of ``length_unit``
    (default: the mean inter-particle distance).  Energies scale by
    ``hbar^2 / (m L^2)``.
    """
    L = params.interparticle_distance if length_unit is None else length_unit
    if not L > 0:
        raise ConfigurationError(f"length unit must be positive, got {L}")
    scales = Scales(length=L, energy=params.hbar ** 2 / (params.m * L ** 2))
    out = PhysicalParams(hbar=1.0, m=1.0, a=params.a / L, rho=params.rho * L ** 3, units="dimensionless")
    return out, scales
