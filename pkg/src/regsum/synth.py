"""Deterministic synthetic combustion-flavored fields and tracer particles.

Stands in for a large-scale simulation at desk scale: time-varying
multivariate fields on a mildly non-uniform rectilinear grid plus tracer
particles advected by a divergence-free rotation field with periodic
boundaries.  Everything derives from a single seeded RNG, so identical
specs produce byte-identical outputs.

Variables (fixed set, in table order):
  0 heat_release  everywhere <= 0 (drifting negative Gaussian bumps)
  1 ch2o          proportional to |heat_release| plus noise, clamped >= 0
  2 alpha_class   piecewise-constant classification in {-1, 0, +1}
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpec
from .grid import RectilinearAxes
from .particles import ParticleRecord

VARIABLES = (
    ("heat_release", "J/m^3/s"),
    ("ch2o", "kg/kg"),
    ("alpha_class", ""),
)

HEAT_RELEASE, CH2O, ALPHA_CLASS = 0, 1, 2

_N_BUMPS = 6
_DT = 1e-4  # seconds between outputs
_CH2O_GAIN = 1.2e-12
_CH2O_NOISE = 2e-3
_ALPHA_THRESHOLD = 0.4
_ADVECT_SUBSTEPS = 4
_OMEGA = 2.0e3  # rad/s about the domain's z axis
_W_Z = 5.0e2  # constant z drift


@dataclass(frozen=True)
class SynthSpec:
    dims: tuple[int, int, int]
    timesteps: int
    seed: int
    particle_count: int = 0

    def __post_init__(self):
        if len(self.dims) != 3 or any(d < 4 for d in self.dims):
            raise InvalidSpec(f"dims must be >= 4 per axis, got {self.dims}")
        if self.timesteps < 1:
            raise InvalidSpec("timesteps must be >= 1")
        if self.seed < 0 or self.particle_count < 0:
            raise InvalidSpec("seed and particle_count must be non-negative")


@dataclass
class SynthData:
    spec: SynthSpec
    axes: RectilinearAxes
    times: list[float]
    # per timestep: var id -> flat x-fastest f64 array
    fields: list[dict[int, np.ndarray]] = field(default_factory=list)
    particles: list[list[ParticleRecord]] = field(default_factory=list)


class _Scene:
    """Seeded analytic scene: bump track, classification phases, axes."""

    def __init__(self, spec: SynthSpec):
        rng = np.random.default_rng(spec.seed)
        self.amplitude = rng.uniform(0.8e10, 2.0e10, _N_BUMPS)
        self.sigma = rng.uniform(0.12, 0.3, _N_BUMPS)
        self.center0 = rng.uniform(0.0, 1.0, (_N_BUMPS, 3))
        self.velocity = rng.uniform(-500.0, 500.0, (_N_BUMPS, 3))
        self.phase = rng.uniform(0.0, 2 * np.pi, 3)
        self.alpha_rate = rng.uniform(500.0, 1500.0)
        coords = []
        for d in spec.dims:
            steps = rng.uniform(0.5, 1.5, d - 1)
            c = np.concatenate([[0.0], np.cumsum(steps)])
            coords.append(c / c[-1])
        self.axes = RectilinearAxes(*coords)
        self.rng = rng  # consumed further for noise and particle seeding

    def heat_release(self, x, y, z, t: float) -> np.ndarray:
        total = np.zeros(np.broadcast(x, y, z).shape)
        for k in range(_N_BUMPS):
            c = (self.center0[k] + self.velocity[k] * t) % 1.0
            d2 = (x - c[0]) ** 2 + (y - c[1]) ** 2 + (z - c[2]) ** 2
            total += self.amplitude[k] * np.exp(-d2 / self.sigma[k] ** 2)
        return -total

    def ch2o_base(self, hr: np.ndarray) -> np.ndarray:
        return _CH2O_GAIN * np.abs(hr)

    def alpha_class(self, x, y, z, t: float) -> np.ndarray:
        s = np.sin(2 * np.pi * x + self.phase[0]) * np.cos(2 * np.pi * y + self.phase[1])
        s = s + 0.5 * np.sin(2 * np.pi * z + self.phase[2] + self.alpha_rate * t)
        return np.where(s < -_ALPHA_THRESHOLD, -1.0, np.where(s > _ALPHA_THRESHOLD, 1.0, 0.0))


def _advect(pos: np.ndarray, dt: float) -> np.ndarray:
    """Fixed-step explicit integration of a divergence-free rotation field,
    wrapped into the periodic unit cube."""
    h = dt / _ADVECT_SUBSTEPS
    out = pos.copy()
    for _ in range(_ADVECT_SUBSTEPS):
        u = np.empty_like(out)
        u[:, 0] = -_OMEGA * (out[:, 1] - 0.5)
        u[:, 1] = _OMEGA * (out[:, 0] - 0.5)
        u[:, 2] = _W_Z
        out += h * u
        out %= 1.0
    return out


def generate(spec: SynthSpec) -> SynthData:
    """Generate fields and particles for every timestep of the spec."""
    scene = _Scene(spec)
    nx, ny, nz = spec.dims
    cz, cy, cx = np.meshgrid(
        scene.axes.coords_z, scene.axes.coords_y, scene.axes.coords_x, indexing="ij"
    )
    data = SynthData(spec=spec, axes=scene.axes, times=[])

    pos = scene.rng.uniform(0.0, 1.0, (spec.particle_count, 3))
    for step in range(spec.timesteps):
        t = step * _DT
        data.times.append(t)
        hr = scene.heat_release(cx, cy, cz, t)
        noise = scene.rng.normal(0.0, _CH2O_NOISE, hr.shape)
        ch2o = np.maximum(0.0, scene.ch2o_base(hr) + noise)
        alpha = scene.alpha_class(cx, cy, cz, t)
        data.fields.append(
            {
                HEAT_RELEASE: hr.reshape(-1),
                CH2O: ch2o.reshape(-1),
                ALPHA_CLASS: alpha.reshape(-1),
            }
        )

        if step > 0:
            pos = _advect(pos, _DT)
        px, py, pz = pos[:, 0], pos[:, 1], pos[:, 2]
        p_hr = scene.heat_release(px, py, pz, t)
        p_ch2o = scene.ch2o_base(p_hr)
        p_alpha = scene.alpha_class(px, py, pz, t)
        records = [
            ParticleRecord(
                id=i,
                pos=(float(px[i]), float(py[i]), float(pz[i])),
                values=(float(p_hr[i]), float(p_ch2o[i]), float(p_alpha[i])),
            )
            for i in range(spec.particle_count)
        ]
        data.particles.append(records)
    return data
