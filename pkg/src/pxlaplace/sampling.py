"""Reproducible random zero-trace test functions.

A sample is a sum of one to five sine modes plus a smooth bump damped to
vanish on the boundary.  Samples are stored as parameters, so the same
function can be evaluated on meshes of different resolution.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .mesh import GridFunction, Mesh

__all__ = ["SampleSpec", "random_sample", "random_samples", "bump", "sine_mode"]

MAX_FREQUENCY = 6


@dataclass(frozen=True)
class SampleSpec:
    modes: tuple  # ((k_1[, k_2]), amplitude) pairs
    bump_center: tuple
    bump_width: float
    bump_amplitude: float
    scale: float = 1.0

    def evaluate(self, mesh: Mesh) -> GridFunction:
        unit = [(c - lo) / (hi - lo) for c, (lo, hi) in zip(mesh.coords, mesh.box)]
        out = np.zeros(mesh.size)
        for ks, amp in self.modes:
            term = np.full(mesh.size, amp)
            for k, u in zip(ks, unit):
                term = term * np.sin(np.pi * k * u)
            out += term
        r2 = sum((u - c) ** 2 for u, c in zip(unit, self.bump_center))
        damp = np.ones(mesh.size)
        for u in unit:
            damp = damp * 4.0 * u * (1.0 - u)
        out += self.bump_amplitude * damp * np.exp(-r2 / (2.0 * self.bump_width ** 2))
        out *= self.scale
        out[mesh.boundary] = 0.0
        return GridFunction(mesh, out, True)

    def scaled(self, factor: float) -> "SampleSpec":
        return SampleSpec(self.modes, self.bump_center, self.bump_width,
                          self.bump_amplitude, self.scale * factor)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["modes"] = [[list(ks), amp] for ks, amp in self.modes]
        d["bump_center"] = list(self.bump_center)
        return d


def random_sample(rng: np.random.Generator, d: int) -> SampleSpec:
    count = int(rng.integers(1, 6))
    modes = tuple(
        (tuple(int(k) for k in rng.integers(1, MAX_FREQUENCY + 1, size=d)),
         float(rng.normal()))
        for _ in range(count)
    )
    center = tuple(float(c) for c in rng.uniform(0.2, 0.8, size=d))
    return SampleSpec(modes, center, float(rng.uniform(0.05, 0.3)), float(rng.normal()))


def random_samples(seed: int, count: int, d: int) -> list:
    rng = np.random.default_rng(seed)
    return [random_sample(rng, d) for _ in range(count)]


def sine_mode(mesh: Mesh, k=1) -> GridFunction:
    ks = (k,) * mesh.d if np.ndim(k) == 0 else tuple(k)
    return SampleSpec(((ks, 1.0),), (0.5,) * mesh.d, 1.0, 0.0).evaluate(mesh)


def bump(mesh: Mesh) -> GridFunction:
    """Centered smooth bump: the product of first sine modes."""
    return sine_mode(mesh, 1)
