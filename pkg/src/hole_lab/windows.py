"""Observation regions in the rescaled coordinates z = n (w / zeta - 1)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Window:
    """Open strip (-delta, delta) x (-C, C), open ball |z| < radius, or the plane."""

    kind: str
    delta: float = 0.0
    C: float = 0.0
    radius: float = 0.0

    def __post_init__(self):
        if self.kind == "strip":
            if not (self.delta > 0 and self.C > 0):
                raise ValueError("strip needs delta > 0 and C > 0")
        elif self.kind == "ball":
            if not self.radius > 0:
                raise ValueError("ball needs radius > 0")
        elif self.kind != "plane":
            raise ValueError(f"unknown window kind {self.kind!r}")

    @classmethod
    def strip(cls, delta, C):
        return cls("strip", delta=float(delta), C=float(C))

    @classmethod
    def ball(cls, radius):
        return cls("ball", radius=float(radius))

    @classmethod
    def plane(cls):
        return cls("plane")

    def contains(self, z):
        z = np.asarray(z)
        if self.kind == "strip":
            return (np.abs(z.real) < self.delta) & (np.abs(z.imag) < self.C)
        if self.kind == "ball":
            return np.abs(z) < self.radius
        return np.ones(z.shape, dtype=bool)

    @property
    def area(self):
        if self.kind == "strip":
            return 4.0 * self.delta * self.C
        if self.kind == "ball":
            return math.pi * self.radius ** 2
        return math.inf

    @property
    def perimeter(self):
        if self.kind == "strip":
            return 4.0 * (self.delta + self.C)
        if self.kind == "ball":
            return 2.0 * math.pi * self.radius
        return math.inf

    def boundary(self, m):
        """Counterclockwise closed discretisation of the boundary with m points.

        Strip corners are always included.  Each side of length L gets
        ceil(m L / perimeter) points, so the spacing never exceeds
        perimeter / m; the grid may therefore hold up to three extra points.
        """
        if self.kind == "ball":
            return self.radius * np.exp(2j * np.pi * np.arange(m) / m)
        if self.kind != "strip":
            raise ValueError("the plane has no boundary")
        d, C = self.delta, self.C
        corners = [complex(d, -C), complex(d, C), complex(-d, C), complex(-d, -C)]
        lengths = [2 * C, 2 * d, 2 * C, 2 * d]
        per = sum(lengths)
        counts = [max(1, int(math.ceil(m * L / per - 1e-9))) for L in lengths]
        pts = []
        for a, b, k in zip(corners, corners[1:] + corners[:1], counts):
            s = np.arange(k) / k
            pts.append(a + (b - a) * s)
        return np.concatenate(pts)

    def to_dict(self):
        if self.kind == "strip":
            return {"kind": "strip", "delta": self.delta, "C": self.C}
        if self.kind == "ball":
            return {"kind": "ball", "radius": self.radius}
        return {"kind": "plane"}
