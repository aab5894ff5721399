"""Beamsplitters, alternating nearest-neighbour layers and Haar unitaries.

Modes are 0-based. A layer of parity 0 couples the pairs (0, 1), (2, 3), ...
and a layer of parity 1 couples (1, 2), (3, 4), ...; any mode left without a
partner passes through unchanged.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, LayoutError
from .linalg import ComplexMatrix


@dataclass(frozen=True)
class BeamsplitterParams:
    """Coupling angle ``theta`` with transmitted and reflected phases."""

    theta: float
    phi_t: float = 0.0
    phi_r: float = 0.0

    def __post_init__(self):
        for name in ("theta", "phi_t", "phi_r"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class LayerSpec:
    parity: int
    gates: tuple = ()

    def __post_init__(self):
        if self.parity not in (0, 1):
            raise LayoutError(f"layer parity must be 0 or 1, got {self.parity}")
        object.__setattr__(self, "gates", tuple(self.gates))


@dataclass(frozen=True)
class CircuitSpec:
    """A depth-``depth`` circuit on ``m`` modes; layer ``i`` (0-based) has parity ``i % 2``."""

    m: int
    depth: int
    layers: tuple = ()
    seed: int | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "depth": self.depth,
            "layers": [
                {
                    "parity": layer.parity,
                    "gates": [{"theta": g.theta, "phi_t": g.phi_t, "phi_r": g.phi_r} for g in layer.gates],
                }
                for layer in self.layers
            ],
        }

    def to_json(self) -> str:
        # repr-based float output round-trips exactly
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "CircuitSpec":
        layers = [
            LayerSpec(
                int(layer["parity"]),
                [BeamsplitterParams(g["theta"], g["phi_t"], g["phi_r"]) for g in layer["gates"]],
            )
            for layer in doc["layers"]
        ]
        return cls(int(doc["m"]), int(doc["depth"]), layers)

    @classmethod
    def from_json(cls, text: str) -> "CircuitSpec":
        return cls.from_dict(json.loads(text))


def gate_count(m: int, parity: int) -> int:
    """Number of beamsplitters in a layer of the given parity on ``m`` modes."""
    return m // 2 if parity == 0 else (m - 1) // 2


def gate_pairs(m: int, parity: int) -> list[tuple[int, int]]:
    return [(parity + 2 * g, parity + 2 * g + 1) for g in range(gate_count(m, parity))]


def beamsplitter_matrix(p: BeamsplitterParams) -> np.ndarray:
    c, s = math.cos(p.theta), math.sin(p.theta)
    et, er = np.exp(1j * p.phi_t), np.exp(1j * p.phi_r)
    return np.array([[et * c, er * s], [-np.conj(er) * s, np.conj(et) * c]], dtype=np.complex128)


def _check_layer(spec: LayerSpec, m: int):
    expected = gate_count(m, spec.parity)
    if len(spec.gates) != expected:
        raise LayoutError(
            f"parity-{spec.parity} layer on {m} modes needs {expected} gates, got {len(spec.gates)}"
        )


def layer_unitary(spec: LayerSpec, m: int) -> ComplexMatrix:
    """Block-diagonal unitary of one layer, with its structural mask."""
    _check_layer(spec, m)
    u = np.eye(m, dtype=np.complex128)
    mask = np.eye(m, dtype=bool)
    for (a, b), gate in zip(gate_pairs(m, spec.parity), spec.gates):
        u[a:b + 1, a:b + 1] = beamsplitter_matrix(gate)
        mask[a:b + 1, a:b + 1] = True
    return ComplexMatrix(u, structure=mask)


def compose_circuit(c: CircuitSpec) -> ComplexMatrix:
    """``U = L_D ... L_2 L_1``; the structural mask is propagated as a boolean product."""
    if c.m < 1:
        raise DomainError("circuit needs at least one mode")
    if len(c.layers) != c.depth:
        raise LayoutError(f"depth {c.depth} but {len(c.layers)} layers")
    u = np.eye(c.m, dtype=np.complex128)
    mask = np.eye(c.m, dtype=bool)
    for i, layer in enumerate(c.layers):
        if layer.parity != i % 2:
            raise LayoutError(f"layer {i} has parity {layer.parity}, expected {i % 2}")
        lu = layer_unitary(layer, c.m)
        u = lu.data @ u
        mask = (lu.structure.astype(np.int64) @ mask.astype(np.int64)) > 0
    return ComplexMatrix(u, structure=mask)


def random_shallow_circuit(m: int, depth: int, rng) -> CircuitSpec:
    """Random circuit with every angle uniform on [0, 2*pi).

    ``rng`` may be a :class:`numpy.random.Generator` or an integer seed.
    """
    if m < 2:
        raise DomainError(f"need m >= 2, got {m}")
    if depth < 0:
        raise DomainError(f"depth must be nonnegative, got {depth}")
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    layers = []
    for i in range(depth):
        parity = i % 2
        angles = rng.uniform(0.0, 2 * np.pi, size=(gate_count(m, parity), 3))
        layers.append(LayerSpec(parity, [BeamsplitterParams(*row) for row in angles]))
    return CircuitSpec(m, depth, layers, seed=seed)


def haar_unitary(m: int, rng) -> ComplexMatrix:
    """Haar-random unitary from the QR factorization of a complex Ginibre matrix."""
    if m < 1:
        raise DomainError(f"need m >= 1, got {m}")
    rng = np.random.default_rng(rng)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return ComplexMatrix(q)


def unitarity_error(u) -> float:
    """``max(|U^H U - I|_max, |U U^H - I|_max)``."""
    a = np.asarray(u)
    eye = np.eye(a.shape[0])
    return float(max(np.abs(a.conj().T @ a - eye).max(), np.abs(a @ a.conj().T - eye).max()))
