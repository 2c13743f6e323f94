"""Parameterized linear-optical gates and their noise models.

The single-qubit (dual-rail) gate is a five-parameter network: input phases
(phi1, phi2), one splitter angle theta, output phases (chi1, chi2).  Every
input-output path crosses exactly three of those parameters, which is what
makes the first-order noise laws path-uniform.  The two-qubit networks built
here (Type-II fusion and the general four-mode gate) keep the same property
with per-path parameter counts 2 and 6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

__all__ = [
    "GateParams",
    "NoiseSpec",
    "SampledParams",
    "FusionParams",
    "FourModeParams",
    "CircuitNoiseProfile",
    "GATE_DEPTHS",
    "named_gate",
    "single_qubit_matrix",
    "sample_deltas",
    "sample_noisy",
    "fusion_type2_matrix",
    "four_mode_matrix",
    "splitter",
    "SWAP_2_4",
]

# Per-path noisy-parameter counts for the gate families.
GATE_DEPTHS = {"single-qubit": 3, "four-mode": 6, "type2": 2}


@dataclass(frozen=True)
class GateParams:
    """Angles of the five-parameter single-qubit gate (radians)."""

    theta: float
    phi1: float
    phi2: float
    chi1: float
    chi2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.phi1, self.phi2, self.chi1, self.chi2])


_NAMED = {
    "I": GateParams(math.pi / 2, 0.0, 0.0, 0.0, math.pi),
    "X": GateParams(0.0, 0.0, 0.0, 0.0, 0.0),
    "Y": GateParams(0.0, math.pi / 2, 0.0, -math.pi / 2, 0.0),
    "H": GateParams(math.pi / 4, 0.0, 0.0, 0.0, 0.0),
}


def named_gate(name: str, alpha: float | None = None) -> GateParams:
    """Parameter tuple for a named gate.

    ``Z`` is the phase family Z_alpha = diag(1, -e^{i*alpha}) and requires
    ``alpha`` (Z_0 is the Pauli Z; Z_pi is the identity in this convention).
    """
    if name == "Z":
        if alpha is None:
            raise ValueError("Z gate needs an alpha phase")
        return GateParams(math.pi / 2, 0.0, 0.0, 0.0, float(alpha))
    if alpha is not None:
        raise ValueError(f"gate {name!r} takes no alpha")
    try:
        return _NAMED[name]
    except KeyError:
        raise ValueError(f"unknown gate {name!r}; choose from I, X, Y, Z, H") from None


def single_qubit_matrix(p: GateParams) -> np.ndarray:
    """2x2 dual-rail matrix of the five-parameter gate (unitary for all real angles)."""
    s, c = np.sin(p.theta), np.cos(p.theta)
    e_p1, e_p2 = np.exp(1j * p.phi1), np.exp(1j * p.phi2)
    e_c1, e_c2 = np.exp(1j * p.chi1), np.exp(1j * p.chi2)
    return np.array(
        [
            [e_p1 * e_c1 * s, e_p2 * e_c1 * c],
            [e_p1 * e_c2 * c, -e_p2 * e_c2 * s],
        ]
    )


# ---------------------------------------------------------------------------
# noise models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseSpec:
    """Distribution of the additive parameter offsets delta.

    kind:
        ``gaussian``     N(0, variance); fourth moment 3 nu^2.
        ``uniform``      uniform on [-sqrt(3 nu), +sqrt(3 nu)] (matched variance).
        ``four-moment``  symmetric three-point distribution hitting a prescribed
                         fourth moment m4 >= nu^2 (m4 = nu^2 gives the two-point
                         +/- sqrt(nu) distribution).
    """

    variance: float
    kind: str = "gaussian"
    fourth_moment: float | None = None

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be non-negative")
        if self.kind not in ("gaussian", "uniform", "four-moment"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "four-moment":
            if self.fourth_moment is None:
                raise ValueError("four-moment noise needs an explicit fourth_moment")
            if self.variance > 0 and self.fourth_moment < self.variance**2:
                raise ValueError("fourth moment must be >= variance^2")

    @classmethod
    def gaussian(cls, variance: float) -> "NoiseSpec":
        return cls(variance, "gaussian")

    @classmethod
    def uniform(cls, variance: float) -> "NoiseSpec":
        return cls(variance, "uniform")

    @classmethod
    def four_moment(cls, variance: float, m4: float) -> "NoiseSpec":
        return cls(variance, "four-moment", m4)


def sample_deltas(noise: NoiseSpec, shape, rng: np.random.Generator) -> np.ndarray:
    """Draw parameter offsets of the given shape.

    Every delta consumes exactly one uniform variate (inverse-CDF sampling),
    which keeps stream layouts deterministic regardless of the distribution.
    """
    u = rng.random(shape)
    nu = noise.variance
    if nu == 0.0:
        return np.zeros(shape)
    if noise.kind == "gaussian":
        # ndtri maps (0,1) -> standard normal; rng.random() can return 0.0
        # (ndtri -> -inf), so nudge into the open interval.
        u = np.clip(u, 1e-16, 1.0 - 1e-16)
        return ndtri(u) * math.sqrt(nu)
    if noise.kind == "uniform":
        half = math.sqrt(3.0 * nu)
        return (2.0 * u - 1.0) * half
    # three-point: +/- a with probability p each, 0 otherwise
    a = math.sqrt(noise.fourth_moment / nu)
    p = nu**2 / (2.0 * noise.fourth_moment)
    out = np.zeros(shape)
    out[u < p] = -a
    out[u > 1.0 - p] = a
    return out


@dataclass(frozen=True)
class SampledParams:
    """A noisy realization of a single-qubit gate: base angles plus offsets."""

    base: GateParams
    deltas: np.ndarray = field(repr=False)

    def __post_init__(self):
        if np.shape(self.deltas) != (5,):
            raise ValueError("expected five parameter offsets")

    @property
    def params(self) -> GateParams:
        t, p1, p2, c1, c2 = self.base.as_array() + np.asarray(self.deltas)
        return GateParams(t, p1, p2, c1, c2)

    def matrix(self) -> np.ndarray:
        return single_qubit_matrix(self.params)


def sample_noisy(base: GateParams, noise: NoiseSpec, rng: np.random.Generator) -> SampledParams:
    """One noisy unit: independent offsets on all five parameters."""
    return SampledParams(base, sample_deltas(noise, (5,), rng))


# ---------------------------------------------------------------------------
# two-qubit networks
# ---------------------------------------------------------------------------

# Mode swap 2<->4 (0-based: 1<->3), the parameter-free crossing shared by both
# four-mode constructions.
SWAP_2_4 = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]
)


def splitter(theta: float) -> np.ndarray:
    """Real 2x2 splitter [[sin, cos], [cos, -sin]]; 50:50 at theta = pi/4."""
    s, c = np.sin(theta), np.cos(theta)
    return np.array([[s, c], [c, -s]])


@dataclass(frozen=True)
class FusionParams:
    """Splitter angles of the Type-II fusion network (theta1..theta4)."""

    theta1: float = math.pi / 4
    theta2: float = math.pi / 4
    theta3: float = math.pi / 4
    theta4: float = math.pi / 4

    def as_array(self) -> np.ndarray:
        return np.array([self.theta1, self.theta2, self.theta3, self.theta4])


def fusion_type2_matrix(p: FusionParams) -> np.ndarray:
    """Type-II fusion network: splitters (theta1 on modes 1,2; theta2 on 3,4),
    swap of modes 2,4, then splitters (theta3 on 1,2; theta4 on 3,4).

    Each input-output path crosses exactly two splitter angles.
    """
    pre = np.zeros((4, 4))
    pre[:2, :2] = splitter(p.theta1)
    pre[2:, 2:] = splitter(p.theta2)
    post = np.zeros((4, 4))
    post[:2, :2] = splitter(p.theta3)
    post[2:, 2:] = splitter(p.theta4)
    return post @ SWAP_2_4 @ pre


@dataclass(frozen=True)
class FourModeParams:
    """General four-mode gate: two layers of single-qubit blocks around the
    2<->4 swap.

    Layout: [block C on modes 1,2 | block D on modes 3,4] . swap(2,4) .
    [block A on modes 1,2 | block B on modes 3,4].  Twenty parameters in all;
    every path crosses exactly six (three per layer), reproducing the 6-nu
    first-order law.  With all blocks at the 50:50 zero-phase setting the
    matrix equals the Type-II network at theta = pi/4 exactly.
    """

    block_a: GateParams = _NAMED["H"]
    block_b: GateParams = _NAMED["H"]
    block_c: GateParams = _NAMED["H"]
    block_d: GateParams = _NAMED["H"]

    PATH_PARAMS = 6

    def blocks(self) -> tuple[GateParams, GateParams, GateParams, GateParams]:
        return (self.block_a, self.block_b, self.block_c, self.block_d)


def four_mode_matrix(p: FourModeParams) -> np.ndarray:
    pre = np.zeros((4, 4), dtype=complex)
    pre[:2, :2] = single_qubit_matrix(p.block_a)
    pre[2:, 2:] = single_qubit_matrix(p.block_b)
    post = np.zeros((4, 4), dtype=complex)
    post[:2, :2] = single_qubit_matrix(p.block_c)
    post[2:, 2:] = single_qubit_matrix(p.block_d)
    return post @ SWAP_2_4 @ pre


@dataclass(frozen=True)
class CircuitNoiseProfile:
    """Pairs a per-path parameter count with a per-parameter variance.

    The characteristic first-order noise of the circuit is V = depth * variance,
    the quantity entering the generic first-order success/fidelity laws.
    """

    depth: int
    variance: float

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be at least 1")
        if self.variance < 0:
            raise ValueError("variance must be non-negative")

    @property
    def characteristic_noise(self) -> float:
        return self.depth * self.variance

    @classmethod
    def for_family(cls, family: str, variance: float) -> "CircuitNoiseProfile":
        try:
            return cls(GATE_DEPTHS[family], variance)
        except KeyError:
            raise ValueError(f"unknown gate family {family!r}") from None
