"""Model parameters, quantum-number bookkeeping and derived dimensionless coefficients.

Natural units (hbar = c = 1) throughout.  Two symmetry limits are supported:

* spin symmetry: V - S = Cs, the upper component F obeys a Schrodinger-like equation;
* pseudospin symmetry: V + S = Cps, the lower component G obeys one.

In both limits the trigonometric Scarf potential leaves an energy dependent
strength ``eta`` in front of ``1/sin^2(alpha r)``; every solver in the package
consumes the coefficients produced by :func:`derived_coefficients`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum


class Symmetry(str, Enum):
    SPIN = "spin"
    PSEUDOSPIN = "pseudospin"


class ScarfError(Exception):
    """Base class for all package errors."""


class ParameterError(ScarfError, ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs of the Dirac-Scarf problem.

    ``C`` is Cs in the spin limit and Cps in the pseudospin limit.
    """

    M: float = 1.0
    C: float = 1.0
    V0: float = 1.0
    S0: float = 1.0
    alpha: float = 0.01
    q: float = 1.0
    symmetry: Symmetry = Symmetry.SPIN

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha!r}")
        object.__setattr__(self, "symmetry", Symmetry(self.symmetry))

    @property
    def is_spin(self) -> bool:
        return self.symmetry is Symmetry.SPIN

    @property
    def depth(self) -> float:
        """Effective potential depth: V0+S0 (spin) or V0-S0 (pseudospin)."""
        return self.V0 + self.S0 if self.is_spin else self.V0 - self.S0

    def coupling(self, E):
        """M+E-Cs (spin) or M-E+Cps (pseudospin); also the Dirac-relation denominator."""
        return self.M + E - self.C if self.is_spin else self.M - E + self.C

    def partner(self, E):
        """M-E (spin) or M+E (pseudospin); the other factor of epsilon^2 alpha^2."""
        return self.M - E if self.is_spin else self.M + E


def kappa_of(l: int, D: int, aligned: bool) -> float:
    """Spin-orbit quantum number kappa = -/+ (2l + D - 1)/2."""
    if l < 0 or D < 2:
        raise ParameterError(f"need l >= 0 and D >= 2, got l={l}, D={D}")
    magnitude = (2 * l + D - 1) / 2
    return -magnitude if aligned else magnitude


@dataclass(frozen=True)
class QuantumNumbers:
    """Quantum numbers of one state.

    ``n`` is the principal number that enters the energy bracket (2n + D).  With the
    standard mapping, n = 2 n_r + 1 + l; when ``n`` does not map to an integer radial
    number ``n_r`` is ``None`` (the published tables contain such rows).
    """

    D: int
    n: int
    l: int = 0
    n_r: int | None = None
    aligned: bool = False

    def __post_init__(self):
        if self.D < 2:
            raise ParameterError(f"D must be >= 2, got {self.D}")
        if self.l < 0:
            raise ParameterError(f"l must be >= 0, got {self.l}")
        if self.n_r is not None and self.n_r < 0:
            raise ParameterError(f"n_r must be >= 0, got {self.n_r}")

    @classmethod
    def from_radial(cls, D: int, n_r: int, l: int = 0, aligned: bool = False):
        return cls(D=D, n=2 * n_r + 1 + l, l=l, n_r=n_r, aligned=aligned)

    @classmethod
    def from_principal(cls, D: int, n: int, l: int = 0, aligned: bool = False):
        twice = n - l - 1
        n_r = twice // 2 if twice >= 0 and twice % 2 == 0 else None
        return cls(D=D, n=n, l=l, n_r=n_r, aligned=aligned)

    @property
    def kappa(self) -> float:
        return kappa_of(self.l, self.D, self.aligned)

    @property
    def label_k(self) -> float:
        """Centrifugal label k = l + (D-1)/2 (equals |kappa|)."""
        return self.l + (self.D - 1) / 2


@dataclass(frozen=True)
class DerivedCoefficients:
    gamma: float
    eta: float
    lambda_cap: float | complex
    nu: float
    epsilon_sq: float

    @property
    def radicand_ok(self) -> bool:
        return 1 + 4 * self.eta >= 0

    @property
    def bound(self) -> bool:
        return self.epsilon_sq < 0


def derived_coefficients(params: ModelParams, qn: QuantumNumbers, E: float) -> DerivedCoefficients:
    """gamma, eta, Lambda, nu and epsilon^2 at energy ``E``.

    Lambda = sqrt(1 + 4 eta) in both symmetry limits.  In the non-normalizable
    regime 1 + 4 eta < 0 Lambda is returned as a complex number; ``nu`` is NaN
    whenever epsilon^2 >= 0 (no bound state at this energy).
    """
    kappa = qn.kappa
    a2 = params.alpha**2
    if params.is_spin:
        gamma = kappa * (kappa + 1)
    else:
        gamma = kappa * (kappa - 1)
    X = params.coupling(E)
    eta = params.depth * X / a2
    epsilon_sq = params.partner(E) * X / a2
    disc = 1 + 4 * eta
    lambda_cap = math.sqrt(disc) if disc >= 0 else cmath.sqrt(disc)
    nu = math.sqrt(-epsilon_sq) if epsilon_sq < 0 else math.nan
    return DerivedCoefficients(gamma=gamma, eta=eta, lambda_cap=lambda_cap, nu=nu, epsilon_sq=epsilon_sq)
