"""
Reaction terms phi(u) of the state law -div(grad u + grad w) + phi(u) = v.

Every supported kind is a polynomial, stored by ascending coefficients and
evaluated with numpy.polynomial.
"""

import re
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

KINDS = ("affine", "shifted_cubic", "polynomial")

# (u - 2)^3 = -8 + 12u - 6u^2 + u^3
SHIFTED_CUBIC_COEFFICIENTS: tuple[float, ...] = (-8.0, 12.0, -6.0, 1.0)

_CALL_PATTERN = re.compile(r"^\s*(?P<kind>[a-z_]+)\s*(?:\((?P<args>[^()]*)\))?\s*$")


@dataclass(frozen=True)
class Nonlinearity:
    """A polynomial reaction term."""

    kind: str
    coefficients: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}, expected one of {', '.join(KINDS)}")
        coefficients = tuple(float(c) for c in self.coefficients)
        if not coefficients:
            raise ValueError("a nonlinearity needs at least one coefficient")
        if not all(np.isfinite(coefficients)):
            raise ValueError("nonlinearity coefficients must be finite")
        if self.kind == "affine" and len(coefficients) != 2:
            raise ValueError(f"affine takes two coefficients (c0, c1), got {len(coefficients)}")
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def affine(cls, c0: float, c1: float) -> "Nonlinearity":
        """phi(u) = c0 + c1 u."""
        return cls("affine", (c0, c1))

    @classmethod
    def shifted_cubic(cls) -> "Nonlinearity":
        """phi(u) = (u - 2)^3."""
        return cls("shifted_cubic", SHIFTED_CUBIC_COEFFICIENTS)

    @classmethod
    def polynomial(cls, coefficients: tuple[float, ...] | list[float]) -> "Nonlinearity":
        """phi(u) = sum_k c_k u^k."""
        return cls("polynomial", tuple(coefficients))

    @classmethod
    def parse(cls, text: str) -> "Nonlinearity":
        """
        Parse ``affine(c0,c1)``, ``shifted_cubic`` or ``polynomial(c0,...,cd)``.

        Raises:
            ValueError: If the text is not one of the forms above
        """
        match = _CALL_PATTERN.match(text.strip().lower())
        if not match:
            raise ValueError(f"cannot parse nonlinearity {text!r}")
        kind, args = match.group("kind"), match.group("args")
        if kind == "shifted_cubic":
            if args not in (None, ""):
                raise ValueError("shifted_cubic takes no coefficients")
            return cls.shifted_cubic()
        if kind not in KINDS or args is None:
            raise ValueError(f"cannot parse nonlinearity {text!r}")
        try:
            coefficients = tuple(float(part) for part in args.split(",") if part.strip())
        except ValueError as e:
            raise ValueError(f"bad coefficient in {text!r}: {e}") from e
        return cls(kind, coefficients)

    @property
    def degree(self) -> int:
        return len(P.polytrim(np.asarray(self.coefficients), tol=0)) - 1

    @property
    def is_affine(self) -> bool:
        return self.degree <= 1

    @property
    def affine_coefficients(self) -> tuple[float, float]:
        """(c0, c1) of an affine phi."""
        if not self.is_affine:
            raise ValueError(f"{self.describe()} is not affine")
        padded = list(self.coefficients) + [0.0, 0.0]
        return padded[0], padded[1]

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(P.polyval(u, self.coefficients), dtype=np.float64)

    def deriv(self, u: np.ndarray) -> np.ndarray:
        """phi'(u)."""
        return np.asarray(P.polyval(u, P.polyder(self.coefficients)), dtype=np.float64)

    def describe(self) -> str:
        if self.kind == "shifted_cubic":
            return "shifted_cubic"
        return f"{self.kind}({','.join(f'{c:g}' for c in self.coefficients)})"
