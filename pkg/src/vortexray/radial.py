"""Complex radial fields sampled on a grid."""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["RadialField", "trapz_weights"]


def trapz_weights(x):
    """Trapezoid weights on an arbitrary increasing grid."""
    x = np.asarray(x, dtype=float)
    w = np.zeros_like(x)
    dx = np.diff(x)
    w[:-1] += dx / 2
    w[1:] += dx / 2
    return w


@dataclass
class RadialField:
    """A complex function on a radial (or rescaled inner) grid.

    Attributes:
        r: increasing sample points.
        values: complex samples.
        derivative: optional samples of the derivative in ``r``.
        variable: ``"r"`` or ``"xi"``.
        meta: free-form metadata (normalization convention and the like).
    """

    r: np.ndarray
    values: np.ndarray
    derivative: np.ndarray = None
    variable: str = "r"
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.r)

    def l2_norm(self):
        return float(np.sqrt(np.sum(trapz_weights(self.r) * np.abs(self.values) ** 2)))

    def inner(self, other):
        """``int self * conj(other)`` by the trapezoid rule (same grid)."""
        return complex(np.sum(trapz_weights(self.r) * self.values * np.conj(other.values)))

    def scaled(self, c):
        d = None if self.derivative is None else self.derivative * c
        return RadialField(self.r, self.values * c, d, self.variable, dict(self.meta))

    def to_csv(self, path):
        """Columns r, Re, Im, abs at 17 significant digits."""
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([self.variable, "re", "im", "abs"])
            for x, v in zip(self.r, self.values):
                w.writerow([f"{x:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}", f"{abs(v):.17g}"])
        return path
