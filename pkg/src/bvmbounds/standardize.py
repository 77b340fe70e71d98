"""Affine standardisations of the posterior.

``Mode``: ``w = H_lambda(mode)^{1/2} (theta - mode)``.
``Mle``:  ``w = sqrt(n) H_beta(mle)^{1/2} (theta - mle)``.

Both scale and inverse scale are stored because bound evaluation maps
standardised points back to parameter space in its inner loops.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .laws import ExactLaw
from .linalg import SymMatrix


class Kind(str, enum.Enum):
    MODE = "mode"
    MLE = "mle"


@dataclass(frozen=True, eq=False)
class Standardization:
    kind: Kind
    center: np.ndarray
    scale: SymMatrix
    inv_scale: SymMatrix
    # Eigenvalues of scale^2, kept for norms and determinants.
    eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def log_det_inv_scale(self) -> float:
        return -0.5 * float(np.sum(np.log(self.eigenvalues)))

    @property
    def inv_scale_spectral(self) -> float:
        """``||scale^{-1}||_2 = 1 / sqrt(smallest eigenvalue of scale^2)``."""
        return 1.0 / math.sqrt(float(np.min(self.eigenvalues)))

    def forward(self, theta) -> np.ndarray:
        return (np.asarray(theta, dtype=float) - self.center) @ self.scale.entries

    def inverse(self, w) -> np.ndarray:
        return np.asarray(w, dtype=float) @ self.inv_scale.entries + self.center


def mode_standardization(ctx) -> Standardization:
    f = ctx.hess_lambda_at_mode
    return Standardization(Kind.MODE, np.array(ctx.mode, dtype=float), f.sqrt, f.inv_sqrt, np.array(f.eigenvalues))


def mle_standardization(ctx) -> Standardization:
    f = ctx.hess_beta_at_mle
    rn = math.sqrt(ctx.n)
    return Standardization(
        Kind.MLE,
        np.array(ctx.mle, dtype=float),
        SymMatrix(rn * f.sqrt.entries),
        SymMatrix(f.inv_sqrt.entries / rn),
        ctx.n * np.array(f.eigenvalues),
    )


def standardization(ctx, kind: Kind | str) -> Standardization:
    kind = Kind(kind)
    return mode_standardization(ctx) if kind is Kind.MODE else mle_standardization(ctx)


@dataclass(frozen=True, eq=False)
class StandardizedLaw:
    """An exact parameter-space law viewed on the standardised scale."""

    law: ExactLaw
    std: Standardization

    @property
    def dim(self) -> int:
        return self.std.dim

    def logpdf(self, w) -> np.ndarray:
        return self.law.logpdf(self.std.inverse(w)) + self.std.log_det_inv_scale

    def pdf(self, w) -> np.ndarray:
        return np.exp(self.logpdf(w))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.std.forward(self.law.sample(rng, size))

    def mean(self) -> np.ndarray:
        return self.std.forward(self.law.mean())

    # One-dimensional only; the inverse scale is a positive scalar there.
    @property
    def _a(self) -> float:
        return float(self.std.inv_scale.entries[0, 0])

    def cdf(self, w) -> np.ndarray:
        return self.law.cdf(self.std.center[0] + self._a * np.asarray(w, dtype=float))

    def ppf(self, q) -> np.ndarray:
        return (np.asarray(self.law.ppf(q)) - self.std.center[0]) / self._a

    def support(self) -> tuple[tuple[float, float], ...]:
        if self.dim != 1:
            return tuple((-math.inf, math.inf) for _ in range(self.dim))
        lo, hi = self.law.support()[0]
        c = self.std.center[0]
        return (((lo - c) / self._a, (hi - c) / self._a),)
