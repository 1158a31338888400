"""Signed numbers stored as ``sign * exp(log_magnitude)``.

Mie amplitudes at imaginary frequency grow like exp(2 x sin(Theta/2)) and the
partial-wave terms span hundreds of orders of magnitude, so they are carried
in this representation. Both fields may be numpy arrays (elementwise
semantics); a zero has ``sign == 0`` and ``log_magnitude == -inf``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

__all__ = ["LogScaled", "log_sum"]


@dataclass(frozen=True)
class LogScaled:
    sign: np.ndarray | float
    log_magnitude: np.ndarray | float

    @classmethod
    def from_value(cls, value):
        value = np.asarray(value, dtype=float)
        with np.errstate(divide="ignore"):
            return cls(np.sign(value)[()], np.log(np.abs(value))[()])

    @classmethod
    def zero(cls, shape=()):
        return cls(np.zeros(shape)[()], np.full(shape, -np.inf)[()])

    def value(self):
        """Plain float value; overflows to +-inf when the magnitude is too large."""
        with np.errstate(over="ignore"):
            return (self.sign * np.exp(self.log_magnitude))[()]

    def scaled(self, log_scale):
        """``value * exp(-log_scale)`` as a plain float."""
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.sign * np.exp(self.log_magnitude - log_scale)
        return np.where(self.sign == 0, 0.0, out)[()]

    def __mul__(self, other):
        if not isinstance(other, LogScaled):
            other = LogScaled.from_value(other)
        return LogScaled(
            np.multiply(self.sign, other.sign)[()],
            np.add(self.log_magnitude, other.log_magnitude)[()],
        )

    __rmul__ = __mul__

    def __neg__(self):
        return LogScaled(-np.asarray(self.sign)[()], self.log_magnitude)

    def __add__(self, other):
        if not isinstance(other, LogScaled):
            other = LogScaled.from_value(other)
        return log_sum([self, other])

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, LogScaled):
            other = LogScaled.from_value(other)
        return self + (-other)


def log_sum(terms):
    """Sum of LogScaled values (elementwise over array fields), overflow free."""
    signs = np.array([np.broadcast_to(t.sign, np.broadcast(*[u.sign for u in terms]).shape) for t in terms], float)
    logs = np.array(
        [np.broadcast_to(t.log_magnitude, signs.shape[1:]) for t in terms], float
    )
    logs = np.where(signs == 0, -np.inf, logs)
    with np.errstate(divide="ignore", invalid="ignore"):
        all_zero = np.all(signs == 0, axis=0)
        safe_logs = np.where(all_zero[None], 0.0, logs)
        safe_signs = np.where(all_zero[None], 1.0, signs)
        lm, sg = logsumexp(safe_logs, axis=0, b=safe_signs, return_sign=True)
    lm = np.where(all_zero | (sg == 0), -np.inf, lm)
    sg = np.where(all_zero, 0.0, sg)
    return LogScaled(np.asarray(sg)[()], np.asarray(lm)[()])
