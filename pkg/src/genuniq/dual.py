"""Batched first-order dual numbers over the complex field.

A :class:`Dual` holds ``value`` with shape ``(B,)`` and ``partials`` with shape
``(B, l)``; a single point is just ``B == 1``.  Arithmetic accepts plain complex
scalars on either side, which act as constants (zero partials).
"""

from __future__ import annotations

import numpy as np


class Dual:
    __slots__ = ("value", "partials")

    def __init__(self, value, partials):
        self.value = np.asarray(value, dtype=complex)
        self.partials = np.asarray(partials, dtype=complex)

    @classmethod
    def variables(cls, x: np.ndarray) -> list["Dual"]:
        """Seed one dual per coordinate of ``x`` (shape ``(B, l)``)."""
        x = np.atleast_2d(np.asarray(x, dtype=complex))
        B, l = x.shape
        out = []
        for j in range(l):
            d = np.zeros((B, l), dtype=complex)
            d[:, j] = 1.0
            out.append(cls(x[:, j].copy(), d))
        return out

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value + other.value, self.partials + other.partials)
        return Dual(self.value + other, self.partials)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.value, -self.partials)

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value - other.value, self.partials - other.partials)
        return Dual(self.value - other, self.partials)

    def __rsub__(self, other):
        return Dual(other - self.value, -self.partials)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.value * other.value,
                self.partials * other.value[:, None] + other.partials * self.value[:, None],
            )
        return Dual(self.value * other, self.partials * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.value
            q = self.value * inv
            return Dual(q, (self.partials - other.partials * q[:, None]) * inv[:, None])
        return Dual(self.value / other, self.partials / other)

    def __rtruediv__(self, other):
        inv = 1.0 / self.value
        q = other * inv
        return Dual(q, -self.partials * (q * inv)[:, None])

    def __pow__(self, k: int):
        if k == 0:
            return Dual(np.ones_like(self.value), np.zeros_like(self.partials))
        if k == 1:
            return self
        return Dual(self.value**k, self.partials * (k * self.value ** (k - 1))[:, None])

    def __repr__(self):
        return f"Dual(value={self.value!r}, partials={self.partials!r})"
