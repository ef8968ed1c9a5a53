"""Truncated power series with exact integer coefficients."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TruncatedSeries:
    """``c_0 + c_1 x + ... + c_d x^d`` modulo ``x^(d+1)``."""

    coefficients: tuple

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(int(c) for c in self.coefficients))
        if not self.coefficients:
            raise ValueError("a truncated series needs at least the constant term")

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def __getitem__(self, k):
        if k < 0 or k > self.degree:
            return 0
        return self.coefficients[k]

    def __mul__(self, other):
        return series_mul(self, other)

    def __pow__(self, e):
        out = one(self.degree)
        base = self
        while e:
            if e & 1:
                out = series_mul(out, base)
            base = series_mul(base, base)
            e >>= 1
        return out

    @classmethod
    def from_terms(cls, degree, terms):
        """Series from a ``{power: coefficient}`` mapping, dropping powers beyond ``degree``."""
        c = [0] * (degree + 1)
        for k, v in terms.items():
            if 0 <= k <= degree:
                c[k] += v
        return cls(tuple(c))


def one(degree):
    return TruncatedSeries.from_terms(degree, {0: 1})


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated at the common degree."""
    if a.degree != b.degree:
        raise ValueError(f"truncation degrees differ: {a.degree} vs {b.degree}")
    d = a.degree
    out = [0] * (d + 1)
    for i, ai in enumerate(a.coefficients):
        if ai:
            for j in range(d + 1 - i):
                out[i + j] += ai * b.coefficients[j]
    return TruncatedSeries(tuple(out))


def distinct_parts_product(copies: int, degree: int) -> TruncatedSeries:
    """``prod_{s=1}^{degree} (1 + x^s)^copies`` truncated at ``degree``.

    Factors with ``s > degree`` only touch powers beyond the truncation.
    """
    out = one(degree)
    for s in range(1, degree + 1):
        out = out * TruncatedSeries.from_terms(degree, {0: 1, s: 1}) ** copies
    return out
