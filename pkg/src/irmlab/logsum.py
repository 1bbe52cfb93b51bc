"""Exact values of the form ``sum_p c_p * ln(p)`` with rational ``c_p``.

Cross-entropy risks of rational predictors on rational distributions are
rational combinations of logarithms of rationals.  Factoring every rational
into primes gives a canonical form: logarithms of distinct primes are linearly
independent over the rationals, so two values are equal exactly when their
coefficient maps agree.  Ordering falls back to decimal evaluation at
increasing precision, which always terminates because a non-zero combination
is never zero.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

from sympy import factorint

__all__ = ["LogSum"]


@lru_cache(maxsize=4096)
def _factor(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(factorint(n).items()))


def _decimal(q: Fraction) -> Decimal:
    return Decimal(q.numerator) / Decimal(q.denominator)


def _sign(terms, offset: Fraction) -> int:
    """Sign of ``sum c_p ln p - offset``."""
    if not terms:
        return (offset > 0) - (offset < 0)
    magnitude = sum(abs(float(c)) * math.log(p) for p, c in terms) + abs(float(offset)) + 1.0
    # doubles settle anything not within rounding distance of zero
    approx = math.fsum([float(c) * math.log(p) for p, c in terms] + [-float(offset)])
    if abs(approx) > 1e-9 * magnitude:
        return 1 if approx > 0 else -1
    prec = 40
    while True:
        with localcontext() as ctx:
            ctx.prec = prec
            total = sum((_decimal(c) * Decimal(p).ln() for p, c in terms), Decimal(0))
            total -= _decimal(offset)
            bound = Decimal(len(terms) + 2) * Decimal(magnitude) * Decimal(10) ** (2 - prec)
            if abs(total) > bound:
                return 1 if total > 0 else -1
        prec *= 2


class LogSum:
    """Immutable exact value ``sum_p c_p * ln(p)`` over primes ``p``."""

    __slots__ = ("_terms",)

    def __init__(self, terms=()):
        acc: dict[int, Fraction] = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for p, c in items:
            acc[p] = acc.get(p, Fraction(0)) + Fraction(c)
        self._terms = tuple(sorted((p, c) for p, c in acc.items() if c != 0))

    @classmethod
    def log(cls, q) -> LogSum:
        """Natural logarithm of a positive rational."""
        q = Fraction(q)
        if q <= 0:
            raise ValueError(f"log of non-positive rational {q}")
        return _log(q)

    @classmethod
    def neg_log(cls, q) -> LogSum:
        q = Fraction(q)
        if q <= 0:
            raise ValueError(f"log of non-positive rational {q}")
        return _neg_log(q)

    @property
    def terms(self) -> tuple[tuple[int, Fraction], ...]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    # arithmetic ---------------------------------------------------------

    @classmethod
    def _raw(cls, terms: dict) -> LogSum:
        # terms already hold Fractions keyed by prime
        out = cls.__new__(cls)
        out._terms = tuple(sorted((p, c) for p, c in terms.items() if c != 0))
        return out

    def __add__(self, other):
        if isinstance(other, LogSum):
            acc = dict(self._terms)
            for p, c in other._terms:
                acc[p] = acc[p] + c if p in acc else c
            return LogSum._raw(acc)
        if isinstance(other, float) and math.isinf(other):
            return other
        if other == 0:
            return self
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return LogSum._raw({p: -c for p, c in self._terms})

    def __sub__(self, other):
        if isinstance(other, LogSum):
            return self + (-other)
        if other == 0:
            return self
        return NotImplemented

    def __mul__(self, k):
        if isinstance(k, Rational):
            k = Fraction(k)
            return LogSum._raw({p: c * k for p, c in self._terms})
        return NotImplemented

    __rmul__ = __mul__

    def __float__(self) -> float:
        return math.fsum(float(c) * math.log(p) for p, c in self._terms)

    # comparison ---------------------------------------------------------

    def _cmp(self, other) -> int:
        if isinstance(other, LogSum):
            return _sign((self - other)._terms, Fraction(0))
        if isinstance(other, Rational):
            return _sign(self._terms, Fraction(other))
        if isinstance(other, float):
            if math.isinf(other):
                return -1 if other > 0 else 1
            return _sign(self._terms, Fraction(other))
        raise TypeError(f"cannot compare LogSum with {type(other).__name__}")

    def __eq__(self, other):
        if isinstance(other, LogSum):
            return self._terms == other._terms
        if isinstance(other, (Rational, float)):
            return not self._terms and other == 0
        return NotImplemented

    def __hash__(self):
        if not self._terms:
            return hash(0)
        return hash(self._terms)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self == other or self._cmp(other) < 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self == other or self._cmp(other) > 0

    # rendering ----------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for p, c in self._terms:
            mag = abs(c)
            body = f"log({p})" if mag == 1 else f"{mag}*log({p})"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"LogSum({str(self)!r})"


@lru_cache(maxsize=65536)
def _log(q: Fraction) -> LogSum:
    terms: dict[int, Fraction] = {}
    for p, k in _factor(q.numerator) if q.numerator > 1 else ():
        terms[p] = terms.get(p, Fraction(0)) + k
    for p, k in _factor(q.denominator) if q.denominator > 1 else ():
        terms[p] = terms.get(p, Fraction(0)) - k
    return LogSum(terms)


@lru_cache(maxsize=65536)
def _neg_log(q: Fraction) -> LogSum:
    return -_log(q)
