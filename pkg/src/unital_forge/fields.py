"""Finite field tower F_p <= F_q <= F_{q^2} with table arithmetic.

Elements are dense integers.  An element of F_q = F_p[t]/(f) is the integer
whose base-p digits are its coefficients (constant term least significant).
An element x1*w + x0 of F_{q^2} = F_q[w]/(g) is encoded as ``x1*q + x0``, so
the subfield F_q is exactly the range ``0..q-1`` and the digits of the code,
read in base p, are the coefficient vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

# Conway polynomials, coefficients from the leading term down.
CONWAY = {
    (2, 1): (1, 1),
    (2, 2): (1, 1, 1),
    (2, 3): (1, 0, 1, 1),
    (2, 4): (1, 0, 0, 1, 1),
    (2, 5): (1, 0, 0, 1, 0, 1),
    (2, 6): (1, 0, 1, 1, 0, 1, 1),
    (3, 1): (1, 1),
    (3, 2): (1, 2, 2),
    (3, 3): (1, 0, 2, 1),
    (3, 4): (1, 2, 0, 0, 2),
    (5, 1): (1, 3),
    (5, 2): (1, 4, 2),
    (5, 3): (1, 0, 3, 3),
    (7, 1): (1, 4),
    (7, 2): (1, 6, 3),
    (11, 1): (1, 9),
    (11, 2): (1, 7, 2),
    (13, 1): (1, 11),
    (13, 2): (1, 12, 2),
}


class FieldError(ValueError):
    """Invalid field parameters or an undefined field operation."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def prime_power(q: int) -> tuple[int, int]:
    """Return (p, h) with q = p**h, or raise FieldError."""
    if q < 2:
        raise FieldError(f"{q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    h, r = 0, q
    while r % p == 0:
        r //= p
        h += 1
    if r != 1:
        raise FieldError(f"{q} is not a prime power")
    return p, h


def _no_zero_divisors(mul: np.ndarray) -> bool:
    return not np.any(mul[1:, 1:] == 0)


def _prime_field_poly_tables(p: int, f: tuple[int, ...]):
    """Add/mul tables of F_p[t]/(f) for monic f given leading term first."""
    h = len(f) - 1
    q = p**h
    digits = np.array([[(e // p**i) % p for i in range(h)] for e in range(q)], dtype=np.int64)
    weights = p ** np.arange(h, dtype=np.int64)
    add = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
    low = [(-c) % p for c in reversed(f[1:])]  # t^h = sum low[i] t^i
    mul = np.zeros((q, q), dtype=np.int64)
    for a, b in product(range(q), repeat=2):
        prod_ = [0] * (2 * h - 1)
        for i in range(h):
            if digits[a, i]:
                for j in range(h):
                    prod_[i + j] += digits[a, i] * digits[b, j]
        for k in range(2 * h - 2, h - 1, -1):
            c = prod_[k] % p
            prod_[k] = 0
            if c:
                for i in range(h):
                    prod_[k - h + i] += c * low[i]
        mul[a, b] = sum((prod_[i] % p) * p**i for i in range(h))
    return add, mul


def _least_irreducible(p: int, h: int) -> tuple[int, ...]:
    for tail in product(range(p), repeat=h):
        f = (1, *tail)
        if tail[-1] == 0:
            continue
        _, mul = _prime_field_poly_tables(p, f)
        if _no_zero_divisors(mul):
            return f
    raise FieldError(f"no irreducible polynomial of degree {h} over F_{p}")  # pragma: no cover


@dataclass(frozen=True, eq=False)
class GF:
    """One level of the tower; every operation accepts ints or integer arrays."""

    order: int
    char: int
    add_t: np.ndarray = field(repr=False)
    mul_t: np.ndarray = field(repr=False)
    neg_t: np.ndarray = field(repr=False)
    inv_t: np.ndarray = field(repr=False)
    exp_t: np.ndarray = field(repr=False)
    log_t: np.ndarray = field(repr=False)

    @classmethod
    def from_tables(cls, add: np.ndarray, mul: np.ndarray, char: int) -> GF:
        n = add.shape[0]
        neg = np.argmin(add, axis=1).astype(np.int64)  # add[a, neg[a]] == 0
        inv = np.zeros(n, dtype=np.int64)
        inv[1:] = np.argmax(mul[1:, :] == 1, axis=1)
        gen = None
        for g in range(2, n) if n > 2 else [1]:
            x, seen = 1, 0
            while True:
                x = mul[x, g]
                seen += 1
                if x == 1:
                    break
            if seen == n - 1:
                gen = g
                break
        exp = np.zeros(n - 1, dtype=np.int64)
        log = np.full(n, -1, dtype=np.int64)
        x = 1
        for i in range(n - 1):
            exp[i] = x
            log[x] = i
            x = mul[x, gen]
        for t in (add, mul, neg, inv, exp, log):
            t.setflags(write=False)
        return cls(n, char, add, mul, neg, inv, exp, log)

    def add(self, a, b):
        return self.add_t[a, b]

    def sub(self, a, b):
        return self.add_t[a, self.neg_t[b]]

    def mul(self, a, b):
        return self.mul_t[a, b]

    def neg(self, a):
        return self.neg_t[a]

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise FieldError("inverse of zero")
        return self.inv_t[a]

    def div(self, a, b):
        return self.mul_t[a, self.inv(b)]

    def pow(self, a, e: int):
        a = np.asarray(a)
        if e == 0:
            return np.ones_like(a) if a.ndim else 1
        if e < 0:
            a, e = self.inv(a), -e
        out = self.exp_t[(self.log_t[a] * e) % (self.order - 1)]
        out = np.where(a == 0, 0, out)
        return out if out.ndim else int(out)

    def sum(self, values) -> int:
        acc = 0
        for v in values:
            acc = self.add_t[acc, v]
        return int(acc)

    def elements(self) -> range:
        return range(self.order)


@dataclass(frozen=True, eq=False)
class FieldCtx:
    """The tower F_p <= F_q <= F_{q^2}; ``big`` is F_{q^2}, ``small`` is F_q."""

    p: int
    h: int
    poly_q: tuple[int, ...]
    poly_q2: tuple[int, ...]
    big: GF = field(repr=False)
    small: GF = field(repr=False)

    @property
    def q(self) -> int:
        return self.p**self.h

    @property
    def q2(self) -> int:
        return self.q * self.q

    @property
    def omega(self) -> int:
        """The adjoined root w of ``poly_q2``; its code is q."""
        return self.q

    def key(self) -> dict:
        return {"p": self.p, "h": self.h, "poly_q": list(self.poly_q), "poly_q2": list(self.poly_q2)}

    # subfield tools
    def frobenius(self, x):
        return self.big.pow(x, self.q)

    def norm(self, x):
        return self.big.pow(x, self.q + 1)

    def trace(self, x):
        return self.big.add(x, self.frobenius(x))

    def in_subfield(self, x):
        return np.asarray(x) < self.q

    def split(self, x):
        """Coordinates (x0, x1) of x = x0 + x1*w over F_q."""
        x = np.asarray(x)
        return x % self.q, x // self.q

    def join(self, x0, x1):
        return np.asarray(x1) * self.q + np.asarray(x0)

    # textual form: base-p digits, most significant first
    def to_str(self, x: int, level: str = "big") -> str:
        width = 2 * self.h if level == "big" else self.h
        digits = []
        x = int(x)
        for _ in range(width):
            digits.append("0123456789abcdefghijklmnopqrstuvwxyz"[x % self.p])
            x //= self.p
        return "".join(reversed(digits))

    def from_str(self, s: str, level: str = "big") -> int:
        limit = self.q2 if level == "big" else self.q
        try:
            v = int(s, self.p)
        except ValueError as exc:
            raise FieldError(f"bad field element {s!r}") from exc
        if not 0 <= v < limit:
            raise FieldError(f"field element {s!r} out of range")
        return v


def parse_poly_spec(text: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Parse ``"1,1,2/1,0,1"`` into (poly over F_p, poly over F_q)."""
    try:
        a, b = text.split("/")
        return tuple(int(c) for c in a.split(",")), tuple(int(c) for c in b.split(","))
    except ValueError as exc:
        raise FieldError(f"bad polynomial spec {text!r}") from exc


def build_field(p: int, h: int = 1, polys=None) -> FieldCtx:
    """Build the tower for q = p**h.

    ``polys`` optionally overrides (poly_q, poly_q2): a monic degree-h
    polynomial over F_p and a monic quadratic over F_q (coefficients given
    leading first, F_q coefficients as element codes).  Defaults are the
    Conway polynomial for F_q and the lexicographically least irreducible
    quadratic for F_{q^2}.
    """
    if not is_prime(p):
        raise FieldError(f"characteristic {p} is not prime")
    if h < 1:
        raise FieldError("extension degree must be positive")
    q = p**h
    f, g = (None, None) if polys is None else polys
    if f is None:
        f = CONWAY.get((p, h)) or _least_irreducible(p, h)
    f = tuple(int(c) % p for c in f)
    if len(f) != h + 1 or f[0] != 1:
        raise FieldError(f"poly_q must be monic of degree {h}")
    add_q, mul_q = _prime_field_poly_tables(p, f)
    if not _no_zero_divisors(mul_q):
        raise FieldError(f"polynomial {f} is reducible over F_{p}")
    small = GF.from_tables(add_q, mul_q, p)

    if g is None:
        for c1, c0 in product(range(q), repeat=2):
            if c0 and _quadratic_irreducible(small, c1, c0):
                g = (1, c1, c0)
                break
    g = tuple(int(c) for c in g)
    if len(g) != 3 or g[0] != 1 or not all(0 <= c < q for c in g):
        raise FieldError("poly_q2 must be a monic quadratic over F_q")
    if not _quadratic_irreducible(small, g[1], g[2]):
        raise FieldError(f"polynomial {g} is reducible over F_{q}")

    c1, c0 = g[1], g[2]
    a = np.arange(q * q)
    a1, a0 = (a // q)[:, None], (a % q)[:, None]
    b1, b0 = (a // q)[None, :], (a % q)[None, :]
    add = add_q[a1, b1] * q + add_q[a0, b0]
    hi = mul_q[a1, b1]
    r1 = add_q[add_q[mul_q[a1, b0], mul_q[a0, b1]], small.neg_t[mul_q[c1, hi]]]
    r0 = add_q[mul_q[a0, b0], small.neg_t[mul_q[c0, hi]]]
    mul = r1 * q + r0
    big = GF.from_tables(add, mul, p)
    return FieldCtx(p, h, f, g, big, small)


def _quadratic_irreducible(F: GF, c1: int, c0: int) -> bool:
    x = np.arange(F.order)
    vals = F.add_t[F.add_t[F.mul_t[x, x], F.mul_t[c1, x]], c0]
    return not np.any(vals == 0)


def field_for_q(q: int, polys=None) -> FieldCtx:
    p, h = prime_power(q)
    return build_field(p, h, polys)
