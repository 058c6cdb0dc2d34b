"""Symbolic templates and template orbits of complex quadratic map pairs.

A template is a binary sequence s; iterating a point applies z^2 + c0 at
step n when s_n == 0 and z^2 + c1 when s_n == 1. Everything downstream
(rasters, parameter planes, metrics) is built on the primitives here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

# SplitMix64 constants. Seeded templates are pinned to this exact generator so
# that (seed, N, p) reproduces the same word on any platform or language.
SM64_GAMMA = 0x9E3779B97F4A7C15
SM64_MIX1 = 0xBF58476D1CE4E5B9
SM64_MIX2 = 0x94D049BB133111EB
_U64 = 0xFFFFFFFFFFFFFFFF


def splitmix64(seed: int, n: int) -> int:
    """n-th 64-bit word of the SplitMix64 stream for `seed` (n >= 0)."""
    x = ((seed & _U64) + (n + 1) * SM64_GAMMA) & _U64
    x = ((x ^ (x >> 30)) * SM64_MIX1) & _U64
    x = ((x ^ (x >> 27)) * SM64_MIX2) & _U64
    return x ^ (x >> 31)


def bit_threshold(p: float) -> int:
    """Integer threshold T such that bit = 1 iff (u64 >> 11) < T. T = floor(p * 2^53)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"ones probability must be in [0, 1], got {p}")
    return int(p * 2.0**53)


def random_bits(seed: int, n_bits: int, p: float = 0.5) -> np.ndarray:
    """Deterministic word of `n_bits` biased bits from the pinned generator."""
    thresh = np.uint64(bit_threshold(p))
    n = np.arange(1, n_bits + 1, dtype=np.uint64)
    x = np.uint64(seed & _U64) + n * np.uint64(SM64_GAMMA)  # wraps mod 2^64
    x = (x ^ (x >> np.uint64(30))) * np.uint64(SM64_MIX1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(SM64_MIX2)
    x ^= x >> np.uint64(31)
    return ((x >> np.uint64(11)) < thresh).astype(np.uint8)


def binary_expansion_bits(a: float, n_bits: int) -> np.ndarray:
    """First `n_bits` binary digits of a in [0, 1], as a uint8 array.

    When a has a finite (dyadic) expansion the infinite form is emitted
    instead, truncated at n_bits: 1/2 -> 0111..., 1 -> 111..., 0 -> 000...
    Exact rational arithmetic on the binary64 value of a, so the digits are
    reproducible bit for bit.
    """
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"expansion value must be in [0, 1], got {a}")
    if n_bits < 1:
        raise ValueError("n_bits must be >= 1")
    if a == 0.0:
        return np.zeros(n_bits, dtype=np.uint8)
    scaled = Fraction(a) * (1 << n_bits)
    if scaled.denominator == 1:
        word = scaled.numerator - 1  # dyadic within n_bits: infinite form ...0111
    else:
        word = scaled.numerator // scaled.denominator
    out = np.empty(n_bits, dtype=np.uint8)
    for i in range(n_bits):
        out[i] = (word >> (n_bits - 1 - i)) & 1
    return out


class SymbolicTemplate:
    """Base class: a binary symbol source indexed from 0."""

    #: None for unbounded (periodic) templates, else the declared word length.
    length: Optional[int] = None

    def symbol(self, n: int) -> int:
        raise NotImplementedError

    def word(self, n_bits: int) -> np.ndarray:
        """First n_bits symbols as uint8. Errors past the end of a finite word."""
        raise NotImplementedError

    def descriptor(self) -> str:
        """Stable textual identity, round-trips through the CLI template grammar."""
        raise NotImplementedError

    def _check_index(self, n: int) -> None:
        if n < 0:
            raise IndexError(f"template index must be >= 0, got {n}")
        if self.length is not None and n >= self.length:
            raise IndexError(f"index {n} out of range for template of length {self.length}")

    def _check_span(self, n_bits: int) -> None:
        if n_bits < 0:
            raise ValueError("word length must be >= 0")
        if self.length is not None and n_bits > self.length:
            raise IndexError(f"requested {n_bits} symbols from template of length {self.length}")


def _as_bit_tuple(word) -> tuple:
    bits = tuple(int(b) for b in word)
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"template symbols must be 0 or 1, got {word!r}")
    return bits


@dataclass(frozen=True)
class Periodic(SymbolicTemplate):
    """Infinite template repeating a fixed block: s_n = block[n mod k]."""

    block: tuple

    def __post_init__(self):
        object.__setattr__(self, "block", _as_bit_tuple(self.block))
        if len(self.block) == 0:
            raise ValueError("periodic block must be nonempty")

    length = None

    def symbol(self, n: int) -> int:
        self._check_index(n)
        return self.block[n % len(self.block)]

    def word(self, n_bits: int) -> np.ndarray:
        reps = -(-n_bits // len(self.block)) if n_bits else 1
        return np.tile(np.array(self.block, dtype=np.uint8), reps)[:n_bits]

    def descriptor(self) -> str:
        return "periodic:" + "".join(map(str, self.block))


@dataclass(frozen=True)
class Finite(SymbolicTemplate):
    """Explicit finite word."""

    bits: tuple

    def __post_init__(self):
        object.__setattr__(self, "bits", _as_bit_tuple(self.bits))
        if len(self.bits) == 0:
            raise ValueError("finite word must be nonempty")

    @property
    def length(self) -> int:
        return len(self.bits)

    def symbol(self, n: int) -> int:
        self._check_index(n)
        return self.bits[n]

    def word(self, n_bits: int) -> np.ndarray:
        self._check_span(n_bits)
        return np.array(self.bits[:n_bits], dtype=np.uint8)

    def descriptor(self) -> str:
        return "word:" + "".join(map(str, self.bits))


@dataclass(frozen=True)
class SingleError(SymbolicTemplate):
    """All-base word of length n with one flipped symbol at 1-based position k.

    By the error-propagation convention, base symbol 1 is the desired map
    f_c1 and error symbol 0 is the erroneous map f_c0 applied at iteration k.
    """

    error_position: int
    n: int
    base_symbol: int = 1
    error_symbol: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("word length must be >= 1")
        if not 1 <= self.error_position <= self.n:
            raise ValueError(
                f"error position must be in 1..{self.n}, got {self.error_position}")
        for name in ("base_symbol", "error_symbol"):
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} must be 0 or 1")

    @property
    def length(self) -> int:
        return self.n

    def symbol(self, n: int) -> int:
        self._check_index(n)
        return self.error_symbol if n == self.error_position - 1 else self.base_symbol

    def word(self, n_bits: int) -> np.ndarray:
        self._check_span(n_bits)
        out = np.full(n_bits, self.base_symbol, dtype=np.uint8)
        if self.error_position - 1 < n_bits:
            out[self.error_position - 1] = self.error_symbol
        return out

    def descriptor(self) -> str:
        return f"error:k={self.error_position},N={self.n}"


@dataclass(frozen=True)
class RandomSeeded(SymbolicTemplate):
    """Reproducible random word: (seed, n, p) pins the word via SplitMix64."""

    seed: int
    n: int
    ones_probability: float = 0.5

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("word length must be >= 1")
        bit_threshold(self.ones_probability)  # range check

    @property
    def length(self) -> int:
        return self.n

    def symbol(self, n: int) -> int:
        self._check_index(n)
        u = splitmix64(self.seed, n)
        return int((u >> 11) < bit_threshold(self.ones_probability))

    def word(self, n_bits: int) -> np.ndarray:
        self._check_span(n_bits)
        return random_bits(self.seed, n_bits, self.ones_probability)

    def descriptor(self) -> str:
        return f"random:seed={self.seed},N={self.n},p={self.ones_probability!r}"


@dataclass(frozen=True)
class BinaryExpansion(SymbolicTemplate):
    """Binary digits of a real in [0, 1], always the infinite expansion."""

    a: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("word length must be >= 1")
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"expansion value must be in [0, 1], got {self.a}")

    @property
    def length(self) -> int:
        return self.n

    def symbol(self, n: int) -> int:
        self._check_index(n)
        return int(binary_expansion_bits(self.a, n + 1)[n])

    def word(self, n_bits: int) -> np.ndarray:
        self._check_span(n_bits)
        return binary_expansion_bits(self.a, self.n)[:n_bits]

    def descriptor(self) -> str:
        return f"binary:a={self.a!r},L={self.n}"


@dataclass(frozen=True)
class TemplateRoot:
    """The first k symbols of a template."""

    bits: tuple

    def __post_init__(self):
        object.__setattr__(self, "bits", _as_bit_tuple(self.bits))

    def __len__(self) -> int:
        return len(self.bits)


def template_symbol(template: SymbolicTemplate, n: int) -> int:
    """Symbol s_n of the template."""
    return template.symbol(n)


def shift(template: SymbolicTemplate, j: int) -> SymbolicTemplate:
    """Drop the first j symbols: s'_n = s_{n+j}.

    Periodic templates rotate their block; finite templates shorten to
    length N - j and require j < N.
    """
    if j < 0:
        raise ValueError("shift must be >= 0")
    if isinstance(template, Periodic):
        k = len(template.block)
        r = j % k
        return Periodic(template.block[r:] + template.block[:r])
    n = template.length
    if j >= n:
        raise ValueError(f"cannot shift a length-{n} template by {j}")
    return Finite(tuple(int(b) for b in template.word(n)[j:]))


def k_root(template: SymbolicTemplate, k: int) -> TemplateRoot:
    """First k symbols; two templates share a k-root iff these are equal."""
    if k < 1:
        raise ValueError("root length must be >= 1")
    if isinstance(template, Periodic):
        return TemplateRoot(tuple(int(template.symbol(i)) for i in range(k)))
    return TemplateRoot(tuple(int(b) for b in template.word(k)))


# ---------------------------------------------------------------------------
# Orbit dynamics
# ---------------------------------------------------------------------------

def _require_finite(z: complex, what: str) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{what} must be finite, got {z}")
    return z


@dataclass(frozen=True)
class ParameterPair:
    """The complex pair (c0, c1) selecting the two iterated maps."""

    c0: complex
    c1: complex

    def __post_init__(self):
        object.__setattr__(self, "c0", _require_finite(self.c0, "c0"))
        object.__setattr__(self, "c1", _require_finite(self.c1, "c1"))


@dataclass(frozen=True)
class OrbitOutcome:
    escaped: bool
    escape_index: Optional[int]
    final_magnitude: float
    iters_used: int


def step(z: complex, c: complex) -> complex:
    """One quadratic step z^2 + c."""
    return z * z + c


def escape_radius(pair: ParameterPair) -> float:
    """Smallest radius R = max(2, |c0|, |c1|) guaranteeing divergence past it.

    If |z| > R then |z^2 + c| >= |z|^2 - |c| >= |z| (|z| - 1) > |z| for either
    map, so the orbit grows monotonically once it leaves the disk of radius R.
    """
    return max(2.0, abs(pair.c0), abs(pair.c1))


def template_orbit(xi0: complex, pair: ParameterPair, template: SymbolicTemplate,
                   max_iter: int, radius: Optional[float] = None) -> OrbitOutcome:
    """Iterate xi_{n+1} = f_{c_{s_n}}(xi_n) and report escape or boundedness.

    Escape is the first n with |xi_n| > radius; the bounded verdict means all
    of xi_0 .. xi_{max_iter} stayed inside. The escape test compares squared
    magnitudes, matching the raster kernels exactly.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    r_min = escape_radius(pair)
    r = r_min if radius is None else float(radius)
    if r < r_min:
        raise ValueError(f"radius {r} is below the sound escape radius {r_min}")
    if template.length is not None and max_iter > template.length:
        raise ValueError(
            f"max_iter {max_iter} exceeds finite template length {template.length}")
    z = _require_finite(xi0, "xi0")
    r2 = r * r
    zre, zim = z.real, z.imag
    mag2 = zre * zre + zim * zim
    if mag2 > r2:
        return OrbitOutcome(True, 0, math.sqrt(mag2), 0)
    bits = template.word(max_iter)
    c0re, c0im = pair.c0.real, pair.c0.imag
    c1re, c1im = pair.c1.real, pair.c1.imag
    for n in range(max_iter):
        if bits[n]:
            cre, cim = c1re, c1im
        else:
            cre, cim = c0re, c0im
        t = zre * zre - zim * zim + cre
        zim = 2.0 * zre * zim + cim
        zre = t
        mag2 = zre * zre + zim * zim
        if mag2 > r2:
            return OrbitOutcome(True, n + 1, math.sqrt(mag2), n + 1)
    return OrbitOutcome(False, None, math.sqrt(mag2), max_iter)
