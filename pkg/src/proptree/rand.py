"""Splittable randomness and the generator combinators used by annotations.

``RandomSource`` is a SplitMix64 generator.  Drawing (``next``/``bits``)
advances the source in place; ``split`` is pure and returns two fresh
sources, so the same source split twice gives the same pair.
"""

from __future__ import annotations

from typing import Any, Callable, Sequence

from .core import Env, TagMismatch, Value

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix_gamma(z: int) -> int:
    z = ((z ^ (z >> 33)) * 0xFF51AFD7ED558CCD) & MASK64
    z = ((z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53) & MASK64
    z = (z ^ (z >> 33)) | 1
    if bin(z ^ (z >> 1)).count("1") < 24:
        z ^= 0xAAAAAAAAAAAAAAAA
    return z


class RandomSource:
    __slots__ = ("seed", "gamma")

    def __init__(self, seed: int, gamma: int = GOLDEN_GAMMA):
        self.seed = seed & MASK64
        self.gamma = gamma | 1

    def bits(self) -> int:
        """Next raw 64-bit output."""
        self.seed = s = (self.seed + self.gamma) & MASK64
        return _mix64(s)

    def next(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)``."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        self.seed = s = (self.seed + self.gamma) & MASK64
        return (_mix64(s) * bound) >> 64

    def split(self) -> tuple["RandomSource", "RandomSource"]:
        s1 = (self.seed + self.gamma) & MASK64
        s2 = (s1 + self.gamma) & MASK64
        left = RandomSource(s2, self.gamma)
        right = RandomSource(_mix64(s1), _mix_gamma(s2))
        return left, right

    def split_n(self, n: int) -> list["RandomSource"]:
        out = []
        rest = self
        for _ in range(n):
            rest, child = rest.split()
            out.append(child)
        return out

    def copy(self) -> "RandomSource":
        return RandomSource(self.seed, self.gamma)

    # conveniences built on next()

    def int_range(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range ``[lo, hi]``."""
        return lo + self.next(hi - lo + 1)

    def coin(self) -> bool:
        return self.next(2) == 1

    def choice(self, seq: Sequence[Any]) -> Any:
        return seq[self.next(len(seq))]

    def __repr__(self):
        return f"RandomSource(seed={self.seed:#x}, gamma={self.gamma:#x})"


class Gen:
    """A generator action: ``run(rs, size)`` returns a payload with type ``tag``."""

    __slots__ = ("tag", "run")

    def __init__(self, tag: str, run: Callable[[RandomSource, int], Any]):
        if not tag:
            raise ValueError("generators need a type tag")
        self.tag = tag
        self.run = run

    def map(self, fn: Callable[[Any], Any], tag: str | None = None) -> "Gen":
        run = self.run
        return Gen(tag or self.tag, lambda rs, size: fn(run(rs, size)))

    def bind(self, fn: Callable[[Any], "Gen"], tag: str) -> "Gen":
        run = self.run

        def go(rs, size):
            return fn(run(rs, size)).run(rs, size)

        return Gen(tag, go)

    def resize(self, fn: Callable[[int], int]) -> "Gen":
        run = self.run
        return Gen(self.tag, lambda rs, size: run(rs, fn(size)))

    def __repr__(self):
        return f"Gen({self.tag!r})"


def default_size(passed: int, discards: int) -> int:
    """floor(log2(passed + discards)), with the count clamped to at least 1."""
    return max(1, passed + discards).bit_length() - 1


def sample_gen(g: Gen, rs: RandomSource, size: int) -> Value:
    return Value(g.tag, g.run(rs, size))


def mutate_value(mutator, env: Env, v: Value, rs: RandomSource, size: int = 0) -> Value:
    """Apply a mutator annotation to ``v``; the result keeps ``v``'s tag."""
    if mutator is None:
        from .runners.errors import ConfigurationError

        raise ConfigurationError("no mutator annotation")
    g = mutator(env, v.payload)
    if g.tag != v.tag:
        raise TagMismatch(f"mutator turned a {v.tag!r} into a {g.tag!r}")
    return Value(g.tag, g.run(rs, size))


# -- combinators ------------------------------------------------------------


def const(x: Any, tag: str) -> Gen:
    return Gen(tag, lambda rs, size: x)


def ints(tag: str = "int") -> Gen:
    """Integers in ``[-size, size]``: a magnitude in ``[0, size]`` plus a sign bit."""

    def run(rs, size):
        n = rs.next(size + 1)
        return -n if rs.next(2) else n

    return Gen(tag, run)


def nats(tag: str = "int") -> Gen:
    return Gen(tag, lambda rs, size: rs.next(size + 1))


def int_range(lo: int, hi: int, tag: str = "int") -> Gen:
    return Gen(tag, lambda rs, size: lo + rs.next(hi - lo + 1))


def bools(tag: str = "bool") -> Gen:
    return Gen(tag, lambda rs, size: rs.next(2) == 1)


def elements(items: Sequence[Any], tag: str) -> Gen:
    items = tuple(items)
    return Gen(tag, lambda rs, size: items[rs.next(len(items))])


def one_of(gens: Sequence[Gen], tag: str | None = None) -> Gen:
    gens = tuple(gens)
    tag = tag or gens[0].tag
    return Gen(tag, lambda rs, size: gens[rs.next(len(gens))].run(rs, size))


def frequency(weighted: Sequence[tuple[int, Gen]], tag: str | None = None) -> Gen:
    weighted = tuple(weighted)
    total = sum(w for w, _ in weighted)
    tag = tag or weighted[0][1].tag

    def run(rs, size):
        pick = rs.next(total)
        for w, g in weighted:
            if pick < w:
                return g.run(rs, size)
            pick -= w
        raise AssertionError("unreachable")

    return Gen(tag, run)


def lists(elem: Gen, tag: str = "list", max_len: int | None = None) -> Gen:
    """Lists whose length is drawn from ``[0, size]`` (capped at ``max_len``)."""
    run = elem.run

    def go(rs, size):
        n = rs.next(size + 1)
        if max_len is not None and n > max_len:
            n = max_len
        return [run(rs, size) for _ in range(n)]

    return Gen(tag, go)


def sized(fn: Callable[[int], Gen], tag: str) -> Gen:
    return Gen(tag, lambda rs, size: fn(size).run(rs, size))


# -- mutators and shrinkers for integers ------------------------------------


def int_point_mutation(env: Env, n: int, tag: str = "int") -> Gen:
    """Move ``n`` one step up or down."""
    return Gen(tag, lambda rs, size: n + 1 if rs.next(2) else n - 1)


def shrink_int(env: Env, n: int) -> list[int]:
    """Candidates towards zero: 0, half, one step closer."""
    if n == 0:
        return []
    out = [0]
    half = n // 2 if n > 0 else -((-n) // 2)
    if half not in out:
        out.append(half)
    step = n - 1 if n > 0 else n + 1
    if step not in out:
        out.append(step)
    if n < 0:
        out.append(-n)
    return out
