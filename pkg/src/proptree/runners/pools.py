"""Seed pools: where feedback-guided runners keep inputs worth mutating.

Every pool answers ``sample()`` with ``GENERATE`` or ``Mutate(seed)``,
accepts useful inputs through ``invest`` and is told about useless
mutations through ``revise``.  ``invest`` is only called after the runner's
utility judged the feedback useful; the ``utility`` score it receives is used
for ordering (heap) and for the optional linear energy scaling.
"""

from __future__ import annotations

import heapq
import itertools
from collections import deque
from dataclasses import dataclass
from typing import Optional, Union

from ..core import Env

ENERGY_LEVELS = (1, 10, 100, 1000)
POOL_VARIANTS = ("fifo", "filo", "heap", "static-singleton", "dyn-monotonic", "dyn-resetting")


@dataclass(eq=False)
class Seed:
    env: Env
    feedback: int
    energy: int


class _Generate:
    __slots__ = ()

    def __repr__(self):
        return "GENERATE"


GENERATE = _Generate()


@dataclass(frozen=True)
class Mutate:
    source: Seed


Directive = Union[_Generate, Mutate]


class SeedPool:
    """Common energy bookkeeping; subclasses decide which seed is current."""

    def __init__(self, max_energy: int = 100, scaling: str = "full"):
        if max_energy < 1:
            raise ValueError("max_energy must be at least 1")
        if scaling not in ("full", "linear"):
            raise ValueError(f"unknown energy scaling {scaling!r}")
        self.max_energy = max_energy
        self.scaling = scaling

    def initial_energy(self, utility: int) -> int:
        if self.scaling == "linear":
            return min(self.max_energy, max(1, utility))
        return self.max_energy

    def invest(self, env: Env, feedback: int, utility: int) -> None:
        raise NotImplementedError

    def revise(self) -> None:
        raise NotImplementedError

    def sample(self) -> Directive:
        raise NotImplementedError

    def best(self) -> Optional[Seed]:
        raise NotImplementedError

    def seeds(self) -> list[Seed]:
        raise NotImplementedError

    def __len__(self):
        return len(self.seeds())


class QueuePool(SeedPool):
    """FIFO (``lifo=False``) or FILO queue; the current seed sits at one end."""

    def __init__(self, max_energy: int = 100, scaling: str = "full", lifo: bool = False):
        super().__init__(max_energy, scaling)
        self.lifo = lifo
        self._queue: deque[Seed] = deque()

    def _current_index(self) -> int:
        return -1 if self.lifo else 0

    def invest(self, env, feedback, utility):
        self._queue.append(Seed(env, feedback, self.initial_energy(utility)))

    def revise(self):
        if not self._queue:
            return
        i = self._current_index()
        seed = self._queue[i]
        seed.energy -= 1
        if seed.energy <= 0:
            if self.lifo:
                self._queue.pop()
            else:
                self._queue.popleft()

    def sample(self):
        if not self._queue:
            return GENERATE
        return Mutate(self._queue[self._current_index()])

    def best(self):
        return max(self._queue, key=lambda s: s.feedback, default=None)

    def seeds(self):
        return list(self._queue)


class HeapPool(SeedPool):
    """Priority queue on utility; among equal utilities the newest seed wins."""

    def __init__(self, max_energy: int = 100, scaling: str = "full"):
        super().__init__(max_energy, scaling)
        self._heap: list[tuple[int, int, Seed]] = []
        self._order = itertools.count()

    def invest(self, env, feedback, utility):
        seed = Seed(env, feedback, self.initial_energy(utility))
        heapq.heappush(self._heap, (-utility, -next(self._order), seed))

    def revise(self):
        if not self._heap:
            return
        seed = self._heap[0][2]
        seed.energy -= 1
        if seed.energy <= 0:
            heapq.heappop(self._heap)

    def sample(self):
        if not self._heap:
            return GENERATE
        return Mutate(self._heap[0][2])

    def best(self):
        return self._heap[0][2] if self._heap else None

    def seeds(self):
        return [entry[2] for entry in sorted(self._heap)]


class StaticSingletonPool(SeedPool):
    """One seed, never worn out; replaced only by strictly better feedback."""

    def __init__(self, max_energy: int = 1, scaling: str = "full"):
        super().__init__(max_energy, scaling)
        self._seed: Optional[Seed] = None

    def invest(self, env, feedback, utility):
        if self._seed is None or feedback > self._seed.feedback:
            self._seed = Seed(env, feedback, self.max_energy)

    def revise(self):
        pass

    def sample(self):
        return GENERATE if self._seed is None else Mutate(self._seed)

    def best(self):
        return self._seed

    def seeds(self):
        return [] if self._seed is None else [self._seed]


class DynamicSingletonPool(SeedPool):
    """One seed with energy.

    When the energy runs out a monotonic pool keeps the seed (as the bar a new
    seed must beat) but generates fresh inputs; a resetting pool drops it.
    """

    def __init__(self, max_energy: int = 100, scaling: str = "full", resetting: bool = False):
        super().__init__(max_energy, scaling)
        self.resetting = resetting
        self._seed: Optional[Seed] = None

    def invest(self, env, feedback, utility):
        if self._seed is None or feedback > self._seed.feedback:
            self._seed = Seed(env, feedback, self.initial_energy(utility))

    def revise(self):
        seed = self._seed
        if seed is None or seed.energy <= 0:
            return
        seed.energy -= 1
        if seed.energy == 0 and self.resetting:
            self._seed = None

    def sample(self):
        seed = self._seed
        if seed is None or seed.energy <= 0:
            return GENERATE
        return Mutate(seed)

    def best(self):
        return self._seed

    def seeds(self):
        return [] if self._seed is None else [self._seed]


def make_pool(variant: str, energy: int = 100, scaling: str = "full") -> SeedPool:
    if variant == "fifo":
        return QueuePool(energy, scaling)
    if variant == "filo":
        return QueuePool(energy, scaling, lifo=True)
    if variant == "heap":
        return HeapPool(energy, scaling)
    if variant == "static-singleton":
        return StaticSingletonPool()
    if variant == "dyn-monotonic":
        return DynamicSingletonPool(energy, scaling)
    if variant == "dyn-resetting":
        return DynamicSingletonPool(energy, scaling, resetting=True)
    raise ValueError(f"unknown pool variant {variant!r}; expected one of {', '.join(POOL_VARIANTS)}")


def pool_configurations() -> list[tuple[str, Optional[int]]]:
    """The 21 (variant, energy) pairs; the static singleton ignores energy."""
    out: list[tuple[str, Optional[int]]] = []
    for variant in POOL_VARIANTS:
        if variant == "static-singleton":
            out.append((variant, None))
        else:
            out.extend((variant, e) for e in ENERGY_LEVELS)
    return out


# -- utilities ---------------------------------------------------------------


class Utility:
    def useful(self, pool: SeedPool, feedback: int) -> bool:
        raise NotImplementedError

    def utility(self, pool: SeedPool, feedback: int) -> int:
        return feedback


class BeatsBest(Utility):
    """Useful when the feedback strictly exceeds the best seed in the pool."""

    def useful(self, pool, feedback):
        best = pool.best()
        return best is None or feedback > best.feedback


class Threshold(Utility):
    def __init__(self, threshold: int = 0):
        self.threshold = threshold

    def useful(self, pool, feedback):
        return feedback > self.threshold


class NeverUseful(Utility):
    def useful(self, pool, feedback):
        return False


def make_utility(name: str) -> Utility:
    if name == "beats-best":
        return BeatsBest()
    if name == "positive":
        return Threshold(0)
    if name == "never":
        return NeverUseful()
    raise ValueError(f"unknown utility {name!r}")
