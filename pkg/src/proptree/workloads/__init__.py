"""Benchmark workloads: small data-structure implementations with injected bugs.

A :class:`Workload` bundles an implementation whose behaviour is switched by
a mutant id, a family of properties over it, and the annotations (bespoke
and type-based) used to generate, mutate, shrink and print its inputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Optional

from ..core import Env, PropTree, Value, foralls
from ..runners.basic import falsifies


@dataclass(frozen=True)
class Task:
    workload: str
    mutant: str
    prop: str

    @property
    def id(self) -> str:
        return f"{self.workload}/{self.mutant}/{self.prop}"


@dataclass
class Workload:
    name: str
    mutants: tuple[str, ...]
    property_ids: tuple[str, ...]
    build: Callable[[str, str, str], PropTree]
    size_of: Callable[[str, Any], int]
    small_domains: Callable[[str], Mapping[str, tuple[str, list]]]
    solvable: Mapping[str, tuple[str, ...]]
    extractors: Mapping[str, Callable[[Any], Iterable]] = field(default_factory=dict)
    feedback: Optional[Callable[[Env], int]] = None
    strategies: tuple[str, ...] = ("bespoke", "type")

    def prop(self, property_id: str, mutant: str = "none", strategy: str = "bespoke") -> PropTree:
        if mutant != "none" and mutant not in self.mutants:
            raise ValueError(f"unknown mutant {mutant!r} for {self.name}")
        if property_id not in self.property_ids:
            raise ValueError(f"unknown property {property_id!r} for {self.name}")
        if strategy not in self.strategies:
            raise ValueError(f"unknown strategy {strategy!r} for {self.name}")
        return self.build(property_id, mutant, strategy)

    def tasks(self) -> list[Task]:
        return [Task(self.name, m, p) for m in self.mutants for p in self.solvable[m]]

    def env_size(self, env: Env) -> int:
        return sum(self.size_of(env.tags[n], env[n]) for n in env)

    def metric(self, p: PropTree):
        """Shrink ordering: structural size, ties broken by printed form."""
        from ..runners.basic import print_env

        def m(env: Env):
            return (self.env_size(env), print_env(p, env))

        return m


def small_envs(p: PropTree, domains: Mapping[str, tuple[str, list]]) -> Iterable[Env]:
    """Every environment drawn from the per-variable ``(tag, values)`` domains, in quantifier order."""
    order = [node.name for node in foralls(p)]
    for combo in itertools.product(*(domains[n][1] for n in order)):
        yield Env((n, Value(domains[n][0], v)) for n, v in zip(order, combo))


def exhaustive_counterexamples(p: PropTree, domains) -> Iterable[Env]:
    for env in small_envs(p, domains):
        if falsifies(p, env):
            yield env


def killable(p: PropTree, domains) -> bool:
    return next(iter(exhaustive_counterexamples(p, domains)), None) is not None


_REGISTRY: dict[str, Callable[[], Workload]] = {}


def register(name: str):
    def deco(fn):
        _REGISTRY[name] = fn
        return fn

    return deco


def get_workload(name: str) -> Workload:
    _load()
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise ValueError(f"unknown workload {name!r}; expected one of {', '.join(sorted(_REGISTRY))}") from None


def workload_names() -> list[str]:
    _load()
    return sorted(_REGISTRY)


def _load():
    from . import bst, lists, rbt, stlc  # noqa: F401
