"""Reified properties: quantifier spines, runtime environments and results.

A property is a linear chain of ``Forall`` and ``Implies`` nodes ending in a
single ``Check``.  Quantifier nodes carry no binder: every function attached
to the tree (generators, preconditions, the final predicate) receives the
whole environment of values bound so far and looks names up in it.

    >>> from proptree import rand
    >>> p = forall("x", check(lambda env: env["x"] == 0), gen=rand.const(0, "int"))
    >>> names(p)
    ['x']
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Optional, Union


class PropertyError(Exception):
    """Base class for harness errors raised while building or running properties."""


class ConstructionError(PropertyError):
    pass


class UnboundName(PropertyError, KeyError):
    pass


class TagMismatch(PropertyError, TypeError):
    pass


class NoGenerator(PropertyError):
    pass


class ContractViolation(PropertyError):
    """A generated (or mutated, or shrunk) value broke its ``contract`` annotation."""

    def __init__(self, name: str, value: Any):
        super().__init__(f"contract violated for {name!r}: {value!r}")
        self.name = name
        self.value = value


@dataclass(frozen=True, slots=True)
class Value:
    tag: str
    payload: Any

    def __post_init__(self):
        if not self.tag:
            raise ValueError("Value needs a non-empty type tag")

    def expect(self, tag: str) -> Any:
        if tag != self.tag:
            raise TagMismatch(f"expected a {tag!r} value, found {self.tag!r}")
        return self.payload


class Env(dict):
    """Ordered bindings ``name -> payload``, outermost quantifier first.

    Indexing returns the raw payload so predicates can be written as
    ``env["t"]``; the type tag of each binding lives in ``env.tags``.
    Looking up a name that is not bound raises :class:`UnboundName`.
    """

    __slots__ = ("tags",)

    def __init__(self, bindings: Iterable[tuple[str, Value]] = ()):
        super().__init__()
        self.tags: dict[str, str] = {}
        for name, value in bindings:
            self._extend(name, value.tag, value.payload)

    def __missing__(self, name):
        raise UnboundName(name)

    def _extend(self, name: str, tag: str, payload: Any) -> None:
        # In-place binding, only for the runner that owns this env.
        if name in self.tags:
            raise ConstructionError(f"name {name!r} bound twice")
        self[name] = payload
        self.tags[name] = tag

    def value(self, name: str) -> Value:
        return Value(self.tags[name], self[name])

    def get_as(self, name: str, tag: str) -> Any:
        return self.value(name).expect(tag)

    def bind(self, name: str, value: Value) -> "Env":
        env = self.copy()
        env._extend(name, value.tag, value.payload)
        return env

    def replace(self, name: str, value: Value) -> "Env":
        """Copy with one existing binding swapped, keeping binding order."""
        if name not in self.tags:
            raise UnboundName(name)
        if self.tags[name] != value.tag:
            raise TagMismatch(f"{name!r} holds {self.tags[name]!r}, not {value.tag!r}")
        env = self.copy()
        dict.__setitem__(env, name, value.payload)
        return env

    def prefix(self, k: int) -> "Env":
        env = Env()
        for i, name in enumerate(self):
            if i >= k:
                break
            env._extend(name, self.tags[name], self[name])
        return env

    def copy(self) -> "Env":
        env = empty_env()
        dict.update(env, self)
        env.tags = dict(self.tags)
        return env

    def bindings(self) -> list[tuple[str, Value]]:
        return [(name, Value(self.tags[name], self[name])) for name in self]

    def __eq__(self, other):
        if not isinstance(other, Env):
            return NotImplemented
        return list(self.items()) == list(other.items()) and self.tags == other.tags

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self.items())
        return f"Env({inner})"


def empty_env() -> Env:
    """A fresh empty environment, skipping ``__init__`` (runners build one per trial)."""
    env = dict.__new__(Env)
    env.tags = {}
    return env


Predicate = Callable[[Env], bool]


@dataclass(frozen=True)
class Annotations:
    """Host functions attached to one quantifier.

    Every field except ``generator`` is optional.  Each function receives the
    environment of the *enclosing* quantifiers only.  ``generator`` returns a
    :class:`proptree.rand.Gen`; ``mutator`` returns one too, given the current
    payload; ``shrinker`` returns smaller candidate payloads.
    """

    generator: Optional[Callable[[Env], Any]] = None
    mutator: Optional[Callable[[Env, Any], Any]] = None
    shrinker: Optional[Callable[[Env, Any], Iterable[Any]]] = None
    printer: Optional[Callable[[Env, Any], str]] = None
    contract: Optional[Callable[[Env, Any], bool]] = None
    extra: dict[str, Callable[..., Any]] = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class Forall:
    name: str
    annotations: Annotations
    body: "PropTree"


@dataclass(frozen=True, slots=True)
class Implies:
    pre: Predicate
    body: "PropTree"


@dataclass(frozen=True, slots=True)
class Check:
    pred: Predicate


PropTree = Union[Forall, Implies, Check]


def _lift(fn):
    # A Gen passed directly becomes an env-independent generator; ``static``
    # lets runners skip the call.
    if fn is None or not hasattr(fn, "tag"):
        return fn

    def lifted(env, _g=fn):
        return _g

    lifted.static = fn
    return lifted


def forall(
    name: str,
    body: PropTree,
    *,
    gen=None,
    mutate=None,
    shrink=None,
    show=None,
    contract=None,
    annotations: Optional[Annotations] = None,
    **extra,
) -> Forall:
    """Quantify ``name`` over ``body``.

    ``gen`` may be a ``Gen`` (used for every environment) or a function from
    the outer environment to a ``Gen``.  Passing ``annotations`` uses that
    record as-is; keyword annotations then override its fields.
    """
    if not isinstance(body, (Forall, Implies, Check)):
        raise ConstructionError(f"body of forall {name!r} is not a property")
    if name in names(body):
        raise ConstructionError(f"duplicate quantifier name {name!r}")
    base = annotations or Annotations()
    ann = Annotations(
        generator=_lift(gen) or base.generator,
        mutator=mutate or base.mutator,
        shrinker=shrink or base.shrinker,
        printer=show or base.printer,
        contract=contract or base.contract,
        extra={**base.extra, **extra},
    )
    return Forall(name, ann, body)


def implies(pre: Predicate, body: PropTree) -> Implies:
    if not isinstance(body, (Forall, Implies, Check)):
        raise ConstructionError("body of implies is not a property")
    return Implies(pre, body)


def check(pred: Predicate) -> Check:
    return Check(pred)


def spine(p: PropTree) -> Iterator[PropTree]:
    """Yield the nodes of ``p`` outermost first, ending with its ``Check``."""
    node = p
    while True:
        yield node
        if type(node) is Check:
            return
        node = node.body


def names(p: PropTree) -> list[str]:
    return [node.name for node in spine(p) if type(node) is Forall]


def foralls(p: PropTree) -> list[Forall]:
    return [node for node in spine(p) if type(node) is Forall]


def depth(p: PropTree) -> int:
    return sum(1 for _ in spine(p))


class Normal:
    """The property ran to its ``Check``; ``truth`` is the predicate's verdict."""

    # Plain slotted classes rather than dataclasses: one is built per trial.
    __slots__ = ("env", "truth")

    def __init__(self, env: Env, truth: bool):
        self.env = env
        self.truth = truth

    def __eq__(self, other):
        if type(other) is not Normal:
            return NotImplemented
        return self.truth == other.truth and self.env == other.env

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        return f"Normal({self.env!r}, {self.truth!r})"


class Discard:
    """A precondition rejected the input; ``env`` holds the values bound so far."""

    __slots__ = ("env",)

    def __init__(self, env: Env):
        self.env = env

    def __eq__(self, other):
        if type(other) is not Discard:
            return NotImplemented
        return self.env == other.env

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        return f"Discard({self.env!r})"


RunResult = Union[Normal, Discard]


def is_failure(res: RunResult) -> bool:
    return type(res) is Normal and not res.truth


@dataclass
class RunnerReport:
    """Outcome of one campaign.

    ``time_to_failure`` is measured before shrinking; ``shrink_time`` covers
    shrinking and printing.  ``env``/``original`` hold the shrunk and the
    first-found counterexample when a bug was found.
    """

    foundbug: bool
    passed: int
    discards: int
    counterexample: Optional[str] = None
    wallclock: float = 0.0
    time_to_failure: Optional[float] = None
    shrink_time: float = 0.0
    env: Optional[Env] = None
    original: Optional[Env] = None

    def __post_init__(self):
        if self.foundbug != (self.counterexample is not None):
            raise ValueError("foundbug must hold exactly when a counterexample is present")

    @property
    def trials(self) -> int:
        return self.passed + self.discards
