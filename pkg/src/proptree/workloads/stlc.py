"""Simply-typed lambda calculus with booleans, de Bruijn indices and a small optimizer.

The preservation and progress properties quantify over a type first and then
over a term generated at that type, so the term's generator depends on an
earlier binding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from types import SimpleNamespace
from typing import Optional, Union

from ..core import check, forall, implies
from ..rand import Gen
from ..runners.combinatorial import constructor_pairs
from ..runners.feedback import trace
from . import Workload, register

BOOL = "Bool"


@dataclass(frozen=True, slots=True)
class Fun:
    arg: "Type"
    res: "Type"


Type = Union[str, Fun]


@dataclass(frozen=True, slots=True)
class Var:
    index: int


@dataclass(frozen=True, slots=True)
class Lit:
    value: bool


@dataclass(frozen=True, slots=True)
class Abs:
    ty: Type
    body: "Term"


@dataclass(frozen=True, slots=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True, slots=True)
class If:
    cond: "Term"
    then: "Term"
    orelse: "Term"


Term = Union[Var, Lit, Abs, App, If]

MUTANTS = (
    "shift-ignores-cutoff",
    "subst-index-not-lifted",
    "subst-value-not-shifted",
    "beta-no-unshift",
    "if-step-swapped",
    "if-cond-not-stepped",
    "optimizer-wrong-branch",
    "optimizer-drops-used-arg",
)

PROPERTIES = (
    "single-preserve",
    "multi-preserve",
    "progress",
    "eval-model",
    "optimize-eval",
)

FUEL = 64


def typeof(ctx: tuple, e: Term) -> Optional[Type]:
    """Type of ``e`` in ``ctx`` (innermost binder first), or None if ill-typed."""
    if isinstance(e, Var):
        return ctx[e.index] if 0 <= e.index < len(ctx) else None
    if isinstance(e, Lit):
        return BOOL
    if isinstance(e, Abs):
        res = typeof((e.ty,) + ctx, e.body)
        return None if res is None else Fun(e.ty, res)
    if isinstance(e, App):
        f = typeof(ctx, e.fn)
        if isinstance(f, Fun) and typeof(ctx, e.arg) == f.arg:
            return f.res
        return None
    if isinstance(e, If):
        if typeof(ctx, e.cond) != BOOL:
            return None
        t = typeof(ctx, e.then)
        return t if t is not None and t == typeof(ctx, e.orelse) else None
    return None


def is_value(e: Term) -> bool:
    return isinstance(e, (Lit, Abs))


def term_size(e: Term) -> int:
    if isinstance(e, Abs):
        return 1 + term_size(e.body)
    if isinstance(e, App):
        return 1 + term_size(e.fn) + term_size(e.arg)
    if isinstance(e, If):
        return 1 + term_size(e.cond) + term_size(e.then) + term_size(e.orelse)
    return 1


def occurs(i: int, e: Term) -> bool:
    if isinstance(e, Var):
        return e.index == i
    if isinstance(e, Abs):
        return occurs(i + 1, e.body)
    if isinstance(e, App):
        return occurs(i, e.fn) or occurs(i, e.arg)
    if isinstance(e, If):
        return occurs(i, e.cond) or occurs(i, e.then) or occurs(i, e.orelse)
    return False


def ops(mutant: str = "none") -> SimpleNamespace:
    def shift(d, c, e):
        if isinstance(e, Var):
            if e.index >= c or mutant == "shift-ignores-cutoff":
                return Var(e.index + d)
            return e
        if isinstance(e, Abs):
            return Abs(e.ty, shift(d, c + 1, e.body))
        if isinstance(e, App):
            return App(shift(d, c, e.fn), shift(d, c, e.arg))
        if isinstance(e, If):
            return If(shift(d, c, e.cond), shift(d, c, e.then), shift(d, c, e.orelse))
        return e

    def subst(j, s, e):
        if isinstance(e, Var):
            return s if e.index == j else e
        if isinstance(e, Abs):
            j2 = j if mutant == "subst-index-not-lifted" else j + 1
            s2 = s if mutant == "subst-value-not-shifted" else shift(1, 0, s)
            return Abs(e.ty, subst(j2, s2, e.body))
        if isinstance(e, App):
            return App(subst(j, s, e.fn), subst(j, s, e.arg))
        if isinstance(e, If):
            return If(subst(j, s, e.cond), subst(j, s, e.then), subst(j, s, e.orelse))
        return e

    def beta(body, arg):
        out = subst(0, shift(1, 0, arg), body)
        return out if mutant == "beta-no-unshift" else shift(-1, 0, out)

    def step(e) -> Optional[Term]:
        """One call-by-value step, or None for values and stuck terms."""
        if isinstance(e, App):
            if not is_value(e.fn):
                f = step(e.fn)
                return None if f is None else App(f, e.arg)
            if not is_value(e.arg):
                a = step(e.arg)
                return None if a is None else App(e.fn, a)
            if isinstance(e.fn, Abs):
                trace("beta")
                return beta(e.fn.body, e.arg)
            return None
        if isinstance(e, If):
            if isinstance(e.cond, Lit):
                trace("if-lit")
                take_then = e.cond.value != (mutant == "if-step-swapped")
                return e.then if take_then else e.orelse
            if mutant == "if-cond-not-stepped":
                return None
            c = step(e.cond)
            return None if c is None else If(c, e.then, e.orelse)
        return None

    def multistep(e, fuel=FUEL):
        for _ in range(fuel):
            nxt = step(e)
            if nxt is None:
                break
            e = nxt
        return e

    def optimize(e):
        """Fold conditionals on literals and inline value or variable arguments, also under binders."""
        if isinstance(e, Abs):
            return Abs(e.ty, optimize(e.body))
        if isinstance(e, App):
            f, a = optimize(e.fn), optimize(e.arg)
            if isinstance(f, Abs) and (is_value(a) or isinstance(a, Var)):
                if mutant == "optimizer-drops-used-arg" or not occurs(0, f.body):
                    trace("opt-drop-arg")
                    return shift(-1, 0, f.body)
                trace("opt-inline")
                return beta(f.body, a)
            return App(f, a)
        if isinstance(e, If):
            c, t, o = optimize(e.cond), optimize(e.then), optimize(e.orelse)
            if isinstance(c, Lit):
                trace("opt-fold-if")
                return t if c.value != (mutant == "optimizer-wrong-branch") else o
            return If(c, t, o)
        return e

    return SimpleNamespace(shift=shift, subst=subst, step=step, multistep=multistep, optimize=optimize)


REF = ops("none")


def denote(e: Term, env: tuple = ()):
    """Reference big-step meaning: booleans as ``bool``, functions as Python closures."""
    if isinstance(e, Var):
        return env[e.index]
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Abs):
        return lambda x: denote(e.body, (x,) + env)
    if isinstance(e, App):
        return denote(e.fn, env)(denote(e.arg, env))
    return denote(e.then if denote(e.cond, env) else e.orelse, env)


# -- printing -----------------------------------------------------------------


def show_type(ty: Type) -> str:
    if isinstance(ty, Fun):
        arg = show_type(ty.arg)
        if isinstance(ty.arg, Fun):
            arg = f"({arg})"
        return f"{arg} -> {show_type(ty.res)}"
    return ty


def show_term(e: Term, depth: int = 0) -> str:
    """Render with named binders ``x0, x1, ...`` numbered by binding depth."""
    if isinstance(e, Var):
        lvl = depth - 1 - e.index
        return f"x{lvl}" if 0 <= lvl < depth else f"#{e.index}"
    if isinstance(e, Lit):
        return "true" if e.value else "false"
    if isinstance(e, Abs):
        return f"(\\x{depth}:{show_type(e.ty)}. {show_term(e.body, depth + 1)})"
    if isinstance(e, App):
        return f"({show_term(e.fn, depth)} {show_term(e.arg, depth)})"
    return f"(if {show_term(e.cond, depth)} then {show_term(e.then, depth)} else {show_term(e.orelse, depth)})"


# -- generators ---------------------------------------------------------------


def gen_type(rs, size: int) -> Type:
    if size <= 0 or rs.next(3) != 0:
        return BOOL
    return Fun(gen_type(rs, size - 1), gen_type(rs, size - 1))


def gen_typed(rs, ctx: tuple, ty: Type, size: int) -> Term:
    """A term of type ``ty`` in ``ctx``."""
    options = ["base"]
    if any(t == ty for t in ctx):
        options.append("var")
    if size > 0:
        options += ["app", "if"]
    pick = options[rs.next(len(options))]
    if pick == "var":
        idx = [i for i, t in enumerate(ctx) if t == ty]
        return Var(idx[rs.next(len(idx))])
    if pick == "app":
        a = gen_type(rs, 1)
        return App(gen_typed(rs, ctx, Fun(a, ty), size // 2), gen_typed(rs, ctx, a, size // 2))
    if pick == "if":
        s = size // 3
        return If(gen_typed(rs, ctx, BOOL, s), gen_typed(rs, ctx, ty, s), gen_typed(rs, ctx, ty, s))
    if isinstance(ty, Fun):
        return Abs(ty.arg, gen_typed(rs, (ty.arg,) + ctx, ty.res, size - 1))
    return Lit(bool(rs.next(2)))


def gen_untyped(rs, depth: int, size: int) -> Term:
    pick = rs.next(5 if size > 0 else 2)
    if pick == 0:
        return Var(rs.next(depth + 1))
    if pick == 1:
        return Lit(bool(rs.next(2)))
    if pick == 2:
        return Abs(gen_type(rs, 1), gen_untyped(rs, depth + 1, size - 1))
    if pick == 3:
        return App(gen_untyped(rs, depth, size // 2), gen_untyped(rs, depth, size // 2))
    s = size // 3
    return If(gen_untyped(rs, depth, s), gen_untyped(rs, depth, s), gen_untyped(rs, depth, s))


def _subterms(e: Term, ctx: tuple = (), path: tuple = ()):
    yield path, ctx, e
    if isinstance(e, Abs):
        yield from _subterms(e.body, (e.ty,) + ctx, path + ("body",))
    elif isinstance(e, App):
        yield from _subterms(e.fn, ctx, path + ("fn",))
        yield from _subterms(e.arg, ctx, path + ("arg",))
    elif isinstance(e, If):
        yield from _subterms(e.cond, ctx, path + ("cond",))
        yield from _subterms(e.then, ctx, path + ("then",))
        yield from _subterms(e.orelse, ctx, path + ("orelse",))


def _replace_at(e: Term, path: tuple, new: Term) -> Term:
    if not path:
        return new
    head, rest = path[0], path[1:]
    fields = {f: getattr(e, f) for f in e.__slots__}
    fields[head] = _replace_at(fields[head], rest, new)
    return type(e)(**fields)


def mutate_term(env, e) -> Gen:
    """Replace one random subterm with a fresh term of the same type in the same context."""

    def run(rs, size):
        sites = [(path, ctx, typeof(ctx, sub)) for path, ctx, sub in _subterms(e)]
        sites = [s for s in sites if s[2] is not None]
        if not sites:
            return gen_untyped(rs, 0, max(size, 1))
        path, ctx, ty = sites[rs.next(len(sites))]
        return _replace_at(e, path, gen_typed(rs, ctx, ty, max(size, 1)))

    return Gen("term", run)


def mutate_untyped(env, e) -> Gen:
    def run(rs, size):
        sites = list(_subterms(e))
        path, ctx, _ = sites[rs.next(len(sites))]
        return _replace_at(e, path, gen_untyped(rs, len(ctx), max(size, 1)))

    return Gen("term", run)


def mutate_type(env, ty) -> Gen:
    return Gen("type", lambda rs, size: gen_type(rs, max(1, size.bit_length())))


def shrink_term(env, e) -> list:
    """Smaller terms of the same type: a child in place of its parent, or a false literal."""
    out = []
    for path, ctx, sub in _subterms(e):
        ty = typeof(ctx, sub)
        if ty == BOOL and sub != Lit(False):
            out.append(_replace_at(e, path, Lit(False)))
        kids = []
        if isinstance(sub, App):
            kids = [sub.fn, sub.arg]
            if isinstance(sub.fn, Abs) and is_value(sub.arg):
                kids.append(REF.shift(-1, 0, REF.subst(0, REF.shift(1, 0, sub.arg), sub.fn.body)))
        elif isinstance(sub, If):
            kids = [sub.then, sub.orelse]
        for k in kids:
            if typeof(ctx, k) == ty:
                out.append(_replace_at(e, path, k))
    return out


def shrink_type(env, ty) -> list:
    if isinstance(ty, Fun):
        return [BOOL, ty.arg, ty.res]
    return []


def size_of(tag, v) -> int:
    if tag == "term":
        return term_size(v)
    return term_size(Lit(True)) if v == BOOL else 1 + size_of("type", v.arg) + size_of("type", v.res)


def term_view(e):
    if isinstance(e, Abs):
        return ("Abs", [e.body])
    if isinstance(e, App):
        return ("App", [e.fn, e.arg])
    if isinstance(e, If):
        return ("If", [e.cond, e.then, e.orelse])
    return (type(e).__name__, [])


def term_features(e):
    return constructor_pairs(e, term_view)


def _term_ann(strategy: str, ty_of):
    if strategy == "bespoke":
        gen = lambda env: Gen("term", lambda rs, size: gen_typed(rs, (), ty_of(env), size))
        mutate = mutate_term
    else:
        gen = Gen("term", lambda rs, size: gen_untyped(rs, 0, size))
        mutate = mutate_untyped
    return dict(
        gen=gen,
        mutate=mutate,
        shrink=shrink_term,
        show=lambda env, e: show_term(e),
        contract=lambda env, e: isinstance(e, (Var, Lit, Abs, App, If)),
    )


TYPE_ANN = dict(
    gen=Gen("type", lambda rs, size: gen_type(rs, max(1, size.bit_length()))),
    mutate=mutate_type,
    shrink=shrink_type,
    show=lambda env, ty: show_type(ty),
)


def build(property_id: str, mutant: str = "none", strategy: str = "bespoke"):
    o = ops(mutant)

    def at_type(pred):
        term = _term_ann(strategy, lambda env: env["ty"])
        typed = implies(lambda env: typeof((), env["e"]) == env["ty"], check(pred))
        return forall("ty", forall("e", typed, **term), **TYPE_ANN)

    def at_bool(pred):
        term = _term_ann(strategy, lambda env: BOOL)
        return forall("e", implies(lambda env: typeof((), env["e"]) == BOOL, check(pred)), **term)

    if property_id == "single-preserve":

        def pred(env):
            nxt = o.step(env["e"])
            return nxt is None or typeof((), nxt) == env["ty"]

        return at_type(pred)
    if property_id == "multi-preserve":
        return at_type(lambda env: typeof((), o.multistep(env["e"])) == env["ty"])
    if property_id == "progress":
        return at_type(lambda env: is_value(env["e"]) or o.step(env["e"]) is not None)
    if property_id == "eval-model":
        return at_bool(lambda env: o.multistep(env["e"]) == Lit(denote(env["e"])))
    if property_id == "optimize-eval":
        return at_bool(lambda env: o.multistep(o.optimize(env["e"])) == o.multistep(env["e"]))
    raise ValueError(property_id)


SMALL_TYPES = (BOOL, Fun(BOOL, BOOL))
SMALL_SCOPE = 10


@lru_cache(maxsize=None)
def enumerate_terms(ctx: tuple, ty: Type, size: int) -> tuple:
    """Every term of type ``ty`` in ``ctx`` with at most ``size`` nodes, binders drawn from SMALL_TYPES."""
    if size <= 0:
        return ()
    out = [Var(i) for i, t in enumerate(ctx) if t == ty]
    if ty == BOOL:
        out += [Lit(False), Lit(True)]
    if isinstance(ty, Fun) and ty.arg in SMALL_TYPES:
        out += [Abs(ty.arg, b) for b in enumerate_terms((ty.arg,) + ctx, ty.res, size - 1)]
    for a in SMALL_TYPES:
        for fn in enumerate_terms(ctx, Fun(a, ty), size - 2):
            for arg in enumerate_terms(ctx, a, size - 1 - term_size(fn)):
                out.append(App(fn, arg))
    for c in enumerate_terms(ctx, BOOL, size - 3):
        for t in enumerate_terms(ctx, ty, size - 2 - term_size(c)):
            for o in enumerate_terms(ctx, ty, size - 1 - term_size(c) - term_size(t)):
                out.append(If(c, t, o))
    return tuple(out)


def small_domains(property_id: str) -> dict:
    terms = [e for ty in SMALL_TYPES for e in enumerate_terms((), ty, SMALL_SCOPE)]
    return {"ty": ("type", list(SMALL_TYPES)), "e": ("term", terms)}


SOLVABLE = {
    "shift-ignores-cutoff": ("single-preserve", "multi-preserve", "eval-model", "optimize-eval"),
    "subst-index-not-lifted": ("single-preserve", "multi-preserve", "eval-model", "optimize-eval"),
    "subst-value-not-shifted": ("optimize-eval",),
    "beta-no-unshift": ("optimize-eval",),
    "if-step-swapped": ("eval-model", "optimize-eval"),
    "if-cond-not-stepped": ("progress", "eval-model", "optimize-eval"),
    "optimizer-wrong-branch": ("optimize-eval",),
    "optimizer-drops-used-arg": ("optimize-eval",),
}


@register("stlc")
def workload() -> Workload:
    return Workload(
        name="stlc",
        mutants=MUTANTS,
        property_ids=PROPERTIES,
        build=build,
        size_of=size_of,
        small_domains=small_domains,
        solvable=SOLVABLE,
        extractors={"term": term_features},
        feedback=lambda env: term_size(env["e"]),
    )
