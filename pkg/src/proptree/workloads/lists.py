"""Synthetic targeted task: a failure that only long lists reach.

Generation never produces lists longer than ``GEN_CAP`` while the bug needs at
least ``THRESHOLD`` elements, so plain generation cannot find it; mutation that
appends, guided by list length as feedback, climbs there steadily.
"""

from __future__ import annotations

from types import SimpleNamespace

from ..core import check, forall
from ..rand import Gen, shrink_int
from ..runners.feedback import trace
from . import Workload, register

GEN_CAP = 8
THRESHOLD = 32
MODULUS = 1 << 16

MUTANTS = ("long-input-drops-last",)
PROPERTIES = ("checksum-model",)


def ops(mutant: str = "none") -> SimpleNamespace:
    def checksum(xs):
        if len(xs) >= THRESHOLD:
            trace("long")
            if mutant == "long-input-drops-last":
                xs = xs[:-1]
        return sum(xs) % MODULUS

    return SimpleNamespace(checksum=checksum)


def _gen_list(rs, size):
    n = rs.next(min(size, GEN_CAP) + 1)
    return [rs.next(size + 2) for _ in range(n)]


LIST = Gen("list", _gen_list)


def append_one(env, xs) -> Gen:
    return Gen("list", lambda rs, size: xs + [rs.next(size + 2)])


def shrink_list(env, xs) -> list:
    out = []
    if xs:
        out.append(xs[: len(xs) // 2])
        out.extend(xs[:i] + xs[i + 1:] for i in range(len(xs)))
    for i, x in enumerate(xs):
        out.extend(xs[:i] + [y] + xs[i + 1:] for y in shrink_int(env, x))
    return out


def annotations(strategy: str = "bespoke") -> dict:
    return dict(
        gen=LIST,
        mutate=append_one,
        shrink=shrink_list,
        contract=lambda env, xs: isinstance(xs, list) and all(isinstance(x, int) and x >= 0 for x in xs),
    )


def build(property_id: str, mutant: str = "none", strategy: str = "bespoke"):
    if property_id != "checksum-model":
        raise ValueError(property_id)
    o = ops(mutant)
    return forall("xs", check(lambda env: o.checksum(env["xs"]) == sum(env["xs"]) % MODULUS), **annotations(strategy))


def length_feedback(env) -> int:
    return len(env["xs"])


def size_of(tag, v) -> int:
    return 1 + len(v) + sum(abs(x).bit_length() for x in v)


def small_domains(property_id: str) -> dict:
    return {"xs": ("list", [[1] * n for n in range(THRESHOLD + 2)])}


SOLVABLE = {"long-input-drops-last": ("checksum-model",)}


@register("lists")
def workload() -> Workload:
    return Workload(
        name="lists",
        mutants=MUTANTS,
        property_ids=PROPERTIES,
        build=build,
        size_of=size_of,
        small_domains=small_domains,
        solvable=SOLVABLE,
        feedback=length_feedback,
        strategies=("bespoke",),
    )
