"""Red-black trees: Okasaki insertion and Kahrs deletion, as key/value maps."""

from __future__ import annotations

from functools import lru_cache
from types import SimpleNamespace
from typing import NamedTuple, Optional

from ..core import check, forall, implies
from ..rand import Gen, int_point_mutation, shrink_int
from ..runners.combinatorial import constructor_pairs
from ..runners.feedback import trace
from . import Workload, register

R, B = "R", "B"


class Node(NamedTuple):
    color: str
    left: Optional["Node"]
    key: int
    value: int
    right: Optional["Node"]


class InvariantBroken(Exception):
    """Deletion met a shape that a valid red-black tree cannot have."""


MUTANTS = (
    "insert-new-node-black",
    "insert-root-stays-red",
    "balance-recolor-black",
    "balance-rotation-swaps-keys",
    "insert-keeps-old-value",
    "delete-wrong-direction",
    "delete-sub1-noop",
    "balleft-keeps-red",
    "append-drops-right",
    "delete-root-stays-red",
)

PROPERTIES = (
    "insert-valid",
    "delete-valid",
    "insert-post",
    "delete-post",
    "insert-model",
    "delete-model",
)


def _red(t) -> bool:
    return t is not None and t.color == R


def _black_node(t) -> bool:
    return t is not None and t.color == B


def _blacken(t):
    return t._replace(color=B)


def _redden(t):
    return t._replace(color=R)


def ops(mutant: str = "none") -> SimpleNamespace:
    def balance(a, k, v, b):
        if _red(a) and _red(b):
            trace("bal-1")
            top = B if mutant == "balance-recolor-black" else R
            return Node(top, _blacken(a), k, v, _blacken(b))
        if _red(a) and _red(a.left):
            trace("bal-2")
            if mutant == "balance-rotation-swaps-keys":
                return Node(R, _blacken(a.left), k, v, Node(B, a.right, a.key, a.value, b))
            return Node(R, _blacken(a.left), a.key, a.value, Node(B, a.right, k, v, b))
        if _red(a) and _red(a.right):
            trace("bal-3")
            m = a.right
            return Node(R, Node(B, a.left, a.key, a.value, m.left), m.key, m.value, Node(B, m.right, k, v, b))
        if _red(b) and _red(b.right):
            trace("bal-4")
            return Node(R, Node(B, a, k, v, b.left), b.key, b.value, _blacken(b.right))
        if _red(b) and _red(b.left):
            trace("bal-5")
            m = b.left
            return Node(R, Node(B, a, k, v, m.left), m.key, m.value, Node(B, m.right, b.key, b.value, b.right))
        return Node(B, a, k, v, b)

    def insert(k, v, t):
        def ins(t):
            if t is None:
                trace("ins-leaf")
                return Node(B if mutant == "insert-new-node-black" else R, None, k, v, None)
            if k < t.key:
                if t.color == B:
                    return balance(ins(t.left), t.key, t.value, t.right)
                return Node(R, ins(t.left), t.key, t.value, t.right)
            if k > t.key:
                if t.color == B:
                    return balance(t.left, t.key, t.value, ins(t.right))
                return Node(R, t.left, t.key, t.value, ins(t.right))
            trace("ins-eq")
            if mutant == "insert-keeps-old-value":
                return t
            return t._replace(key=k, value=v)

        out = ins(t)
        return out if mutant == "insert-root-stays-red" else _blacken(out)

    def sub1(t):
        if _black_node(t):
            return t if mutant == "delete-sub1-noop" else _redden(t)
        raise InvariantBroken("sub1")

    def balleft(l, k, v, r):
        if _red(l):
            trace("balleft-1")
            if mutant == "balleft-keeps-red":
                return Node(R, l, k, v, r)
            return Node(R, _blacken(l), k, v, r)
        if _black_node(r):
            trace("balleft-2")
            return balance(l, k, v, _redden(r))
        if _red(r) and _black_node(r.left):
            trace("balleft-3")
            m = r.left
            return Node(R, Node(B, l, k, v, m.left), m.key, m.value, balance(m.right, r.key, r.value, sub1(r.right)))
        raise InvariantBroken("balleft")

    def balright(l, k, v, r):
        if _red(r):
            trace("balright-1")
            return Node(R, l, k, v, _blacken(r))
        if _black_node(l):
            trace("balright-2")
            return balance(_redden(l), k, v, r)
        if _red(l) and _black_node(l.right):
            trace("balright-3")
            m = l.right
            return Node(R, balance(sub1(l.left), l.key, l.value, m.left), m.key, m.value, Node(B, m.right, k, v, r))
        raise InvariantBroken("balright")

    def append(a, b):
        if a is None:
            return b
        if b is None:
            return a
        if _red(a) and _red(b):
            trace("app-rr")
            bc = append(a.right, b.left)
            if _red(bc):
                return Node(R, Node(R, a.left, a.key, a.value, bc.left), bc.key, bc.value, Node(R, bc.right, b.key, b.value, b.right))
            return Node(R, a.left, a.key, a.value, Node(R, bc, b.key, b.value, b.right))
        if a.color == B and b.color == B:
            trace("app-bb")
            bc = append(a.right, b.left)
            if _red(bc):
                return Node(R, Node(B, a.left, a.key, a.value, bc.left), bc.key, bc.value, Node(B, bc.right, b.key, b.value, b.right))
            return balleft(a.left, a.key, a.value, Node(B, bc, b.key, b.value, b.right))
        if _red(b):
            return Node(R, append(a, b.left), b.key, b.value, b.right)
        if mutant == "append-drops-right":
            return Node(R, a.left, a.key, a.value, a.right)
        return Node(R, a.left, a.key, a.value, append(a.right, b))

    def delete(k, t):
        go_left_when_greater = mutant == "delete-wrong-direction"

        def dele(t):
            if t is None:
                return None
            if k < t.key and not go_left_when_greater or k > t.key and go_left_when_greater:
                trace("del-left")
                if _black_node(t.left):
                    return balleft(dele(t.left), t.key, t.value, t.right)
                return Node(R, dele(t.left), t.key, t.value, t.right)
            if k != t.key:
                trace("del-right")
                if _black_node(t.right):
                    return balright(t.left, t.key, t.value, dele(t.right))
                return Node(R, t.left, t.key, t.value, dele(t.right))
            trace("del-eq")
            return append(t.left, t.right)

        out = dele(t)
        if out is None:
            return None
        return out if mutant == "delete-root-stays-red" else _blacken(out)

    return SimpleNamespace(insert=insert, delete=delete)


REF = ops("none")


def find(k, t):
    while t is not None:
        if k < t.key:
            t = t.left
        elif k > t.key:
            t = t.right
        else:
            return t.value
    return None


def to_list(t) -> list[tuple[int, int]]:
    if t is None:
        return []
    return to_list(t.left) + [(t.key, t.value)] + to_list(t.right)


def count(t) -> int:
    return 0 if t is None else 1 + count(t.left) + count(t.right)


def is_tree(t) -> bool:
    if t is None:
        return True
    return isinstance(t, Node) and t.color in (R, B) and is_tree(t.left) and is_tree(t.right)


def _ordered(t, lo=None, hi=None) -> bool:
    if t is None:
        return True
    if (lo is not None and t.key <= lo) or (hi is not None and t.key >= hi):
        return False
    return _ordered(t.left, lo, t.key) and _ordered(t.right, t.key, hi)


def _no_red_red(t) -> bool:
    if t is None:
        return True
    if t.color == R and (_red(t.left) or _red(t.right)):
        return False
    return _no_red_red(t.left) and _no_red_red(t.right)


def _black_height(t) -> Optional[int]:
    """Black height if every path agrees, else None."""
    if t is None:
        return 1
    lh, rh = _black_height(t.left), _black_height(t.right)
    if lh is None or rh is None or lh != rh:
        return None
    return lh + (t.color == B)


def is_rbt(t) -> bool:
    return (t is None or t.color == B) and _ordered(t) and _no_red_red(t) and _black_height(t) is not None


# -- annotations --------------------------------------------------------------


def _bespoke_tree(rs, size):
    t = None
    for _ in range(rs.next(size + 1)):
        t = REF.insert(rs.next(size + 1), rs.next(size + 1), t)
    return t


def _typed_tree(rs, size):
    if size <= 0 or rs.next(2) == 0:
        return None
    color = R if rs.next(2) else B
    left = _typed_tree(rs, size - 1)
    k, v = rs.next(size + 1), rs.next(size + 1)
    return Node(color, left, k, v, _typed_tree(rs, size - 1))


BESPOKE_TREE = Gen("rbt", _bespoke_tree)
TYPED_TREE = Gen("rbt", _typed_tree)
KEY = Gen("int", lambda rs, size: rs.next(size + 1))


def mutate_tree(env, t) -> Gen:
    def run(rs, size):
        ks = [k for k, _ in to_list(t)]
        if ks and rs.next(2) == 0:
            return REF.delete(ks[rs.next(len(ks))], t)
        bound = max(size, len(ks)) + 1
        return REF.insert(rs.next(bound), rs.next(bound), t)

    return Gen("rbt", run)


def mutate_typed_tree(env, t) -> Gen:
    def run(rs, size):
        def go(node, depth):
            if node is None or rs.next(3) == 0:
                return _typed_tree(rs, max(1, size - depth))
            pick = rs.next(3)
            if pick == 0:
                return node._replace(color=R if node.color == B else B)
            if pick == 1:
                return node._replace(left=go(node.left, depth + 1))
            return node._replace(right=go(node.right, depth + 1))

        return go(t, 0)

    return Gen("rbt", run)


def shrink_tree(env, t) -> list:
    """Rebuild from a smaller key set; red-black shape is restored by reinsertion."""
    kvs = to_list(t)
    out = []
    if kvs:
        out.append(None)
    for i in range(len(kvs)):
        rest = kvs[:i] + kvs[i + 1:]
        s = None
        for k, v in rest:
            s = REF.insert(k, v, s)
        out.append(s)
    for i, (k, v) in enumerate(kvs):
        for v2 in shrink_int(env, v):
            s = None
            for k3, v3 in kvs[:i] + [(k, v2)] + kvs[i + 1:]:
                s = REF.insert(k3, v3, s)
            out.append(s)
    return out


def show_tree(env, t) -> str:
    if t is None:
        return "E"
    return f"{t.color}({show_tree(env, t.left)} {t.key}:{t.value} {show_tree(env, t.right)})"


def size_of(tag, v) -> int:
    if tag == "rbt":
        return 2 * count(v) + 1
    return 1 + abs(v).bit_length()


def tree_view(t):
    if t is None:
        return ("E", [])
    return ("R" if t.color == R else "B", [t.left, t.right])


def tree_features(t):
    return constructor_pairs(t, tree_view)


def annotations(strategy: str) -> dict:
    if strategy == "bespoke":
        tree = dict(gen=BESPOKE_TREE, mutate=mutate_tree)
    else:
        tree = dict(gen=TYPED_TREE, mutate=mutate_typed_tree)
    tree.update(shrink=shrink_tree, show=show_tree, contract=lambda env, t: is_tree(t))
    key = dict(gen=KEY, mutate=lambda env, k: int_point_mutation(env, k), shrink=shrink_int)
    return {"tree": tree, "key": key}


def _guard(fn):
    # A crash inside the implementation counts as a failed check.
    def pred(env):
        try:
            return fn(env)
        except InvariantBroken:
            return False

    return pred


def build(property_id: str, mutant: str = "none", strategy: str = "bespoke"):
    o = ops(mutant)
    a = annotations(strategy)
    tree, key = a["tree"], a["key"]
    insert, delete = o.insert, o.delete

    def tkv(body):
        return forall("t", implies(lambda e: is_rbt(e["t"]), forall("k", forall("v", body, **key), **key)), **tree)

    def tk(body):
        return forall("t", implies(lambda e: is_rbt(e["t"]), forall("k", body, **key)), **tree)

    if property_id == "insert-valid":
        return tkv(check(_guard(lambda e: is_rbt(insert(e["k"], e["v"], e["t"])))))
    if property_id == "delete-valid":
        return tk(check(_guard(lambda e: is_rbt(delete(e["k"], e["t"])))))
    if property_id == "insert-post":
        return tkv(forall("k2", check(_guard(lambda e: find(e["k2"], insert(e["k"], e["v"], e["t"]))
                                             == (e["v"] if e["k"] == e["k2"] else find(e["k2"], e["t"])))), **key))
    if property_id == "delete-post":
        return tk(forall("k2", check(_guard(lambda e: find(e["k2"], delete(e["k"], e["t"]))
                                            == (None if e["k"] == e["k2"] else find(e["k2"], e["t"])))), **key))
    if property_id == "insert-model":

        def model(e):
            got = to_list(insert(e["k"], e["v"], e["t"]))
            want = sorted([kv for kv in to_list(e["t"]) if kv[0] != e["k"]] + [(e["k"], e["v"])])
            return got == want

        return tkv(check(_guard(model)))
    if property_id == "delete-model":
        return tk(check(_guard(lambda e: to_list(delete(e["k"], e["t"])) == [kv for kv in to_list(e["t"]) if kv[0] != e["k"]])))
    raise ValueError(property_id)


@lru_cache(maxsize=None)
def enumerate_rbts(max_nodes: int, key_range: int) -> tuple:
    """Every valid red-black tree with at most ``max_nodes`` nodes, keys < key_range, values 0."""

    @lru_cache(maxsize=None)
    def shapes(lo, hi, budget):
        out = [None]
        for k in range(lo, hi):
            for lb in range(budget):
                for left in shapes(lo, k, lb):
                    if count(left) != lb:
                        continue
                    for right in shapes(k + 1, hi, budget - 1 - lb):
                        for color in (R, B):
                            out.append(Node(color, left, k, 0, right))
        return tuple(out)

    return tuple(t for t in shapes(0, key_range, max_nodes) if is_rbt(t))


def small_domains(property_id: str) -> dict:
    keys_ = list(range(6))
    return {
        "t": ("rbt", list(enumerate_rbts(5, 6))),
        "k": ("int", keys_),
        "v": ("int", [0, 1]),
        "k2": ("int", keys_),
    }


SOLVABLE = {
    "insert-new-node-black": ("insert-valid",),
    "insert-root-stays-red": ("insert-valid",),
    "balance-recolor-black": ("insert-valid",),
    "balance-rotation-swaps-keys": PROPERTIES,
    "insert-keeps-old-value": ("insert-post", "insert-model"),
    "delete-wrong-direction": ("delete-post", "delete-model"),
    "delete-sub1-noop": ("delete-valid",),
    "balleft-keeps-red": ("delete-valid",),
    "append-drops-right": ("delete-post", "delete-model"),
    "delete-root-stays-red": ("delete-valid",),
}


@register("rbt")
def workload() -> Workload:
    return Workload(
        name="rbt",
        mutants=MUTANTS,
        property_ids=PROPERTIES,
        build=build,
        size_of=size_of,
        small_domains=small_domains,
        solvable=SOLVABLE,
        extractors={"rbt": tree_features},
        feedback=lambda env: sum(count(env[n]) for n in env if env.tags[n] == "rbt"),
    )
