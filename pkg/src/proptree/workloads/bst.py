"""Binary search trees as persistent key/value maps."""

from __future__ import annotations

from functools import lru_cache
from types import SimpleNamespace
from typing import NamedTuple, Optional

from ..core import check, forall, implies
from ..rand import Gen, int_point_mutation, shrink_int
from ..runners.combinatorial import constructor_pairs
from ..runners.feedback import trace
from . import Workload, register


class Node(NamedTuple):
    left: Optional["Node"]
    key: int
    value: int
    right: Optional["Node"]


MUTANTS = (
    "insert-drops-tree",
    "insert-keeps-old-value",
    "insert-duplicates-left",
    "delete-ignores-right",
    "delete-drops-right",
    "delete-join-swapped",
    "union-prefers-right",
    "union-split-drops-left",
    "union-crosses-subtrees",
)

PROPERTIES = (
    "insert-valid",
    "delete-valid",
    "union-valid",
    "insert-post",
    "delete-post",
    "union-post",
    "insert-model",
    "delete-model",
    "union-model",
)


def ops(mutant: str = "none") -> SimpleNamespace:
    """The map operations with ``mutant``'s bug switched in."""

    def insert(k, v, t):
        if t is None:
            trace("ins-leaf")
            return Node(None, k, v, None)
        if mutant == "insert-drops-tree":
            return Node(None, k, v, None)
        if k < t.key:
            trace("ins-left")
            return Node(insert(k, v, t.left), t.key, t.value, t.right)
        if k > t.key:
            trace("ins-right")
            return Node(t.left, t.key, t.value, insert(k, v, t.right))
        trace("ins-eq")
        if mutant == "insert-keeps-old-value":
            return t
        if mutant == "insert-duplicates-left":
            return Node(insert(k, v, t.left), t.key, t.value, t.right)
        return Node(t.left, k, v, t.right)

    def join(l, r):
        if l is None:
            return r
        if r is None:
            return l
        trace("join")
        return Node(l.left, l.key, l.value, Node(join(l.right, r.left), r.key, r.value, r.right))

    def delete(k, t):
        if t is None:
            trace("del-leaf")
            return None
        if k < t.key:
            trace("del-left")
            return Node(delete(k, t.left), t.key, t.value, t.right)
        if k > t.key:
            trace("del-right")
            if mutant == "delete-ignores-right":
                return t
            return Node(t.left, t.key, t.value, delete(k, t.right))
        trace("del-eq")
        if mutant == "delete-drops-right":
            return t.left
        if mutant == "delete-join-swapped":
            return join(t.right, t.left)
        return join(t.left, t.right)

    def split(k, t):
        if t is None:
            return None, None, None
        if k < t.key:
            trace("split-left")
            ll, m, lr = split(k, t.left)
            return ll, m, Node(lr, t.key, t.value, t.right)
        if k > t.key:
            trace("split-right")
            rl, m, rr = split(k, t.right)
            if mutant == "union-split-drops-left":
                return rl, m, rr
            return Node(t.left, t.key, t.value, rl), m, rr
        trace("split-eq")
        return t.left, t.value, t.right

    def union(l, r):
        if l is None:
            return r
        if r is None:
            return l
        trace("union")
        rl, m, rr = split(l.key, r)
        v = m if mutant == "union-prefers-right" and m is not None else l.value
        if mutant == "union-crosses-subtrees":
            return Node(union(l.left, rr), l.key, v, union(l.right, rl))
        return Node(union(l.left, rl), l.key, v, union(l.right, rr))

    return SimpleNamespace(insert=insert, delete=delete, union=union, find=find)


def find(k, t):
    while t is not None:
        if k < t.key:
            t = t.left
        elif k > t.key:
            t = t.right
        else:
            return t.value
    return None


REF = ops("none")


def is_bst(t, lo=None, hi=None) -> bool:
    if t is None:
        return True
    if (lo is not None and t.key <= lo) or (hi is not None and t.key >= hi):
        return False
    return is_bst(t.left, lo, t.key) and is_bst(t.right, t.key, hi)


def is_tree(t) -> bool:
    if t is None:
        return True
    return isinstance(t, Node) and isinstance(t.key, int) and isinstance(t.value, int) and is_tree(t.left) and is_tree(t.right)


def to_list(t) -> list[tuple[int, int]]:
    out = []
    stack = []
    while stack or t is not None:
        while t is not None:
            stack.append(t)
            t = t.left
        t = stack.pop()
        out.append((t.key, t.value))
        t = t.right
    return out


def keys(t) -> list[int]:
    return [k for k, _ in to_list(t)]


def count(t) -> int:
    return 0 if t is None else 1 + count(t.left) + count(t.right)


def height(t) -> int:
    return 0 if t is None else 1 + max(height(t.left), height(t.right))


# -- list models ---------------------------------------------------------------


def model_insert(k, v, kvs):
    return sorted([(k2, v2) for k2, v2 in kvs if k2 != k] + [(k, v)])


def model_delete(k, kvs):
    return [(k2, v2) for k2, v2 in kvs if k2 != k]


def model_union(a, b):
    seen = {k for k, _ in a}
    return sorted(a + [(k, v) for k, v in b if k not in seen])


# -- generators, mutators, shrinkers, printers --------------------------------


def _bespoke_tree(rs, size):
    t = None
    for _ in range(rs.next(size + 1)):
        t = REF.insert(rs.next(size + 1), rs.next(size + 1), t)
    return t


def _typed_tree(rs, size):
    # depth-bounded random shape, keys unconstrained: often not a search tree
    if size <= 0 or rs.next(2) == 0:
        return None
    left = _typed_tree(rs, size - 1)
    k, v = rs.next(size + 1), rs.next(size + 1)
    return Node(left, k, v, _typed_tree(rs, size - 1))


BESPOKE_TREE = Gen("tree", _bespoke_tree)
TYPED_TREE = Gen("tree", _typed_tree)
KEY = Gen("int", lambda rs, size: rs.next(size + 1))


def mutate_tree(env, t) -> Gen:
    """Insert a fresh binding or remove an existing key, keeping the search-tree shape."""

    def run(rs, size):
        ks = keys(t)
        if ks and rs.next(2) == 0:
            return REF.delete(ks[rs.next(len(ks))], t)
        bound = max(size, len(ks)) + 1
        return REF.insert(rs.next(bound), rs.next(bound), t)

    return Gen("tree", run)


def mutate_typed_tree(env, t) -> Gen:
    """Regrow a random subtree."""

    def run(rs, size):
        def go(node, depth):
            if node is None or rs.next(3) == 0:
                return _typed_tree(rs, max(1, size - depth))
            if rs.next(2) == 0:
                return node._replace(left=go(node.left, depth + 1))
            return node._replace(right=go(node.right, depth + 1))

        return go(t, 0)

    return Gen("tree", run)


def mutate_key(env, k) -> Gen:
    return int_point_mutation(env, k)


def shrink_tree(env, t) -> list:
    """Replace any subtree by one of its children, delete one key, or shrink a key or value."""
    out = [REF.delete(k, t) for k in keys(t)]

    def go(node, rebuild):
        if node is None:
            return
        out.append(rebuild(node.left))
        out.append(rebuild(node.right))
        for v in shrink_int(env, node.value):
            out.append(rebuild(node._replace(value=v)))
        for k in shrink_int(env, node.key):
            cand = rebuild(node._replace(key=k))
            if is_bst(cand):
                out.append(cand)
        go(node.left, lambda s, n=node: rebuild(n._replace(left=s)))
        go(node.right, lambda s, n=node: rebuild(n._replace(right=s)))

    go(t, lambda s: s)
    return out


def show_tree(env, t) -> str:
    if t is None:
        return "E"
    return f"T({show_tree(env, t.left)} {t.key}:{t.value} {show_tree(env, t.right)})"


def size_of(tag, v) -> int:
    if tag == "tree":
        return 2 * count(v) + 1
    return 1 + abs(v).bit_length()


def tree_view(t):
    return ("E", []) if t is None else ("T", [t.left, t.right])


def tree_features(t):
    return constructor_pairs(t, tree_view)


def annotations(strategy: str) -> dict:
    if strategy == "bespoke":
        tree = dict(gen=BESPOKE_TREE, mutate=mutate_tree)
    else:
        tree = dict(gen=TYPED_TREE, mutate=mutate_typed_tree)
    tree.update(shrink=shrink_tree, show=show_tree, contract=lambda env, t: is_tree(t))
    key = dict(gen=KEY, mutate=mutate_key, shrink=shrink_int)
    return {"tree": tree, "key": key}


def _valid(name):
    return lambda env: is_bst(env[name])


def build(property_id: str, mutant: str = "none", strategy: str = "bespoke"):
    o = ops(mutant)
    a = annotations(strategy)
    tree, key = a["tree"], a["key"]
    insert, delete, union = o.insert, o.delete, o.union

    def tkv(body):
        return forall("t", implies(_valid("t"), forall("k", forall("v", body, **key), **key)), **tree)

    def tk(body):
        return forall("t", implies(_valid("t"), forall("k", body, **key)), **tree)

    def tt(body):
        return forall("t1", implies(_valid("t1"), forall("t2", implies(_valid("t2"), body), **tree)), **tree)

    if property_id == "insert-valid":
        return tkv(check(lambda e: is_bst(insert(e["k"], e["v"], e["t"]))))
    if property_id == "delete-valid":
        return tk(check(lambda e: is_bst(delete(e["k"], e["t"]))))
    if property_id == "union-valid":
        return tt(check(lambda e: is_bst(union(e["t1"], e["t2"]))))
    if property_id == "insert-post":
        return tkv(forall("k2", check(lambda e: find(e["k2"], insert(e["k"], e["v"], e["t"]))
                                      == (e["v"] if e["k"] == e["k2"] else find(e["k2"], e["t"]))), **key))
    if property_id == "delete-post":
        return tk(forall("k2", check(lambda e: find(e["k2"], delete(e["k"], e["t"]))
                                     == (None if e["k"] == e["k2"] else find(e["k2"], e["t"]))), **key))
    if property_id == "union-post":

        def post(e):
            got = find(e["k"], union(e["t1"], e["t2"]))
            left = find(e["k"], e["t1"])
            return got == (left if left is not None else find(e["k"], e["t2"]))

        return tt(forall("k", check(post), **key))
    if property_id == "insert-model":
        return tkv(check(lambda e: to_list(insert(e["k"], e["v"], e["t"])) == model_insert(e["k"], e["v"], to_list(e["t"]))))
    if property_id == "delete-model":
        return tk(check(lambda e: to_list(delete(e["k"], e["t"])) == model_delete(e["k"], to_list(e["t"]))))
    if property_id == "union-model":
        return tt(check(lambda e: to_list(union(e["t1"], e["t2"])) == model_union(to_list(e["t1"]), to_list(e["t2"]))))
    raise ValueError(property_id)


@lru_cache(maxsize=None)
def enumerate_bsts(max_nodes: int, key_range: int, value_range: int) -> tuple:
    """Every search tree with at most ``max_nodes`` nodes, keys < key_range, values < value_range."""

    @lru_cache(maxsize=None)
    def go(lo, hi, budget):
        out = [None]
        if budget == 0:
            return tuple(out)
        for k in range(lo, hi):
            for lb in range(budget):
                for left in go(lo, k, lb):
                    if count(left) != lb:
                        continue
                    for right in go(k + 1, hi, budget - 1 - lb):
                        for v in range(value_range):
                            out.append(Node(left, k, v, right))
        return tuple(out)

    return go(0, key_range, max_nodes)


def small_domains(property_id: str) -> dict:
    keys_ = list(range(4))
    if property_id.startswith("union"):
        trees = list(enumerate_bsts(2, 4, 2))
        doms = {"t1": ("tree", trees), "t2": ("tree", trees)}
        if property_id == "union-post":
            doms["k"] = ("int", keys_)
        return doms
    trees = list(enumerate_bsts(3, 4, 2))
    doms = {"t": ("tree", trees), "k": ("int", keys_), "v": ("int", [0, 1]), "k2": ("int", keys_)}
    return doms


# Mutant -> properties that kill it within the small domains above; rebuilt
# and compared by the test suite.
SOLVABLE = {
    "insert-drops-tree": ("insert-post", "insert-model"),
    "insert-keeps-old-value": ("insert-post", "insert-model"),
    "insert-duplicates-left": ("insert-valid", "insert-post", "insert-model"),
    "delete-ignores-right": ("delete-post", "delete-model"),
    "delete-drops-right": ("delete-post", "delete-model"),
    "delete-join-swapped": ("delete-valid", "delete-post", "delete-model"),
    "union-prefers-right": ("union-post", "union-model"),
    "union-split-drops-left": ("union-post", "union-model"),
    "union-crosses-subtrees": ("union-valid", "union-post", "union-model"),
}


@register("bst")
def workload() -> Workload:
    return Workload(
        name="bst",
        mutants=MUTANTS,
        property_ids=PROPERTIES,
        build=build,
        size_of=size_of,
        small_domains=small_domains,
        solvable=SOLVABLE,
        extractors={"tree": tree_features},
        feedback=lambda env: sum(count(env[n]) for n in env if env.tags[n] == "tree"),
    )
