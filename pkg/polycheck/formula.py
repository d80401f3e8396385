"""Hash-consed SLCS formula DAG.

Every node is created through a FormulaStore, which returns the existing node
for a structurally identical request. Within one store, structural equality
and identity coincide, so nodes hash and compare by identity.
"""

import enum
import threading


class Kind(enum.Enum):
    ATOM = "ap"
    TOP = "tt"
    BOTTOM = "ff"
    NOT = "not"
    AND = "and"
    OR = "or"
    XOR = "xor"
    GAMMA = "through"
    CVNEAR = "cvnear"


ARITY = {
    Kind.ATOM: 0, Kind.TOP: 0, Kind.BOTTOM: 0,
    Kind.NOT: 1, Kind.CVNEAR: 1,
    Kind.AND: 2, Kind.OR: 2, Kind.XOR: 2, Kind.GAMMA: 2,
}


class Formula:
    __slots__ = ("kind", "children", "name", "uid", "__weakref__")

    def __init__(self, kind, children, name, uid):
        self.kind = kind
        self.children = children
        self.name = name
        self.uid = uid

    def __repr__(self):
        return f"Formula#{self.uid}<{self}>"

    def __str__(self):
        if self.kind is Kind.ATOM:
            return f'ap("{self.name}")'
        if self.kind in (Kind.TOP, Kind.BOTTOM):
            return self.kind.value
        return f"{self.kind.value}({', '.join(str(c) for c in self.children)})"


class FormulaStore:
    """Interning table for formula nodes."""

    def __init__(self):
        self._nodes = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._nodes)

    def make(self, kind, children=(), name=None):
        children = tuple(children)
        if len(children) != ARITY[kind]:
            raise ValueError(f"{kind.value} takes {ARITY[kind]} argument(s), got {len(children)}")
        key = (kind, name, tuple(c.uid for c in children))
        with self._lock:
            node = self._nodes.get(key)
            if node is None:
                node = Formula(kind, children, name, len(self._nodes))
                self._nodes[key] = node
        return node

    def atom(self, name):
        return self.make(Kind.ATOM, name=name)

    def top(self):
        return self.make(Kind.TOP)

    def bottom(self):
        return self.make(Kind.BOTTOM)

    def not_(self, f):
        return self.make(Kind.NOT, (f,))

    def and_(self, f, g):
        return self.make(Kind.AND, (f, g))

    def or_(self, f, g):
        return self.make(Kind.OR, (f, g))

    def xor(self, f, g):
        return self.make(Kind.XOR, (f, g))

    def gamma(self, f, g):
        return self.make(Kind.GAMMA, (f, g))

    def cvnear(self, f):
        return self.make(Kind.CVNEAR, (f,))

    # Surface operators that lower onto the core.
    def near(self, f):
        return self.gamma(f, self.top())

    def eta(self, f, g):
        return self.and_(f, self.gamma(f, g))


def iter_nodes(formula):
    """Distinct nodes reachable from formula, children before parents."""
    seen = set()
    order = []
    stack = [(formula, False)]
    while stack:
        node, expanded = stack.pop()
        if node.uid in seen:
            continue
        if expanded:
            seen.add(node.uid)
            order.append(node)
            continue
        stack.append((node, True))
        for child in reversed(node.children):
            if child.uid not in seen:
                stack.append((child, False))
    return order


def node_count(formula):
    return len(iter_nodes(formula))


def atoms_of(formula):
    return sorted({n.name for n in iter_nodes(formula) if n.kind is Kind.ATOM})
