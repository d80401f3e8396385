"""Global model checking of SLCS formulas on a frame.

Every operator maps a whole satisfaction vector to another one, so a formula
is checked for all cells at once by walking its DAG bottom-up.
"""

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import PolyCheckError, UnknownAtomError
from .formula import Kind
from .lang import Script, expand, load_prelude, parse_script
from .model import build_poset, model_digest, read_model
from .utils import resolve_workers


def _frozen(vector):
    vector.flags.writeable = False
    return vector


def sat_gamma(frame, s1, s2):
    """Cells w with a path w R u ... f, f R^-1 b: u..f in s1, b in s2.

    The intermediate stretch may move along R in either direction, so it is
    a connected component of the undirected R-graph restricted to s1.
    """
    s1 = frame.check_size(s1)
    s2 = frame.check_size(s2)
    targets = s1 & frame.up_set(s2)
    if not targets.any():
        return frame.empty()

    members = np.flatnonzero(s1)
    local = np.full(frame.cell_count, -1, dtype=np.int64)
    local[members] = np.arange(len(members))
    inside = s1[frame.lower] & s1[frame.upper]
    rows = local[frame.lower[inside]]
    cols = local[frame.upper[inside]]
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)),
                       shape=(len(members), len(members)))
    _, labels = connected_components(graph, directed=False)

    marked = np.zeros(labels.max() + 1, dtype=bool)
    marked[labels[targets[members]]] = True
    reached = frame.empty()
    reached[members[marked[labels]]] = True
    return frame.down_set(reached)


def sat_near(frame, s):
    return frame.down_set(s)


def sat_cvnear(frame, s):
    return frame.up_set(s)


def sat_eta(frame, s1, s2):
    s1 = frame.check_size(s1)
    return s1 & sat_gamma(frame, s1, s2)


class EvalCache:
    """Satisfaction vectors shared across formulas, keyed by node identity.

    Concurrent duplicate computation is harmless; the first stored vector is
    kept and returned to every caller.
    """

    def __init__(self):
        self._vectors = {}
        self._lock = threading.Lock()
        self.hits = 0

    def __len__(self):
        return len(self._vectors)

    def get(self, node):
        with self._lock:
            vector = self._vectors.get(node)
            if vector is not None:
                self.hits += 1
        return vector

    def put(self, node, vector):
        with self._lock:
            return self._vectors.setdefault(node, _frozen(vector))

    def clear(self):
        with self._lock:
            self._vectors.clear()


def _apply(frame, node, args):
    kind = node.kind
    if kind is Kind.ATOM:
        return frame.atom(node.name)
    if kind is Kind.TOP:
        return frame.full()
    if kind is Kind.BOTTOM:
        return frame.empty()
    if kind is Kind.NOT:
        return ~args[0]
    if kind is Kind.AND:
        return args[0] & args[1]
    if kind is Kind.OR:
        return args[0] | args[1]
    if kind is Kind.XOR:
        return args[0] ^ args[1]
    if kind is Kind.GAMMA:
        return sat_gamma(frame, args[0], args[1])
    if kind is Kind.CVNEAR:
        return sat_cvnear(frame, args[0])
    raise ValueError(f"unsupported formula kind {kind}")


def sat(frame, formula, cache=None):
    """Satisfaction vector of formula; the result is read-only."""
    local = {}
    stack = [formula]
    while stack:
        node = stack[-1]
        if node in local:
            stack.pop()
            continue
        cached = cache.get(node) if cache is not None else None
        if cached is not None:
            local[node] = cached
            stack.pop()
            continue
        pending = [c for c in node.children if c not in local]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        value = _apply(frame, node, [local[c] for c in node.children])
        if cache is not None:
            local[node] = cache.put(node, value)
        elif value.flags.writeable:
            local[node] = _frozen(value)
        else:
            local[node] = value
    return local[formula]


def check_formulas(frame, saves, workers=1, cache=None):
    """Check labelled formulas; returns {label: vector} in input order."""
    cache = EvalCache() if cache is None else cache

    def run(entry):
        label, formula = entry
        try:
            return sat(frame, formula, cache)
        except UnknownAtomError as e:
            raise e.for_label(label) from None

    if workers <= 1 or len(saves) <= 1:
        vectors = [run(entry) for entry in saves]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            vectors = list(executor.map(run, saves))
    return {label: vector for (label, _), vector in zip(saves, vectors)}


@dataclass
class CheckReport:
    labels: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    cell_count: int = 0
    model_digest: str = None

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, label):
        return self.results[label]

    def items(self):
        return [(label, self.results[label]) for label in self.labels]


def _elapsed_ms(start):
    return (time.perf_counter() - start) * 1000.0


def check_script(model_path, script, workers="auto", prelude=True, cache=None, model=None):
    """Parse, load and check; `script` is query text or a parsed Script.

    model_path overrides the script's own load statement. An already parsed
    PolyhedralModelFile may be passed as `model` to skip reading.
    """
    start = time.perf_counter()
    parsed = script if isinstance(script, Script) else parse_script(script)
    script_model, saves = expand(parsed, prelude=load_prelude() if prelude else None)
    parse_ms = _elapsed_ms(start)

    start = time.perf_counter()
    if model is None:
        path = model_path or script_model
        if path is None:
            raise PolyCheckError("no model given and the script has no load statement")
        model = read_model(path)
    poset = build_poset(model)
    load_ms = _elapsed_ms(start)

    start = time.perf_counter()
    n_workers = resolve_workers(workers, poset.cell_count, len(saves))
    try:
        results = check_formulas(poset, saves, workers=n_workers, cache=cache)
    except UnknownAtomError as e:
        logging.error(f"Check failed: {e}")
        raise
    check_ms = _elapsed_ms(start)

    logging.info(f"Checked {len(saves)} save entries on {poset.cell_count} cells "
                 f"with {n_workers} worker(s) in {check_ms:.1f} ms")
    return CheckReport(
        labels=list(results),
        results=results,
        timings={"parse": parse_ms, "load": load_ms, "check": check_ms},
        cell_count=poset.cell_count,
        model_digest=model_digest(model),
    )
