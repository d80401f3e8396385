"""Query scripts: the SLCS core of ImgQL plus `let` macros.

Statements::

    load model = "<path>"
    let name = expr
    let name(p1, ..., pk) = expr
    save "<label>" expr

Expressions use ap("name"), tt, ff, prefix `!`, infix `&` and `|`
(`!` binds tightest, both infix operators associate to the left), the
function forms not/and/or/xor/through/cvnear, and macro calls.
"""

import functools
import logging
from dataclasses import dataclass, field
from importlib import resources

import pyparsing as pp

from .errors import ScriptExpansionError, ScriptSyntaxError
from .formula import FormulaStore

pp.ParserElement.enable_packrat()


@dataclass(frozen=True)
class Ap:
    name: str


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


@dataclass(frozen=True)
class MacroDef:
    name: str
    params: tuple
    body: object
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SaveEntry:
    label: str
    body: object
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class LoadStatement:
    path: str
    line: int = field(default=0, compare=False)


@dataclass
class Script:
    model_path: str = None
    definitions: dict = field(default_factory=dict)
    saves: list = field(default_factory=list)


def _fold_left(name):
    def action(tokens):
        items = tokens[0]
        result = items[0]
        for operand in items[2::2]:
            result = Call(name, (result, operand))
        return result
    return action


def _build_grammar():
    LPAR, RPAR, EQ = map(pp.Suppress, "()=")
    LET, SAVE, LOAD, MODEL = (pp.Keyword(k) for k in ("let", "save", "load", "model"))
    TT, FF, AP = pp.Keyword("tt"), pp.Keyword("ff"), pp.Keyword("ap")

    string = pp.QuotedString('"', esc_char="\\")
    ident = ~(LET | SAVE | LOAD | TT | FF | AP) + pp.Word(pp.alphas + "_", pp.alphanums + "_")

    expr = pp.Forward()
    ap_call = (pp.Suppress(AP) + LPAR + string + RPAR).set_parse_action(lambda t: Ap(t[0]))
    truth = TT.copy().set_parse_action(lambda: Const(True)) | FF.copy().set_parse_action(lambda: Const(False))
    call = (ident + LPAR + pp.Group(pp.DelimitedList(expr)) + RPAR).set_parse_action(
        lambda t: Call(t[0], tuple(t[1]))
    )
    ref = ident.copy().set_parse_action(lambda t: Ref(t[0]))
    operand = ap_call | truth | call | ref

    expr <<= pp.infix_notation(operand, [
        (pp.Literal("!"), 1, pp.OpAssoc.RIGHT, lambda t: Call("not", (t[0][1],))),
        (pp.Literal("&"), 2, pp.OpAssoc.LEFT, _fold_left("and")),
        (pp.Literal("|"), 2, pp.OpAssoc.LEFT, _fold_left("or")),
    ])

    def located(build):
        return lambda s, loc, t: build(t, pp.lineno(loc, s))

    load_stmt = (pp.Suppress(LOAD) - pp.Suppress(MODEL) - EQ - string).set_parse_action(
        located(lambda t, line: LoadStatement(t[0], line))
    )
    params = LPAR - pp.Group(pp.DelimitedList(ident)) - RPAR
    let_stmt = (pp.Suppress(LET) - ident - pp.Optional(params, default=[]) - EQ - expr).set_parse_action(
        located(lambda t, line: MacroDef(t[0], tuple(t[1]), t[2], line))
    )
    save_stmt = (pp.Suppress(SAVE) - string - expr).set_parse_action(
        located(lambda t, line: SaveEntry(t[0], t[1], line))
    )

    script = pp.ZeroOrMore(load_stmt | let_stmt | save_stmt) + pp.StringEnd()
    script.ignore(pp.dbl_slash_comment)
    return script


_GRAMMAR = _build_grammar()


def parse_script(text, source="<script>"):
    try:
        statements = _GRAMMAR.parse_string(text, parse_all=True)
    except pp.ParseBaseException as e:
        raise ScriptSyntaxError(f"{source}: {e.msg}", e.lineno, e.col) from None

    script = Script()
    for stmt in statements:
        if isinstance(stmt, LoadStatement):
            if script.model_path is not None:
                raise ScriptSyntaxError(f"{source}: more than one load statement", stmt.line, 1)
            script.model_path = stmt.path
        elif isinstance(stmt, MacroDef):
            if stmt.name in script.definitions:
                raise ScriptSyntaxError(f"{source}: duplicate definition of '{stmt.name}'", stmt.line, 1)
            if len(set(stmt.params)) != len(stmt.params):
                raise ScriptSyntaxError(f"{source}: repeated parameter in '{stmt.name}'", stmt.line, 1)
            script.definitions[stmt.name] = stmt
        else:
            script.saves.append(stmt)
    logging.debug(f"Parsed {source}: {len(script.definitions)} definitions, {len(script.saves)} saves")
    return script


def format_expr(expr):
    if isinstance(expr, Ap):
        return f'ap("{_escape(expr.name)}")'
    if isinstance(expr, Const):
        return "tt" if expr.value else "ff"
    if isinstance(expr, Ref):
        return expr.name
    return f"{expr.name}({', '.join(format_expr(a) for a in expr.args)})"


def _escape(text):
    return text.replace("\\", "\\\\").replace('"', '\\"')


def format_script(script):
    lines = []
    if script.model_path is not None:
        lines.append(f'load model = "{_escape(script.model_path)}"')
    for d in script.definitions.values():
        head = f"{d.name}({', '.join(d.params)})" if d.params else d.name
        lines.append(f"let {head} = {format_expr(d.body)}")
    for s in script.saves:
        lines.append(f'save "{_escape(s.label)}" {format_expr(s.body)}')
    return "\n".join(lines) + "\n"


@functools.lru_cache(maxsize=1)
def load_prelude():
    """The bundled derived operators (reach, eta, closure, near, grow, sur, ...)."""
    text = resources.files("polycheck").joinpath("prelude.imgql").read_text(encoding="utf-8")
    return parse_script(text, source="prelude")


class _Expander:
    BUILTINS = {"not": 1, "and": 2, "or": 2, "xor": 2, "through": 2, "cvnear": 1}

    def __init__(self, definitions, store):
        self.definitions = definitions
        self.store = store
        self.memo = {}

    def build_builtin(self, name, args):
        s = self.store
        return {
            "not": lambda: s.not_(args[0]),
            "and": lambda: s.and_(args[0], args[1]),
            "or": lambda: s.or_(args[0], args[1]),
            "xor": lambda: s.xor(args[0], args[1]),
            "through": lambda: s.gamma(args[0], args[1]),
            "cvnear": lambda: s.cvnear(args[0]),
        }[name]()

    def macro(self, name, args, context):
        d = self.definitions[name]
        if len(args) != len(d.params):
            raise ScriptExpansionError(
                f"{context}: '{name}' expects {len(d.params)} argument(s), got {len(args)}"
            )
        key = (name, tuple(a.uid for a in args))
        if key not in self.memo:
            env = dict(zip(d.params, args))
            self.memo[key] = self.expr(d.body, env, f"{context} -> {name}")
        return self.memo[key]

    def expr(self, e, env, context):
        if isinstance(e, Ap):
            return self.store.atom(e.name)
        if isinstance(e, Const):
            return self.store.top() if e.value else self.store.bottom()
        if isinstance(e, Ref):
            if e.name in env:
                return env[e.name]
            if e.name in self.definitions:
                return self.macro(e.name, (), context)
            if e.name in self.BUILTINS:
                raise ScriptExpansionError(
                    f"{context}: '{e.name}' expects {self.BUILTINS[e.name]} argument(s), got 0"
                )
            raise ScriptExpansionError(f"{context}: unknown identifier '{e.name}'")
        if e.name in env:
            raise ScriptExpansionError(f"{context}: parameter '{e.name}' cannot be called")
        args = tuple(self.expr(a, env, context) for a in e.args)
        if e.name in self.definitions:
            return self.macro(e.name, args, context)
        if e.name in self.BUILTINS:
            if len(args) != self.BUILTINS[e.name]:
                raise ScriptExpansionError(
                    f"{context}: '{e.name}' expects {self.BUILTINS[e.name]} argument(s), got {len(args)}"
                )
            return self.build_builtin(e.name, args)
        raise ScriptExpansionError(f"{context}: unknown identifier '{e.name}'")


def _references(expr, params, out):
    if isinstance(expr, Ref):
        if expr.name not in params:
            out.add(expr.name)
    elif isinstance(expr, Call):
        if expr.name not in params:
            out.add(expr.name)
        for a in expr.args:
            _references(a, params, out)
    return out


def _check_acyclic(definitions):
    graph = {
        name: sorted(r for r in _references(d.body, set(d.params), set()) if r in definitions)
        for name, d in definitions.items()
    }
    state = {}

    def visit(name, path):
        state[name] = "open"
        for dep in graph[name]:
            if state.get(dep) == "open":
                cycle = path[path.index(dep):] + [dep]
                raise ScriptExpansionError(f"recursive macro: {' -> '.join(cycle)}")
            if dep not in state:
                visit(dep, path + [dep])
        state[name] = "done"

    for name in graph:
        if name not in state:
            visit(name, [name])


def expand(script, prelude=None, store=None):
    """Expand every save entry into a closed formula.

    Returns (model_path, [(label, Formula), ...]) in script order. A label
    saved twice keeps its first position and its last formula.
    """
    store = store or FormulaStore()
    definitions = {}
    if prelude is not None:
        definitions.update(prelude.definitions)
    for name, d in script.definitions.items():
        if name in definitions:
            logging.warning(f"Definition of '{name}' at line {d.line} shadows the prelude")
        if name in _Expander.BUILTINS:
            logging.warning(f"Definition of '{name}' at line {d.line} shadows the builtin operator")
        definitions[name] = d
    _check_acyclic(definitions)

    expander = _Expander(definitions, store)
    saves = {}
    for entry in script.saves:
        formula = expander.expr(entry.body, {}, f'save "{entry.label}" (line {entry.line})')
        if entry.label in saves:
            logging.warning(f'Save label "{entry.label}" repeated at line {entry.line}; the later formula wins')
        saves[entry.label] = formula
    logging.info(f"Expanded {len(saves)} save entries into {len(store)} formula nodes")
    return script.model_path, list(saves.items())
