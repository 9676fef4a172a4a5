"""Typed STRIPS domains and problems: literals, operators, parsing, grounding.

Concrete syntax (s-expressions)::

    (domain NAME
      (:types T1 T2 ...)
      (:operator NAME
        (:params (?v T) ...)
        (:pre LIT ...) (:add ATOM ...) (:del ATOM ...)))

    (problem NAME (:domain NAME) (:objects (c T) ...)
      (:init ATOM ...) (:goal LIT ...))

``LIT`` is ``(pred args...)`` or ``(not (pred args...))``. Variables start
with ``?``; any other argument token is a constant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

__all__ = [
    "Atom",
    "Literal",
    "State",
    "OperatorSchema",
    "GroundOperator",
    "Domain",
    "Problem",
    "ParseError",
    "Grounder",
    "parse_domain",
    "parse_problem",
    "parse_plan",
    "format_domain",
    "format_problem",
    "format_plan",
    "satisfies",
    "satisfies_all",
    "apply_effects",
    "relevant_operators",
]


class Atom(NamedTuple):
    predicate: str
    args: tuple = ()

    def __str__(self):
        return "(" + " ".join((self.predicate,) + tuple(self.args)) + ")"


class Literal(NamedTuple):
    atom: Atom
    positive: bool = True

    @classmethod
    def of(cls, predicate, *args, positive=True):
        return cls(Atom(predicate, tuple(args)), positive)

    def negate(self):
        return Literal(self.atom, not self.positive)

    def __str__(self):
        return str(self.atom) if self.positive else f"(not {self.atom})"


# A state is an immutable set of ground atoms; closed-world semantics.
State = frozenset


def satisfies(state, literal):
    return (literal.atom in state) == literal.positive


def satisfies_all(state, literals):
    for lit in literals:
        if (lit.atom in state) != lit.positive:
            return False
    return True


class ParseError(ValueError):
    """Malformed domain, problem or plan text."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class OperatorSchema:
    name: str
    params: tuple  # ((var, type), ...)
    pre: tuple  # literal templates
    add: tuple  # atom templates
    dele: tuple  # atom templates
    index: int = 0  # position in the domain file

    @property
    def variables(self):
        return tuple(v for v, _ in self.params)

    def ground(self, binding):
        """Instantiate with ``binding`` (variable -> constant), which must cover every param."""
        args = tuple(binding[v] for v, _ in self.params)

        def sub(atom):
            return Atom(atom.predicate, tuple(binding.get(a, a) for a in atom.args))

        return GroundOperator(
            name=self.name,
            args=args,
            pre=tuple(Literal(sub(l.atom), l.positive) for l in self.pre),
            add=frozenset(sub(a) for a in self.add),
            dele=frozenset(sub(a) for a in self.dele),
            index=self.index,
        )


class GroundOperator:
    """A fully instantiated operator. Identity is (schema name, arguments)."""

    __slots__ = ("name", "args", "pre", "pre_set", "pos_pre", "add", "dele", "index", "_key", "_hash")

    def __init__(self, name, args, pre, add, dele, index=0):
        self.name = name
        self.args = tuple(args)
        self.pre = tuple(dict.fromkeys(pre))
        self.pre_set = frozenset(self.pre)
        self.pos_pre = frozenset(p.atom for p in self.pre if p.positive)
        self.add = frozenset(add)
        self.dele = frozenset(dele)
        self.index = index
        self._key = (name, self.args)
        self._hash = hash(self._key)

    @property
    def key(self):
        return self._key

    @property
    def sort_key(self):
        return (self.index, self.args)

    def __eq__(self, other):
        return isinstance(other, GroundOperator) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.sort_key < other.sort_key

    def __str__(self):
        return f"{self.name}({','.join(self.args)})"

    def __repr__(self):
        return f"GroundOperator({self})"


@dataclass(frozen=True)
class Domain:
    name: str
    types: tuple = ()
    schemas: tuple = ()

    def schema(self, name):
        for s in self.schemas:
            if s.name == name:
                return s
        raise KeyError(name)

    def arities(self):
        """Map predicate -> arity over every template in the domain."""
        out = {}
        for s in self.schemas:
            for atom in itertools.chain((l.atom for l in s.pre), s.add, s.dele):
                out.setdefault(atom.predicate, len(atom.args))
        return out


@dataclass(frozen=True)
class Problem:
    name: str
    domain: str
    objects: tuple  # ((constant, type), ...)
    init: frozenset
    goal: tuple  # ground literals in statement order, duplicates removed

    def objects_of(self, type_):
        return tuple(sorted(c for c, t in self.objects if t == type_))

    def type_of(self, constant):
        for c, t in self.objects:
            if c == constant:
                return t
        return None


# ---------------------------------------------------------------- s-expressions


class _Tok(NamedTuple):
    text: str
    line: int
    col: int


def _tokenize(text):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "()":
            yield _Tok(ch, line, col)
            i, col = i + 1, col + 1
            continue
        start, scol = i, col
        while i < n and not text[i].isspace() and text[i] not in "();":
            i, col = i + 1, col + 1
        yield _Tok(text[start:i], line, scol)


class _List(list):
    """Parsed list carrying the position of its opening parenthesis."""

    line = 0
    col = 0


def _read(text):
    stack = []
    result = []
    for tok in _tokenize(text):
        if tok.text == "(":
            lst = _List()
            lst.line, lst.col = tok.line, tok.col
            stack.append(lst)
        elif tok.text == ")":
            if not stack:
                raise ParseError("unbalanced ')'", tok.line, tok.col)
            lst = stack.pop()
            (stack[-1] if stack else result).append(lst)
        else:
            (stack[-1] if stack else result).append(tok)
    if stack:
        raise ParseError("unclosed '('", stack[-1].line, stack[-1].col)
    if len(result) != 1 or not isinstance(result[0], _List):
        pos = result[1] if len(result) > 1 else None
        raise ParseError(
            "expected exactly one top-level form",
            getattr(pos, "line", 1),
            getattr(pos, "col", 1),
        )
    return result[0]


def _pos(node):
    return node.line, node.col


def _sym(node, what):
    if isinstance(node, _List):
        raise ParseError(f"expected {what}, got a list", *_pos(node))
    return node.text


def _expect_head(node, head):
    if not isinstance(node, _List) or not node or _sym(node[0], "keyword") != head:
        line, col = _pos(node) if isinstance(node, _List) else (node.line, node.col)
        raise ParseError(f"expected ({head} ...)", line, col)


def _atom(node, allow_vars=True):
    if not isinstance(node, _List) or not node:
        line, col = _pos(node) if isinstance(node, _List) else (node.line, node.col)
        raise ParseError("expected an atom (pred args...)", line, col)
    pred = _sym(node[0], "predicate name")
    if pred == "not":
        raise ParseError("negation not allowed here", *_pos(node))
    args = tuple(_sym(a, "argument") for a in node[1:])
    if not allow_vars:
        for a, tok in zip(args, node[1:]):
            if a.startswith("?"):
                raise ParseError(f"variable {a} in ground context", tok.line, tok.col)
    return Atom(pred, args)


def _literal(node, allow_vars=True):
    if isinstance(node, _List) and node and not isinstance(node[0], _List) and node[0].text == "not":
        if len(node) != 2:
            raise ParseError("(not ...) takes exactly one atom", *_pos(node))
        return Literal(_atom(node[1], allow_vars), False)
    return Literal(_atom(node, allow_vars), True)


def _sections(form, start):
    out = {}
    for node in form[start:]:
        if not isinstance(node, _List) or not node or isinstance(node[0], _List):
            line, col = _pos(node) if isinstance(node, _List) else (node.line, node.col)
            raise ParseError("expected a (:section ...) form", line, col)
        key = node[0].text
        if not key.startswith(":"):
            raise ParseError(f"unknown section {key}", *_pos(node))
        out.setdefault(key, []).append(node)
    return out


def _check_arity(atom, arities, node):
    known = arities.setdefault(atom.predicate, len(atom.args))
    if known != len(atom.args):
        raise ParseError(
            f"predicate {atom.predicate} used with arity {len(atom.args)}, expected {known}",
            *_pos(node),
        )


def parse_domain(text):
    form = _read(text)
    _expect_head(form, "domain")
    if len(form) < 2:
        raise ParseError("domain needs a name", *_pos(form))
    name = _sym(form[1], "domain name")
    types = []
    schemas = []
    arities = {}
    seen = set()
    for node in form[2:]:
        if not isinstance(node, _List) or not node or isinstance(node[0], _List):
            line, col = _pos(node) if isinstance(node, _List) else (node.line, node.col)
            raise ParseError("expected (:types ...) or (:operator ...)", line, col)
        key = node[0].text
        if key == ":types":
            types.extend(_sym(t, "type name") for t in node[1:])
        elif key == ":operator":
            schema = _parse_operator(node, len(schemas), set(types), arities)
            if schema.name in seen:
                raise ParseError(f"duplicate operator {schema.name}", *_pos(node))
            seen.add(schema.name)
            schemas.append(schema)
        else:
            raise ParseError(f"unknown domain section {key}", *_pos(node))
    return Domain(name, tuple(types), tuple(schemas))


def _parse_operator(node, index, types, arities):
    if len(node) < 2:
        raise ParseError("operator needs a name", *_pos(node))
    name = _sym(node[1], "operator name")
    secs = _sections(node, 2)
    params = []
    for sec in secs.pop(":params", []):
        for p in sec[1:]:
            if not isinstance(p, _List) or len(p) != 2:
                raise ParseError("parameter must be (?var type)", *_pos(p) if isinstance(p, _List) else (p.line, p.col))
            var, typ = _sym(p[0], "variable"), _sym(p[1], "type")
            if not var.startswith("?"):
                raise ParseError(f"parameter {var} must start with '?'", *_pos(p))
            if typ not in types:
                raise ParseError(f"undeclared type {typ}", *_pos(p))
            if any(v == var for v, _ in params):
                raise ParseError(f"duplicate parameter {var}", *_pos(p))
            params.append((var, typ))
    declared = {v for v, _ in params}

    def collect(key, parse):
        items = []
        for sec in secs.pop(key, []):
            for lit_node in sec[1:]:
                item = parse(lit_node)
                atom = item.atom if isinstance(item, Literal) else item
                for a in atom.args:
                    if a.startswith("?") and a not in declared:
                        raise ParseError(f"undeclared variable {a} in {name}", *_pos(lit_node))
                _check_arity(atom, arities, lit_node)
                items.append(item)
        return tuple(dict.fromkeys(items))

    pre = collect(":pre", _literal)
    add = collect(":add", _atom)
    dele = collect(":del", _atom)
    if secs:
        bad = next(iter(secs.values()))[0]
        raise ParseError(f"unknown operator section {bad[0].text}", *_pos(bad))
    return OperatorSchema(name, tuple(params), pre, add, dele, index)


def parse_problem(text, domain=None):
    form = _read(text)
    _expect_head(form, "problem")
    if len(form) < 2:
        raise ParseError("problem needs a name", *_pos(form))
    name = _sym(form[1], "problem name")
    secs = _sections(form, 2)
    dom_name = domain.name if domain is not None else ""
    for sec in secs.pop(":domain", []):
        if len(sec) != 2:
            raise ParseError("(:domain NAME) expected", *_pos(sec))
        dom_name = _sym(sec[1], "domain name")
        if domain is not None and dom_name != domain.name:
            raise ParseError(f"problem is for domain {dom_name}, not {domain.name}", *_pos(sec))
    types = set(domain.types) if domain is not None else set()
    objects = []
    known = {}
    for sec in secs.pop(":objects", []):
        for o in sec[1:]:
            if not isinstance(o, _List) or len(o) != 2:
                raise ParseError("object must be (constant type)", *(_pos(o) if isinstance(o, _List) else (o.line, o.col)))
            c, t = _sym(o[0], "constant"), _sym(o[1], "type")
            if t not in types:
                raise ParseError(f"constant {c} of undeclared type {t}", *_pos(o))
            if c in known:
                raise ParseError(f"duplicate object {c}", *_pos(o))
            known[c] = t
            objects.append((c, t))
    arities = domain.arities() if domain is not None else {}

    def ground_atom(node, lit):
        atom = lit.atom
        for a in atom.args:
            if a not in known:
                raise ParseError(f"undeclared constant {a}", *_pos(node))
        _check_arity(atom, arities, node)

    init = []
    for sec in secs.pop(":init", []):
        for node in sec[1:]:
            atom = _atom(node, allow_vars=False)
            ground_atom(node, Literal(atom))
            init.append(atom)
    goal = []
    for sec in secs.pop(":goal", []):
        for node in sec[1:]:
            lit = _literal(node, allow_vars=False)
            ground_atom(node, lit)
            goal.append(lit)
    if secs:
        bad = next(iter(secs.values()))[0]
        raise ParseError(f"unknown problem section {bad[0].text}", *_pos(bad))
    return Problem(name, dom_name, tuple(objects), frozenset(init), tuple(dict.fromkeys(goal)))


def _fmt_lit(lit):
    return str(lit)


def format_domain(domain):
    lines = [f"(domain {domain.name}"]
    if domain.types:
        lines.append(f"  (:types {' '.join(domain.types)})")
    for s in domain.schemas:
        lines.append(f"  (:operator {s.name}")
        lines.append("    (:params" + "".join(f" ({v} {t})" for v, t in s.params) + ")")
        lines.append("    (:pre" + "".join(" " + _fmt_lit(l) for l in s.pre) + ")")
        lines.append("    (:add" + "".join(" " + str(a) for a in s.add) + ")")
        lines.append("    (:del" + "".join(" " + str(a) for a in s.dele) + "))")
    lines[-1] += ")"
    return "\n".join(lines) + "\n"


def format_problem(problem):
    lines = [f"(problem {problem.name}", f"  (:domain {problem.domain})"]
    lines.append("  (:objects" + "".join(f" ({c} {t})" for c, t in problem.objects) + ")")
    lines.append("  (:init")
    lines.extend(f"    {a}" for a in sorted(problem.init))
    lines.append("  )")
    lines.append("  (:goal")
    lines.extend(f"    {g}" for g in problem.goal)
    lines.append("  ))")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- grounding


def _unify(template_args, ground_args, binding):
    out = dict(binding)
    for t, g in zip(template_args, ground_args):
        if t.startswith("?"):
            if out.setdefault(t, g) != g:
                return None
        elif t != g:
            return None
    return out


class Grounder:
    """Grounds schemas of ``domain`` over the objects of ``problem``; caches results."""

    def __init__(self, domain, problem):
        self.domain = domain
        self.problem = problem
        self._types = dict(problem.objects)
        self._by_type = {}
        for c, t in problem.objects:
            self._by_type.setdefault(t, []).append(c)
        for t in self._by_type:
            self._by_type[t].sort()
        self._relevant = {}
        self._ops = {}

    def _canon(self, op):
        return self._ops.setdefault(op.key, op)

    def bindings(self, schema, partial=None):
        """Yield every type-correct binding of ``schema`` extending ``partial``, lexicographically."""
        partial = partial or {}
        for v, t in schema.params:
            if v in partial and self._types.get(partial[v]) != t:
                return
        free = [(v, t) for v, t in schema.params if v not in partial]
        domains = [self._by_type.get(t, []) for _, t in free]
        for combo in itertools.product(*domains):
            b = dict(partial)
            b.update(zip((v for v, _ in free), combo))
            yield b

    def ground(self, schema, binding):
        return self._canon(schema.ground(binding))

    def operator(self, name, args):
        """Look up the ground operator ``name(args)``; raises KeyError/ValueError if ill-formed."""
        schema = self.domain.schema(name)
        if len(args) != len(schema.params):
            raise ValueError(f"{name} takes {len(schema.params)} arguments, got {len(args)}")
        binding = {}
        for (v, t), a in zip(schema.params, args):
            if self._types.get(a) != t:
                raise ValueError(f"{a} is not an object of type {t}")
            binding[v] = a
        return self.ground(schema, binding)

    def all_operators(self):
        out = []
        for schema in self.domain.schemas:
            for b in self.bindings(schema):
                out.append(self.ground(schema, b))
        return out

    def relevant(self, goal):
        """Ground operators adding ``goal`` (positive) or deleting it (negative), in file/binding order."""
        hit = self._relevant.get(goal)
        if hit is not None:
            return hit
        found = {}
        atom = goal.atom
        for schema in self.domain.schemas:
            effects = schema.add if goal.positive else schema.dele
            for tmpl in effects:
                if tmpl.predicate != atom.predicate or len(tmpl.args) != len(atom.args):
                    continue
                partial = _unify(tmpl.args, atom.args, {})
                if partial is None:
                    continue
                for b in self.bindings(schema, partial):
                    op = self.ground(schema, b)
                    found.setdefault(op.key, op)
        result = tuple(sorted(found.values(), key=lambda o: o.sort_key))
        self._relevant[goal] = result
        return result


def relevant_operators(goal, domain, problem):
    return list(Grounder(domain, problem).relevant(goal))


def apply_effects(state, op):
    """(state | add) - del; delete wins when an atom is in both."""
    return (state | op.add) - op.dele


# ---------------------------------------------------------------- plan files


def parse_plan(text, grounder):
    """Parse one ``name(c1,c2,...)`` per line; blank lines and ``;`` comments ignored."""
    plan = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        if not line.endswith(")") or "(" not in line:
            raise ParseError(f"expected name(args...), got {line!r}", lineno, 1)
        name, rest = line.split("(", 1)
        inner = rest[:-1].strip()
        args = tuple(a.strip() for a in inner.split(",")) if inner else ()
        try:
            plan.append(grounder.operator(name.strip(), args))
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad plan step {line!r}: {exc}", lineno, 1) from None
    return plan


def format_plan(plan):
    return "".join(f"{op}\n" for op in plan)
