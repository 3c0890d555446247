"""Guarded fixpoint formulas: syntax tree, text format, and syntactic checks.

Text format::

    exists x y . (E(x,y) & phi)      forall x y . (E(x,y) -> phi)
    [lfp Z(z) . phi](x)              [gfp Z(z) . phi](x)
    phi & psi    phi | psi    !phi    true    false    # comment

Relations and fixpoint variables start with an uppercase letter,
first-order variables with a lowercase letter.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union


class FormulaError(ValueError):
    """Raised for malformed formula text or signature violations."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Signature:
    relations: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        rels = dict(self.relations)
        for name, arity in rels.items():
            if not isinstance(arity, int) or arity < 1:
                raise FormulaError(f"relation {name} must have positive arity, got {arity}")
        object.__setattr__(self, "relations", rels)

    def __hash__(self):
        return hash(tuple(sorted(self.relations.items())))

    def __contains__(self, name):
        return name in self.relations

    def arity(self, name: str) -> int:
        return self.relations[name]

    def names(self):
        return sorted(self.relations)


# -- syntax tree -------------------------------------------------------------

@dataclass(frozen=True)
class RelAtom:
    rel: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class FixVarAtom:
    var: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Conj:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Disj:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Neg:
    arg: "Formula"


@dataclass(frozen=True)
class TruthConst:
    value: bool


@dataclass(frozen=True)
class ExistsGuarded:
    vars: tuple[str, ...]
    guard: Union[RelAtom, FixVarAtom]
    body: "Formula"


@dataclass(frozen=True)
class ForallGuarded:
    vars: tuple[str, ...]
    guard: Union[RelAtom, FixVarAtom]
    body: "Formula"


@dataclass(frozen=True)
class Lfp:
    var: str
    params: tuple[str, ...]
    body: "Formula"
    args: tuple[str, ...]


@dataclass(frozen=True)
class Gfp:
    var: str
    params: tuple[str, ...]
    body: "Formula"
    args: tuple[str, ...]


Formula = Union[RelAtom, FixVarAtom, Conj, Disj, Neg, TruthConst,
                ExistsGuarded, ForallGuarded, Lfp, Gfp]
Quantifier = (ExistsGuarded, ForallGuarded)
Fixpoint = (Lfp, Gfp)
Atom = (RelAtom, FixVarAtom)

TRUE = TruthConst(True)
FALSE = TruthConst(False)


def children(f: Formula) -> tuple:
    if isinstance(f, (Conj, Disj)):
        return (f.left, f.right)
    if isinstance(f, Neg):
        return (f.arg,)
    if isinstance(f, Quantifier):
        return (f.guard, f.body)
    if isinstance(f, Fixpoint):
        return (f.body,)
    return ()


def size(f: Formula) -> int:
    """Number of AST nodes (guards count as nodes)."""
    return 1 + sum(size(c) for c in children(f))


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal over every node, guards included."""
    yield f
    for c in children(f):
        yield from walk(c)


def variables(f: Formula) -> set[str]:
    """All first-order variable names occurring anywhere in f."""
    out: set[str] = set()
    for g in walk(f):
        if isinstance(g, Atom):
            out.update(g.args)
        elif isinstance(g, Quantifier):
            out.update(g.vars)
        elif isinstance(g, Fixpoint):
            out.update(g.params)
            out.update(g.args)
    return out


def relations(f: Formula) -> dict[str, int]:
    return {g.rel: len(g.args) for g in walk(f) if isinstance(g, RelAtom)}


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, TruthConst):
        return frozenset()
    if isinstance(f, Neg):
        return free_vars(f.arg)
    if isinstance(f, (Conj, Disj)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Quantifier):
        return (free_vars(f.guard) | free_vars(f.body)) - frozenset(f.vars)
    if isinstance(f, Fixpoint):
        return frozenset(f.args) | (free_vars(f.body) - frozenset(f.params))
    raise TypeError(f"not a formula: {f!r}")


def free_fixvars(f: Formula) -> frozenset[str]:
    if isinstance(f, FixVarAtom):
        return frozenset([f.var])
    if isinstance(f, Fixpoint):
        return free_fixvars(f.body) - {f.var}
    out = frozenset()
    for c in children(f):
        out |= free_fixvars(c)
    return out


def width(f: Formula) -> int:
    """Maximum number of free variables over all subformulas."""
    return max(len(free_vars(g)) for g in walk(f))


def is_sentence(f: Formula) -> bool:
    return not free_vars(f) and not free_fixvars(f)


# -- printing ----------------------------------------------------------------

def _args(xs) -> str:
    return "(" + ",".join(xs) + ")"


def to_text(f: Formula) -> str:
    """Render f in the text format; parse_formula(to_text(f)) == f."""
    if isinstance(f, Atom):
        name = f.rel if isinstance(f, RelAtom) else f.var
        return name + _args(f.args)
    if isinstance(f, TruthConst):
        return "true" if f.value else "false"
    if isinstance(f, Neg):
        return "!" + _unary(f.arg)
    if isinstance(f, Conj):
        # & binds tighter than |; both associate to the left
        left = to_text(f.left) if isinstance(f.left, Conj) else _unary(f.left)
        return f"{left} & {_unary(f.right)}"
    if isinstance(f, Disj):
        left = to_text(f.left) if isinstance(f.left, (Conj, Disj)) else _unary(f.left)
        right = to_text(f.right) if isinstance(f.right, Conj) else _unary(f.right)
        return f"{left} | {right}"
    if isinstance(f, ExistsGuarded):
        return f"exists {' '.join(f.vars)} . ({to_text(f.guard)} & {to_text(f.body)})"
    if isinstance(f, ForallGuarded):
        return f"forall {' '.join(f.vars)} . ({to_text(f.guard)} -> {to_text(f.body)})"
    if isinstance(f, Fixpoint):
        kw = "lfp" if isinstance(f, Lfp) else "gfp"
        return f"[{kw} {f.var}{_args(f.params)} . {to_text(f.body)}]{_args(f.args)}"
    raise TypeError(f"not a formula: {f!r}")


def _unary(f: Formula) -> str:
    text = to_text(f)
    return f"({text})" if isinstance(f, (Conj, Disj)) else text


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
  | (?P<arrow>->) | (?P<sym>[&|!().,\[\]=])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)

KEYWORDS = {"exists", "forall", "lfp", "gfp", "true", "false"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, sig: Signature | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = sig
        self.inferred: dict[str, int] = {}
        self.fixvars: list[tuple[str, int]] = []

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return FormulaError(message, tok.line, tok.col)

    def accept(self, text) -> bool:
        if self.tok.kind != "eof" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {shown!r}")

    def parse(self) -> Formula:
        f = self.disj()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.accept("|"):
            f = Disj(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.accept("&"):
            f = Conj(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.accept("!"):
            return Neg(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        tok = self.tok
        if tok.text == "=":
            raise self.error("equality is not part of the guarded syntax")
        if self.accept("("):
            f = self.disj()
            self.expect(")")
            return f
        if self.accept("["):
            return self.fixpoint()
        if tok.kind != "ident":
            raise self.error(f"unexpected {tok.text or 'end of input'!r}")
        if tok.text in ("true", "false"):
            self.i += 1
            return TruthConst(tok.text == "true")
        if tok.text in ("exists", "forall"):
            self.i += 1
            return self.quantifier(tok.text)
        if tok.text in KEYWORDS or not tok.text[0].isupper():
            if self.toks[self.i + 1].text == "=":
                raise self.error("equality is not part of the guarded syntax")
            raise self.error(f"expected a formula, found {tok.text!r}")
        return self.atom()

    def varlist(self, stop) -> tuple[str, ...]:
        out = []
        while self.tok.text != stop:
            tok = self.tok
            if tok.kind != "ident" or tok.text in KEYWORDS or not tok.text[0].islower():
                raise self.error(f"expected a variable, found {tok.text or 'end of input'!r}")
            out.append(tok.text)
            self.i += 1
            if stop == ")" and not self.accept(","):
                break
        return tuple(out)

    def paren_vars(self) -> tuple[str, ...]:
        self.expect("(")
        xs = self.varlist(")")
        self.expect(")")
        return xs

    def atom(self) -> Formula:
        tok = self.tok
        name = tok.text
        self.i += 1
        args = self.paren_vars()
        if self.tok.text == "=":
            raise self.error("equality is not part of the guarded syntax")
        for var, arity in reversed(self.fixvars):
            if var == name:
                if arity != len(args):
                    raise self.error(
                        f"fixpoint variable {name} has {arity} parameters, used with {len(args)}", tok)
                return FixVarAtom(name, args)
        if self.sig is not None:
            if name not in self.sig:
                raise self.error(f"unknown relation {name}", tok)
            expected = self.sig.arity(name)
        else:
            expected = self.inferred.setdefault(name, len(args))
        if expected != len(args):
            raise self.error(f"arity mismatch: {name} has arity {expected}, used with {len(args)}", tok)
        if not args:
            raise self.error(f"relation {name} needs arguments", tok)
        return RelAtom(name, args)

    def quantifier(self, kw) -> Formula:
        xs = self.varlist(".")
        if not xs:
            raise self.error("quantifier needs at least one variable")
        self.expect(".")
        self.expect("(")
        guard_tok = self.tok
        if guard_tok.kind != "ident" or not guard_tok.text[0].isupper():
            raise self.error("expected a guard atom")
        guard = self.atom()
        self.expect("&" if kw == "exists" else "->")
        body = self.disj()
        self.expect(")")
        cls = ExistsGuarded if kw == "exists" else ForallGuarded
        return cls(xs, guard, body)

    def fixpoint(self) -> Formula:
        tok = self.tok
        if tok.text not in ("lfp", "gfp"):
            raise self.error("expected 'lfp' or 'gfp'")
        self.i += 1
        name_tok = self.tok
        if name_tok.kind != "ident" or not name_tok.text[0].isupper() or name_tok.text in KEYWORDS:
            raise self.error("expected a fixpoint variable")
        name = name_tok.text
        if self.sig is not None and name in self.sig or name in self.inferred:
            raise self.error(f"fixpoint variable {name} clashes with a relation", name_tok)
        self.i += 1
        params = self.paren_vars()
        if len(set(params)) != len(params):
            raise self.error("repeated fixpoint parameter", name_tok)
        self.expect(".")
        self.fixvars.append((name, len(params)))
        body = self.disj()
        self.fixvars.pop()
        self.expect("]")
        args = self.paren_vars()
        if len(args) != len(params):
            raise self.error(f"{name} has {len(params)} parameters, applied to {len(args)}", name_tok)
        cls = Lfp if tok.text == "lfp" else Gfp
        return cls(name, params, body, args)


def parse_formula(text: str, sig: Signature | None = None) -> Formula:
    """Parse formula text.  Without a signature, arities are inferred from first use."""
    return _Parser(text, sig).parse()


def infer_signature(f: Formula) -> Signature:
    return Signature(relations(f))


def load_formula(text: str) -> tuple[Formula, Signature]:
    """Parse a formula file: optional ``sig NAME ARITY`` header lines, then the formula."""
    rels: dict[str, int] = {}
    body_lines = []
    for line in text.splitlines():
        stripped = line.split("#", 1)[0].strip()
        parts = stripped.split()
        if parts[:1] == ["sig"] and len(parts) == 3 and parts[2].isdigit():
            rels[parts[1]] = int(parts[2])
            body_lines.append("")
        else:
            body_lines.append(line)
    sig = Signature(rels) if rels else None
    f = parse_formula("\n".join(body_lines), sig)
    return f, sig if sig is not None else infer_signature(f)


# -- validation --------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    kind: str
    path: tuple[int, ...]
    message: str


@dataclass(frozen=True)
class ValidationReport:
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    @property
    def verdict(self) -> str:
        return "ok" if self.ok else "failed"

    def kinds(self) -> set[str]:
        return {d.kind for d in self.diagnostics}

    def __str__(self):
        if self.ok:
            return "ok"
        lines = ["failed"]
        for d in self.diagnostics:
            lines.append(f"  {d.kind} at {'/'.join(map(str, d.path)) or 'root'}: {d.message}")
        return "\n".join(lines)


def validate_guarded(f: Formula, strict: bool = True) -> ValidationReport:
    """Check the guarded-syntax invariants; ``strict`` also requires explicitly
    guarded fixpoint parameters."""
    diags: list[Diagnostic] = []

    def report(kind, path, message):
        diags.append(Diagnostic(kind, path, message))

    def visit(g, path, binders: dict[str, tuple[int, int]], negs: int):
        # binders: fixpoint variable -> (arity, negation count at its binder)
        if isinstance(g, FixVarAtom):
            if g.var not in binders:
                report("unbound-fixvar", path, f"{g.var} is not bound by an enclosing fixpoint")
            else:
                arity, at = binders[g.var]
                if arity != len(g.args):
                    report("fixvar-arity", path, f"{g.var} expects {arity} arguments")
                if (negs - at) % 2:
                    report("positivity", path, f"{g.var} occurs under an odd number of negations")
            return
        if isinstance(g, Neg):
            visit(g.arg, path + (0,), binders, negs + 1)
            return
        if isinstance(g, Quantifier):
            if isinstance(g.guard, FixVarAtom):
                report("fixpoint-guard", path + (0,),
                       f"fixpoint variable {g.guard.var} used as a guard")
            uncovered = free_vars(g.body) - frozenset(g.guard.args)
            if uncovered:
                report("unguarded-var", path,
                       f"guard {to_text(g.guard)} does not cover {', '.join(sorted(uncovered))}")
            if isinstance(g.guard, RelAtom):
                visit(g.guard, path + (0,), binders, negs)
            visit(g.body, path + (1,), binders, negs)
            return
        if isinstance(g, Fixpoint):
            inner = dict(binders)
            inner[g.var] = (len(g.params), negs)
            if strict:
                extra = free_vars(g.body) - frozenset(g.params)
                if extra:
                    report("fixpoint-free-var", path,
                           f"body of {g.var} has free variables {', '.join(sorted(extra))} beyond its parameters")
                if g.params and not _explicitly_guarded(g.body, frozenset(g.params)):
                    report("unguarded-params", path,
                           f"parameters of {g.var} are not explicitly guarded in its body")
            visit(g.body, path + (0,), inner, negs)
            return
        for k, c in enumerate(children(g)):
            visit(c, path + (k,), binders, negs)

    visit(f, (), {}, 0)
    return ValidationReport(tuple(diags))


def _explicitly_guarded(f: Formula, params: frozenset[str]) -> bool:
    if isinstance(f, RelAtom):
        return params <= set(f.args)
    if isinstance(f, Quantifier):
        return isinstance(f.guard, RelAtom) and params <= set(f.guard.args)
    if isinstance(f, Conj):
        return _explicitly_guarded(f.left, params) or _explicitly_guarded(f.right, params)
    if isinstance(f, Disj):
        return _explicitly_guarded(f.left, params) and _explicitly_guarded(f.right, params)
    return False


# -- negation normal form ----------------------------------------------------

def substitute_fixvar_negation(f: Formula, var: str) -> Formula:
    """Replace every occurrence Z(u) of ``var`` by !Z(u)."""
    if isinstance(f, FixVarAtom):
        return Neg(f) if f.var == var else f
    if isinstance(f, Fixpoint) and f.var == var:
        return f
    return _map_children(f, lambda c: substitute_fixvar_negation(c, var))


def _map_children(f: Formula, fn) -> Formula:
    if isinstance(f, (Conj, Disj)):
        return type(f)(fn(f.left), fn(f.right))
    if isinstance(f, Neg):
        return Neg(fn(f.arg))
    if isinstance(f, Quantifier):
        return type(f)(f.vars, f.guard, fn(f.body))
    if isinstance(f, Fixpoint):
        return type(f)(f.var, f.params, fn(f.body), f.args)
    return f


def nnf(f: Formula) -> Formula:
    return _nnf(f, False)


def _nnf(f: Formula, neg: bool) -> Formula:
    if isinstance(f, RelAtom):
        return Neg(f) if neg else f
    if isinstance(f, FixVarAtom):
        if neg:
            raise FormulaError(f"{f.var} occurs negatively")
        return f
    if isinstance(f, TruthConst):
        return TruthConst(f.value != neg)
    if isinstance(f, Neg):
        return _nnf(f.arg, not neg)
    if isinstance(f, (Conj, Disj)):
        cls = type(f)
        if neg:
            cls = Disj if cls is Conj else Conj
        return cls(_nnf(f.left, neg), _nnf(f.right, neg))
    if isinstance(f, Quantifier):
        cls = type(f)
        if neg:
            cls = ForallGuarded if cls is ExistsGuarded else ExistsGuarded
        return cls(f.vars, f.guard, _nnf(f.body, neg))
    if isinstance(f, Fixpoint):
        if not neg:
            return type(f)(f.var, f.params, _nnf(f.body, False), f.args)
        dual = Gfp if isinstance(f, Lfp) else Lfp
        body = substitute_fixvar_negation(f.body, f.var)
        return dual(f.var, f.params, _nnf(body, True), f.args)
    raise TypeError(f"not a formula: {f!r}")


def is_nnf(f: Formula) -> bool:
    return all(not isinstance(g, Neg) or isinstance(g.arg, RelAtom) for g in walk(f))


def rename_fixvars_apart(f: Formula) -> Formula:
    """Give every fixpoint binder a distinct variable name (deterministic)."""
    used: set[str] = set()

    def fresh(name):
        candidate, k = name, 1
        while candidate in used:
            candidate = f"{name}{k}"
            k += 1
        used.add(candidate)
        return candidate

    def go(g, env):
        if isinstance(g, FixVarAtom):
            return FixVarAtom(env.get(g.var, g.var), g.args)
        if isinstance(g, Fixpoint):
            new = fresh(g.var)
            return type(g)(new, g.params, go(g.body, {**env, g.var: new}), g.args)
        return _map_children(g, lambda c: go(c, env))

    return go(f, {})


# -- subformulas -------------------------------------------------------------

def literals(sig_relations: Mapping[str, int], vars_: set[str]) -> list[Formula]:
    """All positive and negative literals over the given relations and variables."""
    from itertools import product
    out: list[Formula] = []
    names = sorted(vars_)
    for rel in sorted(sig_relations):
        for args in product(names, repeat=sig_relations[rel]):
            atom = RelAtom(rel, tuple(args))
            out.append(atom)
            out.append(Neg(atom))
    return out


def subformulas(f: Formula, sig: Signature | None = None) -> list[Formula]:
    """Distinct subformulas in pre-order, followed by the remaining literals over
    the signature and the variables of f."""
    seen: dict[Formula, None] = {}
    for g in walk(f):
        seen.setdefault(g, None)
    rels = dict(sig.relations) if sig is not None else relations(f)
    for lit in literals(rels, variables(f)):
        seen.setdefault(lit, None)
    return list(seen)
