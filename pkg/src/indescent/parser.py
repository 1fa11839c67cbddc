"""Reader and printer for the s-expression system format."""

from __future__ import annotations

import itertools

from .heaps import LOC, PointsTo, SymbolicHeap
from .sexpr import ParseError, SExpr, SList, Sym, read_all
from .system import (
    Atom,
    EntailmentQuery,
    InductiveSystem,
    Predicate,
    PredicateRule,
    Theory,
    ValidationError,
    validate_system,
)
from .terms import App, LiteralConstraint, Lit, Signature, SortError, Term, Var

# a disjunct: (literals, points-to cells, has_true)
_Disjunct = tuple[tuple[Lit, ...], tuple[PointsTo, ...], bool]


def _err(msg: str, at: SExpr) -> ParseError:
    return ParseError(msg, at.line, at.col)


def _sym(e: SExpr, what: str) -> str:
    if not isinstance(e, Sym):
        raise _err(f"expected {what}", e)
    return e.text


def _list(e: SExpr, what: str) -> SList:
    if not isinstance(e, SList):
        raise _err(f"expected {what}", e)
    return e


def _head(e: SExpr) -> str | None:
    if isinstance(e, SList) and e.items and isinstance(e.items[0], Sym):
        return e.items[0].text
    return None


class _Reader:
    def __init__(self) -> None:
        self.theory: Theory | None = None
        self.sorts: list[str] = ["Bool"]
        self.funs: dict[str, tuple[tuple[str, ...], str]] = {}
        self.preds: dict[str, Predicate] = {}
        self.rules: dict[str, list[PredicateRule]] = {}
        self.queries: list[EntailmentQuery] = []
        self.width = 1
        self.width_set = False

    def signature(self) -> Signature:
        sorts = set(self.sorts)
        if self.theory is Theory.SEPLOG:
            sorts.add(LOC)
        return Signature(frozenset(sorts), dict(self.funs))

    def run(self, forms: list[SExpr]) -> InductiveSystem:
        for form in forms:
            head = _head(form)
            handler = {
                "theory": self.on_theory,
                "sort": self.on_sort,
                "fun": self.on_fun,
                "pred": self.on_pred,
                "width": self.on_width,
                "rule": self.on_rule,
                "entails": self.on_entails,
            }.get(head or "")
            if handler is None:
                raise _err(f"unknown top-level form {head!r}", form)
            if head != "theory" and self.theory is None:
                raise _err("the (theory …) declaration must come first", form)
            handler(_list(form, "form"))
        if self.theory is None:
            raise ParseError("missing (theory …) declaration")
        system = InductiveSystem(
            theory=self.theory,
            signature=self.signature(),
            predicates=dict(self.preds),
            rules={p: list(rs) for p, rs in self.rules.items()},
            queries=list(self.queries),
            width=self.width,
        )
        validate_system(system)
        return system

    def on_theory(self, form: SList) -> None:
        if len(form) != 2:
            raise _err("(theory herbrand|seplog)", form)
        if self.theory is not None:
            raise _err("theory declared twice", form)
        name = _sym(form[1], "theory name")
        try:
            self.theory = Theory(name)
        except ValueError:
            raise _err(f"unknown theory {name!r}", form[1]) from None

    def on_sort(self, form: SList) -> None:
        if len(form) != 2:
            raise _err("(sort NAME)", form)
        name = _sym(form[1], "sort name")
        if name == "Bool":
            return
        if name in self.sorts:
            raise _err(f"sort {name} declared twice", form)
        self.sorts.append(name)

    def on_width(self, form: SList) -> None:
        if len(form) != 2:
            raise _err("(width K)", form)
        try:
            k = int(_sym(form[1], "record width"))
        except ValueError:
            raise _err("record width must be an integer", form[1]) from None
        if k < 1:
            raise _err("record width must be positive", form[1])
        self.width, self.width_set = k, True

    def on_fun(self, form: SList) -> None:
        if len(form) != 4:
            raise _err("(fun NAME (SORT*) SORT)", form)
        name = _sym(form[1], "function name")
        if name in self.funs:
            raise _err(f"function {name} declared twice", form)
        args = tuple(_sym(s, "sort") for s in _list(form[2], "argument sorts"))
        res = _sym(form[3], "result sort")
        for s in (*args, res):
            if s not in self.sorts:
                raise _err(f"undeclared sort {s}", form)
        self.funs[name] = (args, res)

    def on_pred(self, form: SList) -> None:
        if len(form) != 3:
            raise _err("(pred NAME (SORT*))", form)
        name = _sym(form[1], "predicate name")
        if name in self.preds:
            raise _err(f"predicate {name} declared twice", form)
        sorts = tuple(_sym(s, "sort") for s in _list(form[2], "argument sorts"))
        for s in sorts:
            if s not in self.sorts and not (self.theory is Theory.SEPLOG and s == LOC):
                raise _err(f"undeclared sort {s}", form)
        self.preds[name] = Predicate(name, sorts)

    def on_entails(self, form: SList) -> None:
        if len(form) != 3:
            raise _err("(entails P (Q*))", form)
        lhs = _sym(form[1], "predicate")
        rhs = tuple(_sym(q, "predicate") for q in _list(form[2], "predicate list"))
        for name, at in [(lhs, form[1]), *zip(rhs, form[2].items)]:
            if name not in self.preds:
                raise _err(f"undeclared predicate {name}", at)
        self.queries.append(EntailmentQuery(lhs, rhs))

    def _atom(self, e: SExpr, scope: dict[str, Var], binding: bool) -> Atom:
        lst = _list(e, "atom (PRED VAR*)")
        if not lst.items:
            raise _err("empty atom", e)
        name = _sym(lst[0], "predicate name")
        if name not in self.preds:
            raise _err(f"undeclared predicate {name}", lst[0])
        pred = self.preds[name]
        if len(lst) - 1 != pred.arity:
            raise _err(f"{name} expects {pred.arity} arguments, got {len(lst) - 1}", e)
        args = []
        for item, sort in zip(lst.items[1:], pred.sorts):
            if isinstance(item, SList):
                # annotated variable (x SORT)
                if len(item) != 2:
                    raise _err("annotated variable is (NAME SORT)", item)
                vname, vsort = _sym(item[0], "variable"), _sym(item[1], "sort")
                if vsort != sort:
                    raise _err(f"variable {vname} annotated {vsort}, position needs {sort}", item)
            else:
                vname = item.text
            if vname in self.funs:
                raise _err(f"{vname} is a function symbol, not a variable", item)
            v = Var(vname, sort)
            if binding:
                if vname in scope:
                    raise ValidationError(
                        f"line {item.line}: variable {vname} occurs twice among goal/subgoal "
                        "variables; they must be pairwise distinct"
                    )
                scope[vname] = v
            args.append(v)
        return Atom(name, args)

    def on_rule(self, form: SList) -> None:
        if len(form) not in (3, 4):
            raise _err("(rule (GOAL (VAR*)) (constraint EXPR) [(subgoals (ATOM*))])", form)
        goal_form = _list(form[1], "goal (PRED (VAR*))")
        if len(goal_form) != 2:
            raise _err("goal is (PRED (VAR*))", goal_form)
        goal_items = _list(goal_form[1], "goal variable list")
        scope: dict[str, Var] = {}
        goal = self._atom(SList((goal_form[0],) + goal_items.items, goal_form.line, goal_form.col),
                          scope, True)
        cons = _list(form[2], "(constraint EXPR)")
        if _head(cons) != "constraint" or len(cons) != 2:
            raise _err("expected (constraint EXPR)", cons)
        subgoals: tuple[Atom, ...] = ()
        if len(form) == 4:
            sub = _list(form[3], "(subgoals (ATOM*))")
            if _head(sub) != "subgoals" or len(sub) != 2:
                raise _err("expected (subgoals (ATOM*))", sub)
            subgoals = tuple(self._atom(a, scope, True) for a in _list(sub[1], "atom list"))
        for alt in self._dnf(cons[1], scope):
            lits, cells, has_true = alt
            if self.theory is Theory.HERBRAND:
                if cells:
                    raise _err("points-to atoms are only allowed in seplog systems", cons)
                c = LiteralConstraint(lits)
            else:
                c = SymbolicHeap(lits, cells, has_true)
            rule = PredicateRule(goal.pred, goal.args, c, subgoals)
            self.rules.setdefault(goal.pred, []).append(rule)

    def _term(self, e: SExpr, scope: dict[str, Var]) -> Term:
        if isinstance(e, Sym):
            if e.text in scope:
                return scope[e.text]
            if e.text in self.funs:
                if self.funs[e.text][0]:
                    raise _err(f"function {e.text} needs arguments", e)
                return App(e.text, ())
            raise _err(f"unknown variable or constant {e.text!r}", e)
        if not e.items:
            raise _err("empty term", e)
        f = _sym(e[0], "function symbol")
        if f not in self.funs:
            raise _err(f"unknown function symbol {f!r}", e[0])
        t = App(f, tuple(self._term(a, scope) for a in e.items[1:]))
        try:
            self.signature().check(t)
        except SortError as exc:
            raise _err(str(exc), e) from None
        return t

    def _sort(self, t: Term) -> str:
        return t.sort if isinstance(t, Var) else self.funs[t.fun][1]

    def _dnf(self, e: SExpr, scope: dict[str, Var]) -> list[_Disjunct]:
        sl = self.theory is Theory.SEPLOG
        if isinstance(e, Sym):
            if e.text == "true":
                return [((), (), sl)]
            if e.text == "emp" and sl:
                return [((), (), False)]
            raise _err(f"unexpected symbol {e.text!r} in constraint", e)
        head = _head(e)
        args = e.items[1:]
        if head in ("=", "distinct"):
            if len(args) != 2:
                raise _err(f"({head} t u)", e)
            t, u = self._term(args[0], scope), self._term(args[1], scope)
            if self._sort(t) != self._sort(u):
                raise _err(f"({head}) compares different sorts", e)
            return [((Lit(head == "=", t, u),), (), False)]
        if head == "pto":
            if not sl:
                raise _err("pto is only allowed in seplog systems", e)
            if len(args) != 2:
                raise _err("(pto x (y …))", e)
            src = self._term(args[0], scope)
            dst_forms = args[1].items if isinstance(args[1], SList) else (args[1],)
            dsts = tuple(self._term(d, scope) for d in dst_forms)
            if not isinstance(src, Var) or not all(isinstance(d, Var) for d in dsts):
                raise _err("points-to arguments must be variables", e)
            if len(dsts) != self.width:
                raise _err(f"points-to needs {self.width} targets", e)
            return [((), (PointsTo(src, dsts),), False)]
        if head in ("and", "sep"):
            if head == "sep" and not sl:
                raise _err("sep is only allowed in seplog systems", e)
            parts = [self._dnf(a, scope) for a in args]
            out = []
            for combo in itertools.product(*parts):
                lits = tuple(l for c in combo for l in c[0])
                cells = tuple(p for c in combo for p in c[1])
                out.append((lits, cells, any(c[2] for c in combo)))
            return out
        if head == "or":
            if not args:
                raise _err("(or) needs at least one disjunct", e)
            return [d for a in args for d in self._dnf(a, scope)]
        raise _err(f"unknown constraint operator {head!r}", e)


def parse_system(text: str) -> InductiveSystem:
    """Parse and validate a system document.

    Raises ParseError (with line/column) on syntax errors and
    ValidationError on arity, sort or variable violations.
    """
    return _Reader().run(read_all(text))


def _fmt_term(t: Term) -> str:
    if isinstance(t, Var) or not t.args:
        return t.name if isinstance(t, Var) else t.fun
    return f"({t.fun} {' '.join(_fmt_term(a) for a in t.args)})"


def _fmt_constraint(system: InductiveSystem, c) -> str:
    parts = []
    for l in c.lits:
        op = "=" if l.positive else "distinct"
        parts.append(f"({op} {_fmt_term(l.lhs)} {_fmt_term(l.rhs)})")
    if isinstance(c, SymbolicHeap):
        for p in c.cells:
            parts.append(f"(pto {p.src.name} ({' '.join(d.name for d in p.dsts)}))")
        if c.has_true:
            parts.append("true")
        if not c.cells and not c.has_true:
            parts.append("emp")
        if len(parts) == 1:
            return parts[0]
        return "(sep " + " ".join(parts) + ")"
    if not parts:
        return "true"
    if len(parts) == 1:
        return parts[0]
    return "(and " + " ".join(parts) + ")"


def print_system(system: InductiveSystem) -> str:
    """Render a system in the input format; parsing the output yields an equal system."""
    lines = [f"(theory {system.theory.value})"]
    if system.theory is Theory.SEPLOG and system.width != 1:
        lines.append(f"(width {system.width})")
    for s in sorted(system.signature.sorts):
        if s == "Bool" or (system.theory is Theory.SEPLOG and s == LOC):
            continue
        lines.append(f"(sort {s})")
    for f, (args, res) in system.signature.functions.items():
        lines.append(f"(fun {f} ({' '.join(args)}) {res})")
    for p, pred in system.predicates.items():
        lines.append(f"(pred {p} ({' '.join(pred.sorts)}))")
    for p in system.predicates:
        for r in system.rules.get(p, []):
            goal = f"({p} ({' '.join(v.name for v in r.goal_vars)}))"
            subs = " ".join(
                "(" + " ".join([a.pred, *(v.name for v in a.args)]) + ")" for a in r.subgoals
            )
            body = f"(rule {goal} (constraint {_fmt_constraint(system, r.constraint)})"
            if r.subgoals:
                body += f" (subgoals ({subs}))"
            lines.append(body + ")")
    for q in system.queries:
        lines.append(f"(entails {q.lhs} ({' '.join(q.rhs)}))")
    return "\n".join(lines) + "\n"
