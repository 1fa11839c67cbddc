"""Strategy-guided proof search with eager axioms and backlinks."""

from __future__ import annotations

import os
import sys
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..normalize import NormalizationAbandoned, emp_coverage, ne_name, normalize
from ..system import Atom, EntailmentQuery, InductiveSystem, Theory, validate_query
from ..terms import FreshNames
from .rules import (
    NotApplicable,
    and_r_target,
    apply_and_r,
    apply_lu,
    apply_rd,
    apply_ru,
    first_bare,
    match_id,
    rd_result,
    sp_shape,
    try_ax,
)
from .sequent import Sequent, canonical
from .strategy import Strategy
from .theory import TheoryOps

CLOSED, DEAD, STUCK, LIMIT = "closed", "dead", "stuck", "limit"


@dataclass
class Limits:
    max_nodes: int = 50_000
    max_depth: int = 300
    max_seconds: float = 60.0
    max_split: int = 4096

    @classmethod
    def from_env(cls, base: Optional["Limits"] = None) -> "Limits":
        """Override fields from ``INDESCENT_LIMITS``, e.g. ``nodes=1000,depth=40,time=5``."""
        lim = base or cls()
        raw = os.environ.get("INDESCENT_LIMITS", "").strip()
        if not raw:
            return lim
        names = {"nodes": "max_nodes", "depth": "max_depth", "time": "max_seconds", "split": "max_split"}
        vals = dict(lim.__dict__)
        for part in raw.split(","):
            if not part.strip():
                continue
            k, _, v = part.partition("=")
            k = k.strip()
            if k not in names:
                raise ValueError(f"unknown limit {k!r} in INDESCENT_LIMITS")
            field_name = names[k]
            vals[field_name] = float(v) if field_name == "max_seconds" else int(v)
        return cls(**vals)


@dataclass
class DerivationNode:
    id: int
    sequent: Sequent
    parent: Optional[int]
    rule: Optional[str] = None
    children: list[int] = field(default_factory=list)
    backlink: Optional[int] = None
    witness: dict = field(default_factory=dict)
    status: str = "open"
    note: str = ""


@dataclass
class Proof:
    """A closed derivation; node 0 is the root, ids follow DFS preorder."""

    nodes: list[DerivationNode]
    lhs: str
    rhs: tuple[str, ...]
    system: InductiveSystem
    normalized: bool
    strategy: str
    source: Optional[InductiveSystem] = None

    @property
    def root(self) -> DerivationNode:
        return self.nodes[0]

    def size(self) -> int:
        return len(self.nodes)

    def labels(self) -> list[Optional[str]]:
        return [n.rule for n in self.nodes]

    def render(self) -> str:
        """One line per node, indented by depth; ID leaves name their pivot."""
        lines, stack = [], [(0, 0)]
        while stack:
            nid, depth = stack.pop()
            n = self.nodes[nid]
            link = f" -> {n.backlink}" if n.backlink is not None else ""
            lines.append(f"{'  ' * depth}{n.id} [{n.rule}{link}] {n.sequent}")
            stack.extend((c, depth + 1) for c in reversed(n.children))
        return "\n".join(lines)


@dataclass
class Counterexample:
    args: tuple
    heap: object = None
    verified: bool = False
    transcript: list[str] = field(default_factory=list)
    tree: object = None

    def render(self) -> str:
        vals = ", ".join(str(a) for a in self.args)
        if self.heap is None:
            return f"({vals})"
        return f"({vals}) with heap {self.heap}"


@dataclass
class ResourceExhausted:
    limit: str
    detail: str = ""


@dataclass
class SearchOutcome:
    result: object  # Proof | Counterexample | ResourceExhausted
    nodes_explored: int = 0
    seconds: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def kind(self) -> str:
        if isinstance(self.result, Proof):
            return "proof"
        if isinstance(self.result, Counterexample):
            return "counterexample" if self.result.verified else "unverified"
        return "exhausted"


class _Abort(Exception):
    pass


class Prover:
    def __init__(
        self,
        system: InductiveSystem,
        strategy: Strategy | str | None = None,
        limits: Limits | None = None,
        normalize_emp: bool = True,
    ) -> None:
        self.system = system
        if isinstance(strategy, str):
            strategy = Strategy(strategy)
        self.strategy = strategy or Strategy()
        self.limits = limits or Limits.from_env()
        self.normalize_emp = normalize_emp

    # -- entry point -------------------------------------------------------

    def prove(self, lhs: str, rhs: Sequence[str]) -> SearchOutcome:
        validate_query(self.system, EntailmentQuery(lhs, tuple(rhs)))
        started = time.monotonic()
        work, p, qs, normalized, notes = self.system, lhs, list(rhs), False, []
        if self.normalize_emp and self.system.theory is Theory.SEPLOG:
            try:
                norm = normalize(self.system)
            except NormalizationAbandoned as e:
                norm = None
                notes.append(f"emp absorption skipped: {e}")
            if norm is not None:
                arity = self.system.predicate(lhs).arity
                gap = emp_coverage(norm.summaries, lhs, rhs, arity)
                if gap is not None:
                    from ..heaps import Heap
                    from .cex import verify_sl

                    cex = Counterexample(tuple(gap), Heap({}))
                    verify_sl(self.system, lhs, rhs, cex)
                    cex.transcript.insert(0, "empty-heap model of the left predicate not covered on the right")
                    return SearchOutcome(cex, 0, time.monotonic() - started, notes)
                work, normalized = norm.system, True
                p = ne_name(lhs)
                qs = [ne_name(q) for q in rhs if ne_name(q) in work.predicates]
                if p not in work.predicates:
                    proof = Proof([], lhs, tuple(rhs), work, True, self.strategy.text, self.system)
                    notes.append("left predicate has only empty-heap models, all covered")
                    return SearchOutcome(proof, 0, time.monotonic() - started, notes)
        engine = _Search(work, self.strategy, self.limits)
        goal = work.rules_of(p)[0].goal_vars
        root = Sequent.basic(Atom(p, goal), [Atom(q, goal) for q in qs])
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, 20 * self.limits.max_depth + 2000))
        try:
            rid = engine.expand(root, None, self.strategy.start, 0)
        finally:
            sys.setrecursionlimit(old)
        status = engine.nodes[rid].status
        elapsed = time.monotonic() - started
        if status == CLOSED:
            proof = Proof(engine.extract(rid), lhs, tuple(rhs), work, normalized, self.strategy.text, self.system)
            return SearchOutcome(proof, len(engine.nodes), elapsed, notes)
        if status == DEAD:
            from .cex import extract_counterexample

            cex = extract_counterexample(engine, rid, self.system, lhs, rhs)
            return SearchOutcome(cex, len(engine.nodes), time.monotonic() - started, notes)
        node = engine.first_failure(rid)
        detail = f"{node.note} at {node.sequent}" if node is not None else ""
        kind = engine.nodes[rid].note or status
        return SearchOutcome(ResourceExhausted(kind, detail), len(engine.nodes), elapsed, notes)


def _shape(seq: Sequent) -> tuple[tuple, frozenset]:
    """Left predicates and right member predicates: necessary for an ID match."""
    left = tuple(sorted(a.pred for a in seq.atoms))
    right = frozenset(tuple(sorted(a.pred for a in r.atoms)) + (r.constraint is not None, len(r.exvars)) for r in seq.rhs)
    return left, right


def _antecedent(shape, f, i: int, cache: dict) -> Sequent:
    key = (i, frozenset(l for l in range(shape.k) if f[l] == i))
    if key not in cache:
        cache[key] = shape.antecedent(f, i)
    return cache[key]


def _compose(old: dict, new: dict) -> dict:
    """Map the variables of an earlier sequent onto those of an alpha-equivalent one."""
    back = {c: v for v, c in new.items()}
    return {v: back[c] for v, c in old.items() if c in back}


def prove(system: InductiveSystem, lhs: str, rhs: Sequence[str], **kw) -> SearchOutcome:
    return Prover(system, **kw).prove(lhs, rhs)


class _Search:
    def __init__(self, system: InductiveSystem, strategy: Strategy, limits: Limits) -> None:
        self.system = system
        self.ops = TheoryOps(system)
        self.strategy = strategy
        self.limits = limits
        self.fresh = FreshNames()
        self.nodes: list[DerivationNode] = []
        self.deadline = time.monotonic() + limits.max_seconds
        # Sharing across the tree, keyed by canonical sequent. A dead sequent
        # is dead in every context. A closed subtree whose backlinks stay
        # inside it proves its root outright; such roots are tried first.
        self.dead: dict[tuple, tuple[int, dict]] = {}
        self.valid: set[tuple] = set()
        self.low: dict[int, int] = {}
        self.shapes: dict[int, tuple] = {}
        self.no_ax: set[tuple] = set()

    # -- bookkeeping -------------------------------------------------------

    def _new(self, seq: Sequent, parent: Optional[int]) -> DerivationNode:
        node = DerivationNode(len(self.nodes), seq, parent)
        self.nodes.append(node)
        return node

    def _over_budget(self) -> Optional[str]:
        if len(self.nodes) > self.limits.max_nodes:
            return "nodes"
        if time.monotonic() > self.deadline:
            return "time"
        return None

    def _ancestors(self, nid: Optional[int]):
        while nid is not None:
            yield self.nodes[nid]
            nid = self.nodes[nid].parent

    def _lu_between(self, pivot: int, parent: int) -> bool:
        for n in self._ancestors(parent):
            if n.rule == "LU":
                return True
            if n.id == pivot:
                return False
        return False

    def _stuck(self, node: DerivationNode, why: str) -> int:
        node.status, node.note = STUCK, why
        return node.id

    # -- the canonical schedule ------------------------------------------

    def expand(self, seq: Sequent, parent: Optional[int], state: int, depth: int) -> int:
        node = self._new(seq, parent)
        over = self._over_budget()
        if over:
            node.status, node.note = LIMIT, over
            return node.id
        if depth > self.limits.max_depth:
            node.status, node.note = LIMIT, "depth"
            return node.id
        closing = self._closing(seq, parent, state)
        if closing is not None:
            node.rule, node.witness, node.backlink = closing
            node.status = CLOSED
            self.low[node.id] = node.id if node.backlink is None else node.backlink
            return node.id
        key, ren = canonical(seq)
        known = self.dead.get(key)
        if known is not None:
            node.status, node.note = DEAD, "fails as before"
            node.witness = {"dead_ref": known[0], "renaming": _compose(known[1], ren)}
            return node.id
        self._apply(node, seq, state, depth)
        if node.status == DEAD:
            self.dead.setdefault(key, (node.id, ren))
        elif node.status == CLOSED:
            low = min((self.low[c] for c in node.children), default=node.id)
            self.low[node.id] = low
            if low >= node.id:
                self.valid.add(key)
        return node.id

    def _closing(self, seq: Sequent, parent: Optional[int], state: int):
        """(rule, witness, backlink) of an ID or AX leaf for seq, if any."""
        st = self.strategy
        if st.allows_final(state, "ID") and seq.constraint is None and parent is not None:
            left, right = _shape(seq)
            for anc in self._ancestors(parent):
                if anc.sequent.constraint is not None:
                    continue
                if anc.id not in self.shapes:
                    self.shapes[anc.id] = _shape(anc.sequent)
                a_left, a_right = self.shapes[anc.id]
                if a_left != left or not a_right <= right:
                    continue
                theta = match_id(anc.sequent, seq)
                if theta is not None and self._lu_between(anc.id, parent):
                    return "ID", {"theta": theta}, anc.id
        if st.allows_final(state, "AX"):
            key = canonical(seq)[0]
            if key in self.no_ax:
                return None
            w = try_ax(self.ops, seq)
            if w is not None:
                return "AX", w, None
            self.no_ax.add(key)
        return None

    def _apply(self, node: DerivationNode, seq: Sequent, state: int, depth: int) -> int:
        if seq.constraint is not None:
            b = first_bare(seq)
            if b is not None:
                return self._ru(node, b, state, depth)
            return self._rd(node, state, depth)
        if not seq.rhs:
            node.status, node.note = DEAD, "empty right-hand side"
            return node.id
        target = and_r_target(seq)
        if target is not None:
            return self._and_r(node, target, state, depth)
        n = len(seq.atoms)
        if n >= 2:
            return self._sp(node, state, depth)
        if n == 1:
            return self._lu(node, state, depth)
        b = first_bare(seq)
        if b is not None:
            return self._ru(node, b, state, depth)
        return self._stuck(node, "no rule applies")

    def _and(self, node: DerivationNode, kids: list[Sequent], state: int, depth: int) -> int:
        first_fail = None
        for k in kids:
            cid = self.expand(k, node.id, state, depth + 1)
            node.children.append(cid)
            cst = self.nodes[cid].status
            if cst == DEAD:
                node.status = DEAD
                node.witness["dead_child"] = cid
                return node.id
            if cst != CLOSED and first_fail is None:
                first_fail = cst
                node.note = self.nodes[cid].note
        node.status = first_fail or CLOSED
        return node.id

    def _lu(self, node: DerivationNode, state: int, depth: int) -> int:
        nxt = self.strategy.step(state, "LU")
        if nxt is None:
            return self._stuck(node, "strategy forbids LU")
        kids, rens = apply_lu(self.ops, node.sequent, 0, self.fresh)
        node.rule, node.witness = "LU", {"atom": 0, "renamings": rens}
        return self._and(node, kids, nxt, depth)

    def _ru(self, node: DerivationNode, index: int, state: int, depth: int) -> int:
        nxt = self.strategy.step(state, "RU")
        if nxt is None:
            return self._stuck(node, "strategy forbids RU")
        kid, rens = apply_ru(self.ops, node.sequent, index, self.fresh)
        node.rule, node.witness = "RU", {"member": index, "renamings": rens}
        return self._and(node, [kid], nxt, depth)

    def _and_r(self, node: DerivationNode, target, state: int, depth: int) -> int:
        nxt = self.strategy.step(state, "AR")
        if nxt is None:
            return self._stuck(node, "strategy forbids ∧R")
        m, i, j = target
        kids = apply_and_r(node.sequent, m, i, j)
        node.rule, node.witness = "AR", {"member": m, "atoms": [i, j]}
        return self._and(node, kids, nxt, depth)

    def _rd(self, node: DerivationNode, state: int, depth: int) -> int:
        nxt = self.strategy.step(state, "RD")
        if nxt is None:
            return self._stuck(node, "strategy forbids RD")
        try:
            kid, ws = apply_rd(self.ops, node.sequent)
        except NotApplicable as e:
            return self._stuck(node, str(e))
        node.rule, node.witness = "RD", {"partition": ws}
        cid = self.expand(kid, node.id, nxt, depth + 1)
        # smaller witness sets can only help a stuck branch find a backlink
        tries = 0
        for j, thetas in enumerate(ws):
            if self.nodes[cid].status != STUCK or tries >= 4:
                break
            for drop in range(len(thetas or ())):
                if tries >= 4:
                    break
                tries += 1
                alt = [list(t) if t else None for t in ws]
                del alt[j][drop]
                alt = [t or None for t in alt]
                alt_kid = rd_result(self.ops, node.sequent, alt)
                alt_id = self.expand(alt_kid, node.id, nxt, depth + 1)
                if self.nodes[alt_id].status in (CLOSED, DEAD):
                    node.witness = {"partition": ws, "chosen": alt}
                    cid = alt_id
                    break
        node.children = [cid]
        cst = self.nodes[cid].status
        node.status = cst
        if cst == DEAD:
            node.witness["dead_child"] = cid
        node.note = self.nodes[cid].note
        return node.id

    def _sp(self, node: DerivationNode, state: int, depth: int) -> int:
        nxt = self.strategy.step(state, "SP")
        if nxt is None:
            return self._stuck(node, "strategy forbids SP")
        shape = sp_shape(node.sequent)
        if shape is None:
            return self._stuck(node, "left tuples overlap or right conjunctions do not cover them")
        if shape.n ** shape.k > self.limits.max_split:
            node.status, node.note = LIMIT, "split"
            return node.id
        node.rule = "SP"
        memo: dict[tuple, int] = {}
        ranks: dict[tuple, int] = {}
        antes: dict[tuple, Sequent] = {}
        choice: list[tuple[tuple[int, ...], int]] = []
        used: list[int] = []
        for f in shape.choice_functions():
            found, fails = None, []
            for i in self._sp_order(shape, f, memo, ranks, antes, node.id, nxt):
                key = (i, frozenset(l for l in range(shape.k) if f[l] == i))
                if key not in memo:
                    memo[key] = self.expand(_antecedent(shape, f, i, antes), node.id, nxt, depth + 1)
                cid = memo[key]
                if self.nodes[cid].status == CLOSED:
                    found = i
                    if cid not in used:
                        used.append(cid)
                    break
                fails.append(cid)
            if found is None:
                node.children = fails
                statuses = [self.nodes[c].status for c in fails]
                if all(s == DEAD for s in statuses):
                    node.status = DEAD
                else:
                    bad = next(c for c in fails if self.nodes[c].status != DEAD)
                    node.status, node.note = self.nodes[bad].status, self.nodes[bad].note
                node.witness = {"failed": list(f)}
                return node.id
            choice.append((f, found))
        node.children = used
        node.witness = {"choice": choice}
        node.status = CLOSED
        return node.id

    def _sp_order(self, shape, f, memo: dict, ranks: dict, antes: dict, nid: int, state: int) -> list[int]:
        """Cheapest antecedents first: already closed at this node, closed at
        once by ID or AX, proved elsewhere, then the rest in order."""

        def rank(i: int) -> int:
            key = (i, frozenset(l for l in range(shape.k) if f[l] == i))
            cid = memo.get(key)
            if cid is not None:
                return 0 if self.nodes[cid].status == CLOSED else 4
            if key not in ranks:
                seq = _antecedent(shape, f, i, antes)
                if self._closing(seq, nid, state) is not None:
                    ranks[key] = 1
                else:
                    ranks[key] = 2 if canonical(seq)[0] in self.valid else 3
            return ranks[key]

        return sorted(range(shape.n), key=lambda i: (rank(i), f.count(i), i))

    # -- results -----------------------------------------------------------

    def extract(self, rid: int) -> list[DerivationNode]:
        """Reachable nodes renumbered in DFS preorder."""
        order: list[int] = []
        stack = [rid]
        while stack:
            nid = stack.pop()
            order.append(nid)
            stack.extend(reversed(self.nodes[nid].children))
        ren = {old: new for new, old in enumerate(order)}
        out = []
        for old in order:
            n = self.nodes[old]
            m = DerivationNode(
                ren[old],
                n.sequent,
                ren.get(n.parent) if n.parent is not None and old != rid else None,
                n.rule,
                [ren[c] for c in n.children],
                ren[n.backlink] if n.backlink is not None else None,
                dict(n.witness),
                n.status,
                n.note,
            )
            if n.rule == "SP":
                m.witness = {"choice": n.witness["choice"]}
            out.append(m)
        return out

    def first_failure(self, nid: int) -> Optional[DerivationNode]:
        node = self.nodes[nid]
        for c in node.children:
            if self.nodes[c].status not in (CLOSED,):
                return self.first_failure(c)
        return node if node.status != CLOSED else None
