"""Global well-formedness of derivations: tree shape, strategy conformance,
backlink legality and the structured-derivation discipline."""

from __future__ import annotations

from typing import Optional, Sequence

from .strategy import Strategy

Violation = tuple[int, str]


def parents(nodes: Sequence) -> tuple[dict[int, int], Optional[Violation]]:
    """Parent map of a tree rooted at node 0 with children listed by id."""
    par: dict[int, int] = {}
    for n in nodes:
        for c in n.children:
            if not isinstance(c, int) or not 0 <= c < len(nodes) or c == 0:
                return par, (n.id, f"child {c} is not a node")
            if c in par:
                return par, (c, f"node has two parents ({par[c]} and {n.id})")
            if c <= n.id:
                return par, (n.id, f"child {c} does not follow its parent")
            par[c] = n.id
    for n in nodes[1:]:
        if n.id not in par:
            return par, (n.id, "node is unreachable from the root")
    return par, None


def _ancestors(par: dict[int, int], nid: int) -> list[int]:
    out = []
    while nid in par:
        nid = par[nid]
        out.append(nid)
    return out


def maximal_paths(nodes: Sequence) -> list[list[int]]:
    paths, stack = [], [[0]] if nodes else []
    while stack:
        path = stack.pop()
        kids = nodes[path[-1]].children
        if not kids:
            paths.append(path)
        for c in reversed(kids):
            stack.append(path + [c])
    return paths


def strategy_violations(nodes: Sequence, strategy: Strategy) -> list[Violation]:
    out: list[Violation] = []
    seen: set[int] = set()
    for path in maximal_paths(nodes):
        state: Optional[int] = strategy.start
        for nid in path:
            label = nodes[nid].rule
            state = None if label is None else strategy.step(state, label)
            if state is None:
                if nid not in seen:
                    seen.add(nid)
                    out.append((nid, f"label {label} leaves the strategy {strategy.text}"))
                break
        else:
            if state not in strategy.accepting and path[-1] not in seen:
                seen.add(path[-1])
                out.append((path[-1], "path ends outside the strategy language"))
    return out


def backlink_violations(nodes: Sequence) -> list[Violation]:
    """Leaves are AX or ID; every ID targets a strict ancestor."""
    par, bad = parents(nodes)
    if bad:
        return [bad]
    out: list[Violation] = []
    for n in nodes:
        if n.rule in ("AX", "ID") and n.children:
            out.append((n.id, f"{n.rule} node has children"))
        if not n.children and n.rule not in ("AX", "ID"):
            out.append((n.id, "open leaf"))
        if n.rule == "ID":
            if n.backlink is None or n.backlink not in _ancestors(par, n.id):
                out.append((n.id, f"backlink {n.backlink} is not a strict ancestor"))
        elif n.backlink is not None:
            out.append((n.id, "only ID nodes carry backlinks"))
    return out


def lu_path_violations(nodes: Sequence) -> list[Violation]:
    """The direct path from a pivot to its companion leaf contains LU."""
    par, bad = parents(nodes)
    if bad:
        return [bad]
    out: list[Violation] = []
    for n in nodes:
        if n.rule != "ID" or n.backlink is None:
            continue
        anc = _ancestors(par, n.id)
        if n.backlink not in anc:
            continue
        segment = anc[: anc.index(n.backlink) + 1]
        if not any(nodes[a].rule == "LU" for a in segment):
            out.append((n.id, f"no LU on the path from pivot {n.backlink}"))
    return out


def structured_violations(nodes: Sequence) -> list[Violation]:
    """Any two LU nodes on one path are separated by an RD."""
    out: list[Violation] = []
    seen: set[int] = set()
    for path in maximal_paths(nodes):
        pending = False
        for nid in path:
            label = nodes[nid].rule
            if label == "LU":
                if pending and nid not in seen:
                    seen.add(nid)
                    out.append((nid, "two LU steps without an RD between them"))
                pending = True
            elif label == "RD":
                pending = False
    return out


def all_violations(nodes: Sequence, strategy: Strategy) -> list[Violation]:
    return (
        backlink_violations(nodes)
        + lu_path_violations(nodes)
        + strategy_violations(nodes, strategy)
        + structured_violations(nodes)
    )
