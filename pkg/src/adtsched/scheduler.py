"""Minimal-agent schedules for preprocessed DAG variants.

Slots number the time steps 1..L backwards from the root: the root's depth
is the total completion time L, a node assigned slot s runs during step s,
and every node must sit in a strictly higher slot than each of the unit
steps below it.  The scheduler fills slots greedily from the root down and
bisects on the number of agents between a counting lower bound and the
width of the level structure.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .preprocess import Dag, DagKind, DagNode, Variant


class ZeroSlots(ValueError):
    """The root has depth 0: nothing to schedule."""


class TooLarge(ValueError):
    """Instance above the brute-force limit."""


class InternalError(RuntimeError):
    """An invariant the algorithm relies on failed to hold."""


@dataclass
class Bounds:
    lower: int  # exclusive: this many agents provably cannot finish in time
    upper: int  # inclusive: this many agents always suffice
    slots: int


def depth_node(dag: Dag) -> None:
    """Earliest completion time of every node, bottom-up: unit steps add 1,
    joins wait for all children, an OR needs only its fastest child."""
    order = _children_first(dag)
    for node in order:
        if not node.children:
            node.depth = 0
        elif node.kind is DagKind.SEQ:
            node.depth = node.children[0].depth + 1
        elif node.kind is DagKind.OR:
            node.depth = min(c.depth for c in node.children)
        else:
            node.depth = max(c.depth for c in node.children)


def level_node(dag: Dag) -> None:
    """Distance from the root counted in unit steps crossed, top-down; a
    node reachable several ways takes the longest distance."""
    order = _parents_first(dag)
    for node in order:
        if not node.parents:
            node.level = 0
        else:
            node.level = max(
                p.level + (1 if p.kind is DagKind.SEQ else 0)
                for p in node.parents)


def _children_first(dag: Dag) -> list:
    pending = {id(x): len(x.children) for x in dag.nodes}
    queue = [x for x in dag.nodes if not x.children]
    order = []
    while queue:
        node = queue.pop()
        order.append(node)
        for parent in node.parents:
            pending[id(parent)] -= 1
            if pending[id(parent)] == 0:
                queue.append(parent)
    if len(order) != len(dag.nodes):
        raise InternalError("cycle in DAG")
    return order


def _parents_first(dag: Dag) -> list:
    pending = {id(x): len(x.parents) for x in dag.nodes}
    queue = [x for x in dag.nodes if not x.parents]
    order = []
    while queue:
        node = queue.pop()
        order.append(node)
        for child in node.children:
            pending[id(child)] -= 1
            if pending[id(child)] == 0:
                queue.append(child)
    if len(order) != len(dag.nodes):
        raise InternalError("cycle in DAG")
    return order


def compute_bounds(dag: Dag, slots_override: int | None = None) -> Bounds:
    """Agent-count bracket for the bisection.  ``lower`` is the pigeonhole
    bound (fewer agents cannot fit n unit steps into the slots), ``upper``
    the maximum number of unit steps sharing a level, which always succeeds.
    """
    depth_node(dag)
    level_node(dag)
    if dag.root is None or dag.root.depth == 0:
        raise ZeroSlots("root depth is zero")
    slots = dag.root.depth
    if slots_override is not None:
        if slots_override < slots:
            raise ValueError(
                "slots override %d below minimum %d" % (slots_override, slots))
        slots = slots_override
    per_level: dict[int, int] = {}
    n = 0
    for node in dag.nodes:
        if node.kind is DagKind.SEQ:
            n += 1
            per_level[node.level] = per_level.get(node.level, 0) + 1
    lower = (n + slots - 1) // slots - 1
    upper = max(per_level.values())
    return Bounds(lower, upper, slots)


def _blocked(node: DagNode, slot: int, cache: dict) -> bool:
    """True when an ancestor is already assigned in this very slot (the
    node would have to run strictly earlier).  Ancestors assigned in higher
    slots end the walk: everything above them is settled even higher."""
    if id(node) in cache:
        return True
    stack = list(node.parents)
    seen = set()
    while stack:
        cur = stack.pop()
        if id(cur) in seen:
            continue
        seen.add(id(cur))
        if id(cur) in cache or cur.slot == slot:
            cache[id(node)] = True
            return True
        if cur.slot == 0:
            stack.extend(cur.parents)
    return False


def schedule_candidate(dag: Dag, slots: int, agents: int):
    """Greedy assignment with a fixed agent count.

    Walks levels from the root, keeping a pool of released unit steps, and
    fills each slot deepest-first (ties by creation order).  Returns the
    partial assignment and the number of unit steps left over; 0 leftovers
    means the candidate count suffices.

    Expects ``depth`` and ``level`` to be populated (:func:`compute_bounds`
    does both).
    """
    for node in dag.nodes:
        node.agent = 0
        node.slot = 0
    by_level: dict[int, list] = {}
    n_remain = 0
    for node in dag.nodes:
        if node.kind is DagKind.SEQ:
            by_level.setdefault(node.level, []).append(node)
            n_remain += 1
    pool: list = []
    level, slot = 0, slots
    while n_remain > 0 and slot > 0:
        pool.extend(by_level.get(level, []))
        if any(x.depth > slot for x in pool):
            break  # some pending chain no longer fits below this slot
        pool.sort(key=lambda x: (-x.depth, x.index))
        cache: dict = {}
        occupants: dict[int, DagNode] = {}
        agent = 1
        leftover = []
        for i, node in enumerate(pool):
            if agent > agents:
                leftover.extend(pool[i:])
                break
            if _blocked(node, slot, cache):
                leftover.append(node)
                continue
            node.agent, node.slot = agent, slot
            occupants[agent] = node
            agent += 1
            n_remain -= 1
        pool = leftover
        _reshuffle(dag, slot, agent - 1, occupants)
        level += 1
        slot -= 1
    assignment = {x: (x.agent, x.slot) for x in dag.nodes if x.slot}
    return assignment, n_remain


def _chain_parent(node: DagNode) -> DagNode | None:
    if len(node.parents) == 1:
        return node.parents[0]
    for parent in node.parents:
        if parent.origin == node.origin:
            return parent
    return None


def _reshuffle(dag: Dag, slot: int, num_agents: int,
               occupants: dict) -> None:
    for agent in range(1, num_agents + 1):
        current = occupants.get(agent)
        if current is None:
            continue
        parent = _chain_parent(current)
        if parent is None:
            continue
        target = parent.agent
        if target == 0 or target == current.agent:
            continue
        other = occupants.get(target)
        if other is not None:
            other.agent = current.agent
            occupants[current.agent] = other
        else:
            del occupants[current.agent]
        current.agent = target
        occupants[target] = current


def reshuffle_slot(dag: Dag, slot: int, num_agents: int) -> None:
    """Swap same-slot assignments so each unit step stays with the agent
    that carries its chain, keeping hand-offs to a minimum."""
    occupants = {x.agent: x for x in dag.nodes if x.slot == slot}
    _reshuffle(dag, slot, num_agents, occupants)


def zero_assign(dag: Dag) -> None:
    """Attach every zero-duration node to an already scheduled unit step:
    first whatever hangs directly under a unit step joins it, then join
    points adopt their latest child and gates their latest prerequisite,
    sweeping until everything is placed."""
    pending = []
    for node in dag.nodes:
        if node.kind is DagKind.SEQ:
            continue
        carrier = next((p for p in node.parents if p.kind is DagKind.SEQ),
                       None)
        if carrier is not None and carrier.slot != 0:
            node.agent, node.slot = carrier.agent, carrier.slot
        else:
            pending.append(node)
    sweeps = 0
    while pending:
        sweeps += 1
        if sweeps > 2 * len(dag.nodes) + 5:
            raise InternalError("zero-duration placement did not converge")
        rest = []
        for node in sorted(pending, key=lambda x: x.index):
            placed = False
            waits = [c for c in node.children if c.depth > 0]
            if node.kind is DagKind.AND and node.depth == 0:
                waits = []
            if waits:
                if all(c.slot != 0 for c in waits):
                    pick = max(waits, key=lambda c: (c.slot, -c.index))
                    node.agent, node.slot = pick.agent, pick.slot
                    placed = True
            elif node.parents and all(p.slot != 0 for p in node.parents):
                pick = min(node.parents, key=lambda p: (p.slot, p.index))
                node.agent, node.slot = pick.agent, pick.slot
                placed = True
            if not placed:
                rest.append(node)
        pending = rest


@dataclass
class ScheduleResult:
    variant: Variant
    feasible: bool
    slots: int
    agents: int
    bounds: Bounds | None
    assignment: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.variant.dag.n


def _drop_unkept(dag: Dag) -> None:
    if all(x.keep for x in dag.nodes):
        return
    for node in dag.nodes:
        if node.keep:
            node.children = [c for c in node.children if c.keep]
            node.parents = [p for p in node.parents if p.keep]
    dag.nodes = [x for x in dag.nodes if x.keep]
    dag._names = {x.name for x in dag.nodes}


def _schedule_variant(variant: Variant,
                      slots_override: int | None) -> ScheduleResult:
    if not variant.feasible:
        return ScheduleResult(variant, False, 0, 0, None)
    dag = variant.dag
    _drop_unkept(dag)
    if dag.n == 0:
        return ScheduleResult(variant, True, 0, 0, None)
    bounds = compute_bounds(dag, slots_override)
    lower, upper = bounds.lower, bounds.upper
    last = None
    while upper - lower > 1:
        agents = lower + (upper - lower) // 2
        _, remaining = schedule_candidate(dag, bounds.slots, agents)
        ok = remaining == 0
        last = (agents, ok)
        if ok:
            upper = agents
        else:
            lower = agents
    if last != (upper, True):
        # rerun so the node fields hold the winning assignment, not the
        # last probe's
        _, remaining = schedule_candidate(dag, bounds.slots, upper)
        if remaining != 0:
            raise InternalError("%d agents rejected despite width %d"
                                % (upper, bounds.upper))
    zero_assign(dag)
    assignment = {x: (x.agent, x.slot) for x in dag.nodes}
    return ScheduleResult(variant, True, bounds.slots, upper, bounds,
                          assignment)


def min_schedule(variants: list,
                 slots_override: int | None = None) -> list:
    """Schedule every variant with the fewest agents that still meet its
    fastest completion time.  ADT_SCHED_THREADS > 1 spreads variants over a
    thread pool; results keep the input order either way."""
    try:
        threads = int(os.environ.get("ADT_SCHED_THREADS", "1") or "1")
    except ValueError:
        threads = 1
    if threads > 1 and len(variants) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(
                lambda v: _schedule_variant(v, slots_override), variants))
    return [_schedule_variant(v, slots_override) for v in variants]


@dataclass
class Violation:
    kind: str
    node: str
    message: str


def _nearest_seq_ancestors(dag: Dag) -> dict:
    """node -> the closest unit steps above it (looking through zero
    nodes)."""
    out: dict[int, frozenset] = {}
    for node in _parents_first(dag):
        acc: set = set()
        for parent in node.parents:
            if parent.kind is DagKind.SEQ:
                acc.add(parent)
            else:
                acc |= out[id(parent)]
        out[id(node)] = frozenset(acc)
    return out


def verify_schedule(dag: Dag, slots: int | None = None,
                    agents: int | None = None) -> list:
    """Independent checks of the assignment held in the node fields.
    Returns violations as data; an empty list means the schedule is sound.
    """
    violations: list[Violation] = []
    seqs = [x for x in dag.nodes if x.kind is DagKind.SEQ]
    if slots is None:
        slots = max((x.slot for x in seqs), default=0)
    if agents is None:
        agents = max((x.agent for x in seqs), default=0)
    used: dict[tuple, DagNode] = {}
    for node in seqs:
        if node.slot == 0 or node.agent == 0:
            violations.append(Violation(
                "unassigned", node.name, "unit step never scheduled"))
            continue
        if not 1 <= node.slot <= slots:
            violations.append(Violation(
                "slot-range", node.name,
                "slot %d outside 1..%d" % (node.slot, slots)))
        if not 1 <= node.agent <= agents:
            violations.append(Violation(
                "agent-range", node.name,
                "agent %d outside 1..%d" % (node.agent, agents)))
        key = (node.agent, node.slot)
        if key in used:
            violations.append(Violation(
                "collision", node.name,
                "shares %s with %s" % (key, used[key].name)))
        used[key] = node
    nearest = _nearest_seq_ancestors(dag)
    for node in seqs:
        if node.slot == 0:
            continue
        for ancestor in nearest[id(node)]:
            if ancestor.slot != 0 and ancestor.slot <= node.slot:
                violations.append(Violation(
                    "precedence", node.name,
                    "%s (slot %d) must come after %s (slot %d)"
                    % (ancestor.name, ancestor.slot, node.name, node.slot)))
    agents_used = {x.agent for x in seqs if x.agent}
    if agents_used and agents_used != set(range(1, max(agents_used) + 1)):
        violations.append(Violation(
            "agent-gap", dag.root.name if dag.root else "",
            "agent numbers %s are not contiguous" % sorted(agents_used)))
    return violations


def brute_force_min_agents(dag: Dag, slots: int | None = None,
                           limit: int = 12) -> int:
    """Exhaustive minimal agent count, as a check on the fast path.  Builds
    its own precedence relation and chain lengths rather than trusting the
    scheduler's fields.  Raises :class:`TooLarge` past ``limit`` steps."""
    seqs = [x for x in dag.nodes if x.kind is DagKind.SEQ]
    n = len(seqs)
    if n == 0:
        return 0
    if n > limit:
        raise TooLarge("%d unit steps exceed the limit of %d" % (n, limit))

    nearest = _nearest_seq_ancestors(dag)
    above = {id(x): set(nearest[id(x)]) for x in seqs}
    below: dict[int, set] = {id(x): set() for x in seqs}
    for node in seqs:
        for anc in above[id(node)]:
            below[id(anc)].add(node)

    height: dict[int, int] = {}

    def chain(table, step_map, node):
        # longest chain through the condensed precedence graph
        key = id(node)
        if key in table:
            return table[key]
        stack = [(node, False)]
        while stack:
            cur, done = stack.pop()
            if done:
                table[id(cur)] = 1 + max(
                    (table[id(x)] for x in step_map[id(cur)]), default=0)
            elif id(cur) not in table:
                stack.append((cur, True))
                stack.extend((x, False) for x in step_map[id(cur)]
                             if id(x) not in table)
        return table[key]

    depth_of = {}
    for node in seqs:
        chain(depth_of, below, node)
    for node in seqs:
        chain(height, above, node)
    if slots is None:
        slots = max(depth_of.values())

    # ancestors must be placed before their descendants: height counts the
    # condensed chain from the top, so ascending height is a topological order
    order = sorted(seqs, key=lambda x: (height[id(x)], x.index))
    lowest = (n + slots - 1) // slots
    for candidate in range(lowest, n + 1):
        load = [0] * (slots + 1)
        placed: dict[int, int] = {}

        def fit(i):
            if i == len(order):
                return True
            node = order[i]
            top = slots - (height[id(node)] - 1)
            for anc in above[id(node)]:
                top = min(top, placed[id(anc)] - 1)
            for s in range(top, depth_of[id(node)] - 1, -1):
                if load[s] < candidate:
                    load[s] += 1
                    placed[id(node)] = s
                    if fit(i + 1):
                        return True
                    load[s] -= 1
                    del placed[id(node)]
            return False

        if fit(0):
            return candidate
    raise InternalError("no agent count up to %d works" % n)
