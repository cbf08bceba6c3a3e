"""Cut separation: find valid inequalities violated by a fractional point.

Four families, each a pure function of (instance, point):

* maximal-clique cuts: at most one of a maximal set of pairwise
  conflicting edges/duplications can be chosen.  Separated exactly over
  row windows via longest paths in a directed grid (pair graph) plus a
  prefix-sum table of duplication masses.
* duplication-island cuts: every gene subset must be entered by a match,
  a loss, or a duplication arc from outside (else the subset would copy
  itself into existence).  Separated in a coefficient-relaxed form by
  minimum s-t cuts in an auxiliary flow network.
* lifted duplication-cycle cuts: grouped cycle inequalities, separated
  in their single-position relaxation by shortest cycles in a
  position graph with nonnegative weights.
* plain duplication-cycle rows: all low-weight simple cycles of the
  duplication dependency digraph, used both as lazy constraints at
  integral points and by the iterative baseline.
"""

import heapq
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from duploss.ilp import GE, LE, LinearConstraint
from duploss.instance import SIDE_A, SIDE_B, SIDES, edges_incompatible
from duploss.tolerances import VIOLATION_EPS

MAX_CLIQUE = "MAX_CLIQUE"
DUP_ISLAND = "DUP_ISLAND"
LIFTED_CYCLE = "LIFTED_CYCLE"
PLAIN_CYCLE = "PLAIN_CYCLE"

#: Default per-class, per-round emission cap (strongest first).
MAX_CUTS_PER_CLASS = 50

#: y values below this cannot participate in a violated cycle.
_SUPPORT_EPS = 1e-12


@dataclass
class Cut:
    """One violated valid inequality in sparse row form."""

    row: LinearConstraint
    cut_class: str
    violation: float
    witness: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "class": self.cut_class,
            "violation": self.violation,
            "row": {
                "coeffs": [
                    {"kind": v.kind, "index": v.index, "coef": str(c)}
                    for v, c in self.row.coeffs
                ],
                "sense": self.row.sense,
                "rhs": str(self.row.rhs),
            },
            "witness": self.witness,
        }


# --- conflict predicates on the event graph -------------------------------


def edge_dup_incompatible(edge, dup):
    """An edge conflicts with a duplication whose target covers its endpoint."""
    pos = edge.i if dup.side == SIDE_A else edge.j
    return dup.target.contains(pos)


def dups_incompatible(d1, d2):
    """Same-side duplications conflict on overlapping targets or a mutual cycle."""
    if d1.side != d2.side:
        return False
    if d1.target.overlaps(d2.target):
        return True
    return d1.origin.overlaps(d2.target) and d2.origin.overlaps(d1.target)


# --- per-side static indexes ----------------------------------------------


class _SideView:
    """One genome's positions, with edges oriented as (row, column)."""

    def __init__(self, instance, side):
        self.side = side
        self.n = instance.length(side)
        other = SIDE_B if side == SIDE_A else SIDE_A
        self.m = instance.length(other)

        self.edge_grid = {}
        self.edge_idxs_at = [[] for _ in range(self.n + 1)]
        for idx, e in enumerate(instance.edges):
            row, col = (e.i, e.j) if side == SIDE_A else (e.j, e.i)
            self.edge_grid[(row, col)] = idx
            self.edge_idxs_at[row].append(idx)

        self.loss_idx_at = np.zeros(self.n + 1, dtype=np.int64)
        for idx, l in enumerate(instance.losses):
            if l.side == side:
                self.loss_idx_at[l.position] = idx

        self.dups = []
        self.dup_global = []
        for idx, d in enumerate(instance.dups):
            if d.side == side:
                self.dups.append(d)
                self.dup_global.append(idx)
        self.dup_global = np.array(self.dup_global, dtype=np.int64)
        self.t_start = np.array([d.target.start for d in self.dups], dtype=np.int64)
        self.t_end = np.array([d.target.end for d in self.dups], dtype=np.int64)

        # position-aligned origin->target arcs: k-th origin gene feeds
        # the k-th target gene
        self.aligned = {}
        for local, d in enumerate(self.dups):
            for k in range(d.origin.size):
                pair = (d.origin.start + k, d.target.start + k)
                self.aligned.setdefault(pair, []).append(local)

    def cover_mass(self, x_vals, z_vals):
        """Per position: loss value plus total edge value (the non-dup cover)."""
        mass = np.zeros(self.n + 1)
        for pos in range(1, self.n + 1):
            mass[pos] = z_vals[self.loss_idx_at[pos]] + sum(
                x_vals[k] for k in self.edge_idxs_at[pos]
            )
        return mass

    def dup_values(self, y_vals):
        if len(self.dup_global) == 0:
            return np.zeros(0)
        return y_vals[self.dup_global]


class SeparationContext:
    """Instance-derived indexes shared by all separators; build once per solve."""

    def __init__(self, instance):
        self.instance = instance
        self.views = {side: _SideView(instance, side) for side in SIDES}


# --- maximal clique separation ---------------------------------------------


def _pair_graph_clique(view, x_vals, l_b, l_e, m_b, m_e):
    """Max-weight maximal staircase through the grid window.

    Paths run from (l_b, m_e) to (l_e, m_b), moving down rows or left
    along columns; grid nodes carrying an alignment edge are essential.
    Every such path's essential nodes form a maximal set of pairwise
    conflicting edges inside the window.  Returns (edges, weight).
    """
    neg = float("-inf")
    value = {}
    came_up = {}
    for p in range(l_b, l_e + 1):
        for q in range(m_e, m_b - 1, -1):
            eidx = view.edge_grid.get((p, q))
            w = x_vals[eidx] if eidx is not None else 0.0
            up = value.get((p - 1, q), neg) if p > l_b else (0.0 if q == m_e else neg)
            left = value.get((p, q + 1), neg)
            if p == l_b and q == m_e:
                value[(p, q)] = w
                came_up[(p, q)] = None
            elif up >= left:
                value[(p, q)] = w + up
                came_up[(p, q)] = True
            else:
                value[(p, q)] = w + left
                came_up[(p, q)] = False
    # walk back from the sink collecting essential nodes
    edges = []
    p, q = l_e, m_b
    while True:
        eidx = view.edge_grid.get((p, q))
        if eidx is not None:
            edges.append(eidx)
        step = came_up[(p, q)]
        if step is None:
            break
        if step:
            p -= 1
        else:
            q += 1
    edges.reverse()
    return edges, value[(l_e, m_b)]


def max_weight_maximal_clique(instance, point, l_b, l_e, m_b, m_e, ctx=None):
    """Best-weight maximal set of pairwise conflicting edges in a window.

    Rows index the first genome, columns the second; weights are current
    edge variable values.  The returned set is maximal within the window.
    """
    ctx = ctx or SeparationContext(instance)
    view = ctx.views[SIDE_A]
    if not (1 <= l_b <= l_e <= view.n and 1 <= m_b <= m_e <= view.m):
        raise ValueError("window out of range")
    x_vals = point.match_values()
    idxs, weight = _pair_graph_clique(view, x_vals, l_b, l_e, m_b, m_e)
    return [instance.edges[k] for k in idxs], weight


def _sigma_matrix(view, y_side):
    """sigma[i][j] = total duplication value whose target covers [i, j]."""
    n = view.n
    exact = np.zeros((n + 2, n + 2))
    if len(view.dups):
        np.add.at(exact, (view.t_start, view.t_end), y_side)
    # pi[i][j]: targets starting exactly at i, ending at j or later
    pi = np.flip(np.cumsum(np.flip(exact, axis=1), axis=1), axis=1)
    # accumulate over starts <= i
    return np.cumsum(pi, axis=0)


def _clique_window_values(view, x_vals):
    """col1[l_b][l_e] = best window-clique edge weight for each row window.

    One longest-path sweep per starting row; within a sweep each row is a
    right-to-left scan done with suffix sums and suffix maxima.
    """
    n, m = view.n, view.m
    weights = np.zeros((n + 1, m + 2))
    for (p, q), eidx in view.edge_grid.items():
        weights[p][q] = x_vals[eidx]
    tables = np.zeros((n + 1, n + 1))
    for l_b in range(1, n + 1):
        prev = None
        for p in range(l_b, n + 1):
            w = weights[p]
            cs = np.zeros(m + 2)
            if m:
                cs[1: m + 1] = np.cumsum(w[1: m + 1][::-1])[::-1]
            if prev is None:
                cur = cs[1: m + 1].copy()
            else:
                gain = prev - cs[2: m + 2]
                suffmax = np.maximum.accumulate(gain[::-1])[::-1]
                cur = cs[1: m + 1] + suffmax
            tables[l_b][p] = cur[0] if m else 0.0
            prev = cur
    return tables


def _complete_clique(instance, edges, dups):
    """Greedily extend a conflict clique so no event can be added."""
    members_e = list(edges)
    members_d = list(dups)

    def conflicts_all(cand_edge=None, cand_dup=None):
        if cand_edge is not None:
            for e in members_e:
                if e is not cand_edge and not edges_incompatible(e, cand_edge):
                    return False
            for d in members_d:
                if not edge_dup_incompatible(cand_edge, d):
                    return False
        else:
            for e in members_e:
                if not edge_dup_incompatible(e, cand_dup):
                    return False
            for d in members_d:
                if d is not cand_dup and not dups_incompatible(d, cand_dup):
                    return False
        return True

    member_set = set(members_e)
    for e in instance.edges:
        if e not in member_set and conflicts_all(cand_edge=e):
            members_e.append(e)
            member_set.add(e)
    dup_set = set(members_d)
    for d in instance.dups:
        if d not in dup_set and conflicts_all(cand_dup=d):
            members_d.append(d)
            dup_set.add(d)
    return members_e, members_d


def separate_max_clique(instance, point, ctx=None, eps=VIOLATION_EPS,
                        max_cuts=MAX_CUTS_PER_CLASS, model=None):
    """Violated maximal-clique inequalities over all row windows of both sides."""
    ctx = ctx or SeparationContext(instance)
    model = model or _require_model(point)
    x_vals = point.match_values()
    y_vals = point.dup_values()

    candidates = []
    for side in SIDES:
        view = ctx.views[side]
        if view.n < 2:
            continue
        sigma = _sigma_matrix(view, view.dup_values(y_vals))
        tables = _clique_window_values(view, x_vals)
        for l_b in range(1, view.n):
            window = tables[l_b][l_b + 1:] + sigma[l_b][l_b + 1: view.n + 1]
            # keep only the most violated window per starting row; nested
            # windows mostly reproduce the same clique
            off = int(np.argmax(window))
            if window[off] > 1.0 + eps:
                l_e = l_b + 1 + off
                candidates.append((float(window[off] - 1.0), side, l_b, l_e))

    candidates.sort(key=lambda t: (-t[0], t[1], t[2], t[3]))
    cuts = []
    seen = set()
    for _, side, l_b, l_e in candidates[: 4 * max_cuts]:
        view = ctx.views[side]
        edge_idxs, _ = _pair_graph_clique(view, x_vals, l_b, l_e, 1, view.m)
        edges = [instance.edges[k] for k in edge_idxs]
        dups = [
            d for d in view.dups
            if d.target.start <= l_b and d.target.end >= l_e
        ]
        edges, dups = _complete_clique(instance, edges, dups)
        coeffs = {model.match_var(e): 1 for e in edges}
        coeffs.update({model.dup_var(d): 1 for d in dups})
        row = LinearConstraint.make(coeffs, LE, 1, "clique")
        if row.key() in seen:
            continue
        violation = row.violation(point.value)
        if violation <= eps:
            continue
        seen.add(row.key())
        cuts.append(
            Cut(row, MAX_CLIQUE, violation,
                {"side": side, "window": [l_b, l_e]})
        )
        if len(cuts) >= max_cuts:
            break
    cuts.sort(key=lambda c: -c.violation)
    return cuts


def _require_model(point):
    if getattr(point, "model", None) is None:
        raise ValueError("separation needs a model-backed point")
    return point.model


# --- max flow / min cut -----------------------------------------------------


class FlowNetwork:
    """Capacitated digraph; parallel arcs are merged by capacity."""

    def __init__(self, num_nodes):
        self.num_nodes = num_nodes
        self.capacity = {}

    def add_arc(self, u, v, cap):
        if u == v or cap <= 0:
            return
        self.capacity[(u, v)] = self.capacity.get((u, v), 0.0) + float(cap)


def max_flow_min_cut(network, s, t, stop_at=None):
    """Preflow push-relabel maximum flow; returns (value, sink_side).

    ``sink_side`` is the t-side of a minimum cut.  With ``stop_at`` the
    search aborts once that much flow provably reaches the sink, and the
    sink side is reported as None (callers use this for "no violated
    cut here" short-circuits).
    """
    n = network.num_nodes
    arc_to, arc_cap, adj = [], [], [[] for _ in range(n)]

    def push_arc(u, v, cap):
        adj[u].append(len(arc_to))
        arc_to.append(v)
        arc_cap.append(cap)

    for (u, v), cap in sorted(network.capacity.items()):
        push_arc(u, v, cap)
        push_arc(v, u, 0.0)

    eps = 1e-12
    height = [0] * n
    excess = [0.0] * n
    current = [0] * n
    height[s] = n

    for aid in adj[s]:
        cap = arc_cap[aid]
        if cap > eps:
            v = arc_to[aid]
            arc_cap[aid] = 0.0
            arc_cap[aid ^ 1] += cap
            excess[v] += cap
            excess[s] -= cap

    queue = deque(v for v in range(n) if v not in (s, t) and excess[v] > eps)
    in_queue = [False] * n
    for v in queue:
        in_queue[v] = True

    if stop_at is not None and excess[t] >= stop_at:
        return excess[t], None
    while queue:
        if stop_at is not None and excess[t] >= stop_at:
            return excess[t], None
        u = queue.popleft()
        in_queue[u] = False
        while excess[u] > eps:
            if current[u] == len(adj[u]):
                # relabel
                best = None
                for aid in adj[u]:
                    if arc_cap[aid] > eps:
                        h = height[arc_to[aid]]
                        best = h if best is None else min(best, h)
                if best is None or best + 1 > 2 * n:
                    break
                height[u] = best + 1
                current[u] = 0
                continue
            aid = adj[u][current[u]]
            v = arc_to[aid]
            if arc_cap[aid] > eps and height[u] == height[v] + 1:
                send = min(excess[u], arc_cap[aid])
                arc_cap[aid] -= send
                arc_cap[aid ^ 1] += send
                excess[u] -= send
                excess[v] += send
                if v not in (s, t) and not in_queue[v]:
                    queue.append(v)
                    in_queue[v] = True
            else:
                current[u] += 1

    # source side = residual-reachable from s
    reach = [False] * n
    reach[s] = True
    stack = [s]
    while stack:
        u = stack.pop()
        for aid in adj[u]:
            v = arc_to[aid]
            if arc_cap[aid] > eps and not reach[v]:
                reach[v] = True
                stack.append(v)
    sink_side = frozenset(v for v in range(n) if not reach[v])
    if stop_at is not None and excess[t] >= stop_at:
        return excess[t], None
    return excess[t], sink_side


# --- duplication island separation ------------------------------------------


def _island_base_arcs(view, y_side):
    """Origin-to-target arcs weighted by total duplication value."""
    arcs = {}
    for (u, v), locals_ in view.aligned.items():
        w = float(sum(y_side[k] for k in locals_))
        if w > 0:
            arcs[(u, v)] = w
    return arcs


def _island_cut_row(instance, view, model, subset):
    """The reachability inequality for node set S, with arc multiplicities.

    A duplication counts once per aligned arc it contributes across the
    cut into S; matches and losses of S count once each.
    """
    coeffs = {}
    for pos in subset:
        coeffs[model.loss_var(instance.losses[view.loss_idx_at[pos]])] = 1
        for k in view.edge_idxs_at[pos]:
            coeffs[model.match_var(instance.edges[k])] = 1
    for local, d in enumerate(view.dups):
        alpha = 0
        for k in range(d.origin.size):
            u, v = d.origin.start + k, d.target.start + k
            if u not in subset and v in subset:
                alpha += 1
        if alpha:
            coeffs[model.dup_var(d)] = alpha
    return LinearConstraint.make(coeffs, GE, 1, "island")


def separate_dup_island(instance, point, ctx=None, eps=VIOLATION_EPS,
                        max_cuts=MAX_CUTS_PER_CLASS, model=None):
    """Violated (coefficient-relaxed) island inequalities via min cuts.

    For a fixed anchor node, min cuts to every other node cover all
    candidate subsets avoiding the anchor; min cuts from every other
    node's own network back to the anchor cover the subsets containing
    it: two flows per non-anchor node in total.
    """
    ctx = ctx or SeparationContext(instance)
    model = model or _require_model(point)
    x_vals = point.match_values()
    z_vals = point.loss_values()
    y_vals = point.dup_values()
    threshold = 1.0 - eps

    cuts = []
    seen = set()
    for side in SIDES:
        view = ctx.views[side]
        n = view.n
        if n < 2:
            continue
        mass = view.cover_mass(x_vals, z_vals)
        weak = [v for v in range(1, n + 1) if mass[v] < threshold]
        if not weak:
            continue
        base = _island_base_arcs(view, view.dup_values(y_vals))

        def network_with_source(w):
            net = FlowNetwork(n + 1)
            for (u, v), cap in base.items():
                net.add_arc(u, v, cap)
            for v in range(1, n + 1):
                if v != w:
                    net.add_arc(w, v, mass[v])
            return net

        anchor = 1
        found = set()
        net_anchor = network_with_source(anchor)
        for t in weak:
            if t == anchor:
                continue
            value, sink_side = max_flow_min_cut(net_anchor, anchor, t, stop_at=threshold)
            if sink_side is not None and value < threshold:
                found.add(frozenset(p for p in sink_side if 1 <= p <= n))
        if mass[anchor] < threshold:
            for t in range(1, n + 1):
                if t == anchor:
                    continue
                value, sink_side = max_flow_min_cut(
                    network_with_source(t), t, anchor, stop_at=threshold
                )
                if sink_side is not None and value < threshold:
                    found.add(frozenset(p for p in sink_side if 1 <= p <= n))

        for subset in sorted(found, key=sorted):
            if not subset:
                continue
            row = _island_cut_row(instance, view, model, subset)
            if row.key() in seen:
                continue
            violation = row.violation(point.value)
            if violation <= eps:
                continue
            seen.add(row.key())
            cuts.append(
                Cut(row, DUP_ISLAND, violation,
                    {"side": side, "island": sorted(subset)})
            )
    cuts.sort(key=lambda c: (-c.violation, c.witness["side"], c.witness["island"]))
    return cuts[:max_cuts]


# --- lifted duplication cycle separation -------------------------------------


def _position_arcs(view, y_side):
    """Arcs (i, j) with weight 1 - sum of y over duplications copying i to j.

    Only duplications with positive value can create an arc light enough
    to appear on a cycle of weight below one, so the support suffices for
    search; emitted rows are rebuilt over all candidates.
    """
    mass = {}
    for local, d in enumerate(view.dups):
        y = y_side[local]
        if y <= _SUPPORT_EPS:
            continue
        for i in d.origin.positions():
            for j in d.target.positions():
                mass[(i, j)] = mass.get((i, j), 0.0) + float(y)
    return {
        pair: max(0.0, 1.0 - total)
        for pair, total in mass.items()
    }


def _shortest_cycles(arcs, limit):
    """Best closed walk through every start node, Dijkstra per start.

    Returns position cycles (node lists) of total weight below ``limit``,
    deduplicated by rotation to the smallest start.
    """
    out_arcs = {}
    in_arcs = {}
    for (u, v), w in arcs.items():
        out_arcs.setdefault(u, []).append((v, w))
        in_arcs.setdefault(v, []).append((u, w))
    for lst in out_arcs.values():
        lst.sort()
    starts = sorted(set(out_arcs) & set(in_arcs))

    seen_keys = set()
    cycles = []
    for start in starts:
        dist = {start: 0.0}
        parent = {}
        heap = [(0.0, start)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist.get(u, float("inf")) or d >= limit:
                continue
            for v, w in out_arcs.get(u, ()):
                nd = d + w
                if nd < limit and nd < dist.get(v, float("inf")) - 1e-15:
                    dist[v] = nd
                    parent[v] = u
                    heapq.heappush(heap, (nd, v))
        best = None
        for u, w in in_arcs.get(start, ()):
            if u in dist and dist[u] + w < limit:
                total = dist[u] + w
                if best is None or total < best[0] or (total == best[0] and u < best[1]):
                    best = (total, u)
        if best is None:
            continue
        node = best[1]
        path = [node]
        while node != start:
            node = parent[node]
            path.append(node)
        path.reverse()
        shift = path.index(min(path))
        key = tuple(path[shift:] + path[:shift])
        if key not in seen_keys:
            seen_keys.add(key)
            cycles.append(path)
    return cycles


def separate_lifted_cycle(instance, point, ctx=None, eps=VIOLATION_EPS,
                          max_cuts=MAX_CUTS_PER_CLASS, model=None):
    """Violated single-position lifted cycle inequalities via shortest cycles.

    A closed walk through positions i_1..i_t of weight below one yields
    the inequality: summing, over consecutive pairs, the variables of all
    duplications copying i_j into i_{j+1} cannot reach t.
    """
    ctx = ctx or SeparationContext(instance)
    model = model or _require_model(point)
    y_vals = point.dup_values()

    cuts = []
    seen = set()
    for side in SIDES:
        view = ctx.views[side]
        y_side = view.dup_values(y_vals)
        arcs = _position_arcs(view, y_side)
        arcs = {pair: w for pair, w in arcs.items() if w < 1.0 - eps}
        if not arcs:
            continue
        for cycle in _shortest_cycles(arcs, 1.0 - eps):
            coeffs = {}
            groups = []
            for k, i in enumerate(cycle):
                j = cycle[(k + 1) % len(cycle)]
                group = [
                    d for d in view.dups
                    if d.origin.contains(i) and d.target.contains(j)
                ]
                groups.append(group)
                for d in group:
                    var = model.dup_var(d)
                    coeffs[var] = coeffs.get(var, 0) + 1
            row = LinearConstraint.make(coeffs, LE, len(cycle) - 1, "lifted_cycle")
            if row.key() in seen:
                continue
            violation = row.violation(point.value)
            if violation <= eps:
                continue
            seen.add(row.key())
            cuts.append(
                Cut(row, LIFTED_CYCLE, violation,
                    {"side": side, "positions": list(cycle)})
            )
    cuts.sort(key=lambda c: (-c.violation, c.witness["side"], c.witness["positions"]))
    return cuts[:max_cuts]


# --- plain duplication cycle enumeration -------------------------------------


def enumerate_violated_cycles(instance, point, ctx=None, budget=10_000,
                              max_states=200_000, model=None):
    """All simple duplication cycles of weight below one at the point.

    Nodes are duplications with positive value; an arc leaves d towards
    every duplication whose origin overlaps d's target and carries weight
    1 - y(d).  Each cycle yields the row "at most all-but-one of these
    duplications".  Returns (cuts, truncated).
    """
    ctx = ctx or SeparationContext(instance)
    model = model or _require_model(point)
    y_vals = point.dup_values()

    cuts = []
    truncated = False
    states = [0]
    for side in SIDES:
        view = ctx.views[side]
        y_side = view.dup_values(y_vals)
        support = [k for k in range(len(view.dups)) if y_side[k] > _SUPPORT_EPS]
        if not support:
            continue
        weight = {k: 1.0 - float(y_side[k]) for k in support}
        adj = {}
        for a in support:
            da = view.dups[a]
            adj[a] = sorted(
                b for b in support
                if b != a and view.dups[b].origin.overlaps(da.target)
            )

        order = {k: r for r, k in enumerate(sorted(support))}
        found = []

        def dfs(start, node, acc, path, on_path):
            nonlocal truncated
            states[0] += 1
            if truncated or states[0] > max_states:
                truncated = True
                return
            for nxt in adj[node]:
                if order[nxt] < order[start] or nxt in on_path:
                    if nxt == start and acc < 1.0 - 1e-9:
                        found.append(list(path))
                        if len(found) + len(cuts) > budget:
                            truncated = True
                            return
                    continue
                nacc = acc + weight[nxt]
                if nacc >= 1.0 - 1e-9:
                    continue
                path.append(nxt)
                on_path.add(nxt)
                dfs(start, nxt, nacc, path, on_path)
                path.pop()
                on_path.remove(nxt)

        for start in sorted(support):
            if weight[start] >= 1.0 - 1e-9:
                continue
            dfs(start, start, weight[start], [start], {start})
            if truncated:
                break

        for path in found:
            dups = [view.dups[k] for k in path]
            row = LinearConstraint.make(
                {model.dup_var(d): 1 for d in dups}, LE, len(dups) - 1, "cycle"
            )
            violation = row.violation(point.value)
            cuts.append(
                Cut(row, PLAIN_CYCLE, violation,
                    {"side": side, "cycle_size": len(dups)})
            )
    cuts.sort(key=lambda c: -c.violation)
    return cuts, truncated
