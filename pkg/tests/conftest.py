"""Shared fixtures and independent brute-force oracles.

The oracles re-derive satisfaction and satisfaction probability from first
principles (set recursion over indices; exhaustive enumeration of bin
trajectories) without touching the table evaluator or the DFA machinery,
so agreement is meaningful.
"""

import itertools
import random

import numpy as np
import pytest

from gtl.formula import (
    Always, And, Atom, Bound, EdgeAtom, Eventually, Exists, FalseF, Implies,
    Not, Or, TrueF, Until, parse,
)
from gtl.graph import GraphTemporalTrajectory, LabeledGraph, neighbor_op
from gtl.prior import PriorModel


@pytest.fixture
def six_node():
    """Six-node fixture with hand-checked neighbor operations:
    pi=(x<=0) holds at {v3, v6}; rho=(y>=2) holds
    at {e1, e4, e6, e8}; one y<=1 hop from v4 reaches {v1, v5} and two hops
    reach {v2, v4}; E2 via (y<=1): x>=1 holds exactly at {v4, v5}."""
    g = LabeledGraph(
        ["v1", "v2", "v3", "v4", "v5", "v6"],
        [
            ("e1", "v1", "v3"), ("e2", "v1", "v4"), ("e3", "v4", "v5"),
            ("e4", "v4", "v6"), ("e5", "v1", "v2"), ("e6", "v3", "v6"),
            ("e7", "v2", "v5"), ("e8", "v2", "v6"),
        ],
    )
    x = np.array([[1.0], [2.0], [0.0], [1.0], [3.0], [-1.0]])
    y = np.array([[2.0], [1.0], [1.0], [2.0], [1.8], [3.0], [1.0], [2.0]])
    return GraphTemporalTrajectory(g, x, y)


@pytest.fixture
def path3():
    """Three-node path a - b - c with three time steps."""
    g = LabeledGraph(["a", "b", "c"], [("e1", "a", "b"), ("e2", "b", "c")])
    x = np.array([[0.1, 0.9, 0.4], [0.8, 0.2, 0.6], [0.5, 0.5, 0.5]])
    y = np.array([[1.0, 1.0, 2.0], [2.0, 1.0, 1.0]])
    return GraphTemporalTrajectory(g, x, y)


# ---------------------------------------------------------------------------
# satisfaction oracle: direct recursion over (node, time)

def sat_oracle(traj, f, v, k):
    L = traj.L
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Atom):
        x = traj.node_label(v, k)
        return x <= f.threshold if f.op == "<=" else x >= f.threshold
    if isinstance(f, Not):
        return not sat_oracle(traj, f.sub, v, k)
    if isinstance(f, And):
        return sat_oracle(traj, f.left, v, k) and sat_oracle(traj, f.right, v, k)
    if isinstance(f, Or):
        return sat_oracle(traj, f.left, v, k) or sat_oracle(traj, f.right, v, k)
    if isinstance(f, Implies):
        return (not sat_oracle(traj, f.left, v, k)) or sat_oracle(traj, f.right, v, k)
    if isinstance(f, Exists):
        reach = neighbor_op(traj, {v}, k, [e.prop() for e in f.chain])
        hits = sum(1 for u in reach if sat_oracle(traj, f.body, u, k))
        return hits >= f.count
    if isinstance(f, (Eventually, Always, Until)):
        b = f.bound
        if b is not None and b.lo is not None and b.hi is not None:
            # a paired window is the conjunction of its single-sided halves
            halves = (Bound(b.lo, None), Bound(None, b.hi))
            if isinstance(f, Until):
                parts = [Until(f.left, f.right, h) for h in halves]
            else:
                parts = [type(f)(f.sub, h) for h in halves]
            return all(sat_oracle(traj, p, v, k) for p in parts)
        lo, hi = _window_oracle(L, k, b)
        if isinstance(f, Eventually):
            return any(sat_oracle(traj, f.sub, v, j) for j in range(lo, hi + 1))
        if isinstance(f, Always):
            return all(sat_oracle(traj, f.sub, v, j) for j in range(lo, hi + 1))
        for j in range(lo, hi + 1):
            if sat_oracle(traj, f.right, v, j) and all(
                    sat_oracle(traj, f.left, v, m) for m in range(k, j + 1)):
                return True
        return False
    raise TypeError(f)


def _window_oracle(L, k, bound):
    lo = k if bound is None or bound.lo is None else k + bound.lo
    hi = L if bound is None or bound.hi is None else min(k + bound.hi, L)
    return lo, hi


# ---------------------------------------------------------------------------
# probability oracle: exhaustive enumeration over refined-bin trajectories

def collect_thresholds(f):
    out = set()
    if isinstance(f, Atom):
        out.add(float(f.threshold))
    for attr in ("sub", "left", "right", "body"):
        g = getattr(f, attr, None)
        if g is not None:
            out |= collect_thresholds(g)
    return out


def prob_oracle_all(prior, f):
    """Per-node prior mass of all bin-cell trajectories satisfying f at time 1.

    Bins are refined at the formula's thresholds so each cell is constant."""
    cells = []
    for lo, hi in prior.bins:
        cuts = [lo] + sorted(t for t in collect_thresholds(f) if lo < t < hi) + [hi]
        for a, b in zip(cuts, cuts[1:]):
            cells.append((a, b, (lo, hi)))
    g = prior.graph
    V, L = g.n_nodes, prior.L
    binidx = {b: i for i, b in enumerate(prior.bins)}
    el = np.array([[prior.static_edge_labels[e]] * L for e in g.edges],
                  dtype=float).reshape(g.n_edges, L)
    totals = {v: 0.0 for v in g.nodes}
    for assign in itertools.product(range(len(cells)), repeat=V * L):
        mass = 1.0
        nl = np.zeros((V, L))
        for idx, c in enumerate(assign):
            u, k = divmod(idx, L)
            a, b, parent = cells[c]
            p = prior.node_pmf(g.nodes[u])[k][binidx[parent]]
            mass *= p * (b - a) / (parent[1] - parent[0])
            nl[u, k] = 0.5 * (a + b)
        if mass == 0.0:
            continue
        traj = GraphTemporalTrajectory(g, nl, el)
        for v in g.nodes:
            if sat_oracle(traj, f, v, 1):
                totals[v] += mass
    return totals


def prob_oracle(prior, f, v):
    return prob_oracle_all(prior, f)[v]


# ---------------------------------------------------------------------------
# random formula generator (shared by differential tests)

def random_formula(rng, depth, allow_exists=True):
    if depth == 0:
        if allow_exists and rng.random() < 0.3:
            return Exists(rng.choice([1, 2]),
                          (EdgeAtom("<=", rng.choice([1.0, 2.0])),),
                          Atom(rng.choice(["<=", ">="]), rng.choice([0.3, 0.6])))
        return Atom(rng.choice(["<=", ">="]), rng.choice([0.2, 0.5, 0.8]))
    kind = rng.choice(["not", "and", "or", "impl", "F", "G", "U", "Fb", "Gb", "Ub"])
    a = random_formula(rng, depth - 1, allow_exists)
    b = random_formula(rng, depth - 1, allow_exists)
    if kind == "not":
        return Not(a)
    if kind == "and":
        return And(a, b)
    if kind == "or":
        return Or(a, b)
    if kind == "impl":
        return Implies(a, b)
    if kind == "F":
        return Eventually(a)
    if kind == "G":
        return Always(a)
    if kind == "U":
        return Until(a, b)
    lo = rng.choice([None, 0, 1, 2])
    hi = rng.choice([None, 1, 3])
    if lo is None and hi is None:
        lo = 1
    if lo is not None and hi is not None and hi < lo:
        lo, hi = hi, lo
        if lo == hi:
            hi = lo + 1
    bound = Bound(lo, hi)
    if kind == "Fb":
        return Eventually(a, bound)
    if kind == "Gb":
        return Always(a, bound)
    return Until(a, b, bound)


def random_trajectory(rng_np, g, L, edge_scale=3.0):
    return GraphTemporalTrajectory(
        g, rng_np.random((g.n_nodes, L)), rng_np.random((g.n_edges, L)) * edge_scale)


def two_bin_prior(g, L, rng_np=None, edge_labels=None):
    """Uniform or random two-bin prior on [0, 2]."""
    if edge_labels is None:
        edge_labels = {e: 1.0 for e in g.edges}
    if rng_np is None:
        pmf = {v: np.tile([0.5, 0.5], (L, 1)) for v in g.nodes}
    else:
        pmf = {v: rng_np.dirichlet([1.5, 1.5], size=L) for v in g.nodes}
    return PriorModel(g, L, ((0.0, 1.0), (1.0, 2.0)), pmf, edge_labels)
