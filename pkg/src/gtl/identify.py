"""Information-guided parameter identification by monotone front search.

Template parameters are normalized to [0,1]^z so that larger coordinates
always make the formula easier to satisfy (polarity-aware affine maps).
The coverage-feasible region is then up-closed and its minimal front is
approximated by binary-search queries issued from the knee points of the
known-infeasible staircase; the returned valuation maximizes average
information gain over the approximated front.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, UsageError
from .formula import polarity, print_formula
from .prior import PriorModel, compute_ig
from .semantics import coverage
from .templates import ParamSpec, Template

_ROUND = 12  # normalized coordinates are rounded to stabilize set membership


# ---------------------------------------------------------------------------
# normalization

def _axes(template: Template):
    """(ordered free parameter names, pinned valuation for frozen ones)."""
    pinned = {}
    free = []
    for name in template.param_names:
        spec = template.box[name]
        if spec.frozen:
            pinned[name] = spec.grid()[0] if spec.kind == "integer" else spec.min
        else:
            free.append(name)
    return free, pinned


def _polarities(template: Template, names):
    pols = {}
    for name in names:
        p = polarity(template.formula, name)
        if p not in ("+", "-"):
            raise InputError(
                f"parameter {name!r} has polarity {p!r} in {print_formula(template.formula)}; "
                "identification needs every parameter monotone (+ or -)"
            )
        pols[name] = p
    return pols


def map_pi(theta, box, polarities, names=None) -> tuple:
    """Normalize a valuation to [0,1]^z; larger always means easier."""
    if names is None:
        names = [n for n in box if not box[n].frozen]
    out = []
    for name in names:
        spec = box[name]
        if spec.kind == "integer":
            grid = spec.grid()
            try:
                idx = grid.index(int(round(theta[name])))
            except ValueError:
                raise InputError(f"{theta[name]} is not admissible for {name!r}")
            w = idx / (len(grid) - 1)
        else:
            w = (theta[name] - spec.min) / (spec.max - spec.min)
        if polarities[name] == "-":
            w = 1.0 - w
        if not -1e-9 <= w <= 1 + 1e-9:
            raise InputError(f"{name!r}={theta[name]} lies outside its box")
        out.append(round(min(max(w, 0.0), 1.0), _ROUND))
    return tuple(out)


def map_pi_inv(omega, box, polarities, names=None) -> dict:
    """Map a normalized point back to a valuation; integers snap to the grid."""
    if names is None:
        names = [n for n in box if not box[n].frozen]
    if len(omega) != len(names):
        raise UsageError(f"point has {len(omega)} coordinates, expected {len(names)}")
    theta = {}
    for w, name in zip(omega, names):
        spec = box[name]
        if polarities[name] == "-":
            w = 1.0 - w
        if spec.kind == "integer":
            grid = spec.grid()
            theta[name] = grid[int(round(w * (len(grid) - 1)))]
        else:
            theta[name] = spec.min + w * (spec.max - spec.min)
    return theta


def snap(omega, box, polarities, names) -> tuple:
    """Round integer coordinates of a normalized point onto their grid."""
    out = []
    for w, name in zip(omega, names):
        w = min(max(w, 0.0), 1.0)
        spec = box[name]
        if spec.kind == "integer":
            n = len(spec.grid())
            w = round(w * (n - 1)) / (n - 1)
        out.append(round(w, _ROUND))
    return tuple(out)


# ---------------------------------------------------------------------------
# staircase geometry

def _dominates(a, b):
    """a >= b componentwise."""
    return all(x >= y for x, y in zip(a, b))


def _strictly_dominates(a, b):
    return all(x > y for x, y in zip(a, b))


def _maximal(points):
    pts = list(points)
    return [p for p in pts if not any(q != p and _dominates(q, p) for q in pts)]


def _minimal(points):
    pts = list(points)
    return [p for p in pts if not any(q != p and _dominates(p, q) for q in pts)]


def directed_hausdorff(S, S2) -> float:
    """max over s in S of min over s' in S2 of the one-sided coordinate gap.

    The per-coordinate distance is s_i - s'_i when positive, else 0: how far
    s sits above s' in the easyness order.
    """
    S, S2 = list(S), list(S2)
    if not S or not S2:
        raise UsageError("directed_hausdorff needs nonempty sets")
    return max(min(max((si - ti if si > ti else 0.0) for si, ti in zip(s, t))
                   for t in S2) for s in S)


def knee_points(unsat_points, z=None, cap: int = 100_000) -> list:
    """Knees of the staircase below the maximal infeasible points.

    Candidates take each coordinate from the maximal points' values (plus 0);
    a candidate is a knee when it lies under some maximal point and no
    maximal point exceeds it in every coordinate.  Weakly dominated knees
    are kept — they never win the query-radius argmax.
    """
    M = _maximal(unsat_points)
    if not M:
        if z is None:
            raise UsageError("need the dimension to produce the trivial knee")
        return [(0.0,) * z]
    z = len(M[0])
    coords = [sorted({m[i] for m in M} | {0.0}, reverse=True) for i in range(z)]
    knees = []
    truncated = False

    def rec(prefix):
        nonlocal truncated
        if len(knees) >= cap:
            truncated = True
            return
        i = len(prefix)
        if i == z:
            if not any(_strictly_dominates(m, prefix) for m in M):
                knees.append(tuple(prefix))
            return
        for c in coords[i]:
            # prune branches that already left the down-closure
            if any(all(m[j] >= prefix[j] for j in range(i)) and m[i] >= c for m in M):
                rec(prefix + [c])

    rec([])
    if truncated:
        warnings.warn(f"knee enumeration truncated at {cap} points")
    return knees


def _gap_to_front(point, front) -> float:
    """How far the satisfying front sits above the point (one-sided, min over front)."""
    return min(max((ti - si if ti > si else 0.0) for si, ti in zip(point, t))
               for t in front)


# ---------------------------------------------------------------------------
# the identification loop

@dataclass
class TemplateResult:
    template: Template
    feasible: bool
    reason: str = ""
    formula: object = None
    valuation: dict = field(default_factory=dict)
    omega: tuple = ()
    coverage: float = 0.0
    average_ig: float = 0.0
    info_gain: dict = field(default_factory=dict)
    front: list = field(default_factory=list)
    n_queries: int = 0
    achieved_gap: float = float("inf")
    approximate: bool = False
    query_log: list = field(default_factory=list)


@dataclass
class IdentifyReport:
    results: list  # TemplateResult, sorted by average IG, feasible first

    @property
    def best(self):
        for r in self.results:
            if r.feasible:
                return r
        return None


def identify(trajectories, prior: PriorModel, templates, p_th: float = 0.98,
             eps: float = 0.05, budget: int = 500, cap: int = 10 ** 6) -> IdentifyReport:
    """Per template: approximate the minimal coverage-feasible front, then
    return the front point with maximal average information gain."""
    if not 0 < p_th <= 1:
        raise InputError("p_th must be in (0, 1]")
    if not 0 < eps < 1:
        raise InputError("eps must be in (0, 1)")
    if not trajectories:
        raise UsageError("empty trajectory set")
    results = [_identify_one(trajectories, prior, t, p_th, eps, budget, cap)
               for t in templates]
    results.sort(key=lambda r: (not r.feasible, -r.average_ig))
    return IdentifyReport(results=results)


def _identify_one(trajs, prior, template, p_th, eps, budget, cap):
    res = TemplateResult(template=template, feasible=False)
    try:
        names, pinned = _axes(template)
        pols = _polarities(template, names)
    except InputError as exc:
        res.reason = str(exc)
        return res
    box = template.box
    z = len(names)

    known = {}  # omega -> coverage

    def query(omega):
        theta = map_pi_inv(omega, box, pols, names)
        theta.update(pinned)
        f = template.instantiate(theta)
        cov = coverage(trajs, f)
        known[omega] = cov
        res.query_log.append({"omega": list(omega), "theta": dict(theta), "coverage": cov})
        res.n_queries += 1
        return cov

    one = snap((1.0,) * z, box, pols, names)
    zero = snap((0.0,) * z, box, pols, names)
    cov1 = query(one)
    if cov1 < p_th:
        res.reason = (f"even the easiest corner reaches coverage {cov1:.4f} "
                      f"< p_th={p_th}")
        res.coverage = cov1
        return res
    sat_pts = {one}
    unsat_pts = {zero} if zero != one else set()

    stalled = set()
    while res.n_queries < budget:
        front = _minimal(sat_pts)
        knees = knee_points(unsat_pts, z=z) if unsat_pts else [zero]
        ranked = sorted(((_gap_to_front(k, front), k) for k in knees
                         if k not in stalled),
                        key=lambda t: (-t[0], t[1]))
        if not ranked or ranked[0][0] <= eps:
            res.achieved_gap = ranked[0][0] if ranked else 0.0
            break
        progressed = False
        for r, kn in ranked:
            if r <= eps:
                break
            cand = _fresh_candidate(kn, r, box, pols, names, known,
                                    sat_pts, unsat_pts)
            if cand is None:
                stalled.add(kn)
                continue
            cov = query(cand)
            if cov >= p_th:
                sat_pts.add(cand)
            else:
                unsat_pts.add(cand)
            stalled.clear()
            progressed = True
            break
        if not progressed:
            # every knee above eps is unresolvable at grid resolution
            res.achieved_gap = ranked[0][0]
            res.approximate = True
            break
    else:
        front = _minimal(sat_pts)
        knees = knee_points(unsat_pts, z=z) if unsat_pts else [zero]
        res.achieved_gap = max(_gap_to_front(k, front) for k in knees)
        res.approximate = res.achieved_gap > eps

    front = _minimal(sat_pts)
    if res.achieved_gap == float("inf"):
        knees = knee_points(unsat_pts, z=z) if unsat_pts else [zero]
        res.achieved_gap = max(_gap_to_front(k, front) for k in knees)

    best = None
    for omega in sorted(front):
        theta = map_pi_inv(omega, box, pols, names)
        theta.update(pinned)
        f = template.instantiate(theta)
        rep = compute_ig(prior, f, cap=cap)
        if best is None or rep.average_ig > best[0] + 1e-15:
            best = (rep.average_ig, omega, theta, f, rep)
    avg_ig, omega, theta, f, rep = best
    res.feasible = True
    res.formula = f
    res.valuation = theta
    res.omega = omega
    res.coverage = known[omega] if omega in known else coverage(trajs, f)
    res.average_ig = avg_ig
    res.info_gain = rep.info_gain
    res.front = [list(w) for w in sorted(front)]
    return res


def _fresh_candidate(knee, r, box, pols, names, known, sat_pts, unsat_pts):
    """knee + r/2 on every coordinate, halving the step until the snapped
    point is new and not already classified by monotonicity."""
    step = r / 2
    while step > 1e-9:
        cand = snap(tuple(min(w + step, 1.0) for w in knee), box, pols, names)
        informative = (
            cand not in known
            and not any(_dominates(cand, s) for s in sat_pts)
            and not any(_dominates(u, cand) for u in unsat_pts)
        )
        if informative:
            return cand
        step /= 2
    return None
