"""End-to-end solution pipelines over reduced lex Groebner bases.

The work split: `rational_roots` extracts the rational roots of a univariate
polynomial exactly; `extend` pushes a partial assignment one variable further
down the solve order; `enumerate_variety` runs the breadth-first extension
through whole variable blocks; `pareto_filter` keeps the nondominated vectors.
On top of those sit the pipelines: `solve_alg1` (slack/objective/decision
enumeration), `solve_via_conditions` (optimality-conditions systems solved for
the decision block only), and the independent `brute_force` oracle.

All arithmetic is exact. Every pipeline finishes with the same internal audit:
points must be feasible, objective values must match, and the reported value
set must be mutually nondominated. A violation raises SolverIntegrityError
instead of returning a defective result.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterable, Mapping, Sequence, Tuple

from .groebner import (
    DEFAULT_STEP_BUDGET,
    GroebnerBasis,
    Ideal,
    buchberger,
    elimination_subset,
)
from .poly import BLOCK_X, BLOCK_Y, Polynomial
from .systems import (
    SLACK_LINEAR,
    ProblemInstance,
    TransformedSystem,
    build_alg1,
    build_fj,
    build_kkt,
    build_mofj,
    build_nr,
    slack_transform,
    system_stats,
)

BRUTE_FORCE_CAP = 20

_ZERO = Fraction(0)
_ONE = Fraction(1)

CONDITION_KINDS = ("kkt", "fj", "mofj")


class AmbiguousExtensionError(RuntimeError):
    """Every relevant basis element vanished when specializing a variable that
    is not a decision variable, so no finite candidate set can be derived."""


class SolverIntegrityError(RuntimeError):
    """An internal consistency guarantee failed (for example a decision
    variable with a root outside {0,1}); the result would be unreliable."""


class BruteForceCapExceeded(ValueError):
    """The instance has more decision variables than the enumeration cap."""


@dataclass(frozen=True)
class PartialSolution:
    """Assignment for a prefix of a system's solve order."""

    assignment: Tuple[Tuple[str, Fraction], ...] = ()

    def mapping(self) -> dict:
        return dict(self.assignment)

    def extended(self, name: str, value: Fraction) -> "PartialSolution":
        return PartialSolution(self.assignment + ((name, value),))


@dataclass(frozen=True)
class EfficientPoint:
    decision: Tuple[Fraction, ...]
    value: Tuple[Fraction, ...]
    origin: str


@dataclass(frozen=True)
class ParetoResult:
    status: str  # "solved" or "infeasible"
    points: Tuple[EfficientPoint, ...]

    @property
    def X_E(self) -> tuple:
        return tuple(pt.decision for pt in self.points)

    @property
    def Y_E(self) -> tuple:
        return tuple(sorted({pt.value for pt in self.points}))

    def to_record(self) -> dict:
        return {
            "status": self.status,
            "points": [
                {
                    "decision": [str(c) for c in pt.decision],
                    "value": [str(c) for c in pt.value],
                    "origin": pt.origin,
                }
                for pt in self.points
            ],
        }


# ---------------------------------------------------------------------------
# univariate rational root extraction


def _primitive(coeffs: Sequence[int]) -> list:
    g = 0
    for c in coeffs:
        g = gcd(g, c)
        if g == 1:
            break
    if g == 0:
        return list(coeffs)
    if coeffs[-1] < 0:
        g = -g
    return [c // g for c in coeffs]


def _poly_eval_frac(coeffs: Sequence, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _pseudo_rem(A: list, B: list) -> list:
    """Primitive pseudo-remainder of A by B (integer lists, ascending)."""
    R = list(A)
    db = len(B) - 1
    lb = B[-1]
    while len(R) - 1 >= db and any(R):
        dr = len(R) - 1
        if R[-1] == 0:
            R.pop()
            continue
        lr = R[-1]
        g = gcd(lr, lb)
        mul_r = lb // g
        mul_b = lr // g
        shift = dr - db
        R = [c * mul_r for c in R]
        for i, c in enumerate(B):
            R[shift + i] -= mul_b * c
        while R and R[-1] == 0:
            R.pop()
        if not R:
            return []
        R = _primitive(R)
    return R


def _poly_gcd_int(A: list, B: list) -> list:
    A = _primitive([c for c in A])
    B = _primitive([c for c in B])
    while any(B):
        A, B = B, _pseudo_rem(A, B)
        if not B:
            break
    return _primitive(A)


def _exact_quotient(A: list, B: list) -> list:
    """Quotient of A by a known factor B, both integer lists (ascending)."""
    R = [Fraction(c) for c in A]
    db = len(B) - 1
    out = [Fraction(0)] * (len(A) - db)
    lb = B[-1]
    for ex in range(len(out) - 1, -1, -1):
        q = R[ex + db] / lb
        out[ex] = q
        if q:
            for i, c in enumerate(B):
                R[ex + i] -= q * c
    ints = []
    for c in out:
        if c.denominator != 1:
            raise SolverIntegrityError("non-integral quotient in squarefree split")
        ints.append(c.numerator)
    return ints


def _squarefree(coeffs: list) -> list:
    deriv = [i * c for i, c in enumerate(coeffs)][1:]
    g = _poly_gcd_int(coeffs, deriv)
    if len(g) <= 1:
        return list(coeffs)
    return _primitive(_exact_quotient(coeffs, g))


def _iroot_ceil(n: int, k: int) -> int:
    """Smallest r >= 0 with r**k >= n."""
    if n <= 0:
        return 0
    if k == 1:
        return n
    r = int(round(n ** (1.0 / k))) if n.bit_length() < 500 else 1 << (
        (n.bit_length() + k - 1) // k
    )
    while r > 0 and r ** k >= n:
        r -= 1
    while (r + 1) ** k < n:
        r += 1
    return r + 1 if r ** k < n else r


def _root_bound(coeffs: list) -> int:
    """Integer upper bound on the absolute value of any root; the smaller of
    the Cauchy bound and the Fujiwara-style bound, rounded up."""
    an = abs(coeffs[-1])
    rest = [abs(c) for c in coeffs[:-1]]
    cauchy = 1 + (max(rest) + an - 1) // an if rest else 1
    fuji = 1
    n = len(coeffs) - 1
    for k in range(1, n + 1):
        a = abs(coeffs[n - k])
        if a == 0:
            continue
        ratio = (a + an - 1) // an
        fuji = max(fuji, _iroot_ceil(ratio, k))
    fuji = 2 * fuji
    return max(1, min(cauchy, fuji))


_ROOT_SEARCH_CAP = 10 ** 7


def rational_roots(p: Polynomial) -> frozenset:
    """All rational roots of a nonzero univariate polynomial, multiplicity
    discarded. Denominators are cleared, the squarefree part is taken, and
    candidates num/den with num dividing the trailing coefficient and den
    dividing the leading one are tested by exact evaluation."""
    if p.is_zero:
        raise ValueError("rational_roots of the zero polynomial")
    support = p.support_positions()
    if len(support) > 1:
        raise ValueError("polynomial is not univariate")
    if not support:
        return frozenset()
    pos = next(iter(support))
    by_deg: dict = {}
    for m, c in p.terms():
        by_deg[m[pos]] = c
    deg = max(by_deg)
    fracs = [by_deg.get(d, _ZERO) for d in range(deg + 1)]
    den = 1
    for c in fracs:
        den = den * c.denominator // gcd(den, c.denominator)
    coeffs = [int(c * den) for c in fracs]

    roots = set()
    low = 0
    while coeffs[low] == 0:
        low += 1
    if low:
        roots.add(_ZERO)
        coeffs = coeffs[low:]
    if len(coeffs) == 1:
        return frozenset(roots)
    coeffs = _primitive(coeffs)

    if len(coeffs) == 2:
        roots.add(Fraction(-coeffs[0], coeffs[1]))
        return frozenset(roots)
    if len(coeffs) == 3:
        c0, c1, c2 = coeffs
        disc = c1 * c1 - 4 * c2 * c0
        if disc >= 0:
            s = isqrt(disc)
            if s * s == disc:
                roots.add(Fraction(-c1 + s, 2 * c2))
                roots.add(Fraction(-c1 - s, 2 * c2))
        return frozenset(roots)

    coeffs = _squarefree(coeffs)
    if len(coeffs) == 2:
        roots.add(Fraction(-coeffs[0], coeffs[1]))
        return frozenset(roots)
    a0 = abs(coeffs[0])
    an = abs(coeffs[-1])
    bound = _root_bound(coeffs)
    work = 0

    def _test(r: Fraction):
        if _poly_eval_frac(coeffs, r) == 0:
            roots.add(r)

    for c in range(1, bound + 1):
        work += 1
        if work > _ROOT_SEARCH_CAP:
            raise RuntimeError("rational root search exceeded its work cap")
        if a0 % c == 0:
            _test(Fraction(c))
            _test(Fraction(-c))
    if an > 1:
        dens = set()
        q = 2
        while q * q <= an:
            work += 1
            if work > _ROOT_SEARCH_CAP:
                raise RuntimeError("rational root search exceeded its work cap")
            if an % q == 0:
                dens.add(q)
                dens.add(an // q)
            q += 1
        dens.add(an)
        for q in sorted(dens):
            limit = bound * q
            for num in range(1, limit + 1):
                work += 1
                if work > _ROOT_SEARCH_CAP:
                    raise RuntimeError("rational root search exceeded its work cap")
                if a0 % num == 0 and gcd(num, q) == 1:
                    _test(Fraction(num, q))
                    _test(Fraction(-num, q))
    return frozenset(roots)


# ---------------------------------------------------------------------------
# triangular extension


def _specialize(g: Polynomial, values: list, vpos: int) -> list:
    """Coefficient list (ascending in the variable at vpos) of g with every
    other supported variable replaced by its assigned value."""
    out: dict = {}
    for m, c in g.terms():
        val = c
        for pos, e in enumerate(m):
            if e == 0 or pos == vpos:
                continue
            val = val * values[pos] ** e
        d = m[vpos]
        prev = out.get(d)
        out[d] = val if prev is None else prev + val
    deg = max(out) if out else 0
    coeffs = [out.get(d, _ZERO) for d in range(deg + 1)]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def extend(
    ts: TransformedSystem,
    G: GroebnerBasis,
    partial: PartialSolution,
    v: str,
) -> tuple:
    """All one-variable extensions of `partial` by `v`: specialize every basis
    element supported on the solved variables plus v, intersect the rational
    root sets of the nonzero specializations, and apply the sign filter. When
    every specialization vanishes identically the candidates are {0,1} for a
    decision variable (its square relation is in the ideal) and an
    AmbiguousExtensionError for anything else."""
    ctx = ts.context
    vpos = ctx.position(v)
    values = [None] * len(ctx)
    solved = {vpos}
    for name, val in partial.assignment:
        p = ctx.position(name)
        values[p] = val
        solved.add(p)

    candidates = None
    for g in G:
        if not g.support_positions() <= solved:
            continue
        coeffs = _specialize(g, values, vpos)
        if len(coeffs) == 1:
            if coeffs[0] != 0:
                return ()  # inconsistent prefix: no extension
            continue
        if candidates is None:
            poly = Polynomial(
                ctx,
                {
                    tuple(d if i == vpos else 0 for i in range(len(ctx))): c
                    for d, c in enumerate(coeffs)
                    if c != 0
                },
            )
            candidates = set(rational_roots(poly))
        else:
            candidates = {r for r in candidates if _poly_eval_frac(coeffs, r) == 0}
        if not candidates:
            return ()

    decision = ctx.block_of(v) == BLOCK_X
    if candidates is None:
        if decision:
            candidates = {_ZERO, _ONE}
        else:
            raise AmbiguousExtensionError(
                f"no basis element constrains {v} at this prefix"
            )
    if v in ts.sign_filters:
        candidates = {r for r in candidates if r >= 0}
    if decision:
        for r in candidates:
            if r != 0 and r != 1:
                raise SolverIntegrityError(
                    f"decision variable {v} produced a non-binary root {r}"
                )
    return tuple(partial.extended(v, r) for r in sorted(candidates))


def enumerate_variety(
    ts: TransformedSystem,
    G: GroebnerBasis,
    through: int,
) -> tuple:
    """Breadth-first extension from the empty assignment through every solve
    order variable up to and including the `through` block (a poly.BLOCK_*
    constant). The trivial basis {1} yields no points."""
    if G.is_trivial:
        return ()
    ctx = ts.context
    names = []
    for name in ts.solve_order:
        names.append(name)
    prefix_end = -1
    for i, name in enumerate(names):
        if ctx.block_of(name) == through:
            prefix_end = i
    if prefix_end < 0:
        raise ValueError("solve order has no variable in the requested block")
    points = [PartialSolution()]
    for v in names[: prefix_end + 1]:
        nxt = []
        for pt in points:
            nxt.extend(extend(ts, G, pt, v))
        points = nxt
        if not points:
            break
    return tuple(points)


# ---------------------------------------------------------------------------
# dominance


def _dominates(u: tuple, v: tuple) -> bool:
    return u != v and all(a <= b for a, b in zip(u, v))


def pareto_filter(V: Iterable[tuple]) -> frozenset:
    """Subset of vectors not dominated by any other (componentwise <=, with at
    least one strict coordinate). Duplicates collapse."""
    vecs = sorted({tuple(v) for v in V})
    front = []
    for v in vecs:
        if not any(_dominates(u, v) for u in front):
            front.append(v)
    # a later vector can never dominate an earlier one in lexicographic order,
    # so one pass against the running front is enough
    return frozenset(front)


# ---------------------------------------------------------------------------
# direct evaluation


def _as_fraction_vector(x: Sequence) -> tuple:
    return tuple(Fraction(c) for c in x)


def check_feasible(x: Sequence, p: ProblemInstance) -> bool:
    """Exact test of all inequality (g <= 0) and equality (h = 0) constraints
    at the point x, given in the order of p's decision variables."""
    point = _point_mapping(x, p)
    for g in p.inequalities:
        if g.evaluate(point).constant_value() > 0:
            return False
    for h in p.equalities:
        if h.evaluate(point).constant_value() != 0:
            return False
    return True


def evaluate_objectives(x: Sequence, p: ProblemInstance) -> tuple:
    point = _point_mapping(x, p)
    return tuple(f.evaluate(point).constant_value() for f in p.objectives)


def _point_mapping(x: Sequence, p: ProblemInstance) -> dict:
    names = p.decision_names
    if len(x) != len(names):
        raise ValueError(
            f"point has {len(x)} coordinates, instance has {len(names)} variables"
        )
    return dict(zip(names, _as_fraction_vector(x)))


# ---------------------------------------------------------------------------
# result assembly and auditing


def _audit(points: Sequence, p: ProblemInstance):
    values = {pt.value for pt in points}
    for u in values:
        for v in values:
            if _dominates(u, v):
                raise SolverIntegrityError("reported value set is not an antichain")
    for pt in points:
        if not check_feasible(pt.decision, p):
            raise SolverIntegrityError("reported point is infeasible")
        if evaluate_objectives(pt.decision, p) != pt.value:
            raise SolverIntegrityError("reported objective vector is wrong")


def _finish(points: list, p: ProblemInstance) -> ParetoResult:
    points = sorted(set(points), key=lambda pt: (pt.decision, pt.value))
    _audit(points, p)
    status = "solved" if points else "infeasible"
    return ParetoResult(status, tuple(points))


def _require_binary(p: ProblemInstance):
    if p.bounds:
        raise ValueError("instance has integer bounds; binarize it first")


# ---------------------------------------------------------------------------
# pipelines


def _solve_alg1_impl(p: ProblemInstance, step_budget: int):
    _require_binary(p)
    ts = build_alg1(p)
    t0 = time.monotonic_ns()
    G = buchberger(Ideal(ts.context, ts.generators), step_budget)
    gb_ms = (time.monotonic_ns() - t0) // 10 ** 6
    stats = system_stats(ts)
    if G.is_trivial:
        return ParetoResult("infeasible", ()), gb_ms, stats

    partials = enumerate_variety(ts, G, BLOCK_Y)
    y_names = [f"y{j + 1}" for j in range(len(p.objectives))]
    by_value: dict = {}
    for pt in partials:
        m = pt.mapping()
        yv = tuple(m[name] for name in y_names)
        by_value.setdefault(yv, []).append(pt)
    efficient = pareto_filter(by_value)

    x_names = list(p.decision_names)
    remaining = [n for n in ts.solve_order if ts.context.block_of(n) == BLOCK_X]
    points = []
    for yv in efficient:
        for pt in by_value[yv]:
            stack = [pt]
            for v in remaining:
                stack = [q for s in stack for q in extend(ts, G, s, v)]
            for full in stack:
                m = full.mapping()
                xv = tuple(m[name] for name in x_names)
                points.append(EfficientPoint(xv, yv, "ALG1"))
    return _finish(points, p), gb_ms, stats


def solve_alg1(p: ProblemInstance, step_budget: int = DEFAULT_STEP_BUDGET) -> ParetoResult:
    """Slack-and-objective enumeration pipeline: build the combined system,
    compute its reduced lex basis, enumerate slack and objective values, keep
    the nondominated objective vectors, then extend each one through the
    decision block."""
    result, _, _ = _solve_alg1_impl(p, step_budget)
    return result


_CONDITION_BUILDERS = {
    "kkt": ((build_kkt, "KKT"), (build_nr, "NR")),
    "fj": ((build_fj, "FJ"),),
    "mofj": ((build_mofj, "MOFJ"),),
}


def _solve_conditions_impl(
    p: ProblemInstance, kind: str, step_budget: int, build_from: ProblemInstance = None
):
    """Candidate extraction runs on `build_from` (the possibly slack-rewritten
    twin of p) while feasibility and objectives are always judged against p
    itself."""
    _require_binary(p)
    if kind not in _CONDITION_BUILDERS:
        raise ValueError(f"unknown conditions kind: {kind!r}")
    source = p if build_from is None else build_from
    found: dict = {}
    gb_ms = 0
    stats = None
    x_names = list(p.decision_names)
    for build, tag in _CONDITION_BUILDERS[kind]:
        ts = build(source)
        if stats is None:
            stats = system_stats(ts)
        t0 = time.monotonic_ns()
        G = buchberger(Ideal(ts.context, ts.generators), step_budget)
        gb_ms += (time.monotonic_ns() - t0) // 10 ** 6
        if G.is_trivial:
            continue
        Gx = elimination_subset(G, x_names)
        for pt in enumerate_variety(ts, Gx, BLOCK_X):
            m = pt.mapping()
            xv = tuple(m[name] for name in x_names)
            if xv not in found:
                found[xv] = tag
    feasible = {x: tag for x, tag in found.items() if check_feasible(x, p)}
    values = {x: evaluate_objectives(x, p) for x in feasible}
    efficient = pareto_filter(values.values())
    points = [
        EfficientPoint(x, values[x], feasible[x])
        for x in feasible
        if values[x] in efficient
    ]
    return _finish(points, p), gb_ms, stats


def solve_via_conditions(
    p: ProblemInstance, kind: str, step_budget: int = DEFAULT_STEP_BUDGET
) -> ParetoResult:
    """Optimality-conditions pipeline. kind selects the system family: "kkt"
    builds both the weighted system and its normalized companion and unions
    their candidate sets (points found by both keep the KKT tag), "fj" and
    "mofj" build a single system each. Candidates come from the decision-block
    elimination ideal; infeasible ones are discarded silently."""
    result, _, _ = _solve_conditions_impl(p, kind, step_budget)
    return result


def brute_force(p: ProblemInstance, cap: int = BRUTE_FORCE_CAP) -> ParetoResult:
    """Independent oracle: enumerate every binary assignment, filter by exact
    feasibility, evaluate objectives, and keep the nondominated set."""
    _require_binary(p)
    n = len(p.decision_names)
    if n > cap:
        raise BruteForceCapExceeded(f"{n} variables exceed the cap of {cap}")
    values = {}
    for bits in itertools.product((_ZERO, _ONE), repeat=n):
        if check_feasible(bits, p):
            values[bits] = evaluate_objectives(bits, p)
    efficient = pareto_filter(values.values())
    points = [
        EfficientPoint(x, y, "BRUTE") for x, y in values.items() if y in efficient
    ]
    return _finish(points, p)


# ---------------------------------------------------------------------------
# uniform front end


ALGORITHMS = ("alg1", "kkt", "fj", "mofj", "brute")


def run_algorithm(
    p: ProblemInstance,
    algorithm: str,
    step_budget: int = DEFAULT_STEP_BUDGET,
    slack_mode: str = "keep",
) -> tuple:
    """Run one pipeline and report (result, details). details carries gb_ms
    (time inside Buchberger only, summed over the systems the pipeline
    builds), and the size statistics of the first system built. Slack mode
    "linear" rewrites inequalities through slack equalities before the
    conditions pipelines; alg1 introduces its slacks itself and brute force
    never builds a system, so both ignore the flag."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm: {algorithm!r}")
    q = p
    if slack_mode == SLACK_LINEAR and algorithm in CONDITION_KINDS:
        q = slack_transform(p, SLACK_LINEAR)
    elif slack_mode not in ("keep", SLACK_LINEAR):
        raise ValueError(f"unknown slack mode: {slack_mode!r}")

    if algorithm == "alg1":
        result, gb_ms, stats = _solve_alg1_impl(p, step_budget)
    elif algorithm == "brute":
        result = brute_force(p)
        gb_ms, stats = 0, None
    else:
        result, gb_ms, stats = _solve_conditions_impl(
            p, algorithm, step_budget, build_from=q if q is not p else None
        )

    if stats is None:
        degs = [f.total_degree() for f in p.objectives]
        degs += [g.total_degree() for g in p.inequalities]
        degs += [h.total_degree() for h in p.equalities]
        n_vars, n_gens, max_deg = len(p.decision_names), 0, max(degs, default=0)
    else:
        n_vars, n_gens, max_deg = stats.n_vars, stats.n_gens, stats.max_deg
    details = {
        "gb_ms": gb_ms,
        "n_vars": n_vars,
        "n_gens": n_gens,
        "max_deg": max_deg,
    }
    return result, details
