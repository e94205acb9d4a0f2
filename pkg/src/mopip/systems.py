"""Problem instances and the polynomial systems the pipelines solve.

A ProblemInstance is a multiobjective program over binary (or bounded integer)
decision variables: minimize all objectives subject to inequalities g <= 0 and
equalities h = 0. The builders turn an instance into a TransformedSystem: a
generator list over an extended lex context, the variable solve order
(smallest first), and sign filters for slack variables.

Builders:
  build_alg1   objective-space encoding: y_j - f_j, equalities, binary relations
  build_kkt    scalarized first-order conditions with weight variables omega
  build_nr     non-regularity system (rank-drop of the active constraint jacobian)
  build_fj     Fritz John conditions with multiplier lambda0
  build_mofj   multiobjective Fritz John conditions, no scalarization variables

The conditions systems put the decision block at the lex tail so the x-part of
a lex basis is a basis of the elimination ideal. Normalizations encode the
nonvanishing of multiplier vectors: sign-constrained multipliers enter
linearly, free ones squared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .poly import (
    BLOCK_BETA,
    BLOCK_GAMMA,
    BLOCK_LAMBDA,
    BLOCK_LAMBDA0,
    BLOCK_MU,
    BLOCK_NU,
    BLOCK_OMEGA,
    BLOCK_SLACK,
    BLOCK_X,
    BLOCK_Y,
    Polynomial,
    VarContext,
    decision_context,
    make_context,
    parse_polynomial,
)

SLACK_KEEP = "keep"
SLACK_LINEAR = "linear_slack"


@dataclass(frozen=True)
class ProblemInstance:
    """min (f_1..f_k) over binary x subject to g <= 0 and h = 0.

    `bounds` marks a bounded-integer instance (upper bound per decision
    variable) that binarize() lowers to a binary one. The context may carry a
    slack block after slack_transform; slack variables are not decision
    variables.
    """

    context: VarContext
    objectives: tuple
    inequalities: tuple = ()
    equalities: tuple = ()
    bounds: Optional[tuple] = None

    def __post_init__(self):
        if not self.objectives:
            raise ValueError("instance needs at least one objective")
        for p in (*self.objectives, *self.inequalities, *self.equalities):
            if p.context != self.context:
                raise ValueError("instance polynomial over a foreign context")
        for v in self.context.variables:
            if v.block not in (BLOCK_X, BLOCK_SLACK):
                raise ValueError(f"unexpected block {v.block!r} in instance context")
        if self.bounds is not None and len(self.bounds) != self.n:
            raise ValueError("bounds length does not match decision variable count")

    @property
    def decision_names(self) -> tuple:
        return self.context.block_names(BLOCK_X)

    @property
    def slack_names(self) -> tuple:
        return self.context.block_names(BLOCK_SLACK)

    @property
    def n(self) -> int:
        return len(self.decision_names)

    @property
    def k(self) -> int:
        return len(self.objectives)

    @property
    def m(self) -> int:
        return len(self.inequalities)

    @property
    def s(self) -> int:
        return len(self.equalities)


@dataclass(frozen=True)
class TransformedSystem:
    context: VarContext
    generators: tuple
    solve_order: tuple  # variable names, smallest (solved first) to greatest
    sign_filters: frozenset  # names constrained >= 0 when solved
    kind: str


@dataclass(frozen=True)
class SystemStats:
    n_vars: int
    n_gens: int
    max_deg: int


def instance_from_expressions(
    n: int,
    objectives: Sequence[str],
    inequalities: Sequence[str] = (),
    equalities: Sequence[str] = (),
    bounds: Optional[Sequence[int]] = None,
) -> ProblemInstance:
    ctx = decision_context(n)
    return ProblemInstance(
        ctx,
        tuple(parse_polynomial(ctx, t) for t in objectives),
        tuple(parse_polynomial(ctx, t) for t in inequalities),
        tuple(parse_polynomial(ctx, t) for t in equalities),
        tuple(bounds) if bounds is not None else None,
    )


def lower_bound(f: Polynomial) -> Fraction:
    """A lower bound of f over the binary cube: every monomial takes values in
    {0,1}, so the sum of negative coefficients (constant included) works."""
    return sum((c for _, c in f.terms() if c < 0), Fraction(0))


def binarize(p: ProblemInstance) -> ProblemInstance:
    """Lower a bounded-integer instance to a binary one via x_i = sum 2^j z_ij.

    Uses bit_length(u_i) bits per variable. When u_i + 1 is not a power of two
    the encoded range overshoots u_i, so the residual bound sum 2^j z_ij <= u_i
    is appended as an inequality to keep the feasible value set unchanged.
    """
    if p.bounds is None:
        raise ValueError("instance has no integer bounds to binarize")
    if p.slack_names:
        raise ValueError("binarize before slack transformation")
    if any(u < 1 for u in p.bounds):
        raise ValueError("bounds must be at least 1")

    pieces = []  # per original variable: list of (z-name, weight)
    names = []
    for i, u in enumerate(p.bounds):
        bits = u.bit_length()
        group = []
        for j in range(bits):
            name = f"z{len(names) + 1}"
            names.append(name)
            group.append((name, 1 << j))
        pieces.append(group)

    ctx = make_context([(nm, BLOCK_X) for nm in names])
    subs = {}
    for old, group in zip(p.decision_names, pieces):
        expansion = Polynomial.zero(ctx)
        for nm, w in group:
            expansion = expansion + w * Polynomial.variable(ctx, nm)
        subs[old] = expansion

    def lower(q: Polynomial) -> Polynomial:
        out = Polynomial.zero(ctx)
        for mono, c in q.terms():
            term = Polynomial.constant(ctx, c)
            for pos, e in enumerate(mono):
                if e:
                    term = term * subs[p.context.names[pos]] ** e
            out = out + term
        return out

    extra = []
    for (old, u), group in zip(zip(p.decision_names, p.bounds), pieces):
        top = sum(w for _, w in group)
        if top > u:
            extra.append(subs[old] - u)

    return ProblemInstance(
        ctx,
        tuple(lower(f) for f in p.objectives),
        tuple(lower(g) for g in p.inequalities) + tuple(extra),
        tuple(lower(h) for h in p.equalities),
        None,
    )


def slack_transform(p: ProblemInstance, mode: str) -> ProblemInstance:
    """keep: return p unchanged. linear_slack: turn every g_j <= 0 into the
    equality g_j + w_j = 0 with a fresh slack variable w_j >= 0 (the sign is
    enforced at solve time, not in the ideal)."""
    if mode == SLACK_KEEP:
        return p
    if mode != SLACK_LINEAR:
        raise ValueError(f"unknown slack mode {mode!r}")
    if p.bounds is not None:
        raise ValueError("binarize before slack transformation")
    if not p.inequalities:
        return p
    if p.slack_names:
        raise ValueError("instance already slack-transformed")

    wnames = [f"w{j + 1}" for j in range(p.m)]
    ctx = make_context(
        [(nm, BLOCK_X) for nm in p.decision_names] + [(nm, BLOCK_SLACK) for nm in wnames]
    )
    eqs = [h.embed(ctx) for h in p.equalities]
    for g, w in zip(p.inequalities, wnames):
        eqs.append(g.embed(ctx) + Polynomial.variable(ctx, w))
    return ProblemInstance(
        ctx,
        tuple(f.embed(ctx) for f in p.objectives),
        (),
        tuple(eqs),
        None,
    )


def _binary_relations(ctx: VarContext, names) -> list:
    out = []
    for nm in names:
        x = Polynomial.variable(ctx, nm)
        out.append(x * x - x)
    return out


def build_alg1(p: ProblemInstance) -> TransformedSystem:
    """Objective-space system: equalities, y_j - f_j, binary relations, with
    context x > y > slack so slacks are solved first, then y, then x.
    Inequalities still present are slack-transformed here."""
    if p.bounds is not None:
        raise ValueError("binarize the instance first")
    q = slack_transform(p, SLACK_LINEAR) if p.inequalities else p
    n, k = q.n, q.k
    ynames = [f"y{i + 1}" for i in range(k)]
    ctx = make_context(
        [(nm, BLOCK_X) for nm in q.decision_names]
        + [(nm, BLOCK_Y) for nm in ynames]
        + [(nm, BLOCK_SLACK) for nm in q.slack_names]
    )
    gens = [h.embed(ctx) for h in q.equalities]
    for ynm, f in zip(ynames, q.objectives):
        gens.append(Polynomial.variable(ctx, ynm) - f.embed(ctx))
    gens.extend(_binary_relations(ctx, q.decision_names))
    return TransformedSystem(
        ctx,
        tuple(gens),
        tuple(reversed(ctx.names)),
        frozenset(q.slack_names),
        "ALG1",
    )


def _conditions_context(p: ProblemInstance, with_scalarization: bool, with_lambda0: bool):
    n, k, m, s = p.n, p.k, p.m, p.s
    pairs = []
    pairs += [(f"beta{l + 1}", BLOCK_BETA) for l in range(n)]
    pairs += [(f"mu{r + 1}", BLOCK_MU) for r in range(s)]
    pairs += [(f"nu{i + 1}", BLOCK_NU) for i in range(k)]
    if with_lambda0:
        pairs.append(("lambda0", BLOCK_LAMBDA0))
    pairs += [(f"lambda{j + 1}", BLOCK_LAMBDA) for j in range(m)]
    if with_scalarization:
        pairs += [(f"omega{i + 1}", BLOCK_OMEGA) for i in range(k)]
        pairs.append(("gamma", BLOCK_GAMMA))
    pairs += [(nm, BLOCK_SLACK) for nm in p.slack_names]
    pairs += [(nm, BLOCK_X) for nm in p.decision_names]
    return make_context(pairs)


def _stationarity(ctx, p: ProblemInstance, nu_weighted_objective_gradients) -> list:
    """One polynomial per decision variable: weighted objective gradients plus
    multiplier-weighted constraint gradients plus beta_l (2 x_l - 1)."""
    out = []
    for l, xn in enumerate(p.decision_names):
        acc = nu_weighted_objective_gradients(l)
        for j, g in enumerate(p.inequalities):
            acc = acc + Polynomial.variable(ctx, f"lambda{j + 1}") * g.partial_derivative(xn).embed(ctx)
        for r, h in enumerate(p.equalities):
            acc = acc + Polynomial.variable(ctx, f"mu{r + 1}") * h.partial_derivative(xn).embed(ctx)
        beta = Polynomial.variable(ctx, f"beta{l + 1}")
        x = Polynomial.variable(ctx, xn)
        acc = acc + beta * (2 * x - 1)
        out.append(acc)
    return out


def build_kkt(p: ProblemInstance) -> TransformedSystem:
    """First-order conditions of the weighted Chebyshev scalarization: the
    weights omega_i are ring variables, gamma the scalarized objective value,
    and yhat_i a rational lower bound of f_i over the cube."""
    if p.bounds is not None:
        raise ValueError("binarize the instance first")
    ctx = _conditions_context(p, with_scalarization=True, with_lambda0=False)
    n, k = p.n, p.k
    nu = [Polynomial.variable(ctx, f"nu{i + 1}") for i in range(k)]
    omega = [Polynomial.variable(ctx, f"omega{i + 1}") for i in range(k)]
    gamma = Polynomial.variable(ctx, "gamma")
    yhat = [lower_bound(f) for f in p.objectives]

    gens = [1 - sum(nu, Polynomial.zero(ctx))]

    def grad(l):
        acc = Polynomial.zero(ctx)
        xn = p.decision_names[l]
        for i, f in enumerate(p.objectives):
            acc = acc + nu[i] * omega[i] * f.partial_derivative(xn).embed(ctx)
        return acc

    gens += _stationarity(ctx, p, grad)
    for i, f in enumerate(p.objectives):
        gens.append(nu[i] * omega[i] * (f.embed(ctx) - yhat[i]) - gamma)
    for j, g in enumerate(p.inequalities):
        gens.append(Polynomial.variable(ctx, f"lambda{j + 1}") * g.embed(ctx))
    gens += [h.embed(ctx) for h in p.equalities]
    gens += _binary_relations(ctx, p.decision_names)
    return TransformedSystem(
        ctx, tuple(gens), tuple(reversed(ctx.names)), frozenset(p.slack_names), "KKT"
    )


def build_nr(p: ProblemInstance) -> TransformedSystem:
    """Non-regularity system: the nu row sums to zero and the multiplier vector
    is pinned away from zero by the normalization; candidate points are those
    where the constraint gradients drop rank."""
    if p.bounds is not None:
        raise ValueError("binarize the instance first")
    ctx = _conditions_context(p, with_scalarization=True, with_lambda0=False)
    n, k = p.n, p.k
    nu = [Polynomial.variable(ctx, f"nu{i + 1}") for i in range(k)]
    omega = [Polynomial.variable(ctx, f"omega{i + 1}") for i in range(k)]

    gens = [sum(nu, Polynomial.zero(ctx))]

    def grad(l):
        acc = Polynomial.zero(ctx)
        xn = p.decision_names[l]
        for i, f in enumerate(p.objectives):
            acc = acc + nu[i] * omega[i] * f.partial_derivative(xn).embed(ctx)
        return acc

    gens += _stationarity(ctx, p, grad)
    for j, g in enumerate(p.inequalities):
        gens.append(Polynomial.variable(ctx, f"lambda{j + 1}") * g.embed(ctx))
    gens += [h.embed(ctx) for h in p.equalities]
    gens += _binary_relations(ctx, p.decision_names)
    norm = Polynomial.zero(ctx)
    for j in range(p.m):
        norm = norm + Polynomial.variable(ctx, f"lambda{j + 1}")
    for r in range(p.s):
        mu = Polynomial.variable(ctx, f"mu{r + 1}")
        norm = norm + mu * mu
    for l in range(n):
        beta = Polynomial.variable(ctx, f"beta{l + 1}")
        norm = norm + beta * beta
    gens.append(norm - 1)
    return TransformedSystem(
        ctx, tuple(gens), tuple(reversed(ctx.names)), frozenset(p.slack_names), "NR"
    )


def build_fj(p: ProblemInstance) -> TransformedSystem:
    """Fritz John conditions of the scalarized problem: lambda0 multiplies the
    objective, complementarity holds for the Chebyshev rows, and the
    normalization rules out the zero multiplier vector."""
    if p.bounds is not None:
        raise ValueError("binarize the instance first")
    ctx = _conditions_context(p, with_scalarization=True, with_lambda0=True)
    n, k = p.n, p.k
    nu = [Polynomial.variable(ctx, f"nu{i + 1}") for i in range(k)]
    omega = [Polynomial.variable(ctx, f"omega{i + 1}") for i in range(k)]
    gamma = Polynomial.variable(ctx, "gamma")
    lam0 = Polynomial.variable(ctx, "lambda0")
    yhat = [lower_bound(f) for f in p.objectives]

    gens = [lam0 - sum(nu, Polynomial.zero(ctx))]

    def grad(l):
        acc = Polynomial.zero(ctx)
        xn = p.decision_names[l]
        for i, f in enumerate(p.objectives):
            acc = acc + nu[i] * omega[i] * f.partial_derivative(xn).embed(ctx)
        return acc

    gens += _stationarity(ctx, p, grad)
    for i, f in enumerate(p.objectives):
        gens.append(nu[i] * (omega[i] * (f.embed(ctx) - yhat[i]) - gamma))
    for j, g in enumerate(p.inequalities):
        gens.append(Polynomial.variable(ctx, f"lambda{j + 1}") * g.embed(ctx))
    gens += [h.embed(ctx) for h in p.equalities]
    gens += _binary_relations(ctx, p.decision_names)
    norm = lam0
    for j in range(p.m):
        norm = norm + Polynomial.variable(ctx, f"lambda{j + 1}")
    for i in range(k):
        norm = norm + nu[i]
    for r in range(p.s):
        mu = Polynomial.variable(ctx, f"mu{r + 1}")
        norm = norm + mu * mu
    for l in range(n):
        beta = Polynomial.variable(ctx, f"beta{l + 1}")
        norm = norm + beta * beta
    gens.append(norm - 1)
    return TransformedSystem(
        ctx, tuple(gens), tuple(reversed(ctx.names)), frozenset(p.slack_names), "FJ"
    )


def build_mofj(p: ProblemInstance) -> TransformedSystem:
    """Multiobjective Fritz John conditions: objective gradients weighted by nu
    directly, no scalarization variables at all."""
    if p.bounds is not None:
        raise ValueError("binarize the instance first")
    ctx = _conditions_context(p, with_scalarization=False, with_lambda0=False)
    n, k = p.n, p.k
    nu = [Polynomial.variable(ctx, f"nu{i + 1}") for i in range(k)]

    def grad(l):
        acc = Polynomial.zero(ctx)
        xn = p.decision_names[l]
        for i, f in enumerate(p.objectives):
            acc = acc + nu[i] * f.partial_derivative(xn).embed(ctx)
        return acc

    gens = _stationarity(ctx, p, grad)
    for j, g in enumerate(p.inequalities):
        gens.append(Polynomial.variable(ctx, f"lambda{j + 1}") * g.embed(ctx))
    gens += [h.embed(ctx) for h in p.equalities]
    gens += _binary_relations(ctx, p.decision_names)
    norm = Polynomial.zero(ctx)
    for i in range(k):
        norm = norm + nu[i]
    for j in range(p.m):
        norm = norm + Polynomial.variable(ctx, f"lambda{j + 1}")
    for r in range(p.s):
        mu = Polynomial.variable(ctx, f"mu{r + 1}")
        norm = norm + mu * mu
    for l in range(n):
        beta = Polynomial.variable(ctx, f"beta{l + 1}")
        norm = norm + beta * beta
    gens.append(norm - 1)
    return TransformedSystem(
        ctx, tuple(gens), tuple(reversed(ctx.names)), frozenset(p.slack_names), "MOFJ"
    )


def system_stats(ts: TransformedSystem) -> SystemStats:
    return SystemStats(
        n_vars=len(ts.context),
        n_gens=len(ts.generators),
        max_deg=max((g.total_degree() for g in ts.generators), default=0),
    )
