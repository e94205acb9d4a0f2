"""Random instance families and the on-disk instance format.

Seven families, all over binary decision variables with integer coefficients
in [-10, 10]:

  biobj_linkn / triobj_linkn    linear objectives, one knapsack covering row
  biobj_qkn / triobj_qkn        quadratic objectives, same constraint
  biobj_cubkn / triobj_cubkn    cubic objectives (needs n >= 3), same constraint
  portfolio                     quadratic risk and negated linear return under
                                a budget row

The knapsack row is sum a_i x_i >= b written as b - sum a_i x_i <= 0; the
portfolio budget is sum a_i x_i <= b written as sum a_i x_i - b <= 0. Weights
are redrawn as a block until their sum is nonzero, then b is uniform in
[1, |sum a_i|]. Draw order is fixed (weights, then each objective's
coefficient block in index order, then b) so instances are reproducible from
(family, n, seed) alone.

Instance files are JSON: family, n, seed, then objectives / inequalities /
equalities as lists of polynomials, each either an expression string or a
list of {"coeff": "num/den", "exps": [..]} terms with exponents in x1..xn
order. A "data" block carries the raw draw arrays for generated instances.
"""

from __future__ import annotations

import json

from fractions import Fraction

from .poly import (
    Polynomial,
    PolynomialSyntaxError,
    decision_context,
    parse_polynomial,
)
from .systems import ProblemInstance

_MASK64 = (1 << 64) - 1

COEFF_LOW = -10
COEFF_HIGH = 10


class SplitMix64:
    """The splitmix64 mixer. below() rejection-samples so small ranges are
    exactly uniform."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = ((1 << 64) // bound) * bound
        while True:
            v = self.next_u64()
            if v < limit:
                return v % bound

    def int_range(self, low: int, high: int) -> int:
        """Uniform integer in [low, high], both ends included."""
        if high < low:
            raise ValueError("empty range")
        return low + self.below(high - low + 1)


def _coeff(rng: SplitMix64) -> int:
    return rng.int_range(COEFF_LOW, COEFF_HIGH)


def _weights(rng: SplitMix64, n: int) -> list:
    while True:
        a = [_coeff(rng) for _ in range(n)]
        if sum(a):
            return a


def _linear(rng, ctx):
    c = [_coeff(rng) for _ in range(len(ctx))]
    p = Polynomial.zero(ctx)
    for ci, nm in zip(c, ctx.names):
        p = p + ci * Polynomial.variable(ctx, nm)
    return p, {"linear": c}


def _quadratic(rng, ctx):
    n = len(ctx)
    q = []
    p = Polynomial.zero(ctx)
    for i in range(n):
        xi = Polynomial.variable(ctx, ctx.names[i])
        for j in range(i, n):
            c = _coeff(rng)
            q.append(c)
            p = p + c * xi * Polynomial.variable(ctx, ctx.names[j])
    return p, {"quadratic": q}


def _cubic(rng, ctx):
    n = len(ctx)
    p, data = _quadratic(rng, ctx)
    cub = []
    for i in range(n):
        xi = Polynomial.variable(ctx, ctx.names[i])
        for j in range(i + 1, n):
            xj = Polynomial.variable(ctx, ctx.names[j])
            for l in range(j + 1, n):
                c = _coeff(rng)
                cub.append(c)
                p = p + c * xi * xj * Polynomial.variable(ctx, ctx.names[l])
    data["cubic"] = cub
    return p, data


def _knapsack_family(k: int, objective, min_n: int = 1):
    def build(n: int, seed: int):
        if n < min_n:
            raise ValueError(f"family needs n >= {min_n}")
        rng = SplitMix64(seed)
        ctx = decision_context(n)
        a = _weights(rng, n)
        objs, obj_data = [], []
        for _ in range(k):
            p, d = objective(rng, ctx)
            objs.append(p)
            obj_data.append(d)
        b = rng.int_range(1, abs(sum(a)))
        g = Polynomial.constant(ctx, b)
        for ai, nm in zip(a, ctx.names):
            g = g - ai * Polynomial.variable(ctx, nm)
        inst = ProblemInstance(ctx, tuple(objs), (g,), ())
        return inst, {"a": a, "objectives": obj_data, "b": b}

    return build


def _portfolio(n: int, seed: int):
    rng = SplitMix64(seed)
    ctx = decision_context(n)
    a = _weights(rng, n)
    sigma = {}
    for i in range(n):
        for j in range(i, n):
            sigma[(i, j)] = _coeff(rng)
    mu = [_coeff(rng) for _ in range(n)]
    b = rng.int_range(1, abs(sum(a)))

    risk = Polynomial.zero(ctx)
    for (i, j), c in sigma.items():
        xi = Polynomial.variable(ctx, ctx.names[i])
        xj = Polynomial.variable(ctx, ctx.names[j])
        w = c if i == j else 2 * c
        risk = risk + w * xi * xj
    ret = Polynomial.zero(ctx)
    for c, nm in zip(mu, ctx.names):
        ret = ret - c * Polynomial.variable(ctx, nm)
    g = Polynomial.constant(ctx, -b)
    for ai, nm in zip(a, ctx.names):
        g = g + ai * Polynomial.variable(ctx, nm)
    inst = ProblemInstance(ctx, (risk, ret), (g,), ())
    data = {
        "a": a,
        "sigma": [sigma[(i, j)] for i in range(n) for j in range(i, n)],
        "mu": mu,
        "b": b,
    }
    return inst, data


FAMILIES = {
    "biobj_linkn": _knapsack_family(2, _linear),
    "biobj_qkn": _knapsack_family(2, _quadratic),
    "biobj_cubkn": _knapsack_family(2, _cubic, min_n=3),
    "triobj_linkn": _knapsack_family(3, _linear),
    "triobj_qkn": _knapsack_family(3, _quadratic),
    "triobj_cubkn": _knapsack_family(3, _cubic, min_n=3),
    "portfolio": _portfolio,
}


def generate(family: str, n: int, seed: int) -> ProblemInstance:
    inst, _ = generate_with_data(family, n, seed)
    return inst


def generate_with_data(family: str, n: int, seed: int):
    try:
        build = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}") from None
    if n < 1:
        raise ValueError("n must be at least 1")
    return build(n, seed)


# -- instance files ---------------------------------------------------------------

def _poly_terms(p: Polynomial) -> list:
    return [{"coeff": str(c), "exps": list(m)} for m, c in p.terms()]


def instance_to_record(
    inst: ProblemInstance, family=None, seed=None, data=None
) -> dict:
    if inst.slack_names:
        raise ValueError("serialize instances before slack transformation")
    rec = {}
    if family is not None:
        rec["family"] = family
    rec["n"] = inst.n
    if seed is not None:
        rec["seed"] = seed
    rec["objectives"] = [_poly_terms(f) for f in inst.objectives]
    rec["inequalities"] = [_poly_terms(g) for g in inst.inequalities]
    rec["equalities"] = [_poly_terms(h) for h in inst.equalities]
    if inst.bounds is not None:
        rec["bounds"] = list(inst.bounds)
    if data is not None:
        rec["data"] = data
    return rec


def serialize_instance(
    inst: ProblemInstance, family=None, seed=None, data=None
) -> bytes:
    rec = instance_to_record(inst, family=family, seed=seed, data=data)
    return (json.dumps(rec, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _parse_terms(ctx, entry, where: str) -> Polynomial:
    if isinstance(entry, str):
        try:
            return parse_polynomial(ctx, entry)
        except PolynomialSyntaxError as e:
            raise ValueError(f"{where}: {e}") from None
    if not isinstance(entry, list):
        raise ValueError(f"{where}: expected an expression string or a term list")
    terms = {}
    for t, item in enumerate(entry):
        spot = f"{where}[{t}]"
        if not isinstance(item, dict) or set(item) != {"coeff", "exps"}:
            raise ValueError(f"{spot}: expected an object with coeff and exps")
        raw = item["coeff"]
        if isinstance(raw, bool) or not isinstance(raw, (int, str)):
            raise ValueError(f"{spot}.coeff: expected an integer or num/den string")
        try:
            c = Fraction(raw)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"{spot}.coeff: not a rational: {raw!r}") from None
        exps = item["exps"]
        if (
            not isinstance(exps, list)
            or len(exps) != len(ctx)
            or any(isinstance(e, bool) or not isinstance(e, int) or e < 0 for e in exps)
        ):
            raise ValueError(
                f"{spot}.exps: expected {len(ctx)} nonnegative integers"
            )
        key = tuple(exps)
        s = terms.get(key, Fraction(0)) + c
        if s:
            terms[key] = s
        else:
            terms.pop(key, None)
    return Polynomial(ctx, terms)


def record_to_instance(rec) -> ProblemInstance:
    if not isinstance(rec, dict):
        raise ValueError("instance record must be a JSON object")
    n = rec.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValueError("n: expected a positive integer")
    ctx = decision_context(n)

    def block(key, required=False):
        entries = rec.get(key, [])
        if required and not entries:
            raise ValueError(f"{key}: at least one entry required")
        if not isinstance(entries, list):
            raise ValueError(f"{key}: expected a list")
        return tuple(
            _parse_terms(ctx, e, f"{key}[{idx}]") for idx, e in enumerate(entries)
        )

    bounds = rec.get("bounds")
    if bounds is not None:
        if (
            not isinstance(bounds, list)
            or len(bounds) != n
            or any(isinstance(u, bool) or not isinstance(u, int) or u < 1 for u in bounds)
        ):
            raise ValueError(f"bounds: expected {n} integers, each at least 1")
        bounds = tuple(bounds)

    return ProblemInstance(
        ctx,
        block("objectives", required=True),
        block("inequalities"),
        block("equalities"),
        bounds,
    )


def deserialize_instance(raw) -> ProblemInstance:
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        rec = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ValueError(f"not valid JSON: {e}") from None
    return record_to_instance(rec)
