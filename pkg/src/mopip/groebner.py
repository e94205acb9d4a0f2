"""Buchberger's algorithm for reduced lexicographic Groebner bases over Q.

The public surface works on `poly.Polynomial`. Internally monomials are packed
into single integers (16 bits per variable, greatest variable in the most
significant field) so lex comparison, divisibility and lcm are a handful of
machine-int operations. Basis rows are primitive integer polynomials split as
(leading monomial, leading coefficient, tail); the polynomial being reduced
keeps integer coefficients fraction-free, with one shared scale per reduction
that grows whenever a leading coefficient does not divide the target. The
scale is applied to each coefficient lazily, on touch, via per-key epoch
tags, so a cancellation costs the divisor's support length in integer
multiply-subtracts: no per-operation gcds and no whole-dividend passes.
Candidate leading monomials sit in a lazy max-heap. The remainder comes back
with the total scale it carries, so callers needing the exact remainder
divide once at the end and callers that only need a direction (or a zero
test) ignore it.

Generators of the form x^2 - x get special treatment: reduction by them is an
exponent clamp (x^e -> x), applied eagerly to every freshly created monomial.
That is ordinary division-step reduction by basis members, just performed
early, and it keeps every intermediate polynomial multilinear in the binary
variables. Ideals without such rows take the generic path untouched.

Pair selection follows the normal strategy (smallest lcm in the lex order);
useless pairs are dropped by the product and chain criteria, installed at
pair-queueing time in the Gebauer-Moeller arrangement. The returned basis is
the reduced one (minimal, monic, tail-reduced), which is unique for the ideal
and a fixed order, with elements sorted by increasing leading monomial.

Ideals whose generators visibly pin every variable to finitely many rational
values (binary rows for some variables, rows linear in each remaining one)
never enter pair completion at all: they are radical and their points can be
enumerated, so the reduced basis is interpolated from the point set by
Gaussian elimination along increasing lex monomials. Lex elimination orders
make pair completion blow up on exactly this class of system, while the
systems with free multiplier variables, which must take the completion path,
are quasi-triangular under lex and reduce quickly there.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence, Union

from .poly import Polynomial, VarContext, monomial_div, monomial_lcm

DEFAULT_STEP_BUDGET = 10 ** 7

_BITS = 16
_FMAX = (1 << (_BITS - 1)) - 1  # max exponent per variable: 32767


class StepBudgetExceeded(RuntimeError):
    """The reduction-step budget was exhausted before completion."""

    def __init__(self, steps: int):
        super().__init__(f"step budget exhausted after {steps} reduction steps")
        self.steps = steps


class ExponentOverflowError(OverflowError):
    """An exponent left the packed 15-bit field during monomial arithmetic."""


@dataclass(frozen=True)
class Ideal:
    context: VarContext
    generators: tuple

    def __post_init__(self):
        for g in self.generators:
            if g.context != self.context:
                raise ValueError("generator context does not match ideal context")


@dataclass(frozen=True)
class GroebnerBasis:
    context: VarContext
    elements: tuple
    reduced: bool = False

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    @property
    def is_trivial(self) -> bool:
        """True when the basis is {1}: the certificate of an empty variety."""
        return len(self.elements) == 1 and not self.elements[0].support_positions()


class _Pack:
    """Packed-monomial arithmetic for a fixed number of variables."""

    __slots__ = ("nv", "guard", "low")

    def __init__(self, nv: int):
        self.nv = nv
        g = 0
        for _ in range(nv):
            g = (g << _BITS) | (1 << (_BITS - 1))
        self.guard = g
        self.low = g >> (_BITS - 1)  # bit 0 of every field

    def pack(self, exps) -> int:
        m = 0
        for e in exps:
            if e > _FMAX:
                raise ExponentOverflowError(f"exponent {e} exceeds field capacity")
            m = (m << _BITS) | e
        return m

    def unpack(self, m: int) -> tuple:
        out = [0] * self.nv
        for i in range(self.nv - 1, -1, -1):
            out[i] = m & (_FMAX | (1 << (_BITS - 1)))
            m >>= _BITS
        return tuple(out)

    def divides(self, a: int, b: int) -> bool:
        return ((b | self.guard) - a) & self.guard == self.guard

    def lcm(self, a: int, b: int) -> int:
        t = (b | self.guard) - a
        g = t & self.guard
        fieldmask = g - (g >> (_BITS - 1))
        return a + (t & fieldmask)

    def mul(self, a: int, b: int) -> int:
        s = a + b
        if s & self.guard:
            raise ExponentOverflowError("exponent overflow in monomial product")
        return s

    def clamp_mask(self, positions) -> int:
        """Bit 0 of each listed variable's field; used to clamp exponents."""
        mask = 0
        for p in positions:
            mask |= 1 << ((self.nv - 1 - p) * _BITS)
        return mask


class _Budget:
    __slots__ = ("left", "limit")

    def __init__(self, limit: int):
        self.left = limit
        self.limit = limit

    def spend(self, n: int = 1):
        self.left -= n
        if self.left < 0:
            raise StepBudgetExceeded(self.limit)


def _binary_position(p: Polynomial):
    """Position i when p is a nonzero scalar multiple of x_i^2 - x_i, else None."""
    terms = p.terms_dict()
    if len(terms) != 2:
        return None
    (m2, c2), (m1, c1) = sorted(terms.items(), reverse=True)
    if c1 != -c2:
        return None
    pos = None
    for i, e in enumerate(m2):
        if e:
            if pos is not None or e != 2:
                return None
            pos = i
    if pos is None:
        return None
    if any(e != (1 if i == pos else 0) for i, e in enumerate(m1)):
        return None
    return pos


def _to_row(p: Polynomial, pk: _Pack, clamp_positions=frozenset()):
    """Primitive integer row (lm, lc, tail) of p, with exponents at the clamp
    positions lowered to 1 (sound whenever the matching x^2 - x rows are in
    the same basis). Returns None when clamping cancels p entirely."""
    den = 1
    for _, c in p.terms():
        den = den * c.denominator // gcd(den, c.denominator)
    terms: dict = {}
    for m, c in p.terms():
        if clamp_positions:
            m = tuple(
                (1 if e else 0) if i in clamp_positions else e
                for i, e in enumerate(m)
            )
        key = pk.pack(m)
        v = terms.get(key, 0) + int(c * den)
        if v:
            terms[key] = v
        else:
            terms.pop(key, None)
    if not terms:
        return None
    return _row_from_int_terms(terms)


def _row_from_int_terms(terms: dict):
    g = 0
    for v in terms.values():
        g = gcd(g, v)
        if g == 1:
            break
    lm = max(terms)
    if terms[lm] < 0:
        g = -g
    if g != 1:
        terms = {m: v // g for m, v in terms.items()}
    lc = terms.pop(lm)
    return lm, lc, list(terms.items())


# Primes for the reduction screen, all near machine-word size so GF(p)
# arithmetic stays cheap. The first is 2^61 - 1; the others are fallbacks for
# the freak case of a leading coefficient divisible by the one in use.
_SCREEN_PRIMES = (2305843009213693951, 4611686018427387847, 9223372036854775783)


def _row_modp(row, p):
    """Image (lm, 1/lc, tail) of an integer row in GF(p), or None when the
    leading coefficient vanishes there and the caller must switch primes."""
    lm, lc, tail = row
    c = lc % p
    if c == 0:
        return None
    return lm, pow(c, -1, p), [(m, cg % p) for m, cg in tail if cg % p]


def _row_binary_shape(row, pk):
    """True for integer rows of the x^2 - x shape (the clamp rows)."""
    lm, lc, tail = row
    if len(tail) != 1:
        return False
    m, c = tail[0]
    return c == -lc and m & pk.low == m and m.bit_count() == 1 and lm == m << 1


class _Engine:
    """Reduction machinery: integer divisor rows, fraction-free dividends."""

    __slots__ = ("pk", "budget", "cmask", "cdetect")

    def __init__(self, pk: _Pack, budget: _Budget, cmask: int = 0):
        self.pk = pk
        self.budget = budget
        self.cmask = cmask
        self.cdetect = cmask << 1

    def reduce(self, P: dict, divisors: Sequence, ordered: bool = False,
               strip: bool = False):
        """Fully reduce P (packed monomial -> integer coefficient; consumed)
        by the divisor rows, scanned in list order per monomial. With
        ordered=True the rows must be sorted ascending by leading monomial,
        which allows cutting each scan short. Returns (remainder dict, scale):
        the remainder equals scale times the remainder of P itself.

        Whenever a cancellation needs the dividend multiplied (the divisor's
        leading coefficient does not divide the coefficient being cleared),
        the multiplier is appended to `scales` instead of being applied; every
        coefficient carries the epoch it was last synced at and catches up
        lazily when next touched, so no step walks the whole dividend.

        With strip=True the common content of all coefficients is divided out
        whenever they grow past an adaptive bit threshold. That keeps the
        numbers near their primitive size but makes the returned scale
        meaningless (None); callers that only need the remainder's direction
        (or a zero test) use it, callers needing the exact remainder do not."""
        guard = self.pk.guard
        cmask = self.cmask
        cdetect = self.cdetect
        spend = self.budget.spend
        get = P.get
        scales = []
        cur = 0
        eps: dict = {}
        epoch_of = eps.get
        R: dict = {}
        R_eps: dict = {}
        heap = [-k for k in P]
        heapq.heapify(heap)
        push = heapq.heappush
        pop = heapq.heappop
        prod = math.prod
        strip_bits = 1 << 11
        while heap:
            m = -heap[0]
            a = get(m)
            if a is None:
                pop(heap)
                continue
            row = None
            if ordered:
                for cand in divisors:
                    lm = cand[0]
                    if lm > m:
                        break
                    if ((m | guard) - lm) & guard == guard:
                        row = cand
                        break
            else:
                for cand in divisors:
                    lm = cand[0]
                    if lm <= m and ((m | guard) - lm) & guard == guard:
                        row = cand
                        break
            pop(heap)
            del P[m]
            if row is None:
                R[m] = a
                R_eps[m] = epoch_of(m, 0)
                eps.pop(m, None)
                continue
            lm, lc, tail = row
            spend()
            e = eps.pop(m, 0)
            if e < cur:
                a *= prod(scales[e:cur])
            if strip and a.bit_length() > strip_bits:
                for k, v in P.items():
                    ke = eps.get(k, 0)
                    if ke < cur:
                        P[k] = v * prod(scales[ke:cur])
                for k, v in R.items():
                    ke = R_eps[k]
                    if ke < cur:
                        R[k] = v * prod(scales[ke:cur])
                    R_eps[k] = 0
                scales.clear()
                cur = 0
                eps.clear()
                g = abs(a)
                for v in P.values():
                    g = gcd(g, v)
                    if g == 1:
                        break
                else:
                    for v in R.values():
                        g = gcd(g, v)
                        if g == 1:
                            break
                if g > 1:
                    a //= g
                    for k in P:
                        P[k] //= g
                    for k in R:
                        R[k] //= g
                strip_bits = max(1 << 11, 2 * a.bit_length())
            g = gcd(a, lc)
            f = a // g
            s = lc // g
            if s != 1:
                scales.append(s)
                cur += 1
            shift = m - lm
            for mg, cg in tail:
                key = mg + shift
                if key & guard:
                    raise ExponentOverflowError("exponent overflow during reduction")
                while key & cdetect:
                    key -= (key >> 1) & cmask
                old = get(key)
                if old is None:
                    P[key] = -f * cg
                    eps[key] = cur
                    push(heap, -key)
                else:
                    oe = epoch_of(key, 0)
                    if oe < cur:
                        old *= prod(scales[oe:cur])
                    v = old - f * cg
                    if v:
                        P[key] = v
                        eps[key] = cur
                    else:
                        del P[key]
                        eps.pop(key, None)
        if scales:
            for k, v in R.items():
                e = R_eps[k]
                if e < cur:
                    R[k] = v * prod(scales[e:cur])
            return R, prod(scales)
        return R, 1

    def s_poly(self, g1, g2) -> dict:
        """Integer S-polynomial dict of two rows; leading terms cancel by
        construction, so only the tails contribute."""
        lm1, lc1, t1 = g1
        lm2, lc2, t2 = g2
        pk = self.pk
        guard = pk.guard
        cmask = self.cmask
        cdetect = self.cdetect
        L = pk.lcm(lm1, lm2)
        c = lc1 * lc2 // gcd(lc1, lc2)
        f1, s1 = c // lc1, L - lm1
        f2, s2 = c // lc2, L - lm2
        out: dict = {}
        for shift, f, terms in ((s1, f1, t1), (s2, -f2, t2)):
            for m, cf in terms:
                key = m + shift
                if key & guard:
                    raise ExponentOverflowError("exponent overflow in S-polynomial")
                while key & cdetect:
                    key -= (key >> 1) & cmask
                out[key] = out.get(key, 0) + f * cf
        return {k: v for k, v in out.items() if v}

    def s_poly_modp(self, g1, g2, p: int) -> dict:
        """Monic S-polynomial of two GF(p) rows, same monomial plumbing as
        s_poly. A unit multiple of the integer one, so their zero-ness and
        reduction behaviour match whenever both leading coefficients are
        units, which _row_modp guarantees."""
        lm1, inv1, t1 = g1
        lm2, inv2, t2 = g2
        pk = self.pk
        guard = pk.guard
        cmask = self.cmask
        cdetect = self.cdetect
        L = pk.lcm(lm1, lm2)
        out: dict = {}
        for shift, f, terms in ((L - lm1, inv1, t1), (L - lm2, p - inv2, t2)):
            for m, cf in terms:
                key = m + shift
                if key & guard:
                    raise ExponentOverflowError("exponent overflow in S-polynomial")
                while key & cdetect:
                    key -= (key >> 1) & cmask
                v = (out.get(key, 0) + f * cf) % p
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
        return out

    def reduce_modp(self, P: dict, divisors: Sequence, p: int) -> dict:
        """Normal form of a GF(p) dividend against GF(p) rows sorted ascending
        by leading monomial. All coefficients stay below p**2, so this is a
        cheap probe for reductions that end in zero; the exact engine only
        runs when the probe comes back nonzero."""
        guard = self.pk.guard
        cmask = self.cmask
        cdetect = self.cdetect
        spend = self.budget.spend
        get = P.get
        R: dict = {}
        heap = [-k for k in P]
        heapq.heapify(heap)
        push = heapq.heappush
        pop = heapq.heappop
        while heap:
            m = -pop(heap)
            a = get(m)
            if a is None:
                continue
            del P[m]
            row = None
            for cand in divisors:
                lm = cand[0]
                if lm > m:
                    break
                if ((m | guard) - lm) & guard == guard:
                    row = cand
                    break
            if row is None:
                R[m] = a
                continue
            spend()
            lm, inv, tail = row
            f = a * inv % p
            shift = m - lm
            for mg, cg in tail:
                key = mg + shift
                if key & guard:
                    raise ExponentOverflowError("exponent overflow during reduction")
                while key & cdetect:
                    key -= (key >> 1) & cmask
                old = get(key)
                if old is None:
                    v = -f * cg % p
                    if v:
                        P[key] = v
                        push(heap, -key)
                else:
                    v = (old - f * cg) % p
                    if v:
                        P[key] = v
                    else:
                        del P[key]
        return R


def _basis_of(obj) -> Sequence[Polynomial]:
    if isinstance(obj, GroebnerBasis):
        return obj.elements
    return tuple(obj)


def normal_form(
    p: Polynomial,
    basis: Union[GroebnerBasis, Sequence[Polynomial]],
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> Polynomial:
    """Remainder of p under multivariate division by `basis`, scanning divisors
    in list order (first leading-monomial match wins)."""
    elements = [g for g in _basis_of(basis) if not g.is_zero]
    for g in elements:
        if g.context != p.context:
            raise ValueError("divisor context does not match")
    if p.is_zero or not elements:
        return p
    pk = _Pack(len(p.context))
    eng = _Engine(pk, _Budget(step_budget))
    divisors = [_to_row(g, pk) for g in elements]
    den = 1
    for _, c in p.terms():
        den = den * c.denominator // gcd(den, c.denominator)
    P = {pk.pack(m): int(c * den) for m, c in p.terms()}
    R, scale = eng.reduce(P, divisors)
    scale *= den
    return Polynomial(
        p.context, {pk.unpack(m): Fraction(c, scale) for m, c in R.items()}
    )


def s_polynomial(p: Polynomial, q: Polynomial) -> Polynomial:
    """S(p, q) = (L/lt(p)) p - (L/lt(q)) q with L = lcm of the leading monomials."""
    if p.is_zero or q.is_zero:
        raise ValueError("S-polynomial of a zero polynomial")
    if p.context != q.context:
        raise ValueError("operands belong to different contexts")
    mp, cp = p.leading_term()
    mq, cq = q.leading_term()
    L = monomial_lcm(mp, mq)
    tp = Polynomial(p.context, {monomial_div(L, mp): 1 / cp})
    tq = Polynomial(q.context, {monomial_div(L, mq): 1 / cq})
    return tp * p - tq * q


def _build_rows(gens, binary_flags, pk, clamp_positions):
    basis = []  # append-only rows (lm, lc, tail)
    row_is_binary = []
    for g, is_bin in zip(gens, binary_flags):
        row = _to_row(g, pk, frozenset() if is_bin else clamp_positions)
        if row is None:
            continue  # the generator lies in the ideal of the binary rows
        basis.append(row)
        row_is_binary.append(is_bin)
    return basis, row_is_binary


def _complete_rows(pk, eng, basis, row_is_binary, screen=False):
    """Grow `basis` in place until every surviving S-polynomial reduces to
    zero. Pair selection is the normal strategy (smallest lcm first under the
    key order); the product and chain criteria are applied exhaustively, in
    the Gebauer-Moeller arrangement, when a row arrives. Active rows are kept
    tail-reduced against every newcomer, which preserves their leading
    monomials and all the pair bookkeeping built on them.

    With screen=True every candidate S-polynomial is first reduced in GF(p)
    for a fixed word-sized prime; pairs whose image vanishes are skipped
    without touching big-integer arithmetic, which is where reductions to
    zero, the common case, spend nearly all their time. The screen can lie
    only when a nonzero remainder has every coefficient divisible by p, so
    callers that use it must confirm the finished basis with one exact
    completion pass (buchberger does) and the lie costs a rerun, never a
    wrong result."""
    divides = pk.divides
    lcm = pk.lcm
    cmask = eng.cmask

    # Active divisor rows stay sorted ascending by leading monomial. Binary
    # rows are left out when clamping is on: clamped monomials are never
    # divisible by x^2, so they could never fire anyway.
    act = sorted(
        (i for i, b in enumerate(row_is_binary) if not (b and cmask)),
        key=lambda i: basis[i][0],
    )
    act_rows = [basis[i] for i in act]

    p = 0
    imgs = None
    if screen:
        for p in _SCREEN_PRIMES:
            imgs = [_row_modp(r, p) for r in basis]
            if None not in imgs:
                break
            imgs = None
    act_imgs = [imgs[i] for i in act] if imgs is not None else None

    # `alive` maps a queued pair to its lcm; heap entries missing from it are
    # stale. `live` holds the indices still contributing new pairs.
    heap = []
    alive = {}
    live = []

    def enqueue(t):
        lmt = basis[t][0]
        taus = [(lcm(basis[i][0], lmt), i) for i in live]
        survivors = []
        for tau, i in taus:
            dominated = False
            for tau2, j in taus:
                if j != i and tau2 != tau and divides(tau2, tau):
                    dominated = True
                    break
            if not dominated:
                survivors.append((tau, i))
        by_tau = {}
        for tau, i in survivors:
            cur = by_tau.get(tau)
            coprime = tau == basis[i][0] + lmt
            if cur is None:
                by_tau[tau] = (i, coprime)
            elif coprime and not cur[1]:
                by_tau[tau] = (i, True)
            elif coprime == cur[1] and i < cur[0]:
                by_tau[tau] = (i, coprime)
        for tau, (i, coprime) in by_tau.items():
            if coprime:
                continue
            pair = (i, t)
            alive[pair] = tau
            heapq.heappush(heap, (tau, i, t))
        for pair in list(alive):
            i, j = pair
            if j == t:
                continue
            L = alive[pair]
            if (
                divides(lmt, L)
                and lcm(basis[i][0], lmt) != L
                and lcm(basis[j][0], lmt) != L
            ):
                del alive[pair]
        live[:] = [g for g in live if not divides(lmt, basis[g][0])]
        live.append(t)

    for t in range(len(basis)):
        enqueue(t)

    while heap:
        L, i, j = heapq.heappop(heap)
        if alive.pop((i, j), None) is None:
            continue
        if imgs is not None:
            Sp = eng.s_poly_modp(imgs[i], imgs[j], p)
            if Sp and not eng.reduce_modp(Sp, act_imgs, p):
                continue
        S = eng.s_poly(basis[i], basis[j])
        if not S:
            continue
        R, _ = eng.reduce(S, act_rows, ordered=True, strip=True)
        if not R:
            continue
        new = _row_from_int_terms(R)
        t = len(basis)
        newlm = new[0]
        basis.append(new)
        row_is_binary.append(False)
        if imgs is not None:
            im = _row_modp(new, p)
            if im is None:
                # the row's leading coefficient hit the prime; retire the
                # screen rather than reimaging the whole basis
                imgs = None
                act_imgs = None
            else:
                imgs.append(im)
        # rows whose leading monomial the new one divides are redundant reducers
        keep = [q for q in range(len(act)) if not divides(newlm, act_rows[q][0])]
        act = [act[q] for q in keep]
        act_rows = [act_rows[q] for q in keep]
        if imgs is not None:
            act_imgs = [act_imgs[q] for q in keep]
        lo, hi = 0, len(act_rows)
        while lo < hi:
            mid = (lo + hi) // 2
            if act_rows[mid][0] < newlm:
                lo = mid + 1
            else:
                hi = mid
        act.insert(lo, t)
        act_rows.insert(lo, new)
        if imgs is not None:
            act_imgs.insert(lo, imgs[t])
        # Newcomers keep the pool honest: any active row whose tail the new
        # leading monomial rewrites is re-reduced now, in place. Stale tails
        # are what drag giant coefficients into every later reduction, and a
        # small row arriving late is when staleness peaks. Rows whose leading
        # term itself reduces away (overlapping input generators) leave the
        # pool instead; their basis copy keeps the pair bookkeeping valid.
        pos = 0
        while pos < len(act_rows):
            r = act_rows[pos]
            if r is new or row_is_binary[act[pos]]:
                pos += 1
                continue
            if not any(divides(newlm, mg) for mg, _ in r[2]):
                pos += 1
                continue
            dividend = dict(r[2])
            dividend[r[0]] = r[1]
            others = [w for w in act_rows if w is not r]
            R2, _ = eng.reduce(dividend, others, ordered=True, strip=True)
            if not R2 or max(R2) != r[0]:
                del act[pos]
                del act_rows[pos]
                if imgs is not None:
                    del act_imgs[pos]
                continue
            refreshed = _row_from_int_terms(R2)
            act_rows[pos] = refreshed
            basis[act[pos]] = refreshed
            if imgs is not None:
                im = _row_modp(refreshed, p)
                if im is None:
                    imgs = None
                    act_imgs = None
                else:
                    imgs[act[pos]] = im
                    act_imgs[pos] = im
            pos += 1
        enqueue(t)


def _reduced_rows(pk, eng, basis, row_is_binary):
    """Minimal, monic-up-to-content, tail-reduced rows of a completed basis,
    sorted ascending by leading monomial."""
    divides = pk.divides
    cmask = eng.cmask

    # minimal basis: drop rows whose leading monomial another kept row divides
    kept = []
    for idx in sorted(range(len(basis)), key=lambda i: basis[i][0]):
        lm = basis[idx][0]
        if not any(divides(basis[k][0], lm) for k in kept):
            kept.append(idx)

    # One tail-reduction pass: leading monomials are fixed now, a row can
    # never top-reduce its own tail, and remainders modulo a Groebner basis
    # do not depend on the divisors' tails. Rows are processed by increasing
    # leading monomial and already-reduced versions replace the originals in
    # the divisor pool, which keeps the cascades short.
    current = {idx: basis[idx] for idx in kept}
    for idx in kept:
        lm, lc, tail = current[idx]
        pool = sorted(
            (
                current[k]
                for k in kept
                if k != idx and not (row_is_binary[k] and cmask)
            ),
            key=lambda r: r[0],
        )
        # the row's own leading term rides along: keeping the basis minimal
        # means no other leading monomial divides it, so it reaches the
        # remainder untouched and with the right relative scale
        P = dict(tail)
        P[lm] = lc
        R, _ = eng.reduce(P, pool, ordered=True, strip=True)
        current[idx] = _row_from_int_terms(R)
    return sorted((current[idx] for idx in kept), key=lambda r: r[0])


def _content(values, seed):
    """gcd of seed and every nonzero value, early-exited at 1."""
    g = seed
    for x in values:
        if x:
            g = gcd(g, x)
            if g == 1:
                return 1
    return g


_POINT_CAP = 2048


def _substitution_plan(nv, gens, binary_flags, clamp_positions):
    """Split the non-binary generators into a substitution chain and residual
    constraints, when every non-binary variable is a graph coordinate: some
    generator is linear in it, mentions it in no other monomial, and otherwise
    touches only binary or earlier-resolved variables (definition rows like
    y - f(x) or g(x) + w). Returns (chain, residual): chain entries are
    (variable, bare coefficient, other terms) in resolution order, residual
    the term lists of the rows left over. Returns None when some variable
    resists, as the free multiplier blocks of the optimality-condition
    systems always do."""
    done = set(clamp_positions)
    chain = []
    pending = []
    for g, is_bin in zip(gens, binary_flags):
        if is_bin:
            continue
        terms = list(g.terms())
        varsets = [frozenset(i for i, e in enumerate(m) if e) for m, _ in terms]
        touched = frozenset().union(*varsets) if varsets else frozenset()
        pending.append((terms, varsets, touched))
    grew = True
    while grew:
        grew = False
        remaining = []
        for item in pending:
            terms, varsets, touched = item
            rest = touched - done
            if len(rest) != 1:
                remaining.append(item)
                continue
            v = next(iter(rest))
            coef = None
            for (m, c), vs in zip(terms, varsets):
                if v in vs:
                    if vs != {v} or m[v] != 1:
                        coef = None
                        break
                    coef = c
            if coef is None:
                remaining.append(item)
                continue
            others = [(m, c) for (m, c), vs in zip(terms, varsets) if v not in vs]
            chain.append((v, coef, others))
            done.add(v)
            grew = True
        pending = remaining
    if len(done) < nv:
        return None
    return chain, [terms for terms, _, _ in pending]


def _monomial_at(m, vals):
    r = 1
    for i, e in enumerate(m):
        if e:
            b = vals[i]
            if not b:
                return 0
            r *= b if e == 1 else b ** e
    return r


def _interpolated_basis(ctx, chain, residual, binaries, budget):
    """Reduced lex basis of the vanishing ideal of the system's rational
    points, which equals the generated ideal for the shapes accepted by
    _substitution_plan: the binary rows keep the ideal radical over the binary
    block, and substituting the chain variables away is a ring isomorphism
    onto that block. Enumerates the points, then walks monomials in increasing
    lex order, Gauss-eliminating each one's vector of values at the points: a
    dependency is a basis element (monic, tail over the quotient monomials), an
    independent monomial has its variable multiples walked after it. An empty
    point set certifies the trivial ideal and yields {1}.

    All vectors are integer lists with one shared denominator, normalized by a
    single content gcd when stored, so the inner loops cost integer multiply
    and add instead of a gcd per operation the way Fraction entries would."""
    nv = len(ctx)
    spend = budget.spend
    zero = Fraction(0)
    one = Fraction(1)
    points = []
    vals = [zero] * nv
    for bits in range(1 << len(binaries)):
        spend()
        for b, pos in enumerate(binaries):
            vals[pos] = one if bits >> b & 1 else zero
        for v, coef, others in chain:
            s = zero
            for m, c in others:
                t = _monomial_at(m, vals)
                if t:
                    s += c * t
            vals[v] = -s / coef
        if all(
            sum(c * _monomial_at(m, vals) for m, c in row) == 0 for row in residual
        ):
            points.append(tuple(vals))
    N = len(points)

    cols = []
    for i in range(nv):
        den = 1
        for p in points:
            d = p[i].denominator
            den = den * d // gcd(den, d)
        cols.append(([int(p[i] * den) for p in points], den))

    pkl = _Pack(nv)
    dividesL = pkl.divides
    incs = [
        pkl.pack(tuple(1 if i == p else 0 for i in range(nv))) for p in range(nv)
    ]
    # Heap entries are (monomial, parent, variable): the parent's value vector
    # is memoized before any child is pushed, so each candidate's vector costs
    # one pointwise product with the variable's value column.
    heap = [(0, 0, -1)]
    seen = {0}
    memo = {}
    found = []
    # Echelon rows are (pivot, vector, combination, den): the tracked row is
    # vector/den with entry exactly 1 at the pivot, and equals the combination
    # of walked monomials with coefficients combination/den.
    echelon = []
    out = []
    while heap:
        m, parent, vi = heapq.heappop(heap)
        if any(dividesL(lm, m) for lm in found):
            continue
        spend()
        if vi < 0:
            raw, rden = [1] * N, 1
        else:
            pv, pd = memo[parent]
            cv, cd = cols[vi]
            raw = [a * b for a, b in zip(pv, cv)]
            rden = pd * cd
            g = _content(raw, rden)
            if g > 1:
                rden //= g
                raw = [x // g for x in raw]
        v = list(raw)
        dv = rden
        combo = {m: dv}
        for pivot, w, cbw, dw in echelon:
            f = v[pivot]
            if not f:
                continue
            spend()
            for p in range(N):
                v[p] = v[p] * dw - f * w[p]
            for kk in combo:
                combo[kk] *= dw
            for kk, cc in cbw.items():
                combo[kk] = combo.get(kk, 0) - f * cc
            dv *= dw
            g = _content(v, dv)
            if g > 1:
                g = _content(combo.values(), g)
            if g > 1:
                dv //= g
                v = [x // g for x in v]
                for kk in combo:
                    combo[kk] //= g
        pivot = -1
        for p in range(N):
            if v[p]:
                pivot = p
                break
        if pivot < 0:
            found.append(m)
            out.append((m, combo, dv))
            continue
        f = v[pivot]
        if f < 0:
            f = -f
            v = [-x for x in v]
            for kk in combo:
                combo[kk] = -combo[kk]
        # The running denominator cancels out of the normalized row, so the
        # stored denominator is just the old pivot entry.
        g = _content(v, f)
        if g > 1:
            g = _content(combo.values(), g)
        if g > 1:
            f //= g
            v = [x // g for x in v]
            for kk in combo:
                combo[kk] //= g
        echelon.append((pivot, v, combo, f))
        memo[m] = (raw, rden)
        for vi, inc in enumerate(incs):
            c = m + inc
            if c & pkl.guard:
                raise ExponentOverflowError("exponent overflow in lex walk")
            if c not in seen:
                seen.add(c)
                heapq.heappush(heap, (c, m, vi))
    polys = []
    for m, combo, dv in out:
        coeffs = {pkl.unpack(k): Fraction(c, dv) for k, c in combo.items() if c}
        polys.append(Polynomial(ctx, coeffs))
    polys.sort(key=lambda p: p.leading_monomial())
    return tuple(polys)


def buchberger(ideal: Ideal, step_budget: int = DEFAULT_STEP_BUDGET) -> GroebnerBasis:
    """Reduced lex Groebner basis of the ideal. Raises StepBudgetExceeded when
    the reduction-step budget runs out; the default is 10**7 steps.

    Ideals whose generators pin every variable down, binary rows plus
    definition rows, the shape every enumerative system here has, are finite
    rational point sets in disguise; for those the basis is interpolated
    straight from the points, sidestepping the lex elimination blowup
    entirely. Everything else, in particular the optimality-condition systems
    with their free multiplier blocks, goes through Buchberger pair completion
    under lex, where those quasi-triangular systems reduce fast. Both routes
    end at the same unique reduced basis."""
    ctx = ideal.context
    nv = len(ctx)
    budget = _Budget(step_budget)

    gens = [g for g in ideal.generators if not g.is_zero]
    if not gens:
        return GroebnerBasis(ctx, (), reduced=True)

    clamp_positions = set()
    binary_flags = []
    for g in gens:
        pos = _binary_position(g)
        binary_flags.append(pos is not None)
        if pos is not None:
            clamp_positions.add(pos)

    if (1 << len(clamp_positions)) <= _POINT_CAP:
        plan = _substitution_plan(nv, gens, binary_flags, clamp_positions)
        if plan is not None:
            chain, residual = plan
            elements = _interpolated_basis(
                ctx, chain, residual, sorted(clamp_positions), budget
            )
            return GroebnerBasis(ctx, elements, reduced=True)

    pk = _Pack(nv)
    basis, flags = _build_rows(gens, binary_flags, pk, clamp_positions)
    eng = _Engine(pk, budget, pk.clamp_mask(clamp_positions))
    _complete_rows(pk, eng, basis, flags, screen=True)
    rows = list(_reduced_rows(pk, eng, basis, flags))
    # The screen only ever skips exact work, it cannot certify a pair, so one
    # exact completion pass over the reduced rows confirms nothing was missed
    # and, should a skipped pair actually have mattered, finishes the job.
    flags = [_row_binary_shape(r, pk) for r in rows]
    before = len(rows)
    _complete_rows(pk, eng, rows, flags)
    if len(rows) != before:
        rows = _reduced_rows(pk, eng, rows, flags)
    elements = []
    for lm, lc, tail in rows:
        coeffs = {pk.unpack(lm): Fraction(1)}
        for m, c in tail:
            coeffs[pk.unpack(m)] = Fraction(c, lc)
        elements.append(Polynomial(ctx, coeffs))
    return GroebnerBasis(ctx, tuple(elements), reduced=True)


def is_groebner(
    basis: Union[GroebnerBasis, Sequence[Polynomial]],
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> bool:
    """Buchberger criterion: every S-polynomial reduces to zero. Any reduction
    path certifies membership, and for an actual Groebner basis remainders are
    path-independent, so a single scan order is conclusive both ways."""
    elements = [g for g in _basis_of(basis) if not g.is_zero]
    if len(elements) <= 1:
        return True
    ctx = elements[0].context
    pk = _Pack(len(ctx))
    eng = _Engine(pk, _Budget(step_budget))
    rows = [_to_row(g, pk) for g in elements]
    divisors = sorted(rows, key=lambda r: r[0])
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            if pk.lcm(rows[i][0], rows[j][0]) == rows[i][0] + rows[j][0]:
                continue
            S = eng.s_poly(rows[i], rows[j])
            if not S:
                continue
            R, _ = eng.reduce(S, divisors, ordered=True, strip=True)
            if R:
                return False
    return True


def elimination_subset(G: GroebnerBasis, keep: Iterable[str]) -> GroebnerBasis:
    """Basis elements whose support lies within `keep`, which must be a trailing
    (lex-smallest) segment of the context. For a lex Groebner basis this is a
    Groebner basis of the elimination ideal."""
    names = list(keep)
    ctx = G.context
    if not ctx.is_trailing(names):
        raise ValueError("keep set is not a trailing suffix of the context")
    allowed = {ctx.position(n) for n in names}
    picked = tuple(g for g in G.elements if g.support_positions() <= allowed)
    return GroebnerBasis(ctx, picked, reduced=G.reduced)
