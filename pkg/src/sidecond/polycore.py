"""Exact multivariate polynomials over the rationals.

Polynomials live in a :class:`VariableContext` that splits variables into
state variables and parameters.  Terms are stored sparsely as a mapping from
exponent tuples to nonzero rationals; the tuple has one slot per variable in
the context's canonical order (states first, then parameters).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

try:
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    from fractions import Fraction as Q

Monomial = tuple  # tuple[int, ...]

RESERVED_PREFIX = "_rab"


class ContextError(ValueError):
    """Raised when polynomials from different contexts are combined."""


@dataclass(frozen=True)
class VariableContext:
    states: tuple
    params: tuple = ()
    name: str = "system"

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "params", tuple(self.params))
        if not self.states:
            raise ValueError("a context needs at least one state variable")
        names = self.states + self.params
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")

    @cached_property
    def variables(self) -> tuple:
        return self.states + self.params

    @cached_property
    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.variables)}

    @property
    def nvars(self) -> int:
        return len(self.states) + len(self.params)

    @property
    def nstates(self) -> int:
        return len(self.states)

    def is_state(self, name: str) -> bool:
        return name in self.index and self.index[name] < len(self.states)

    def extend(self, states=(), params=(), name=None) -> "VariableContext":
        """A context with extra variables appended to each group."""
        return VariableContext(self.states + tuple(states), self.params + tuple(params),
                               name or self.name)

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def one(self) -> "Polynomial":
        return self.const(1)

    def const(self, c) -> "Polynomial":
        c = Q(c)
        if c == 0:
            return self.zero()
        return Polynomial(self, {(0,) * self.nvars: c})

    def var(self, name: str) -> "Polynomial":
        try:
            i = self.index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None
        e = [0] * self.nvars
        e[i] = 1
        return Polynomial(self, {tuple(e): Q(1)})

    def gens(self) -> list:
        return [self.var(v) for v in self.variables]


def grevlex_key(m: Monomial):
    """Sort key: larger key means larger monomial in graded reverse lex."""
    return (sum(m), tuple(-e for e in reversed(m)))


class Polynomial:
    """Immutable sparse polynomial with rational coefficients."""

    __slots__ = ("ctx", "terms", "_hash")

    def __init__(self, ctx: VariableContext, terms: Mapping):
        self.ctx = ctx
        self.terms = {m: c for m, c in terms.items() if c != 0}
        self._hash = None

    @classmethod
    def _raw(cls, ctx, terms):
        # trusted constructor: terms already free of zeros
        p = cls.__new__(cls)
        p.ctx = ctx
        p.terms = terms
        p._hash = None
        return p

    # ---- basic queries -------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()), Q(0))

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    def degree_in(self, name: str) -> int:
        i = self.ctx.index[name]
        return max((m[i] for m in self.terms), default=-1)

    def variables_used(self) -> list:
        used = [False] * self.ctx.nvars
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    used[i] = True
        return [v for v, u in zip(self.ctx.variables, used) if u]

    def involves_states(self) -> bool:
        n = self.ctx.nstates
        return any(any(m[:n]) for m in self.terms)

    def involves_params(self) -> bool:
        n = self.ctx.nstates
        return any(any(m[n:]) for m in self.terms)

    def sorted_terms(self, key=grevlex_key) -> list:
        return sorted(self.terms.items(), key=lambda t: key(t[0]), reverse=True)

    def leading_term(self, key=grevlex_key):
        m = max(self.terms, key=key)
        return m, self.terms[m]

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.ctx == other.ctx and self.terms == other.terms
        if isinstance(other, (int, type(Q(0)))):
            return self.terms == ({} if other == 0 else {(0,) * self.ctx.nvars: Q(other)})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ctx.variables, frozenset(self.terms.items())))
        return self._hash

    # ---- arithmetic ----------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.ctx != self.ctx:
                raise ContextError("polynomials belong to different contexts")
            return other
        return self.ctx.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial._raw(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.ctx, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = Q(other)
            if c == 0:
                return self.ctx.zero()
            return Polynomial._raw(self.ctx, {m: v * c for m, v in self.terms.items()})
        other = self._coerce(other)
        if len(self.terms) > len(other.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        out = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                m = tuple(x + y for x, y in zip(ma, mb))
                out[m] = out.get(m, 0) + ca * cb
        return Polynomial(self.ctx, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError(f"exponent must be a nonnegative integer, got {k!r}")
        result = self.ctx.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c) -> "Polynomial":
        return self * Q(c)

    def mul_term(self, mono: Monomial, coeff) -> "Polynomial":
        return Polynomial._raw(
            self.ctx,
            {tuple(x + y for x, y in zip(m, mono)): c * coeff for m, c in self.terms.items()},
        )

    # ---- calculus and substitution ------------------------------------
    def diff(self, name: str) -> "Polynomial":
        try:
            i = self.ctx.index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None
        out = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                out[m[:i] + (e - 1,) + m[i + 1:]] = c * e
        return Polynomial._raw(self.ctx, out)

    def subs(self, values: Mapping) -> "Polynomial":
        """Substitute polynomials or rationals for variables (by name)."""
        if not values:
            return self
        idx = {self.ctx.index[k]: (v if isinstance(v, Polynomial) else self.ctx.const(v))
               for k, v in values.items()}
        for v in idx.values():
            self._coerce(v)
        powers: dict = {}
        result = self.ctx.zero()
        for m, c in self.terms.items():
            keep = list(m)
            factor = None
            for i, sub in idx.items():
                if m[i]:
                    keep[i] = 0
                    key = (i, m[i])
                    if key not in powers:
                        powers[key] = sub ** m[i]
                    factor = powers[key] if factor is None else factor * powers[key]
            term = Polynomial._raw(self.ctx, {tuple(keep): c})
            result = result + (term if factor is None else term * factor)
        return result

    def evaluate(self, point: Mapping):
        """Exact value at a full assignment of rationals."""
        vals = [Q(point[v]) for v in self.ctx.variables]
        total = Q(0)
        for m, c in self.terms.items():
            t = c
            for v, e in zip(vals, m):
                if e:
                    t *= v ** e
            total += t
        return total

    def embed(self, ctx: VariableContext) -> "Polynomial":
        """Re-express in a context containing all variables used here."""
        if ctx == self.ctx:
            return self
        pos = []
        for v in self.ctx.variables:
            pos.append(ctx.index.get(v))
        out = {}
        for m, c in self.terms.items():
            e = [0] * ctx.nvars
            for i, k in enumerate(m):
                if k:
                    if pos[i] is None:
                        raise ContextError(f"variable {self.ctx.variables[i]!r} missing in target context")
                    e[pos[i]] = k
            out[tuple(e)] = c
        return Polynomial._raw(ctx, out)

    # ---- normalisation -------------------------------------------------
    def monic(self, key=grevlex_key) -> "Polynomial":
        if not self.terms:
            return self
        _, c = self.leading_term(key)
        return self * (1 / Q(c))

    def primitive(self, key=grevlex_key) -> "Polynomial":
        """Integer coefficients with gcd 1 and positive leading coefficient."""
        if not self.terms:
            return self
        from math import gcd, lcm
        den = 1
        for c in self.terms.values():
            den = lcm(den, int(Q(c).denominator))
        nums = [int(c * den) for c in self.terms.values()]
        g = 0
        for n in nums:
            g = gcd(g, n)
        _, lc = self.leading_term(key)
        sign = -1 if lc < 0 else 1
        return self * Q(den * sign, g)

    # ---- rendering -----------------------------------------------------
    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"Polynomial({render(self)!r})"


def _fmt_coeff(c) -> str:
    c = Q(c)
    if c.denominator == 1:
        return str(int(c.numerator))
    return f"{int(c.numerator)}/{int(c.denominator)}"


def render(p: Polynomial) -> str:
    """Canonical text: descending grevlex, explicit ``*`` and ``^``."""
    if not p.terms:
        return "0"
    names = p.ctx.variables
    parts = []
    for i, (m, c) in enumerate(p.sorted_terms()):
        neg = c < 0
        a = -c if neg else c
        factors = []
        for v, e in zip(names, m):
            if e == 1:
                factors.append(v)
            elif e:
                factors.append(f"{v}^{e}")
        if not factors:
            body = _fmt_coeff(a)
        elif a == 1:
            body = "*".join(factors)
        else:
            body = _fmt_coeff(a) + "*" + "*".join(factors)
        if i == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


# ---- operations with explicit names, mirroring the module contract ------

def arith(op: str, a: Polynomial, b) -> Polynomial:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "pow":
        return a ** b
    raise ValueError(f"unknown operation {op!r}")


def differentiate(p: Polynomial, name: str) -> Polynomial:
    return p.diff(name)


def _divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def divmod_single(p: Polynomial, d: Polynomial, key=grevlex_key):
    """Division with remainder by one polynomial: returns (q, r) with p = q*d + r."""
    if d.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if p.ctx != d.ctx:
        raise ContextError("polynomials belong to different contexts")
    lm, lc = d.leading_term(key)
    rest = dict(p.terms)
    q: dict = {}
    r: dict = {}
    dterms = list(d.terms.items())
    while rest:
        m = max(rest, key=key)
        c = rest[m]
        if _divides(lm, m):
            qm = tuple(x - y for x, y in zip(m, lm))
            qc = c / lc
            q[qm] = q.get(qm, 0) + qc
            for dm, dc in dterms:
                t = tuple(x + y for x, y in zip(dm, qm))
                v = rest.get(t, 0) - qc * dc
                if v:
                    rest[t] = v
                else:
                    rest.pop(t, None)
        else:
            r[m] = c
            del rest[m]
    return Polynomial(p.ctx, q), Polynomial._raw(p.ctx, r)


def exact_divide(p: Polynomial, d: Polynomial):
    """Return q with p == q*d, or None when d does not divide p."""
    q, r = divmod_single(p, d)
    return q if r.is_zero() else None


# ---- gcd and square-free decomposition -----------------------------------

def _main_var(*polys) -> int | None:
    n = polys[0].ctx.nvars
    for i in range(n):
        for p in polys:
            if any(m[i] for m in p.terms):
                return i
    return None


def _coeffs_in(p: Polynomial, i: int) -> dict:
    """View p as a univariate polynomial in variable i: {exp: coefficient}."""
    out: dict = {}
    for m, c in p.terms.items():
        e = m[i]
        out.setdefault(e, {})[m[:i] + (0,) + m[i + 1:]] = c
    return {e: Polynomial._raw(p.ctx, t) for e, t in out.items()}


def _from_coeffs(ctx, i: int, coeffs: Mapping) -> Polynomial:
    out = {}
    for e, c in coeffs.items():
        for m, v in c.terms.items():
            out[m[:i] + (m[i] + e,) + m[i + 1:]] = v
    return Polynomial(ctx, out)


def _normalize_unit(p: Polynomial) -> Polynomial:
    return p.primitive() if p.terms else p


def content_in(p: Polynomial, name: str) -> Polynomial:
    """Gcd of the coefficients of p viewed as a polynomial in one variable."""
    i = p.ctx.index[name]
    g = p.ctx.zero()
    for c in _coeffs_in(p, i).values():
        g = gcd(g, c)
    return g


def gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Greatest common divisor, normalised to a primitive integer polynomial
    with positive leading coefficient (1 for coprime inputs)."""
    if a.ctx != b.ctx:
        raise ContextError("polynomials belong to different contexts")
    if a.is_zero():
        return _normalize_unit(b)
    if b.is_zero():
        return _normalize_unit(a)
    if a.is_constant() or b.is_constant():
        return a.ctx.one()
    i = _gcd_var(a, b)
    ia = any(m[i] for m in a.terms)
    ib = any(m[i] for m in b.terms)
    if not (ia and ib):
        # one side is free of the main variable: gcd divides its coefficients
        p, other = (a, b) if ia else (b, a)
        g = other
        for c in _coeffs_in(p, i).values():
            g = gcd(g, c)
            if g.is_constant():
                return a.ctx.one()
        return _normalize_unit(g)
    ca, pa = _split_content(a, i)
    cb, pb = _split_content(b, i)
    cont = gcd(ca, cb)
    # primitive remainder sequence in variable i
    f, g = pa, pb
    if _deg(f, i) < _deg(g, i):
        f, g = g, f
    while not g.is_zero():
        r = _prem(f, g, i)
        if r.is_zero():
            break
        if _deg(r, i) == 0:
            g = a.ctx.one()
            break
        _, r = _split_content(r, i)
        f, g = g, r.primitive()
    _, g = _split_content(g, i) if _deg(g, i) > 0 else (None, a.ctx.one())
    return _normalize_unit(g * cont)


def _gcd_var(a: Polynomial, b: Polynomial) -> int:
    """Main variable for the remainder sequence: the variable of smallest
    positive degree occurring in both inputs, else any occurring variable."""
    best = None
    for i in range(a.ctx.nvars):
        da, db = _deg(a, i), _deg(b, i)
        if da > 0 and db > 0:
            key = (max(da, db), i)
            if best is None or key < best:
                best = key
    return best[1] if best else _main_var(a, b)


def _deg(p: Polynomial, i: int) -> int:
    return max((m[i] for m in p.terms), default=-1)


def _split_content(p: Polynomial, i: int):
    g = p.ctx.zero()
    for c in _coeffs_in(p, i).values():
        g = gcd(g, c)
        if g.is_constant():
            g = p.ctx.one()
            break
    q = exact_divide(p, g)
    return g, q


def _prem(f: Polynomial, g: Polynomial, i: int) -> Polynomial:
    """Pseudo-remainder of f by g with respect to variable i, computed on the
    coefficient lists of the univariate view."""
    dg = _deg(g, i)
    G = _coeffs_in(g, i)
    lc = G[dg]
    F = _coeffs_in(f, i)
    df = max(F, default=-1)
    while df >= dg:
        lr = F.pop(df)
        shift = df - dg
        out = {e: c * lc for e, c in F.items()}
        for e, c in G.items():
            if e == dg:
                continue
            t = out.get(e + shift, f.ctx.zero()) - c * lr
            if t.is_zero():
                out.pop(e + shift, None)
            else:
                out[e + shift] = t
        F = {e: c for e, c in out.items() if not c.is_zero()}
        df = max(F, default=-1)
    return _from_coeffs(f.ctx, i, F)


def _squarefree_univariate_view(p: Polynomial, i: int) -> list:
    """Yun's algorithm for p primitive in variable i; returns [(a_k, k)]."""
    name = p.ctx.variables[i]
    dp = p.diff(name)
    a = gcd(p, dp)
    if a.is_constant():
        return [(p, 1)]
    b = exact_divide(p, a)
    c = exact_divide(dp, a)
    out = []
    k = 1
    while True:
        d = c - b.diff(name)
        if d.is_zero():
            if not b.is_constant():
                out.append((b, k))
            break
        a = gcd(b, d)
        if not a.is_constant():
            out.append((a, k))
        b = exact_divide(b, a)
        c = exact_divide(d, a)
        k += 1
        if b.is_constant():
            break
    return out


def squarefree_factors(p: Polynomial) -> list:
    """Pairwise coprime square-free factors with multiplicities.

    Monomial content is split off variable by variable, then the content with
    respect to each main variable is peeled recursively before Yun's algorithm
    runs on the primitive part.  This is not a full irreducible factorisation:
    coprime factors sharing the same variables and multiplicity stay together.
    """
    if p.is_zero():
        raise ValueError("square-free decomposition of the zero polynomial")
    found: list = []
    _sqf_collect(p, found)
    merged: dict = {}
    for f, k in found:
        f = f.primitive()
        merged[f] = merged.get(f, 0) + k
    return sorted(merged.items(), key=lambda t: _factor_sort_key(t[0]))


def _factor_sort_key(f: Polynomial):
    # parameter-only factors first, then by degree, then descending grevlex
    terms = [(tuple(-k for k in _flat_grevlex(m)), -Q(c)) for m, c in f.sorted_terms()]
    return (f.involves_states(), f.total_degree(), terms)


def _flat_grevlex(m: Monomial) -> tuple:
    return (sum(m),) + tuple(-e for e in reversed(m))


def _sqf_collect(p: Polynomial, out: list):
    if p.is_constant():
        return
    n = p.ctx.nvars
    low = [min(m[i] for m in p.terms) for i in range(n)]
    if any(low):
        for i, e in enumerate(low):
            if e:
                out.append((p.ctx.var(p.ctx.variables[i]), e))
        p = Polynomial._raw(p.ctx, {tuple(x - y for x, y in zip(m, low)): c
                                    for m, c in p.terms.items()})
        if p.is_constant():
            return
    i = _main_var(p)
    cont, prim = _split_content(p, i)
    _sqf_collect(cont, out)
    if _deg(prim, i) > 0:
        for f, k in _squarefree_univariate_view(prim, i):
            # factors may still carry content in other variables only if the
            # primitive part did, which it does not; keep them as they are
            out.append((f, k))
