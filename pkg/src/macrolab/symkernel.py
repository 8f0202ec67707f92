"""Exact polynomial algebra over the Gaussian rationals.

Polynomials live in Q(i)[tau, ell, L1, L2, L3, n1, n2, n3, x1, x2, x3] where
``ell`` stands for |Lambda| and is tied to the other symbols by the constraint
ideal (|n| = 1, Lambda . n = 0, ell^2 = |Lambda|^2).

Monomials are packed into a single Python int: one 8-bit field per symbol with
the total degree in the most significant field.  With that layout the graded
lexicographic order is plain integer comparison and multiplication of
monomials is integer addition.
"""
from __future__ import annotations

import ast
import heapq
import random
from fractions import Fraction
from functools import lru_cache
from math import gcd

SYMBOLS = ("t", "l", "L1", "L2", "L3", "n1", "n2", "n3", "x1", "x2", "x3")
PRETTY = ("τ", "ℓ", "Λ₁", "Λ₂", "Λ₃", "n₁", "n₂", "n₃", "ξ₁", "ξ₂", "ξ₃")
NSYM = len(SYMBOLS)
INDEX = {name: k for k, name in enumerate(SYMBOLS)}

_BITS = 8
_FIELD = (1 << _BITS) - 1
_MAXEXP = 1 << (_BITS - 1)
# field k (symbol k) sits at shift (NSYM - 1 - k) * _BITS; the degree field on top
_SHIFT = tuple((NSYM - 1 - k) * _BITS for k in range(NSYM))
_DEG_SHIFT = NSYM * _BITS
_GUARD = sum(1 << (s + _BITS - 1) for s in _SHIFT + (_DEG_SHIFT,))


def pack(exps) -> int:
    deg = 0
    key = 0
    for k, e in enumerate(exps):
        if e < 0 or e >= _MAXEXP:
            raise ValueError(f"exponent {e} out of range")
        key |= e << _SHIFT[k]
        deg += e
    if deg >= _MAXEXP:
        raise ValueError("total degree out of range")
    return key | (deg << _DEG_SHIFT)


def unpack(key: int) -> tuple:
    return tuple((key >> _SHIFT[k]) & _FIELD for k in range(NSYM))


def degree_of(key: int) -> int:
    return key >> _DEG_SHIFT


def divides(a: int, b: int) -> bool:
    """True iff monomial ``a`` divides monomial ``b``."""
    d = b - a
    return d >= 0 and not (d & _GUARD)


def lcm_mono(a: int, b: int) -> int:
    ea, eb = unpack(a), unpack(b)
    return pack(tuple(max(x, y) for x, y in zip(ea, eb)))


class GaussRational:
    """Exact number (re + im*i)/den with integer numerators and den > 0."""

    __slots__ = ("a", "b", "d")

    def __init__(self, re=0, im=0):
        re, im = Fraction(re), Fraction(im)
        d = re.denominator * im.denominator // gcd(re.denominator, im.denominator)
        self._set(re.numerator * (d // re.denominator),
                  im.numerator * (d // im.denominator), d)

    @classmethod
    def _make(cls, a: int, b: int, d: int) -> "GaussRational":
        obj = cls.__new__(cls)
        obj._set(a, b, d)
        return obj

    def _set(self, a, b, d):
        if d != 1:
            if d < 0:
                a, b, d = -a, -b, -d
            g = gcd(gcd(a, b), d)
            if g != 1:
                a, b, d = a // g, b // g, d // g
        self.a, self.b, self.d = a, b, d

    @property
    def re(self) -> Fraction:
        return Fraction(self.a, self.d)

    @property
    def im(self) -> Fraction:
        return Fraction(self.b, self.d)

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __eq__(self, other):
        if not isinstance(other, GaussRational):
            other = as_gauss(other)
        return self.a == other.a and self.b == other.b and self.d == other.d

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __neg__(self):
        return GaussRational._make(-self.a, -self.b, self.d)

    def __add__(self, o):
        o = as_gauss(o)
        if self.d == o.d:
            return GaussRational._make(self.a + o.a, self.b + o.b, self.d)
        return GaussRational._make(self.a * o.d + o.a * self.d,
                                   self.b * o.d + o.b * self.d, self.d * o.d)

    __radd__ = __add__

    def __sub__(self, o):
        return self + (-as_gauss(o))

    def __rsub__(self, o):
        return as_gauss(o) - self

    def __mul__(self, o):
        o = as_gauss(o)
        a, b, c, e = self.a, self.b, o.a, o.b
        return GaussRational._make(a * c - b * e, a * e + b * c, self.d * o.d)

    __rmul__ = __mul__

    def inverse(self) -> "GaussRational":
        n = self.a * self.a + self.b * self.b
        if n == 0:
            raise ZeroDivisionError("GaussRational division by zero")
        return GaussRational._make(self.a * self.d, -self.b * self.d, n)

    def __truediv__(self, o):
        return self * as_gauss(o).inverse()

    def __rtruediv__(self, o):
        return as_gauss(o) * self.inverse()

    def conjugate(self):
        return GaussRational._make(self.a, -self.b, self.d)

    def to_complex(self) -> complex:
        return complex(self.a / self.d, self.b / self.d)

    def __repr__(self):
        return f"GaussRational({self.re}, {self.im})"

    def __str__(self):
        return _coef_str(self)


ZERO = GaussRational._make(0, 0, 1)
ONE = GaussRational._make(1, 0, 1)
IMAG = GaussRational._make(0, 1, 1)


def as_gauss(x) -> GaussRational:
    if isinstance(x, GaussRational):
        return x
    if isinstance(x, int):
        return GaussRational._make(x, 0, 1)
    if isinstance(x, Fraction):
        return GaussRational._make(x.numerator, 0, x.denominator)
    if isinstance(x, complex):
        raise TypeError("floating point complex is not exact; use GaussRational")
    if isinstance(x, float):
        raise TypeError("floats are not allowed in exact arithmetic")
    raise TypeError(f"cannot convert {type(x).__name__} to GaussRational")


def _coef_str(c: GaussRational) -> str:
    def rat(n, d):
        return str(n) if d == 1 else f"{n}/{d}"
    if c.b == 0:
        return rat(c.a, c.d)
    if c.a == 0:
        if c.b == 1 and c.d == 1:
            return "I"
        if c.b == -1 and c.d == 1:
            return "-I"
        return f"{rat(c.b, c.d)}*I"
    sign = "+" if c.b > 0 else "-"
    body = f"{c.a}{sign}{abs(c.b)}*I"
    return f"({body})" if c.d == 1 else f"({body})/{c.d}"


def _mono_str(key: int, names=SYMBOLS) -> str:
    parts = []
    for k, e in enumerate(unpack(key)):
        if e == 1:
            parts.append(names[k])
        elif e > 1:
            parts.append(f"{names[k]}**{e}")
    return "*".join(parts)


class SymExpr:
    """Sparse polynomial; ``terms`` maps packed monomial -> GaussRational.

    Zero coefficients are never stored.  Instances are treated as immutable.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {} if terms is None else terms

    # construction helpers
    @classmethod
    def const(cls, c) -> "SymExpr":
        c = as_gauss(c)
        return cls({0: c}) if c else cls()

    @classmethod
    def var(cls, name: str, power: int = 1) -> "SymExpr":
        exps = [0] * NSYM
        exps[INDEX[name]] = power
        return cls({pack(exps): ONE})

    @classmethod
    def monomial(cls, exps, coef=1) -> "SymExpr":
        coef = as_gauss(coef)
        return cls({pack(exps): coef}) if coef else cls()

    # arithmetic
    def _coerce(self, other) -> "SymExpr":
        return other if isinstance(other, SymExpr) else SymExpr.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return SymExpr(out)

    __radd__ = __add__

    def __neg__(self):
        return SymExpr({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, SymExpr):
            c = as_gauss(other)
            if not c:
                return SymExpr()
            return SymExpr({m: v * c for m, v in self.terms.items()})
        out = {}
        for m1, c1 in self.terms.items():
            a1, b1, d1 = c1.a, c1.b, c1.d
            for m2, c2 in other.terms.items():
                m = m1 + m2
                a2, b2, d2 = c2.a, c2.b, c2.d
                re = a1 * a2 - b1 * b2
                im = a1 * b2 + b1 * a2
                d = d1 * d2
                s = out.get(m)
                if s is None:
                    out[m] = (re, im, d)
                elif s[2] == d:
                    out[m] = (s[0] + re, s[1] + im, d)
                else:
                    out[m] = (s[0] * d + re * s[2], s[1] * d + im * s[2], s[2] * d)
        terms = {}
        for m, (re, im, d) in out.items():
            if re or im:
                terms[m] = GaussRational._make(re, im, d)
        _check_overflow(terms)
        return SymExpr(terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers")
        result = SymExpr.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, SymExpr):
            other = SymExpr.const(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # inspection
    def sorted_terms(self):
        """Terms in canonical (descending grlex) order."""
        return sorted(self.terms.items(), reverse=True)

    def leading(self):
        m = max(self.terms)
        return m, self.terms[m]

    def degree_in(self, name: str) -> int:
        k = INDEX[name]
        if not self.terms:
            return -1
        return max((m >> _SHIFT[k]) & _FIELD for m in self.terms)

    def coeffs_in(self, name: str) -> dict:
        """Split into {power: coefficient SymExpr} with respect to one symbol."""
        k = INDEX[name]
        sh = _SHIFT[k]
        out = {}
        for m, c in self.terms.items():
            e = (m >> sh) & _FIELD
            rest = m - (e << sh) - (e << _DEG_SHIFT)
            out.setdefault(e, {})[rest] = c
        return {e: SymExpr(t) for e, t in out.items()}

    def free_symbols(self) -> set:
        used = set()
        for m in self.terms:
            for k, e in enumerate(unpack(m)):
                if e:
                    used.add(SYMBOLS[k])
        return used

    def subs(self, mapping: dict) -> "SymExpr":
        """Substitute symbols by SymExpr (or numbers); simultaneous."""
        idx = {INDEX[k]: (v if isinstance(v, SymExpr) else SymExpr.const(v))
               for k, v in mapping.items()}
        powers = {k: [SymExpr.const(1)] for k in idx}
        out = SymExpr()
        for m, c in self.terms.items():
            exps = list(unpack(m))
            term = SymExpr.const(c)
            for k, val in idx.items():
                e = exps[k]
                if e:
                    cache = powers[k]
                    while len(cache) <= e:
                        cache.append(cache[-1] * val)
                    term = term * cache[e]
                    exps[k] = 0
            out = out + term * SymExpr({pack(exps): ONE})
        return out

    def conjugate_coeffs(self) -> "SymExpr":
        return SymExpr({m: c.conjugate() for m, c in self.terms.items()})

    def evaluate(self, values: dict):
        """Exact evaluation; values map every free symbol to int/Fraction/GaussRational."""
        total = ZERO
        for m, c in self.terms.items():
            term = c
            for k, e in enumerate(unpack(m)):
                if e:
                    term = term * _gpow(as_gauss(values[SYMBOLS[k]]), e)
            total = total + term
        return total

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for m, c in self.sorted_terms():
            mono = _mono_str(m)
            if not mono:
                piece = _coef_str(c)
            elif c == ONE:
                piece = mono
            elif c == -ONE:
                piece = "-" + mono
            else:
                piece = f"{_coef_str(c)}*{mono}"
            out.append(piece)
        s = out[0]
        for piece in out[1:]:
            s += " - " + piece[1:] if piece.startswith("-") else " + " + piece
        return s

    def pretty(self) -> str:
        s = str(self)
        for name, sym in sorted(zip(SYMBOLS, PRETTY), key=lambda p: -len(p[0])):
            s = s.replace(name, sym) if len(name) > 1 else s
        return s

    __repr__ = __str__


def _gpow(x: GaussRational, e: int) -> GaussRational:
    r = ONE
    for _ in range(e):
        r = r * x
    return r


def _check_overflow(terms):
    for m in terms:
        if m & _GUARD:
            raise OverflowError("monomial exponent overflow")
        break


def sym(name: str) -> SymExpr:
    return SymExpr.var(name)


I = SymExpr.const(IMAG)


# ---------------------------------------------------------------- parsing

_ALLOWED_NAMES = set(SYMBOLS) | {"I"}


def parse(text: str) -> SymExpr:
    """Parse a polynomial written in Python syntax over SYMBOLS and ``I``."""
    tree = ast.parse(text, mode="eval")
    return _eval_node(tree.body)


def _eval_node(node):
    if isinstance(node, ast.BinOp):
        left = _eval_node(node.left)
        if isinstance(node.op, ast.Pow):
            if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                raise ValueError("exponent must be an integer literal")
            return left ** node.right.value
        right = _eval_node(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if right.free_symbols() or not right.terms:
                raise ValueError("division only by nonzero constants")
            return left * right.terms[0].inverse()
        raise ValueError(f"unsupported operator {type(node.op).__name__}")
    if isinstance(node, ast.UnaryOp):
        val = _eval_node(node.operand)
        if isinstance(node.op, ast.USub):
            return -val
        if isinstance(node.op, ast.UAdd):
            return val
        raise ValueError("unsupported unary operator")
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return SymExpr.const(node.value)
    if isinstance(node, ast.Name):
        if node.id not in _ALLOWED_NAMES:
            raise ValueError(f"unknown symbol {node.id!r}")
        return I if node.id == "I" else SymExpr.var(node.id)
    raise ValueError(f"unsupported syntax: {ast.dump(node)}")


# ---------------------------------------------------------------- matrices

class DimensionError(ValueError):
    pass


class SymMatrix:
    """Dense rectangular matrix of SymExpr entries."""

    def __init__(self, rows):
        rows = [[e if isinstance(e, SymExpr) else SymExpr.const(e) for e in r] for r in rows]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise DimensionError("matrix must be rectangular and nonempty")
        self.rows = rows

    @property
    def shape(self):
        return len(self.rows), len(self.rows[0])

    @classmethod
    def identity(cls, n: int) -> "SymMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, r: int, c: int) -> "SymMatrix":
        return cls([[0] * c for _ in range(r)])

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def map(self, fn) -> "SymMatrix":
        return SymMatrix([[fn(e) for e in r] for r in self.rows])

    def transpose(self) -> "SymMatrix":
        r, c = self.shape
        return SymMatrix([[self.rows[i][j] for i in range(r)] for j in range(c)])

    def __add__(self, other):
        if self.shape != other.shape:
            raise DimensionError("shape mismatch")
        return SymMatrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other):
        if self.shape != other.shape:
            raise DimensionError("shape mismatch")
        return SymMatrix([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __neg__(self):
        return self.map(lambda e: -e)

    def scale(self, s) -> "SymMatrix":
        return self.map(lambda e: e * s)

    def __matmul__(self, other):
        r, k = self.shape
        k2, c = other.shape
        if k != k2:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        out = []
        for i in range(r):
            row = []
            for j in range(c):
                acc = SymExpr()
                for t in range(k):
                    acc = acc + self.rows[i][t] * other.rows[t][j]
                row.append(acc)
            out.append(row)
        return SymMatrix(out)

    def submatrix(self, rows, cols) -> "SymMatrix":
        return SymMatrix([[self.rows[i][j] for j in cols] for i in rows])

    def __eq__(self, other):
        return isinstance(other, SymMatrix) and self.rows == other.rows

    def __str__(self):
        return "[" + ",\n ".join("[" + ", ".join(str(e) for e in r) + "]" for r in self.rows) + "]"

    def to_strings(self):
        return [[str(e) for e in r] for r in self.rows]


def det(m: SymMatrix) -> SymExpr:
    """Determinant by cofactor expansion along the first row."""
    r, c = m.shape
    if r != c:
        raise DimensionError(f"determinant of non-square {r}x{c} matrix")
    return _det(m.rows)


def _det(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = SymExpr()
    for j in range(n):
        if not rows[0][j]:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * _det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def adjugate(m: SymMatrix) -> SymMatrix:
    """Classical adjoint of a 3x3 matrix: m @ adj(m) == det(m) I."""
    if m.shape != (3, 3):
        raise DimensionError(f"adjugate needs a 3x3 matrix, got {m.shape}")
    a = m.rows
    cof = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            rows = [r for k, r in enumerate(a) if k != i]
            minor = [[e for k, e in enumerate(r) if k != j] for r in rows]
            val = _det(minor)
            cof[i][j] = val if (i + j) % 2 == 0 else -val
    return SymMatrix([[cof[j][i] for j in range(3)] for i in range(3)])


# ------------------------------------------------------ ideal and Groebner

def _default_generators():
    n1, n2, n3 = sym("n1"), sym("n2"), sym("n3")
    L1, L2, L3 = sym("L1"), sym("L2"), sym("L3")
    ell = sym("l")
    return (n1 ** 2 + n2 ** 2 + n3 ** 2 - 1,
            n1 * L1 + n2 * L2 + n3 * L3,
            ell ** 2 - L1 ** 2 - L2 ** 2 - L3 ** 2)


class ConstraintIdeal:
    """The ideal (|n|^2 - 1, n . Lambda, ell^2 - |Lambda|^2).

    A reduced Groebner basis under grlex is computed once and cached.
    """

    def __init__(self, generators=None):
        self._generators = tuple(generators) if generators is not None else _default_generators()
        self._basis = None

    @property
    def generators(self):
        return self._generators

    @property
    def basis(self):
        if self._basis is None:
            self._basis = groebner(list(self._generators))
        return self._basis

    def reduce(self, p: SymExpr) -> SymExpr:
        return normal_form(p, self.basis)

    def reduce_matrix(self, m: SymMatrix) -> SymMatrix:
        return m.map(self.reduce)


def _monic(p: SymExpr) -> SymExpr:
    _, c = p.leading()
    return p * c.inverse()


def normal_form(p: SymExpr, basis) -> SymExpr:
    """Full reduction of p by a list of polynomials (leading terms in grlex)."""
    if not p.terms or not basis:
        return p
    leads = [(g.leading(), g) for g in basis]
    work = dict(p.terms)
    heap = [-m for m in work]
    heapq.heapify(heap)
    rem = {}
    while heap:
        m = -heapq.heappop(heap)
        c = work.pop(m, None)
        if c is None:
            continue
        while heap and -heap[0] == m:
            heapq.heappop(heap)
        for (lm, lc), g in leads:
            if divides(lm, m):
                factor = c / lc
                shift = m - lm
                for gm, gc in g.terms.items():
                    if gm == lm:
                        continue
                    tm = gm + shift
                    val = -(gc * factor)
                    old = work.get(tm)
                    if old is None:
                        work[tm] = val
                        heapq.heappush(heap, -tm)
                    else:
                        new = old + val
                        if new:
                            work[tm] = new
                        else:
                            del work[tm]
                break
        else:
            rem[m] = c
    return SymExpr(rem)


def _spoly(f: SymExpr, g: SymExpr) -> SymExpr:
    (mf, cf), (mg, cg) = f.leading(), g.leading()
    lcm = lcm_mono(mf, mg)
    a = SymExpr({lcm - mf: cf.inverse()})
    b = SymExpr({lcm - mg: cg.inverse()})
    return a * f - b * g


def groebner(gens) -> list:
    """Buchberger's algorithm with the product criterion; returns the reduced basis."""
    basis = [_monic(g) for g in gens if g]
    pairs = [(i, j) for i in range(len(basis)) for j in range(i)]
    while pairs:
        pairs.sort(key=lambda ij: lcm_mono(basis[ij[0]].leading()[0], basis[ij[1]].leading()[0]))
        i, j = pairs.pop(0)
        mi, mj = basis[i].leading()[0], basis[j].leading()[0]
        if lcm_mono(mi, mj) == mi + mj:
            continue  # coprime leading monomials reduce to zero
        r = normal_form(_spoly(basis[i], basis[j]), basis)
        if r:
            basis.append(_monic(r))
            k = len(basis) - 1
            pairs.extend((k, t) for t in range(k))
    # minimize
    basis.sort(key=lambda g: g.leading()[0])
    minimal = []
    for g in basis:
        lm = g.leading()[0]
        if not any(divides(h.leading()[0], lm) for h in minimal):
            minimal.append(g)
    reduced = []
    for k, g in enumerate(minimal):
        others = minimal[:k] + minimal[k + 1:]
        lm, lc = g.leading()
        tail = SymExpr({m: c for m, c in g.terms.items() if m != lm})
        reduced.append(SymExpr({lm: lc}) + normal_form(tail, others))
    return sorted((_monic(g) for g in reduced), key=lambda g: g.leading()[0])


@lru_cache(maxsize=None)
def default_ideal() -> ConstraintIdeal:
    return ConstraintIdeal()


# ------------------------------------------------------ tau remainders

def divmod_tau(p: SymExpr, m: SymExpr):
    """Divide by m, monic in tau; returns (quotient, remainder) with deg_tau(r) < deg_tau(m)."""
    mc = m.coeffs_in("t")
    d = max(mc)
    if mc[d] != SymExpr.const(1):
        raise ValueError("divisor must be monic in tau")
    pc = p.coeffs_in("t")
    quot = {}
    top = max(pc) if pc else -1
    for k in range(top, d - 1, -1):
        c = pc.get(k)
        if c is None or not c:
            continue
        quot[k - d] = c
        for j, mj in mc.items():
            if j == d:
                continue
            idx = k - d + j
            pc[idx] = pc.get(idx, SymExpr()) - c * mj
        pc[k] = SymExpr()
    t = SymExpr.var("t")
    q = sum((c * t ** e for e, c in quot.items()), SymExpr())
    r = sum((c * t ** e for e, c in pc.items() if c), SymExpr())
    return q, r


def rem_mod_tau(p: SymExpr, m: SymExpr, ideal: ConstraintIdeal | None = None) -> SymExpr:
    """Remainder of p modulo m (monic in tau), then reduced by the constraint ideal."""
    ideal = ideal or default_ideal()
    _, r = divmod_tau(p, m)
    return ideal.reduce(r)


# ------------------------------------------------------ zero testing

def _random_point(rng: random.Random):
    """Integer numerators over a common denominator D for a point on the constraint variety.

    n = (2a, 2b, a^2+b^2-1)/D with D = a^2+b^2+1, Lambda = n x w, other symbols free.
    """
    while True:
        a, b = rng.randint(-9, 9), rng.randint(-9, 9)
        D = a * a + b * b + 1
        n = (2 * a, 2 * b, a * a + b * b - 1)
        w = [rng.randint(-7, 7) for _ in range(3)]
        lam = (n[1] * w[2] - n[2] * w[1], n[2] * w[0] - n[0] * w[2], n[0] * w[1] - n[1] * w[0])
        if any(lam):
            break
    # Lambda = lam / D; tau, xi are arbitrary rationals written over D
    nums = {"t": rng.randint(-40, 40), "L1": lam[0], "L2": lam[1], "L3": lam[2],
            "n1": n[0], "n2": n[1], "n3": n[2]}
    for name in ("x1", "x2", "x3"):
        nums[name] = rng.randint(-40, 40)
    s_num = lam[0] ** 2 + lam[1] ** 2 + lam[2] ** 2  # |Lambda|^2 = s_num / D^2
    return nums, D, s_num


def _eval_split(p: SymExpr, nums, D, s_num):
    """Evaluate p = E + ell*O at the point, returning D^K * (E, O) as Gaussian integers."""
    lk = INDEX["l"]
    items = []
    K = 0
    lcm_den = 1
    for m, c in p.terms.items():
        exps = unpack(m)
        el = exps[lk]
        weight = sum(exps) - el + 2 * (el // 2)
        K = max(K, weight)
        lcm_den = lcm_den * c.d // gcd(lcm_den, c.d)
        items.append((exps, el, weight, c))
    E = [0, 0]
    O = [0, 0]
    pow_cache = {}

    def ipow(base, e):
        key = (base, e)
        v = pow_cache.get(key)
        if v is None:
            v = base ** e
            pow_cache[key] = v
        return v

    for exps, el, weight, c in items:
        val = ipow(D, K - weight) * ipow(s_num, el // 2)
        for k, e in enumerate(exps):
            if e and k != lk:
                val *= ipow(nums[SYMBOLS[k]], e)
        scale = lcm_den // c.d
        acc = O if el % 2 else E
        acc[0] += c.a * scale * val
        acc[1] += c.b * scale * val
    return E, O


def random_zero_check(p: SymExpr, npoints: int = 64, seed: int = 20240611) -> bool:
    """Independent zero test: exact evaluation at random points of the constraint variety.

    ``ell`` is handled by splitting p into even and odd ell-parts, each of which
    must vanish (ell^2 -> |Lambda|^2 keeps everything rational).
    """
    if not p.terms:
        return True
    rng = random.Random(seed)
    for _ in range(npoints):
        nums, D, s_num = _random_point(rng)
        E, O = _eval_split(p, nums, D, s_num)
        if any(E) or any(O):
            return False
    return True


class ZeroTestDisagreement(RuntimeError):
    pass


def is_zero_mod_ideal(p: SymExpr, ideal: ConstraintIdeal | None = None,
                      cross_check: bool = True, npoints: int = 64) -> bool:
    """Ideal membership by normal form, cross-checked by random evaluation."""
    ideal = ideal or default_ideal()
    by_nf = not ideal.reduce(p).terms
    if cross_check:
        by_eval = random_zero_check(p, npoints=npoints)
        if by_eval != by_nf:
            raise ZeroTestDisagreement(
                f"normal form says {by_nf}, random evaluation says {by_eval}")
    return by_nf
