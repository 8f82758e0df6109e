"""Baker-Campbell-Hausdorff series and scalar power-series helpers.

The BCH series is computed once, on the Lyndon basis of the free Lie
algebra on two weight-1 generators, by the classical recursion

    (n+1) c_{n+1} = 1/2 [a - b, c_n]
        + sum_{p>=1, 2p<=n} B_{2p}/(2p)! sum_{k_1+..+k_{2p}=n}
              [c_{k_1}, [... [c_{k_{2p}}, a + b] ...]]

with c_1 = a + b, and then evaluated on concrete arguments through the
substitution endomorphism.  That keeps bch() independent of the brute
force route log(exp(a) exp(b)) in the tensor algebra, which the tests use
as the oracle.
"""

from __future__ import annotations

from fractions import Fraction

from .alphabet import Alphabet
from .series import LieSeries, ScalarSeries, substitute
from .errors import ContextMismatchError

_bernoulli_cache = [Fraction(1)]


def bernoulli(k: int) -> Fraction:
    """Bernoulli numbers with B_1 = -1/2."""
    while len(_bernoulli_cache) <= k:
        m = len(_bernoulli_cache)
        acc = Fraction(0)
        for j, bj in enumerate(_bernoulli_cache):
            acc += Fraction(_binom(m + 1, j)) * bj
        _bernoulli_cache.append(-acc / (m + 1))
    return _bernoulli_cache[k]


def _binom(n, k):
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


_AB = Alphabet(1, 0)          # two weight-1 letters standing for a and b
_A, _B = 0, 1
_bch_components: list = []    # _bch_components[n] = c_{n+1} at cut n+1


def bch_components(depth: int):
    """Homogeneous components c_1 .. c_depth of log(e^a e^b)."""
    while len(_bch_components) < depth:
        n = len(_bch_components)
        if n == 0:
            c1 = LieSeries(_AB, 1, {(_A,): 1, (_B,): 1})
            _bch_components.append(c1)
            continue
        cut = n + 1
        lifted = [LieSeries(_AB, cut, c.terms) for c in _bch_components]
        a_minus_b = LieSeries(_AB, cut, {(_A,): 1, (_B,): -1})
        a_plus_b = LieSeries(_AB, cut, {(_A,): 1, (_B,): 1})
        acc = a_minus_b.bracket(lifted[n - 1]).scale(Fraction(1, 2))
        for p in range(1, n // 2 + 1):
            coeff = bernoulli(2 * p) / _factorial(2 * p)
            for ks in _compositions(n, 2 * p):
                term = a_plus_b
                for k in reversed(ks):
                    term = lifted[k - 1].bracket(term)
                acc = acc + term.scale(coeff)
        _bch_components.append(acc.scale(Fraction(1, n + 1)))
    return _bch_components[:depth]


def _factorial(k):
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def _compositions(total, parts):
    """All tuples of `parts` positive integers summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def bch(a: LieSeries, b: LieSeries) -> LieSeries:
    """log(exp(a) exp(b)) on the Lyndon basis."""
    if a.alphabet != b.alphabet or a.cut != b.cut:
        raise ContextMismatchError("bch needs matching contexts")
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    images = {_A: a, _B: b}
    out = LieSeries.zero(a.alphabet, a.cut)
    for comp in bch_components(a.cut):
        lifted = LieSeries(_AB, a.cut, comp.terms)
        out = out + substitute(lifted, images)
    return out


# ---------------------------------------------------------------------------
# scalar series utilities

def scalar_mul(a: dict, b: dict, cut: int) -> dict:
    out: dict = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = ka + kb
            if k <= cut:
                out[k] = out.get(k, Fraction(0)) + va * vb
    return {k: v for k, v in out.items() if v}


def scalar_log1p(w: dict, cut: int) -> dict:
    """log(1 + w) for a series w with zero constant term."""
    out: dict = {}
    power = {0: Fraction(1)}
    for m in range(1, cut + 1):
        power = scalar_mul(power, w, cut)
        if not power:
            break
        sign = Fraction((-1) ** (m + 1), m)
        for k, v in power.items():
            out[k] = out.get(k, Fraction(0)) + sign * v
    return {k: v for k, v in out.items() if v}


def r_series(cut: int) -> ScalarSeries:
    """log(s / (e^s - 1)) = -s/2 - s^2/24 + s^4/2880 - ...  truncated."""
    w = {k: Fraction(1, _factorial(k + 1)) for k in range(1, cut + 1)}
    return ScalarSeries(cut, {k: -v for k, v in scalar_log1p(w, cut).items()})
