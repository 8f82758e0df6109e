"""The noncommutative divergence and its group integration.

partial_derivative implements the map defined by first-order variation of
one generator: replacing w by w + eps*xi in alpha produces
eps * ad(d_w alpha)(xi), where ad extends from the Lie algebra to its
enveloping algebra as a unital algebra map.  On a bracket this gives the
recursion d_w([a, b]) = a (d_w b) - b (d_w a) with products taken in the
tensor algebra, and d_w(v) = delta_{vw} on generators.

Divergence and its integral lose one weight at the top: the degree-M part
of a derivation stores its x/y images beyond any cut that also stores the
derivation, so div and the group cocycle return series at cut M-1.
"""

from __future__ import annotations

from fractions import Fraction

from .alphabet import Alphabet
from .series import LieSeries, TensorSeries, CyclicSeries, ScalarSeries, tr_project
from .derivations import TangentialDerivation, Automorphism, aut_log
from .bch import r_series
from . import lyndon

_partial_cache: dict = {}


def _partial_key(alphabet: Alphabet, letter: int, key) -> dict:
    ck = (alphabet, letter, key)
    got = _partial_cache.get(ck)
    if got is None:
        if len(key) == 1:
            got = {(): Fraction(1)} if key[0] == letter else {}
        else:
            a, b = lyndon.std_split(key)
            got = lyndon.word_mul(lyndon.embed_key(alphabet, a),
                                  _partial_key(alphabet, letter, b))
            lyndon.add_into(got, lyndon.word_mul(
                lyndon.embed_key(alphabet, b),
                _partial_key(alphabet, letter, a)), -1)
        _partial_cache[ck] = got
    return got


def partial_derivative(letter: int, a: LieSeries) -> TensorSeries:
    out: dict = {}
    for key, c in a.terms.items():
        lyndon.add_into(out, _partial_key(a.alphabet, letter, key), c)
    return TensorSeries(a.alphabet, a.cut, out)


def div(u: TangentialDerivation) -> CyclicSeries:
    """sum_i tr(d_{x_i} u(x_i) + d_{y_i} u(y_i)) + sum_j tr(z_j d_{z_j} u_j)."""
    alphabet = u.alphabet
    cut = u.cut - 1
    if cut < 1:
        raise ValueError("divergence needs cut >= 2")
    out = CyclicSeries.zero(alphabet, cut)
    for letter in range(2 * alphabet.g):
        out = out + tr_project(
            partial_derivative(letter, u.images[letter]).truncate(cut))
    for j in range(alphabet.n):
        z = alphabet.z(j + 1)
        part = partial_derivative(z, u.data[j])
        piece = lyndon.word_mul({(z,): Fraction(1)}, part.terms,
                                alphabet, cut)
        out = out + tr_project(TensorSeries(alphabet, cut, piece))
    return out


def j_of_derivation(u: TangentialDerivation) -> CyclicSeries:
    """j(exp u) = sum_k u^k(div u) / (k+1)!, the unique cocycle whose
    derivative along one-parameter subgroups is div."""
    d = div(u)
    out = CyclicSeries.zero(d.alphabet, d.cut)
    term = d
    fact = 1
    k = 0
    while not term.is_zero():
        out = out + term.scale(Fraction(1, fact))
        k += 1
        fact *= k + 1
        term = u.apply_cyclic(term)
    return out


def j_cocycle(F: Automorphism) -> CyclicSeries:
    return j_of_derivation(aut_log(F))


def r_element(alphabet: Alphabet, cut: int) -> CyclicSeries:
    """sum_i tr(r(x_i)) + tr(r(y_i)) with r(s) = log(s/(e^s - 1))."""
    coeffs = r_series(cut)
    terms: dict = {}
    for letter in range(2 * alphabet.g):
        for k, c in coeffs.coeffs.items():
            terms[(letter,) * k] = terms.get((letter,) * k, Fraction(0)) + c
    return CyclicSeries(alphabet, cut, terms)


def tr_h(h: ScalarSeries, a: LieSeries) -> CyclicSeries:
    """sum_k c_k tr(a^k), powers taken in the tensor algebra."""
    t = a.embed()
    out = CyclicSeries.zero(a.alphabet, a.cut)
    power = TensorSeries.unit(a.alphabet, a.cut)
    for k in range(1, h.cut + 1):
        power = power * t
        if power.is_zero():
            break
        c = h.coefficient(k)
        if c:
            out = out + tr_project(power).scale(c)
    return out
