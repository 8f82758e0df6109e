"""Truncated series containers: tensor, Lie, cyclic and one-variable.

Every container carries its alphabet and its weighted degree cut and
refuses mixed-context arithmetic.  Terms of weight beyond the cut are
dropped on construction, zero coefficients are never stored, and all
values are immutable by convention: operations return new objects.
"""

from __future__ import annotations

from fractions import Fraction

from .alphabet import Alphabet, canonical_rotation, same_context
from .errors import ContextMismatchError, NotLieElementError
from . import lyndon

_ZERO = Fraction(0)


def _check_same(a, b):
    if not same_context(a, b):
        raise ContextMismatchError(
            f"mixed contexts: {a.alphabet}@{a.cut} vs {b.alphabet}@{b.cut}")


def _clean_terms(alphabet, cut, terms, min_weight=0):
    out = {}
    for key, c in terms.items():
        c = Fraction(c)
        if not c:
            continue
        w = alphabet.word_weight(key)
        if w < min_weight:
            raise ValueError(f"term {key} below minimal weight {min_weight}")
        if w <= cut:
            out[key] = c
    return out


class TensorSeries:
    """Element of the completed tensor algebra, truncated at the cut."""

    __slots__ = ("alphabet", "cut", "terms")

    def __init__(self, alphabet: Alphabet, cut: int, terms=None):
        if cut < 1:
            raise ValueError("cut must be a positive integer")
        self.alphabet = alphabet
        self.cut = cut
        self.terms = _clean_terms(alphabet, cut, terms or {})

    @classmethod
    def unit(cls, alphabet, cut):
        return cls(alphabet, cut, {(): Fraction(1)})

    def coefficient(self, word) -> Fraction:
        return self.terms.get(tuple(word), _ZERO)

    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self) -> Fraction:
        return self.terms.get((), _ZERO)

    def truncate(self, cut: int) -> "TensorSeries":
        return TensorSeries(self.alphabet, cut,
                            {k: v for k, v in self.terms.items()
                             if self.alphabet.word_weight(k) <= cut})

    def weight_component(self, w: int) -> "TensorSeries":
        return TensorSeries(self.alphabet, self.cut,
                            {k: v for k, v in self.terms.items()
                             if self.alphabet.word_weight(k) == w})

    def weights(self):
        return sorted({self.alphabet.word_weight(k) for k in self.terms})

    def __add__(self, other):
        _check_same(self, other)
        terms = dict(self.terms)
        lyndon.add_into(terms, other.terms)
        return TensorSeries(self.alphabet, self.cut, terms)

    def __sub__(self, other):
        _check_same(self, other)
        terms = dict(self.terms)
        lyndon.add_into(terms, other.terms, -1)
        return TensorSeries(self.alphabet, self.cut, terms)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "TensorSeries":
        c = Fraction(c)
        return TensorSeries(self.alphabet, self.cut,
                            {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, TensorSeries):
            _check_same(self, other)
            prod = lyndon.word_mul(self.terms, other.terms,
                                   self.alphabet, self.cut)
            return TensorSeries(self.alphabet, self.cut, prod)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        return (isinstance(other, TensorSeries) and same_context(self, other)
                and self.terms == other.terms)

    def __repr__(self):
        return _format_series(self, lambda k: self.alphabet.format_word(k) or "1")


class LieSeries:
    """Element of the completed free Lie algebra on the Lyndon basis."""

    __slots__ = ("alphabet", "cut", "terms")

    def __init__(self, alphabet: Alphabet, cut: int, terms=None):
        if cut < 1:
            raise ValueError("cut must be a positive integer")
        self.alphabet = alphabet
        self.cut = cut
        cleaned = _clean_terms(alphabet, cut, terms or {}, min_weight=1)
        for key in cleaned:
            if not lyndon.is_lyndon(key):
                raise ValueError(f"key {key} is not a Lyndon word")
        self.terms = cleaned

    @classmethod
    def zero(cls, alphabet, cut):
        return cls(alphabet, cut)

    @classmethod
    def generator(cls, alphabet, cut, letter):
        return cls(alphabet, cut, {(letter,): Fraction(1)})

    def coefficient(self, key) -> Fraction:
        return self.terms.get(tuple(key), _ZERO)

    def is_zero(self) -> bool:
        return not self.terms

    def min_weight(self):
        return min((self.alphabet.word_weight(k) for k in self.terms),
                   default=None)

    def truncate(self, cut: int) -> "LieSeries":
        return LieSeries(self.alphabet, cut,
                         {k: v for k, v in self.terms.items()
                          if self.alphabet.word_weight(k) <= cut})

    def weight_component(self, w: int) -> "LieSeries":
        return LieSeries(self.alphabet, self.cut,
                         {k: v for k, v in self.terms.items()
                          if self.alphabet.word_weight(k) == w})

    def weights(self):
        return sorted({self.alphabet.word_weight(k) for k in self.terms})

    def __add__(self, other):
        _check_same(self, other)
        terms = dict(self.terms)
        lyndon.add_into(terms, other.terms)
        return LieSeries(self.alphabet, self.cut, terms)

    def __sub__(self, other):
        _check_same(self, other)
        terms = dict(self.terms)
        lyndon.add_into(terms, other.terms, -1)
        return LieSeries(self.alphabet, self.cut, terms)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "LieSeries":
        c = Fraction(c)
        return LieSeries(self.alphabet, self.cut,
                         {k: v * c for k, v in self.terms.items()})

    def __rmul__(self, other):
        return self.scale(other)

    def bracket(self, other) -> "LieSeries":
        _check_same(self, other)
        out = lyndon.lie_bracket_dict(self.alphabet, self.terms, other.terms,
                                      self.cut)
        return LieSeries(self.alphabet, self.cut, out)

    def embed(self, cut=None) -> TensorSeries:
        cut = self.cut if cut is None else cut
        words = lyndon.lie_to_tensor(self.alphabet, self.terms, cut)
        return TensorSeries(self.alphabet, cut, words)

    def __eq__(self, other):
        return (isinstance(other, LieSeries) and same_context(self, other)
                and self.terms == other.terms)

    def __repr__(self):
        return _format_series(self, lambda k: "[" + self.alphabet.format_word(k) + "]")


class CyclicSeries:
    """Rational combination of cyclic words (rotation classes)."""

    __slots__ = ("alphabet", "cut", "terms")

    def __init__(self, alphabet: Alphabet, cut: int, terms=None):
        if cut < 1:
            raise ValueError("cut must be a positive integer")
        self.alphabet = alphabet
        self.cut = cut
        cleaned = _clean_terms(alphabet, cut, terms or {}, min_weight=1)
        for key in cleaned:
            if key != canonical_rotation(key):
                raise ValueError(f"cyclic key {key} is not canonical")
        self.terms = cleaned

    @classmethod
    def zero(cls, alphabet, cut):
        return cls(alphabet, cut)

    def coefficient(self, word) -> Fraction:
        return self.terms.get(canonical_rotation(tuple(word)), _ZERO)

    def is_zero(self) -> bool:
        return not self.terms

    def truncate(self, cut: int) -> "CyclicSeries":
        return CyclicSeries(self.alphabet, cut,
                            {k: v for k, v in self.terms.items()
                             if self.alphabet.word_weight(k) <= cut})

    def weight_component(self, w: int) -> "CyclicSeries":
        return CyclicSeries(self.alphabet, self.cut,
                            {k: v for k, v in self.terms.items()
                             if self.alphabet.word_weight(k) == w})

    def weights(self):
        return sorted({self.alphabet.word_weight(k) for k in self.terms})

    def __add__(self, other):
        _check_same(self, other)
        terms = dict(self.terms)
        lyndon.add_into(terms, other.terms)
        return CyclicSeries(self.alphabet, self.cut, terms)

    def __sub__(self, other):
        _check_same(self, other)
        terms = dict(self.terms)
        lyndon.add_into(terms, other.terms, -1)
        return CyclicSeries(self.alphabet, self.cut, terms)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "CyclicSeries":
        c = Fraction(c)
        return CyclicSeries(self.alphabet, self.cut,
                            {k: v * c for k, v in self.terms.items()})

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        return (isinstance(other, CyclicSeries) and same_context(self, other)
                and self.terms == other.terms)

    def __repr__(self):
        return _format_series(self, lambda k: "tr(" + self.alphabet.format_word(k) + ")")


class ScalarSeries:
    """One-variable truncated power series with zero constant term."""

    __slots__ = ("cut", "coeffs")

    def __init__(self, cut: int, coeffs=None):
        if cut < 1:
            raise ValueError("cut must be a positive integer")
        self.cut = cut
        out = {}
        for k, c in (coeffs or {}).items():
            c = Fraction(c)
            if k < 1:
                raise ValueError("scalar series must have zero constant term")
            if c and k <= cut:
                out[k] = c
        self.coeffs = out

    @classmethod
    def zero(cls, cut):
        return cls(cut)

    def coefficient(self, k) -> Fraction:
        return self.coeffs.get(k, _ZERO)

    def is_zero(self) -> bool:
        return not self.coeffs

    def truncate(self, cut: int) -> "ScalarSeries":
        return ScalarSeries(cut, {k: v for k, v in self.coeffs.items() if k <= cut})

    def __add__(self, other):
        if self.cut != other.cut:
            raise ContextMismatchError("mixed scalar cuts")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            c = out.get(k, _ZERO) + v
            if c:
                out[k] = c
            else:
                del out[k]
        return ScalarSeries(self.cut, out)

    def __eq__(self, other):
        return (isinstance(other, ScalarSeries) and self.cut == other.cut
                and self.coeffs == other.coeffs)

    def even_part(self) -> dict:
        return {k: v for k, v in self.coeffs.items() if k % 2 == 0}

    def __repr__(self):
        items = [f"{v}*s^{k}" for k, v in sorted(self.coeffs.items())]
        return " + ".join(items) if items else "0"


def _format_series(series, fmt):
    keys = sorted(series.terms,
                  key=lambda k: (series.alphabet.word_weight(k), len(k), k))
    if not keys:
        return "0"
    return " + ".join(f"{series.terms[k]}*{fmt(k)}" for k in keys)


# ---------------------------------------------------------------------------
# exp / log / projections / substitution

def exp(a: LieSeries) -> TensorSeries:
    """Exponential of a Lie series in the tensor algebra; group-like."""
    if a.min_weight() is not None and a.min_weight() < 1:
        raise ValueError("exp needs weight >= 1 input")
    t = a.embed()
    out = TensorSeries.unit(a.alphabet, a.cut)
    power = TensorSeries.unit(a.alphabet, a.cut)
    fact = 1
    for k in range(1, a.cut + 1):
        power = power * t
        if power.is_zero():
            break
        fact *= k
        out = out + power.scale(Fraction(1, fact))
    return out


def log(t: TensorSeries) -> LieSeries:
    """Logarithm of a group-like tensor series, returned on the Lyndon basis.

    Raises NotLieElementError when the logarithm fails the Lie test, which
    is exactly the group-likeness test used throughout.
    """
    if t.constant_term() != 1:
        raise ValueError("log needs constant term 1")
    w = t - TensorSeries.unit(t.alphabet, t.cut)
    out = TensorSeries(t.alphabet, t.cut)
    power = TensorSeries.unit(t.alphabet, t.cut)
    for k in range(1, t.cut + 1):
        power = power * w
        if power.is_zero():
            break
        out = out + power.scale(Fraction((-1) ** (k + 1), k))
    lie = lyndon.tensor_to_lie(t.alphabet, out.terms)
    return LieSeries(t.alphabet, t.cut, lie)


def tr_project(t: TensorSeries) -> CyclicSeries:
    """Project words onto rotation classes; the constant term is discarded."""
    out: dict = {}
    for word, c in t.terms.items():
        if not word:
            continue
        key = canonical_rotation(word)
        acc = out.get(key, _ZERO) + c
        if acc:
            out[key] = acc
        else:
            del out[key]
    return CyclicSeries(t.alphabet, t.cut, out)


def dynkin_project(t: TensorSeries) -> LieSeries:
    """Left-bracketing projector: on the length-d component it divides the
    left-normed bracketing by d, so Lie elements are fixed (Dynkin-Specht-
    Wever).  The divisor is the word length, not the weighted degree."""
    if t.constant_term():
        raise ValueError("dynkin projection needs zero constant term")
    out: dict = {}
    for word, c in t.terms.items():
        lyndon.add_into(out, lyndon.left_normed_dict(t.alphabet, word),
                        Fraction(c, len(word)))
    return LieSeries(t.alphabet, t.cut, out)


def _check_substitution(images: dict):
    contexts = {(s.alphabet, s.cut) for s in images.values()}
    if len(contexts) != 1:
        raise ContextMismatchError("substitution images must share one context")
    for letter, s in images.items():
        if s.is_zero() or s.min_weight() < 1:
            raise ValueError(
                f"substitution image of letter {letter} needs weight >= 1")
    (alphabet, cut), = contexts
    return alphabet, cut


def substitute(obj, images: dict):
    """Filtered endomorphism determined by letter -> LieSeries images.

    images must cover every letter of obj's alphabet; the target context is
    taken from the images, so substitution may change alphabets (as in the
    gluing and elliptic constructions).
    """
    if set(images) != set(obj.alphabet.letters()):
        raise ValueError("substitution must assign every generator")
    target, cut = _check_substitution(images)
    cache: dict = {}

    def on_key(key) -> dict:
        got = cache.get(key)
        if got is None:
            if len(key) == 1:
                got = images[key[0]].terms
            else:
                u, v = lyndon.std_split(key)
                got = lyndon.lie_bracket_dict(target, on_key(u), on_key(v), cut)
            cache[key] = got
        return got

    if isinstance(obj, LieSeries):
        out: dict = {}
        for key, c in obj.terms.items():
            lyndon.add_into(out, on_key(key), c)
        return LieSeries(target, cut, out)
    if isinstance(obj, TensorSeries):
        embedded = {l: images[l].embed() for l in images}
        out_t = TensorSeries(target, cut)
        for word, c in obj.terms.items():
            prod = TensorSeries.unit(target, cut)
            for letter in word:
                prod = prod * embedded[letter]
                if prod.is_zero():
                    break
            out_t = out_t + prod.scale(c)
        return out_t
    raise TypeError(f"cannot substitute into {type(obj).__name__}")


def identity_substitution(alphabet: Alphabet, cut: int) -> dict:
    return {l: LieSeries.generator(alphabet, cut, l) for l in alphabet.letters()}


# ---------------------------------------------------------------------------
# group-like expansion of surface-group generators

def parse_group_word(alphabet: Alphabet, text: str):
    """Parse tokens like "a1 b1 a1^-1 c2" into (letter, sign) pairs.

    a_i, b_i, c_j name the group generators expanding to e^{x_i}, e^{y_i},
    e^{z_j}; the suffix ^-1 marks an inverse.
    """
    out = []
    for tok in text.split():
        sign = 1
        if tok.endswith("^-1"):
            sign, tok = -1, tok[:-3]
        kind, idx = tok[:1], tok[1:]
        if kind not in "abc" or not idx.isdigit():
            raise ValueError(f"unknown group letter {tok!r}")
        i = int(idx)
        letter = {"a": alphabet.x, "b": alphabet.y, "c": alphabet.z}[kind](i)
        out.append((letter, sign))
    return out


def theta_exp(alphabet: Alphabet, cut: int, word: str) -> TensorSeries:
    """Group-like expansion: the product of e^{+-generator} named by word."""
    out = TensorSeries.unit(alphabet, cut)
    for letter, sign in parse_group_word(alphabet, word):
        gen = LieSeries.generator(alphabet, cut, letter).scale(sign)
        out = out * exp(gen)
    return out


def boundary_word(alphabet: Alphabet) -> str:
    """The boundary product: commutators of a_i, b_i followed by the c_j."""
    parts = []
    for i in range(1, alphabet.g + 1):
        parts += [f"a{i}", f"b{i}", f"a{i}^-1", f"b{i}^-1"]
    parts += [f"c{j}" for j in range(1, alphabet.n + 1)]
    return " ".join(parts)
