"""Tangential derivations and the pro-unipotent automorphism group.

A tangential derivation stores its images on the x/y generators and its
tangential data u_j with u(z_j) = [z_j, u_j]; the z images are derived.
Data is normalized to have no coefficient on the single-letter word z_j
(the kernel of ad z_j), so every element has one canonical representation
and the divergence formula is well posed.

Automorphisms store honest generator images (w plus higher weight) and
group-level tangential data f_j with F(z_j) = e^{-ad f_j}(z_j).  Top-weight
care: images of weight-1 generators under a degree-m part live at weight
m+1, so at container cut M only parts of degree <= M-1 are visible there,
while the tangential data carries degree-M content exactly.  der_exp
therefore solves for f_j in a temporarily widened window (cut M+2), where
every needed input is still determined by the stored data and images.
"""

from __future__ import annotations

from fractions import Fraction

from .alphabet import Alphabet, same_context
from .errors import ContextMismatchError, MathInconsistencyError
from .series import LieSeries, TensorSeries, CyclicSeries, tr_project
from .linalg import AffineSystem
from .bch import bch
from . import lyndon

_ZERO = Fraction(0)


def _check_context(a, b):
    if a.alphabet != b.alphabet or a.cut != b.cut:
        raise ContextMismatchError("mixed derivation/automorphism contexts")


def _check_applicable(op, s):
    """Operators act exactly on series at any cut not above their own."""
    if op.alphabet != s.alphabet or s.cut > op.cut:
        raise ContextMismatchError(
            f"cannot apply cut-{op.cut} operator to {s.alphabet}@{s.cut}")


class Derivation:
    """A derivation of the free Lie algebra, given by generator images."""

    def __init__(self, alphabet: Alphabet, cut: int, images: dict):
        self.alphabet = alphabet
        self.cut = cut
        imgs = {}
        for letter in alphabet.letters():
            s = images.get(letter)
            imgs[letter] = s if s is not None else LieSeries.zero(alphabet, cut)
            if imgs[letter].alphabet != alphabet or imgs[letter].cut != cut:
                raise ContextMismatchError("image context mismatch")
        self.images = imgs
        self._lie_cache: dict = {}
        self._embed_cache: dict = {}

    def is_zero(self) -> bool:
        return all(s.is_zero() for s in self.images.values())

    # -- action ------------------------------------------------------------

    def _on_key(self, key) -> dict:
        got = self._lie_cache.get(key)
        if got is None:
            if len(key) == 1:
                got = self.images[key[0]].terms
            else:
                u, v = lyndon.std_split(key)
                got = lyndon.lie_bracket_dict(
                    self.alphabet, self._on_key(u), {v: Fraction(1)}, self.cut)
                lyndon.add_into(got, lyndon.lie_bracket_dict(
                    self.alphabet, {u: Fraction(1)}, self._on_key(v), self.cut))
            self._lie_cache[key] = got
        return got

    def apply_lie(self, s: LieSeries) -> LieSeries:
        _check_applicable(self, s)
        out: dict = {}
        for key, c in s.terms.items():
            lyndon.add_into(out, self._on_key(key), c)
        return LieSeries(self.alphabet, s.cut, out)

    def _embedded_image(self, letter) -> dict:
        got = self._embed_cache.get(letter)
        if got is None:
            got = lyndon.lie_to_tensor(self.alphabet,
                                       self.images[letter].terms, self.cut)
            self._embed_cache[letter] = got
        return got

    def _image_triples(self, letter):
        got = self._embed_cache.get(("triples", letter))
        if got is None:
            ww = self.alphabet.word_weight
            got = sorted(((ww(w), w, c) for w, c in
                          self._embedded_image(letter).items()),
                         key=lambda t: t[0])
            self._embed_cache[("triples", letter)] = got
        return got

    def apply_tensor(self, t: TensorSeries) -> TensorSeries:
        """Leibniz rule over concatenation."""
        _check_applicable(self, t)
        alphabet, cut = self.alphabet, t.cut
        ww = alphabet.word_weight
        out: dict = {}
        for word, c in t.terms.items():
            wt = ww(word)
            for i, letter in enumerate(word):
                room = cut - wt + alphabet.weight(letter)
                pre, suf = word[:i], word[i + 1:]
                for iwt, iw, ic in self._image_triples(letter):
                    if iwt > room:
                        break
                    w = pre + iw + suf
                    acc = out.get(w, _ZERO) + c * ic
                    if acc:
                        out[w] = acc
                    else:
                        del out[w]
        return TensorSeries(alphabet, cut, out)

    def apply_cyclic(self, c: CyclicSeries) -> CyclicSeries:
        """The action descends to rotation classes because tr is a trace."""
        _check_applicable(self, c)
        out = CyclicSeries.zero(self.alphabet, c.cut)
        for word, coeff in c.terms.items():
            t = TensorSeries(self.alphabet, c.cut, {word: coeff})
            out = out + tr_project(self.apply_tensor(t))
        return out

    def apply(self, obj):
        if isinstance(obj, LieSeries):
            return self.apply_lie(obj)
        if isinstance(obj, TensorSeries):
            return self.apply_tensor(obj)
        if isinstance(obj, CyclicSeries):
            return self.apply_cyclic(obj)
        raise TypeError(f"cannot apply derivation to {type(obj).__name__}")


class TangentialDerivation(Derivation):
    """Derivation with tangential data: u(z_j) = [z_j, u_j]."""

    def __init__(self, alphabet: Alphabet, cut: int, images: dict,
                 data: list, check_positive: bool = True):
        if len(data) != alphabet.n:
            raise ValueError("need one tangential datum per z generator")
        norm_data = []
        full_images = dict(images)
        for j, u_j in enumerate(data):
            if u_j.alphabet != alphabet or u_j.cut != cut:
                raise ContextMismatchError("tangential data context mismatch")
            z = alphabet.z(j + 1)
            c = u_j.coefficient((z,))
            if c:
                u_j = u_j - LieSeries.generator(alphabet, cut, z).scale(c)
            norm_data.append(u_j)
            full_images[z] = LieSeries.generator(alphabet, cut, z).bracket(u_j)
        super().__init__(alphabet, cut, full_images)
        self.data = norm_data
        if check_positive:
            for letter in alphabet.letters():
                mw = self.images[letter].min_weight()
                if mw is not None and mw <= alphabet.weight(letter):
                    raise ValueError(
                        f"derivation does not raise the weight of "
                        f"{alphabet.name(letter)}")

    @classmethod
    def zero(cls, alphabet, cut):
        return cls(alphabet, cut, {},
                   [LieSeries.zero(alphabet, cut)] * alphabet.n)

    def _xy_images(self):
        return {l: self.images[l] for l in self.alphabet.letters()
                if l < 2 * self.alphabet.g}

    def __add__(self, other):
        _check_context(self, other)
        imgs = {l: self.images[l] + other.images[l]
                for l in self._xy_images()}
        data = [a + b for a, b in zip(self.data, other.data)]
        return TangentialDerivation(self.alphabet, self.cut, imgs, data,
                                    check_positive=False)

    def scale(self, c) -> "TangentialDerivation":
        imgs = {l: s.scale(c) for l, s in self._xy_images().items()}
        data = [d.scale(c) for d in self.data]
        return TangentialDerivation(self.alphabet, self.cut, imgs, data,
                                    check_positive=False)

    def __eq__(self, other):
        return (isinstance(other, TangentialDerivation)
                and same_context(self, other)
                and self.images == other.images and self.data == other.data)

    def bracket(self, other) -> "TangentialDerivation":
        """Commutator u o v - v o u.

        The tangential data of the bracket is u(v_j) - v(u_j) + [u_j, v_j],
        the unique combination satisfying [u,v](z_j) = [z_j, .] by the
        Jacobi identity; the constructor renormalizes it.
        """
        _check_context(self, other)
        imgs = {}
        for l in self._xy_images():
            imgs[l] = (self.apply_lie(other.images[l])
                       - other.apply_lie(self.images[l]))
        data = []
        for j in range(self.alphabet.n):
            data.append(self.apply_lie(other.data[j])
                        - other.apply_lie(self.data[j])
                        + self.data[j].bracket(other.data[j]))
        return TangentialDerivation(self.alphabet, self.cut, imgs, data,
                                    check_positive=False)

    # -- widened-window action used by the exp data solve -------------------

    def _extended_apply(self, terms: dict, ext_cut: int, cache: dict) -> dict:
        alphabet = self.alphabet

        def on_key(key):
            got = cache.get(key)
            if got is None:
                if len(key) == 1:
                    letter = key[0]
                    if letter >= 2 * alphabet.g:
                        j = letter - 2 * alphabet.g
                        got = lyndon.lie_bracket_dict(
                            alphabet, {key: Fraction(1)},
                            self.data[j].terms, ext_cut)
                    else:
                        got = self.images[letter].terms
                else:
                    u, v = lyndon.std_split(key)
                    got = lyndon.lie_bracket_dict(
                        alphabet, on_key(u), {v: Fraction(1)}, ext_cut)
                    lyndon.add_into(got, lyndon.lie_bracket_dict(
                        alphabet, {u: Fraction(1)}, on_key(v), ext_cut))
                cache[key] = got
            return got

        out: dict = {}
        for key, c in terms.items():
            lyndon.add_into(out, on_key(key), c)
        return out


class Automorphism:
    """Filtered automorphism with identity associated graded."""

    def __init__(self, alphabet: Alphabet, cut: int, images: dict, data: list):
        if len(data) != alphabet.n:
            raise ValueError("need one tangential datum per z generator")
        self.alphabet = alphabet
        self.cut = cut
        self.images = {}
        for letter in alphabet.letters():
            s = images.get(letter)
            if s is None:
                s = LieSeries.generator(alphabet, cut, letter)
            if s.alphabet != alphabet or s.cut != cut:
                raise ContextMismatchError("image context mismatch")
            self.images[letter] = s
        norm = []
        for j, f in enumerate(data):
            if f.alphabet != alphabet or f.cut != cut:
                raise ContextMismatchError("tangential data context mismatch")
            z = alphabet.z(j + 1)
            c = f.coefficient((z,))
            if c:
                # left-multiplying F_j by exp(-c z_j) fixes the conjugation
                # and kills the z_j coefficient of the log
                f = bch(LieSeries.generator(alphabet, cut, z).scale(-c), f)
            norm.append(f)
        self.data = norm
        self._lie_cache: dict = {}
        self._embed_cache: dict = {}
        self._word_cache: dict = {}

    @classmethod
    def identity(cls, alphabet, cut):
        return cls(alphabet, cut, {},
                   [LieSeries.zero(alphabet, cut)] * alphabet.n)

    def is_identity(self) -> bool:
        gen = Automorphism.identity(self.alphabet, self.cut)
        return self.images == gen.images and self.data == gen.data

    def __eq__(self, other):
        return (isinstance(other, Automorphism) and same_context(self, other)
                and self.images == other.images and self.data == other.data)

    def validate(self):
        """Check the unitriangular shape: image of w is w plus higher weight."""
        for letter in self.alphabet.letters():
            diff = self.images[letter] - LieSeries.generator(
                self.alphabet, self.cut, letter)
            mw = diff.min_weight()
            if mw is not None and mw <= self.alphabet.weight(letter):
                raise ValueError(
                    f"automorphism is not unitriangular at "
                    f"{self.alphabet.name(letter)}")
        return self

    # -- action ------------------------------------------------------------

    def _on_key(self, key) -> dict:
        got = self._lie_cache.get(key)
        if got is None:
            if len(key) == 1:
                got = self.images[key[0]].terms
            else:
                u, v = lyndon.std_split(key)
                got = lyndon.lie_bracket_dict(
                    self.alphabet, self._on_key(u), self._on_key(v), self.cut)
            self._lie_cache[key] = got
        return got

    def apply_lie(self, s: LieSeries) -> LieSeries:
        _check_applicable(self, s)
        out: dict = {}
        for key, c in s.terms.items():
            lyndon.add_into(out, self._on_key(key), c)
        out = {k: v for k, v in out.items()
               if self.alphabet.word_weight(k) <= s.cut}
        return LieSeries(self.alphabet, s.cut, out)

    def _embedded_image(self, letter) -> dict:
        got = self._embed_cache.get(letter)
        if got is None:
            got = lyndon.lie_to_tensor(self.alphabet,
                                       self.images[letter].terms, self.cut)
            self._embed_cache[letter] = got
        return got

    def _image_triples(self, letter):
        got = self._embed_cache.get(("triples", letter))
        if got is None:
            ww = self.alphabet.word_weight
            got = sorted(((ww(w), w, c) for w, c in
                          self._embedded_image(letter).items()),
                         key=lambda t: t[0])
            self._embed_cache[("triples", letter)] = got
        return got

    def _apply_word(self, word) -> dict:
        """Image of a word under the induced algebra map, with suffix
        memoization (words in one computation share many tails)."""
        got = self._word_cache.get(word)
        if got is None:
            if not word:
                got = {(): Fraction(1)}
            else:
                rest = self._apply_word(word[1:])
                ww = self.alphabet.word_weight
                cut = self.cut
                got = {}
                for rw, rc in rest.items():
                    room = cut - ww(rw)
                    for iwt, iw, ic in self._image_triples(word[0]):
                        if iwt > room:
                            break
                        w = iw + rw
                        acc = got.get(w, _ZERO) + ic * rc
                        if acc:
                            got[w] = acc
                        else:
                            del got[w]
            self._word_cache[word] = got
        return got

    def apply_tensor(self, t: TensorSeries) -> TensorSeries:
        _check_applicable(self, t)
        out: dict = {}
        for word, c in t.terms.items():
            lyndon.add_into(out, self._apply_word(word), c)
        return TensorSeries(self.alphabet, t.cut, out)

    def apply_cyclic(self, c: CyclicSeries) -> CyclicSeries:
        _check_applicable(self, c)
        out = CyclicSeries.zero(self.alphabet, c.cut)
        for word, coeff in c.terms.items():
            t = TensorSeries(self.alphabet, c.cut, {word: coeff})
            out = out + tr_project(self.apply_tensor(t))
        return out

    def apply(self, obj):
        if isinstance(obj, LieSeries):
            return self.apply_lie(obj)
        if isinstance(obj, TensorSeries):
            return self.apply_tensor(obj)
        if isinstance(obj, CyclicSeries):
            return self.apply_cyclic(obj)
        raise TypeError(f"cannot apply automorphism to {type(obj).__name__}")

    # -- group structure -----------------------------------------------------

    def compose(self, other: "Automorphism") -> "Automorphism":
        """(F o G)(a) = F(G(a)); data law (F o G)_j = F_j . F(G_j)."""
        _check_context(self, other)
        images = {l: self.apply_lie(other.images[l])
                  for l in self.alphabet.letters()}
        data = [bch(self.data[j], self.apply_lie(other.data[j]))
                for j in range(self.alphabet.n)]
        return Automorphism(self.alphabet, self.cut, images, data)

    def inverse(self) -> "Automorphism":
        inv_images = {}
        for letter in self.alphabet.letters():
            h = LieSeries.generator(self.alphabet, self.cut, letter)
            while True:
                diff = self.apply_lie(h) - LieSeries.generator(
                    self.alphabet, self.cut, letter)
                mw = diff.min_weight()
                if mw is None:
                    break
                h = h - diff.weight_component(mw)
            inv_images[letter] = h
        inv = Automorphism(self.alphabet, self.cut, inv_images,
                           [LieSeries.zero(self.alphabet, self.cut)]
                           * self.alphabet.n)
        data = [inv.apply_lie(self.data[j]).scale(-1)
                for j in range(self.alphabet.n)]
        return Automorphism(self.alphabet, self.cut, inv_images, data)


# ---------------------------------------------------------------------------
# exp and log between tder and TAut

def _solve_bracket_z(alphabet, cut, z_letter, rhs: dict, m: int):
    """Solve [z, g] = rhs for g in the weight-m part of the Lie algebra.

    The kernel of ad z on that part is spanned by z itself, whose column is
    zero; the free-variables-to-zero policy therefore lands exactly on the
    normalized representative.
    """
    variables = list(lyndon.lyndon_words_of_weight(alphabet, m))
    sys = AffineSystem(variables)
    columns = {}
    row_keys = set(rhs)
    for var in variables:
        col = lyndon.pair_bracket(alphabet, (z_letter,), var)
        columns[var] = col
        row_keys.update(col)
    for key in sorted(row_keys):
        sys.add_row({v: columns[v].get(key, _ZERO) for v in variables},
                    rhs.get(key, _ZERO))
    res = sys.solve()
    if not res.consistent:
        raise MathInconsistencyError(
            f"no solution of [z, g] = rhs at weight {m}", weight=m)
    return {v: c for v, c in res.solution.items() if c}


def _conjugate_z(alphabet, f: dict, z_letter, ext_cut: int) -> dict:
    """e^{-ad f}(z) as a Lie dict at the widened cut."""
    out = {(z_letter,): Fraction(1)}
    term = {(z_letter,): Fraction(1)}
    fact = 1
    for k in range(1, ext_cut + 1):
        term = lyndon.lie_bracket_dict(alphabet, f, term, ext_cut)
        if not term:
            break
        fact *= k
        lyndon.add_into(out, term, Fraction((-1) ** k, fact))
    return out


def _exp_images(u: TangentialDerivation) -> dict:
    alphabet, cut = u.alphabet, u.cut
    images = {}
    for letter in alphabet.letters():
        acc = {(letter,): Fraction(1)}
        term = {(letter,): Fraction(1)}
        fact = 1
        for k in range(1, cut + 1):
            applied: dict = {}
            for key, c in term.items():
                lyndon.add_into(applied, u._on_key(key), c)
            term = applied
            if not term:
                break
            fact *= k
            lyndon.add_into(acc, term, Fraction(1, fact))
        images[letter] = LieSeries(alphabet, cut, acc)
    return images


def _exp_data(u: TangentialDerivation) -> list:
    """Group tangential data of exp(u), solved in a widened window.

    The exponentiated image of z_j has its weight-(M+2) part determined by
    the stored data and images (degree-M x/y images never reach it), so
    f_j comes out exact through the container cut."""
    alphabet, cut = u.alphabet, u.cut
    data = []
    ext = cut + 2
    for j in range(alphabet.n):
        z = alphabet.z(j + 1)
        cache: dict = {}
        target = {(z,): Fraction(1)}
        term = {(z,): Fraction(1)}
        fact = 1
        for k in range(1, ext + 1):
            term = u._extended_apply(term, ext, cache)
            if not term:
                break
            fact *= k
            lyndon.add_into(target, term, Fraction(1, fact))
        f: dict = {}
        for m in range(1, cut + 1):
            residue = dict(target)
            lyndon.add_into(residue, _conjugate_z(alphabet, f, z, ext), -1)
            level = {k: c for k, c in residue.items()
                     if alphabet.word_weight(k) == m + 2}
            if not level:
                continue
            g = _solve_bracket_z(alphabet, cut, z, level, m)
            lyndon.add_into(f, g)
        data.append(LieSeries(alphabet, cut, f))
    return data


def der_exp(u: TangentialDerivation) -> Automorphism:
    """exp of a tangential derivation, with exact tangential data."""
    return Automorphism(u.alphabet, u.cut, _exp_images(u), _exp_data(u))


def aut_log(F: Automorphism) -> TangentialDerivation:
    """Inverse of der_exp.

    Images come from the operator logarithm sum (-1)^{k+1} (F - id)^k / k,
    which is a derivation for unipotent F.  Tangential data is recovered
    degree by degree against the forward data map, which is unitriangular
    and exact through the cut."""
    alphabet, cut = F.alphabet, F.cut
    xy_images = {}
    for letter in range(2 * alphabet.g):
        gen = LieSeries.generator(alphabet, cut, letter)
        term = F.apply_lie(gen) - gen
        acc = term
        for k in range(2, cut + 1):
            if term.is_zero():
                break
            term = F.apply_lie(term) - term
            acc = acc + term.scale(Fraction((-1) ** (k + 1), k))
        xy_images[letter] = acc
    data = [LieSeries.zero(alphabet, cut) for _ in range(alphabet.n)]
    if alphabet.n:
        for m in range(1, cut + 1):
            current = TangentialDerivation(alphabet, cut, xy_images, data,
                                           check_positive=False)
            forward = _exp_data(current)
            changed = False
            for j in range(alphabet.n):
                ddiff = (F.data[j] - forward[j]).weight_component(m)
                if not ddiff.is_zero():
                    data[j] = data[j] + ddiff
                    changed = True
            if not changed:
                continue
    return TangentialDerivation(alphabet, cut, xy_images, data,
                                check_positive=False)


# ---------------------------------------------------------------------------
# named elements

def t_derivation(alphabet: Alphabet, cut: int) -> TangentialDerivation:
    """z_1 -> [z_1, z_2], z_2 -> [z_2, z_1] on the three-holed sphere."""
    if (alphabet.g, alphabet.n) != (0, 2):
        raise ValueError("t lives on the (g, n) = (0, 2) alphabet")
    return TangentialDerivation(
        alphabet, cut, {},
        [LieSeries.generator(alphabet, cut, alphabet.z(2)),
         LieSeries.generator(alphabet, cut, alphabet.z(1))])


def delta_derivation(alphabet: Alphabet, cut: int, n: int) -> TangentialDerivation:
    """The derivation with x -> ad_x^{2n}(y) that kills [x, y].

    Its value on y is the unique positive-weight solution of
    [delta(x), y] + [x, delta(y)] = 0, found by exact linear algebra and
    certified by re-substitution.
    """
    if (alphabet.g, alphabet.n) != (1, 0):
        raise ValueError("delta lives on the (g, n) = (1, 0) alphabet")
    if n < 1:
        raise ValueError("n must be a positive integer")
    if cut < 2 * n + 2:
        raise ValueError(f"cut must be at least {2 * n + 2}")
    x = LieSeries.generator(alphabet, cut, alphabet.x(1))
    y = LieSeries.generator(alphabet, cut, alphabet.y(1))
    dx = y
    for _ in range(2 * n):
        dx = x.bracket(dx)
    # solve [x, dy] = -[dx, y] over the weight 2n+1 component
    target = dx.bracket(y).scale(-1)
    variables = list(lyndon.lyndon_words_of_weight(alphabet, 2 * n + 1))
    sys = AffineSystem(variables)
    columns = {v: lyndon.pair_bracket(alphabet, (alphabet.x(1),), v)
               for v in variables}
    row_keys = set(target.terms)
    for col in columns.values():
        row_keys.update(col)
    for key in sorted(row_keys):
        sys.add_row({v: columns[v].get(key, _ZERO) for v in variables},
                    target.terms.get(key, _ZERO))
    res = sys.solve()
    if not res.consistent:
        raise MathInconsistencyError(
            f"delta_{2 * n} defining equation has no solution at "
            f"weight {2 * n + 1}")
    dy = LieSeries(alphabet, cut, {v: c for v, c in res.solution.items() if c})
    residual = dx.bracket(y) + x.bracket(dy)
    if not residual.is_zero():
        raise MathInconsistencyError("delta solution failed re-substitution")
    return TangentialDerivation(alphabet, cut,
                                {alphabet.x(1): dx, alphabet.y(1): dy}, [])


def phi_automorphism(alphabet: Alphabet, cut: int) -> Automorphism:
    """x -> x, y -> (e^{ad x} - 1)/(ad x) applied to y."""
    if (alphabet.g, alphabet.n) != (1, 0):
        raise ValueError("this automorphism lives on the (g, n) = (1, 0) alphabet")
    x = LieSeries.generator(alphabet, cut, alphabet.x(1))
    y = LieSeries.generator(alphabet, cut, alphabet.y(1))
    acc = LieSeries.zero(alphabet, cut)
    term = y
    fact = 1
    k = 0
    while not term.is_zero():
        acc = acc + term.scale(Fraction(1, fact))
        k += 1
        fact *= k + 1
        term = x.bracket(term)
    return Automorphism(alphabet, cut, {alphabet.x(1): x, alphabet.y(1): acc}, [])
