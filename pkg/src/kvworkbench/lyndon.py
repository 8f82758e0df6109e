"""Lyndon words and the induced basis of the free Lie algebra.

A Lyndon word is strictly smaller than every proper rotation of itself.
Its standard bracketing b(w) = [b(u), b(v)], where v is the least proper
suffix of w, gives a basis of the free Lie algebra over the alphabet.  The
expansion of b(w) in the tensor algebra is unitriangular: it is w plus
rearrangements of w that are lexicographically larger.  That triangularity
drives both directions of the Lie <-> tensor conversion below.

All dict-level helpers work on plain ``{word tuple: Fraction}`` maps; the
series classes wrap them.  Caches are keyed per alphabet and never
truncate, so they are shared across degree cuts.
"""

from __future__ import annotations

from fractions import Fraction

from .alphabet import Alphabet, rotations
from .errors import NotLieElementError

_ZERO = Fraction(0)


def is_lyndon(word) -> bool:
    if not word:
        return False
    return all(word < r for r in rotations(word)[1:])


_std_split_cache: dict = {}


def std_split(word):
    """Standard factorization (u, v) of a Lyndon word of length >= 2.

    v is the lexicographically least proper suffix, which is the longest
    proper Lyndon suffix.
    """
    cached = _std_split_cache.get(word)
    if cached is None:
        best = min(range(1, len(word)), key=lambda i: word[i:])
        cached = (word[:best], word[best:])
        _std_split_cache[word] = cached
    return cached


_lyndon_words_cache: dict = {}


def lyndon_words(alphabet: Alphabet, max_weight: int):
    """All Lyndon words of weight <= max_weight, sorted by (weight, word)."""
    key = (alphabet, max_weight)
    cached = _lyndon_words_cache.get(key)
    if cached is None:
        found = []
        stack = [((l,), alphabet.weight(l)) for l in alphabet.letters()]
        while stack:
            word, weight = stack.pop()
            if weight > max_weight:
                continue
            if is_lyndon(word):
                found.append(word)
            for l in alphabet.letters():
                w2 = weight + alphabet.weight(l)
                if w2 <= max_weight:
                    stack.append((word + (l,), w2))
        found.sort(key=lambda w: (alphabet.word_weight(w), w))
        cached = tuple(found)
        _lyndon_words_cache[key] = cached
    return cached


def lyndon_words_of_weight(alphabet: Alphabet, weight: int):
    return tuple(w for w in lyndon_words(alphabet, weight)
                 if alphabet.word_weight(w) == weight)


# ---------------------------------------------------------------------------
# dict-level word arithmetic

def add_into(dst: dict, src: dict, scale=1):
    for k, v in src.items():
        c = dst.get(k, _ZERO) + v * scale
        if c:
            dst[k] = c
        else:
            dst.pop(k, None)
    return dst


def word_mul(a: dict, b: dict, alphabet: Alphabet = None, cut: int = None) -> dict:
    """Concatenation product of word dicts, truncated at cut when given."""
    out: dict = {}
    if cut is None:
        for wa, ca in a.items():
            for wb, cb in b.items():
                w = wa + wb
                c = out.get(w, _ZERO) + ca * cb
                if c:
                    out[w] = c
                else:
                    del out[w]
        return out
    ww = alphabet.word_weight
    btrip = sorted(((ww(wb), wb, cb) for wb, cb in b.items()),
                   key=lambda t: t[0])
    for wa, ca in a.items():
        room = cut - ww(wa)
        if room < 0:
            continue
        for wtb, wb, cb in btrip:
            if wtb > room:
                break
            w = wa + wb
            c = out.get(w, _ZERO) + ca * cb
            if c:
                out[w] = c
            else:
                del out[w]
    return out


# ---------------------------------------------------------------------------
# basis embedding and structure constants

_embed_cache: dict = {}


def embed_key(alphabet: Alphabet, key) -> dict:
    """Tensor-algebra expansion of the standard bracketing of a Lyndon word."""
    ck = (alphabet, key)
    cached = _embed_cache.get(ck)
    if cached is None:
        if len(key) == 1:
            cached = {key: Fraction(1)}
        else:
            u, v = std_split(key)
            eu, ev = embed_key(alphabet, u), embed_key(alphabet, v)
            cached = word_mul(eu, ev)
            add_into(cached, word_mul(ev, eu), -1)
        _embed_cache[ck] = cached
    return cached


def lie_to_tensor(alphabet: Alphabet, lie: dict, cut: int = None) -> dict:
    out: dict = {}
    for key, c in lie.items():
        if cut is not None and alphabet.word_weight(key) > cut:
            continue
        add_into(out, embed_key(alphabet, key), c)
    return out


def tensor_to_lie(alphabet: Alphabet, tensor: dict) -> dict:
    """Rewrite a Lie element given by words on the Lyndon basis.

    Repeatedly strips the least word, which must be Lyndon; since b(w)
    expands as w plus larger rearrangements, the least word of the residue
    strictly increases and the loop terminates.  A non-Lyndon least word
    certifies that the input was not a Lie element.
    """
    residue = dict(tensor)
    out: dict = {}
    while residue:
        word = min(residue)
        if not is_lyndon(word):
            raise NotLieElementError(
                f"not a Lie element: offending word {word}")
        c = residue[word]
        out[word] = out.get(word, _ZERO) + c
        add_into(residue, embed_key(alphabet, word), -c)
    return {k: v for k, v in out.items() if v}


_pair_bracket_cache: dict = {}


def pair_bracket(alphabet: Alphabet, k1, k2) -> dict:
    """[b(k1), b(k2)] expanded on the Lyndon basis (exact, no truncation)."""
    if k1 == k2:
        return {}
    ck = (alphabet, k1, k2)
    cached = _pair_bracket_cache.get(ck)
    if cached is None:
        e1, e2 = embed_key(alphabet, k1), embed_key(alphabet, k2)
        comm = word_mul(e1, e2)
        add_into(comm, word_mul(e2, e1), -1)
        cached = tensor_to_lie(alphabet, comm)
        _pair_bracket_cache[ck] = cached
    return cached


def lie_bracket_dict(alphabet: Alphabet, a: dict, b: dict, cut: int) -> dict:
    out: dict = {}
    ww = alphabet.word_weight
    btrip = [(kb, cb, ww(kb)) for kb, cb in b.items()]
    for ka, ca in a.items():
        wa = ww(ka)
        if wa >= cut:
            continue
        room = cut - wa
        for kb, cb, wb in btrip:
            if wb > room:
                continue
            add_into(out, pair_bracket(alphabet, ka, kb), ca * cb)
    return out


def left_normed_dict(alphabet: Alphabet, word) -> dict:
    """[[...[w_1, w_2], w_3] ...] on the Lyndon basis."""
    cur = {(word[0],): Fraction(1)}
    for letter in word[1:]:
        nxt: dict = {}
        single = (letter,)
        for k, c in cur.items():
            add_into(nxt, pair_bracket(alphabet, k, single), c)
        cur = nxt
    return cur
