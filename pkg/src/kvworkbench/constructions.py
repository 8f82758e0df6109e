"""Gluing of KV solutions and the elliptic lift.

The gluing homomorphism sends a tangential derivation on the three-holed
sphere, given by its data pair (u_1, u_2), to the derivation of the glued
alphabet mapping every block-k generator w to [w, u_k(phi_1, phi_2)],
where phi_k is the quadratic element of block k.  Since the substituted
elements have weight at least 2, the image is tangential and positive.

The elliptic lift substitutes psi_1 = e^{ad x}(y), psi_2 = -y into the
group data of a three-holed-sphere automorphism and conjugates the torus
generators accordingly.  Substitution halves weights (z has weight 2, the
psi start at weight 1), so producing a torus automorphism at container
cut M requires source data through weight 2M.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .alphabet import Alphabet
from .series import (LieSeries, TensorSeries, exp, log, substitute)
from .derivations import (TangentialDerivation, Automorphism, der_exp,
                          aut_log, t_derivation, phi_automorphism)
from .kv import (KVInstance, KVSolutionCandidate, kv1_residual, kv2_residual,
                 kv2_solve_h, certify)
from .errors import MathInconsistencyError, ContextMismatchError

_ZERO = Fraction(0)
_SOURCE = Alphabet(0, 2)


@dataclass(frozen=True)
class GluePlan:
    """Relabeling of two factor alphabets into the glued one."""

    g1: int
    n1: int
    g2: int
    n2: int

    @property
    def target(self) -> Alphabet:
        return Alphabet(self.g1 + self.g2, self.n1 + self.n2)

    def left_map(self) -> dict:
        src, tgt = Alphabet(self.g1, self.n1), self.target
        out = {}
        for i in range(1, self.g1 + 1):
            out[src.x(i)] = tgt.x(i)
            out[src.y(i)] = tgt.y(i)
        for j in range(1, self.n1 + 1):
            out[src.z(j)] = tgt.z(j)
        return out

    def right_map(self) -> dict:
        src, tgt = Alphabet(self.g2, self.n2), self.target
        out = {}
        for i in range(1, self.g2 + 1):
            out[src.x(i)] = tgt.x(self.g1 + i)
            out[src.y(i)] = tgt.y(self.g1 + i)
        for j in range(1, self.n2 + 1):
            out[src.z(j)] = tgt.z(self.n1 + j)
        return out

    def block_letters(self, which: int):
        m = self.left_map() if which == 1 else self.right_map()
        return sorted(m.values())

    def block_quadratic(self, which: int, cut: int) -> LieSeries:
        tgt = self.target
        gs = range(1, self.g1 + 1) if which == 1 else \
            range(self.g1 + 1, self.g1 + self.g2 + 1)
        zs = range(1, self.n1 + 1) if which == 1 else \
            range(self.n1 + 1, self.n1 + self.n2 + 1)
        out = LieSeries.zero(tgt, cut)
        for i in gs:
            out = out + LieSeries.generator(tgt, cut, tgt.x(i)).bracket(
                LieSeries.generator(tgt, cut, tgt.y(i)))
        for j in zs:
            out = out + LieSeries.generator(tgt, cut, tgt.z(j))
        return out


def relabel_lie(s: LieSeries, letter_map: dict, target: Alphabet,
                cut: int) -> LieSeries:
    """Push a series through a strictly increasing letter injection.

    Monotone injections preserve the lexicographic order, hence Lyndon
    words and their standard factorizations; keys map letterwise."""
    items = sorted(letter_map.items())
    for (a, fa), (b, fb) in zip(items, items[1:]):
        if not (a < b and fa < fb):
            raise ValueError("generator relabeling must be order preserving")
    terms = {}
    for key, c in s.terms.items():
        terms[tuple(letter_map[l] for l in key)] = c
    return LieSeries(target, cut, terms)


def glue_der(u: TangentialDerivation, plan: GluePlan,
             cut: int = None) -> TangentialDerivation:
    """w^k -> [w^k, u_k(phi_1, phi_2)] for every generator of block k."""
    if u.alphabet != _SOURCE:
        raise ContextMismatchError(
            "gluing takes derivations over the (g, n) = (0, 2) alphabet")
    tgt = plan.target
    cut = u.cut if cut is None else cut
    if cut > u.cut:
        raise ValueError("target cut exceeds the source cut")
    sub = {0: plan.block_quadratic(1, cut), 1: plan.block_quadratic(2, cut)}
    m = [substitute(u.data[0].truncate(cut), sub),
         substitute(u.data[1].truncate(cut), sub)]
    images = {}
    data = [None] * tgt.n
    for which in (1, 2):
        for letter in plan.block_letters(which):
            img = LieSeries.generator(tgt, cut, letter).bracket(m[which - 1])
            if letter >= 2 * tgt.g:
                data[letter - 2 * tgt.g] = m[which - 1]
            else:
                images[letter] = img
    return TangentialDerivation(tgt, cut, images, data, check_positive=False)


def glue_aut(F: Automorphism, plan: GluePlan, cut: int = None) -> Automorphism:
    """Group version; satisfies glue_aut(der_exp(u)) = der_exp(glue_der(u))."""
    return der_exp(glue_der(aut_log(F), plan, cut))


def block_product(F1: Automorphism, F2: Automorphism,
                  plan: GluePlan, cut: int) -> Automorphism:
    """F1 x F2 acting blockwise on the glued alphabet."""
    tgt = plan.target
    images = {}
    data = [None] * tgt.n
    for which, F, lmap in ((1, F1, plan.left_map()), (2, F2, plan.right_map())):
        src = F.alphabet
        for s_letter, t_letter in lmap.items():
            images[t_letter] = relabel_lie(F.images[s_letter].truncate(cut),
                                           lmap, tgt, cut)
        for j in range(src.n):
            t_z = lmap[src.z(j + 1)]
            data[t_z - 2 * tgt.g] = relabel_lie(F.data[j].truncate(cut),
                                                lmap, tgt, cut)
    return Automorphism(tgt, cut, images, data)


def _scan_lambda(samples, deg: int, what: str):
    """First weight where the sampled residual pair depends on the
    parameter, solved there.  The three samples are taken at 0, 1, 2 so
    affineness can be verified rather than assumed.  Returns
    (lambda, critical weight), or (None, None) when nothing depends on the
    parameter and every weight already vanishes."""
    for w in range(1, deg + 1):
        comps = [(kv1.weight_component(w), kv2.weight_component(w))
                 for kv1, kv2 in samples]
        s1 = comps[1][0] - comps[0][0]
        s2 = comps[1][1] - comps[0][1]
        if s1.is_zero() and s2.is_zero():
            if comps[0][0].is_zero() and comps[0][1].is_zero():
                continue
            raise MathInconsistencyError(
                f"{what}: residual nonzero and parameter free at weight {w}",
                weight=w)
        if not (comps[2][0] - comps[1][0] - s1).is_zero() or \
           not (comps[2][1] - comps[1][1] - s2).is_zero():
            raise MathInconsistencyError(
                f"{what}: residual is not affine in the parameter at "
                f"weight {w}", weight=w)
        lam = None
        for base, slope in ((comps[0][0], s1), (comps[0][1], s2)):
            for key, s in slope.terms.items():
                cand = -base.coefficient(key) / s
                if lam is None:
                    lam = cand
                elif lam != cand:
                    raise MathInconsistencyError(
                        f"{what}: no single parameter clears weight {w}",
                        weight=w)
        if not (comps[0][0] + s1.scale(lam)).is_zero() or \
           not (comps[0][1] + s2.scale(lam)).is_zero():
            raise MathInconsistencyError(
                f"{what}: no parameter clears weight {w}", weight=w)
        return lam, w
    return None, None


@dataclass
class GlueResult:
    lam: Fraction
    critical_weight: int
    candidate: KVSolutionCandidate


def combine_solutions(left: KVSolutionCandidate, right: KVSolutionCandidate,
                      sphere: KVSolutionCandidate) -> "GlueResult":
    """Glue two solutions through a three-holed-sphere solution.

    The parameter is fixed by the first weight where the combined residual
    depends on it (critical_weight None when nothing does); the dependence
    there is affine with at most one root, and the output is re-certified
    in full before it is returned."""
    inst_l, inst_r, inst_s = left.instance, right.instance, sphere.instance
    if (inst_s.g, inst_s.n) != (0, 2):
        raise ContextMismatchError("the middle solution must be of type (0, 2)")
    if not (inst_l.deg == inst_r.deg == inst_s.deg):
        raise ContextMismatchError("all three solutions must share the degree")
    if left.duflo != right.duflo or left.duflo != sphere.duflo:
        raise ValueError("Duflo functions of the factors must coincide")
    if not (inst_l.n == inst_r.n == 0 or inst_l.g == 0 or inst_r.g == 0):
        raise ValueError("gluing needs n1 = n2 = 0, or g1 = 0, or g2 = 0")
    plan = GluePlan(inst_l.g, inst_l.n, inst_r.g, inst_r.n)
    target = KVInstance(plan.g1 + plan.g2, plan.n1 + plan.n2, inst_l.deg)
    cut = target.cut
    t = t_derivation(inst_s.alphabet, inst_s.cut)
    outer = block_product(left.aut, right.aut, plan, cut)
    h = left.duflo

    def build(lam) -> Automorphism:
        f_lam = sphere.aut.compose(der_exp(t.scale(lam)))
        return outer.compose(glue_aut(f_lam, plan, cut))

    built = {lam: build(lam) for lam in (0, 1, 2)}
    samples = [(kv1_residual(built[lam], target),
                kv2_residual(built[lam], h, target)) for lam in (0, 1, 2)]
    lam_star, critical = _scan_lambda(samples, target.deg, "gluing")
    if lam_star is None:
        lam_star = Fraction(0)
    F = built[lam_star] if lam_star in built else build(lam_star)
    cand = KVSolutionCandidate(target, F, h)
    report = cand.certify()
    if not report.passed:
        raise MathInconsistencyError(
            "glued candidate failed certification:\n" + "\n".join(report.lines()))
    return GlueResult(lam_star, critical, cand)


# ---------------------------------------------------------------------------
# elliptic lift

def psi_substitution(cut: int) -> dict:
    """z_1 -> e^{ad x}(y), z_2 -> -y over the torus alphabet."""
    torus = Alphabet(1, 0)
    x = LieSeries.generator(torus, cut, torus.x(1))
    y = LieSeries.generator(torus, cut, torus.y(1))
    psi1 = LieSeries.zero(torus, cut)
    term = y
    fact = 1
    k = 0
    while not term.is_zero():
        psi1 = psi1 + term.scale(Fraction(1, fact))
        k += 1
        fact *= k
        term = x.bracket(term)
    return {0: psi1, 1: y.scale(-1)}


def elliptic_stab_check(F: Automorphism) -> bool:
    """Does F(z_1 - z_2) - (z_1 - z_2) consist of words quadratic and
    higher in the z generators (weight >= 4)?"""
    if F.alphabet != _SOURCE:
        raise ContextMismatchError("the stabilizer lives over (g, n) = (0, 2)")
    z1 = LieSeries.generator(F.alphabet, F.cut, 0)
    z2 = LieSeries.generator(F.alphabet, F.cut, 1)
    diff = F.apply_lie(z1 - z2) - (z1 - z2)
    mw = diff.min_weight()
    return mw is None or mw >= 4


def _lift_images(F: Automorphism, cut: int):
    """Raw images of the torus lift; positivity of the first one is the
    operative part of the stabilizer condition."""
    torus = Alphabet(1, 0)
    sub = psi_substitution(cut)
    f1 = substitute(F.data[0], sub)
    f2 = substitute(F.data[1], sub)
    x = LieSeries.generator(torus, cut, torus.x(1))
    y = LieSeries.generator(torus, cut, torus.y(1))
    img_x = log(exp(-f1) * exp(x) * exp(f2))
    img_y = log(exp(-f2) * exp(y) * exp(f2))
    return img_x, img_y


def elliptic_lift(F: Automorphism, cut: int) -> Automorphism:
    """Lift of a z_1 - z_2 stabilizer element to the torus alphabet."""
    if not elliptic_stab_check(F):
        raise MathInconsistencyError(
            "automorphism does not stabilize z_1 - z_2")
    if F.cut < 2 * cut:
        raise ValueError(
            f"lift at cut {cut} needs source data through weight {2 * cut}")
    torus = Alphabet(1, 0)
    img_x, img_y = _lift_images(F, cut)
    lifted = Automorphism(torus, cut,
                          {torus.x(1): img_x, torus.y(1): img_y}, [])
    return lifted.validate()


@dataclass
class EllipticResult:
    lam: Fraction
    slope: Fraction
    candidate: KVSolutionCandidate


def elliptic_solve(sphere: KVSolutionCandidate, deg: int) -> EllipticResult:
    """Unique parameter lambda with (F e^{lambda t})^lift o phi a certified
    torus solution at the requested degree.

    The lift halves weights, so the sphere solution must be certified at
    degree >= 2*deg + 1; the parameter is pinned by the weight-1 positivity
    of the lifted image of x, which is affine in lambda with nonzero slope."""
    inst_s = sphere.instance
    if (inst_s.g, inst_s.n) != (0, 2):
        raise ContextMismatchError("elliptic lift starts from a (0, 2) solution")
    target = KVInstance(1, 0, deg)
    cut = target.cut
    if inst_s.cut < 2 * cut:
        raise ValueError(
            f"elliptic lift at degree {deg} needs a sphere solution of "
            f"degree >= {2 * deg + 1}")
    torus = Alphabet(1, 0)
    t = t_derivation(inst_s.alphabet, inst_s.cut)
    y_key = (torus.y(1),)

    def first_order_defect(lam) -> Fraction:
        f_lam = sphere.aut.compose(der_exp(t.scale(lam)))
        img_x, _ = _lift_images(f_lam, cut)
        return img_x.coefficient(y_key)

    d0, d1, d2 = (first_order_defect(lam) for lam in (0, 1, 2))
    slope = d1 - d0
    if d2 - d1 != slope:
        raise MathInconsistencyError(
            "lift positivity defect is not affine in the parameter")
    if slope == 0:
        raise MathInconsistencyError(
            "lift positivity defect does not depend on the parameter")
    lam = -d0 / slope
    f_lam = sphere.aut.compose(der_exp(t.scale(lam)))
    if not elliptic_stab_check(f_lam):
        raise MathInconsistencyError(
            "parameter-shifted solution fails the stabilizer check")
    lifted = elliptic_lift(f_lam, cut)
    composed = lifted.compose(phi_automorphism(torus, cut))
    kv1 = kv1_residual(composed, target)
    if not kv1.is_zero():
        raise MathInconsistencyError(
            f"elliptic composite violates the first KV equation at weights "
            f"{kv1.weights()}")
    h = kv2_solve_h(composed, target)
    cand = KVSolutionCandidate(target, composed, h)
    report = cand.certify()
    if not report.passed:
        raise MathInconsistencyError(
            "elliptic candidate failed certification:\n"
            + "\n".join(report.lines()))
    return EllipticResult(lam, slope, cand)
