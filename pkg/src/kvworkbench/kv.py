"""KV problem instances, residual certification, and the exact solver.

An instance at degree N works with containers at cut N+1: the degree-N
part of the unknown derivation sends weight-1 generators to weight N+1,
and the weight-N component of the divergence needs exactly that.  All
residuals are reported at the instance degree N.

The solver runs weight by weight.  At weight m the KV equations are affine
in the weight-m part of the derivation and in one Duflo coefficient: the
first equation contributes rows at weight m+2, the cocycle equation rows
at weight m.  Exact Gaussian elimination with deterministic pivoting
solves each layer; free parameters are set to zero.  If a layer turns out
inconsistent, the solver re-opens the free parameters of the previous
layer once (their influence on the current layer is affine for m >= 3)
and aborts loudly if that does not help.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .alphabet import Alphabet
from .series import (LieSeries, TensorSeries, CyclicSeries, ScalarSeries,
                     exp, log, tr_project)
from .derivations import TangentialDerivation, Automorphism, der_exp, aut_log
from .divergence import div, j_of_derivation, j_cocycle, r_element, tr_h
from .linalg import AffineSystem
from .errors import MathInconsistencyError, ContextMismatchError
from . import lyndon

_ZERO = Fraction(0)


class KVInstance:
    """The pair (phi, xi) over a fixed alphabet, at degree N, containers N+1."""

    def __init__(self, g: int, n: int, deg: int):
        if deg < 1:
            raise ValueError("degree must be positive")
        self.alphabet = Alphabet(g, n)
        self.deg = deg
        self.cut = deg + 1
        alphabet, cut = self.alphabet, self.cut
        phi = LieSeries.zero(alphabet, cut)
        for i in range(1, g + 1):
            phi = phi + LieSeries.generator(alphabet, cut, alphabet.x(i)).bracket(
                LieSeries.generator(alphabet, cut, alphabet.y(i)))
        for j in range(1, n + 1):
            phi = phi + LieSeries.generator(alphabet, cut, alphabet.z(j))
        self.phi = phi
        prod = TensorSeries.unit(alphabet, cut)
        for i in range(1, g + 1):
            x = LieSeries.generator(alphabet, cut, alphabet.x(i))
            y = LieSeries.generator(alphabet, cut, alphabet.y(i))
            prod = prod * exp(x) * exp(y) * exp(-x) * exp(-y)
        for j in range(1, n + 1):
            prod = prod * exp(LieSeries.generator(alphabet, cut, alphabet.z(j)))
        self.xi = log(prod) if alphabet.size else LieSeries.zero(alphabet, cut)
        self._trace_cols: dict = {}
        self._trace_cols_phi: dict = {}

    @property
    def g(self):
        return self.alphabet.g

    @property
    def n(self):
        return self.alphabet.n

    def duflo_cut(self) -> int:
        return max(1, self.deg // 2)

    def zero_duflo(self) -> ScalarSeries:
        return ScalarSeries.zero(self.duflo_cut())

    def _power_traces(self, base: LieSeries, cache: dict, cut: int):
        """cache[k] = tr(sum_j z_j^k) - tr(base^k) at the given cut."""
        if cache:
            return cache
        alphabet = self.alphabet
        t = base.truncate(cut).embed()
        power = TensorSeries.unit(alphabet, cut)
        zpowers = [TensorSeries(alphabet, cut,
                                {(alphabet.z(j),): Fraction(1)})
                   for j in range(1, self.n + 1)]
        zaccs = [TensorSeries.unit(alphabet, cut) for _ in zpowers]
        for k in range(1, cut // 2 + 1):
            power = power * t
            col = tr_project(power).scale(-1)
            for idx in range(len(zaccs)):
                zaccs[idx] = zaccs[idx] * zpowers[idx]
                col = col + tr_project(zaccs[idx])
            cache[k] = col
        return cache

    def duflo_column(self, k: int) -> CyclicSeries:
        """d(residual)/d(c_k) = tr(sum_j z_j^k) - tr(xi^k), at degree N."""
        cols = self._power_traces(self.xi, self._trace_cols, self.deg)
        return cols.get(k, CyclicSeries.zero(self.alphabet, self.deg))

    def krv_column(self, k: int, cut: int = None) -> CyclicSeries:
        """tr(sum_j z_j^k) - tr(phi^k), used by the krv conditions."""
        cut = self.deg if cut is None else cut
        if cut == self.deg:
            cols = self._power_traces(self.phi, self._trace_cols_phi, cut)
            return cols.get(k, CyclicSeries.zero(self.alphabet, cut))
        cols = self._power_traces(self.phi, {}, cut)
        return cols.get(k, CyclicSeries.zero(self.alphabet, cut))


@dataclass
class ResidualReport:
    kv1: LieSeries
    kv2: CyclicSeries
    kv1_weights: dict
    kv2_weights: dict
    passed: bool

    def lines(self):
        out = [f"KVI residual: {'zero' if self.kv1.is_zero() else 'NONZERO'}"]
        for w, c in sorted(self.kv1_weights.items()):
            out.append(f"  weight {w}: {c} nonzero coefficients")
        out.append(f"KVII residual: {'zero' if self.kv2.is_zero() else 'NONZERO'}")
        for w, c in sorted(self.kv2_weights.items()):
            out.append(f"  weight {w}: {c} nonzero coefficients")
        out.append("certified" if self.passed else "FAILED")
        return out


@dataclass
class KVSolutionCandidate:
    instance: KVInstance
    aut: Automorphism
    duflo: ScalarSeries

    def certify(self) -> ResidualReport:
        return certify(self.aut, self.duflo, self.instance)


def _weight_counts(series):
    counts: dict = {}
    for key in series.terms:
        w = series.alphabet.word_weight(key)
        counts[w] = counts.get(w, 0) + 1
    return counts


def kv1_residual(F: Automorphism, inst: KVInstance) -> LieSeries:
    """F(phi) - xi, reported at the instance degree."""
    if F.alphabet != inst.alphabet or F.cut != inst.cut:
        raise ContextMismatchError("automorphism does not match the instance")
    return (F.apply_lie(inst.phi) - inst.xi).truncate(inst.deg)


def kv2_residual(F: Automorphism, h: ScalarSeries, inst: KVInstance) -> CyclicSeries:
    """j(F) + r + tr h(xi) - sum_j tr h(z_j), zero iff the cocycle equation
    holds for this Duflo function."""
    if F.alphabet != inst.alphabet or F.cut != inst.cut:
        raise ContextMismatchError("automorphism does not match the instance")
    alphabet, deg = inst.alphabet, inst.deg
    res = j_cocycle(F) + r_element(alphabet, deg)
    res = res + tr_h(h, inst.xi.truncate(deg))
    for j in range(1, inst.n + 1):
        res = res - tr_h(h, LieSeries.generator(alphabet, deg, alphabet.z(j)))
    return res


def certify(F: Automorphism, h: ScalarSeries, inst: KVInstance) -> ResidualReport:
    kv1 = kv1_residual(F, inst)
    kv2 = kv2_residual(F, h, inst)
    return ResidualReport(kv1, kv2, _weight_counts(kv1), _weight_counts(kv2),
                          kv1.is_zero() and kv2.is_zero())


# ---------------------------------------------------------------------------
# the weight-graded unknowns

def tangential_basis(alphabet: Alphabet, cut: int, m: int):
    """Basis of the weight-m tangential derivations, as (varid, element).

    Image slots for x/y generators run over the Lyndon basis one weight up;
    data slots exclude the single-letter word z_j, which the normalization
    reserves."""
    out = []
    zero = LieSeries.zero(alphabet, cut)
    if m + 1 <= cut:
        for letter in range(2 * alphabet.g):
            for key in lyndon.lyndon_words_of_weight(alphabet, m + 1):
                e = TangentialDerivation(
                    alphabet, cut,
                    {letter: LieSeries(alphabet, cut, {key: Fraction(1)})},
                    [zero] * alphabet.n, check_positive=False)
                out.append((("im", letter, key), e))
    for j in range(alphabet.n):
        zkey = (alphabet.z(j + 1),)
        for key in lyndon.lyndon_words_of_weight(alphabet, m):
            if key == zkey:
                continue
            data = [zero] * alphabet.n
            data[j] = LieSeries(alphabet, cut, {key: Fraction(1)})
            e = TangentialDerivation(alphabet, cut, {}, data,
                                     check_positive=False)
            out.append((("dz", j, key), e))
    return out


def _build_combination(alphabet, cut, basis, values) -> TangentialDerivation:
    imgs: dict = {}
    data_terms = [dict() for _ in range(alphabet.n)]
    for vid, e in basis:
        c = values.get(vid, _ZERO)
        if not c:
            continue
        if vid[0] == "im":
            _, letter, key = vid
            cur = imgs.setdefault(letter, {})
            cur[key] = cur.get(key, _ZERO) + c
        else:
            _, j, key = vid
            data_terms[j][key] = data_terms[j].get(key, _ZERO) + c
    images = {l: LieSeries(alphabet, cut, t) for l, t in imgs.items()}
    data = [LieSeries(alphabet, cut, t) for t in data_terms]
    return TangentialDerivation(alphabet, cut, images, data,
                                check_positive=False)


# ---------------------------------------------------------------------------
# the solver

class _SolverState:
    def __init__(self, inst: KVInstance, pinned: ScalarSeries = None):
        self.inst = inst
        self.u = TangentialDerivation.zero(inst.alphabet, inst.cut)
        self.h = {}
        self.pinned = pinned is not None
        if pinned is not None:
            self.h = dict(pinned.coeffs)

    def duflo(self) -> ScalarSeries:
        return ScalarSeries(self.inst.duflo_cut(), self.h)

    def kv1_full(self, u=None) -> LieSeries:
        u = self.u if u is None else u
        return der_exp(u).apply_lie(self.inst.phi) - self.inst.xi

    def kv2_full(self, u=None, h=None) -> CyclicSeries:
        u = self.u if u is None else u
        h = self.h if h is None else h
        inst = self.inst
        res = j_of_derivation(u) + r_element(inst.alphabet, inst.deg)
        for k, c in h.items():
            if c:
                res = res - inst.duflo_column(k).scale(c)
        return res

    def components(self, m, u=None, h=None):
        kv1 = self.kv1_full(u).weight_component(m + 2).truncate(self.inst.deg) \
            if m + 2 <= self.inst.deg else LieSeries.zero(self.inst.alphabet,
                                                          self.inst.deg)
        kv2 = self.kv2_full(u, h).weight_component(m)
        return kv1, kv2


def _assemble_weight_system(state: _SolverState, m: int, kv1_comp, kv2_comp,
                            extra_cols=None):
    """Rows for the weight-m layer; extra_cols carries backtracking columns."""
    inst = state.inst
    alphabet, cut = inst.alphabet, inst.cut
    basis = tangential_basis(alphabet, cut, m)
    variables = [vid for vid, _ in basis]
    kv1_cols = {}
    kv2_cols = {}
    for vid, e in basis:
        kv1_cols[vid] = e.apply_lie(inst.phi) if m + 2 <= inst.deg else None
        kv2_cols[vid] = div(e)
    duflo_var = None
    k = m // 2
    if m % 2 == 0 and k <= inst.duflo_cut() and not state.pinned:
        duflo_var = ("duflo", k)
        variables.append(duflo_var)
    extra_cols = extra_cols or {}
    variables.extend(extra_cols)
    sys = AffineSystem(variables)
    # KVI rows at weight m+2
    if m + 2 <= inst.deg:
        keys = set(kv1_comp.terms)
        for col in kv1_cols.values():
            keys.update(col.terms)
        for vid in extra_cols:
            keys.update(extra_cols[vid][0].terms)
        for key in sorted(keys):
            row = {vid: kv1_cols[vid].coefficient(key) for vid, _ in basis}
            for vid in extra_cols:
                row[vid] = extra_cols[vid][0].coefficient(key)
            sys.add_row(row, -kv1_comp.coefficient(key))
    # KVII rows at weight m
    dcol = inst.duflo_column(k).weight_component(m) if duflo_var else None
    keys = set(kv2_comp.terms)
    for col in kv2_cols.values():
        keys.update(col.terms)
    if dcol is not None:
        keys.update(dcol.terms)
    for vid in extra_cols:
        keys.update(extra_cols[vid][1].terms)
    for key in sorted(keys):
        row = {vid: kv2_cols[vid].coefficient(key) for vid, _ in basis}
        if duflo_var:
            row[duflo_var] = -dcol.coefficient(key)
        for vid in extra_cols:
            row[vid] = extra_cols[vid][1].coefficient(key)
        sys.add_row(row, -kv2_comp.coefficient(key))
    return sys, basis, duflo_var


def _variable_order(sys: AffineSystem, pivot: str):
    if pivot == "forward":
        return list(sys.variables)
    if pivot == "reverse":
        return list(reversed(sys.variables))
    raise ValueError(f"unknown pivot order {pivot!r}")


def solve_kv(inst: KVInstance, strategy: str = "joint",
             pivot: str = "forward", duflo: ScalarSeries = None,
             progress=None) -> KVSolutionCandidate:
    """Construct a certified solution degree by degree.

    strategy "joint" solves both equations together at each weight;
    "kv1-then-correct" solves the first equation alone, then repairs the
    cocycle equation with phi-stabilizing corrections.  duflo, when given,
    pins the Duflo function instead of solving for it.
    """
    if inst.deg < 2:
        raise ValueError("solver needs degree >= 2")
    if strategy == "joint":
        cand = _solve_joint(inst, pivot, duflo, progress)
    elif strategy == "kv1-then-correct":
        cand = _solve_kv1_then_correct(inst, pivot, duflo, progress)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    report = cand.certify()
    if not report.passed:
        raise MathInconsistencyError(
            "solver output failed certification:\n" + "\n".join(report.lines()))
    return cand


def _solve_joint(inst, pivot, duflo, progress):
    state = _SolverState(inst, duflo)
    prev = None  # (basis, nullspace, duflo_var, m)
    m = 1
    while m <= inst.deg:
        kv1_comp, kv2_comp = state.components(m)
        sys, basis, duflo_var = _assemble_weight_system(state, m,
                                                        kv1_comp, kv2_comp)
        res = sys.solve(_variable_order(sys, pivot))
        if not res.consistent:
            res, basis, duflo_var = _backtrack(state, m, prev, pivot)
        values = res.solution
        state.u = state.u + _build_combination(inst.alphabet, inst.cut,
                                               basis, values)
        if duflo_var and values.get(duflo_var):
            state.h[duflo_var[1]] = values[duflo_var]
        if progress:
            progress(f"weight {m}: {len(sys.variables)} unknowns, "
                     f"{len(sys.rows)} rows")
        clean_null = [v for v in res.nullspace
                      if all(k[0] != "bt" for k in v)]
        prev = (basis, clean_null, duflo_var, m)
        m += 1
    return KVSolutionCandidate(inst, der_exp(state.u), state.duflo())


def _backtrack(state, m, prev, pivot):
    """Re-open the free parameters of the previous layer, once.

    For m >= 3 the current layer's residuals are affine in those
    parameters (quadratic cross terms land beyond weight m), so columns
    can be measured by finite differences of exact evaluations."""
    if prev is None or m < 3 or not prev[1]:
        raise MathInconsistencyError(
            f"KV system inconsistent at weight {m} and no backtracking "
            f"freedom available", weight=m)
    prev_basis, nullspace, prev_duflo_var, prev_m = prev
    inst = state.inst
    base1, base2 = state.components(m)
    extra_cols = {}
    shifts = {}
    for idx, vec in enumerate(nullspace):
        delta_u = _build_combination(inst.alphabet, inst.cut, prev_basis, vec)
        delta_h = dict(state.h)
        if prev_duflo_var and vec.get(prev_duflo_var):
            delta_h[prev_duflo_var[1]] = (delta_h.get(prev_duflo_var[1], _ZERO)
                                          + vec[prev_duflo_var])
        c1, c2 = state.components(m, state.u + delta_u, delta_h)
        extra_cols[("bt", idx)] = (c1 - base1, c2 - base2)
        shifts[("bt", idx)] = (delta_u, vec)
    sys, basis, duflo_var = _assemble_weight_system(state, m, base1, base2,
                                                    extra_cols)
    res = sys.solve(_variable_order(sys, pivot))
    if not res.consistent:
        raise MathInconsistencyError(
            f"KV system inconsistent at weight {m} even after reopening "
            f"weight {prev_m} free parameters", weight=m)
    for vid, (delta_u, vec) in shifts.items():
        t = res.solution.get(vid, _ZERO)
        if t:
            state.u = state.u + delta_u.scale(t)
            if prev_duflo_var and vec.get(prev_duflo_var):
                k = prev_duflo_var[1]
                state.h[k] = state.h.get(k, _ZERO) + t * vec[prev_duflo_var]
    res.solution = {v: c for v, c in res.solution.items() if v[0] != "bt"}
    return res, basis, duflo_var


def _solve_kv1_then_correct(inst, pivot, duflo, progress):
    alphabet, cut = inst.alphabet, inst.cut
    state = _SolverState(inst, duflo)
    for m in range(1, inst.deg - 1):
        kv1_comp, _ = state.components(m)
        if kv1_comp.is_zero():
            continue
        basis = tangential_basis(alphabet, cut, m)
        variables = [vid for vid, _ in basis]
        cols = {vid: e.apply_lie(inst.phi) for vid, e in basis}
        sys = AffineSystem(variables)
        keys = set(kv1_comp.terms)
        for col in cols.values():
            keys.update(col.terms)
        for key in sorted(keys):
            sys.add_row({vid: cols[vid].coefficient(key) for vid in variables},
                        -kv1_comp.coefficient(key))
        res = sys.solve(_variable_order(sys, pivot))
        if not res.consistent:
            raise MathInconsistencyError(
                f"first KV equation inconsistent at weight {m}", weight=m)
        state.u = state.u + _build_combination(alphabet, cut, basis,
                                               res.solution)
        if progress:
            progress(f"KVI weight {m} solved")
    F = der_exp(state.u)
    for m in range(1, inst.deg + 1):
        res2 = j_cocycle(F) + r_element(alphabet, inst.deg)
        for k, c in state.h.items():
            if c:
                res2 = res2 - inst.duflo_column(k).scale(c)
        comp = res2.weight_component(m)
        duflo_var = None
        k = m // 2
        if m % 2 == 0 and k <= inst.duflo_cut() and not state.pinned:
            duflo_var = ("duflo", k)
        if comp.is_zero() and duflo_var is None:
            continue
        basis = tangential_basis(alphabet, cut, m)
        variables = [vid for vid, _ in basis]
        if duflo_var:
            variables.append(duflo_var)
        sys = AffineSystem(variables)
        if m + 2 <= cut:
            stab_cols = {vid: e.apply_lie(inst.phi) for vid, e in basis}
            keys = set()
            for col in stab_cols.values():
                keys.update(col.terms)
            for key in sorted(keys):
                sys.add_row({vid: stab_cols[vid].coefficient(key)
                             for vid, _ in basis}, 0)
        div_cols = {vid: div(e) for vid, e in basis}
        dcol = inst.duflo_column(k).weight_component(m) if duflo_var else None
        keys = set(comp.terms)
        for col in div_cols.values():
            keys.update(col.terms)
        if dcol is not None:
            keys.update(dcol.terms)
        for key in sorted(keys):
            row = {vid: div_cols[vid].coefficient(key) for vid, _ in basis}
            if duflo_var:
                row[duflo_var] = -dcol.coefficient(key)
            sys.add_row(row, -comp.coefficient(key))
        res = sys.solve(_variable_order(sys, pivot))
        if not res.consistent:
            raise MathInconsistencyError(
                f"cocycle correction inconsistent at weight {m}", weight=m)
        v = _build_combination(alphabet, cut, basis, res.solution)
        F = F.compose(der_exp(v))
        if duflo_var and res.solution.get(duflo_var):
            state.h[k] = state.h.get(k, _ZERO) + res.solution[duflo_var]
        if progress:
            progress(f"KVII weight {m} repaired")
    return KVSolutionCandidate(inst, F, state.duflo())


# ---------------------------------------------------------------------------
# Duflo solving and krv membership

def _solve_duflo_like(base: CyclicSeries, columns: dict, duflo_cut: int):
    """Find c with base + sum_k c_k columns[k] = 0, reporting the first
    inconsistent weight; free coefficients are set to zero."""
    variables = [("duflo", k) for k in sorted(columns)]
    sys = AffineSystem(variables)
    last = None
    for w in range(1, base.cut + 1):
        keys = set(base.weight_component(w).terms)
        for k, col in columns.items():
            keys.update(col.weight_component(w).terms)
        for key in sorted(keys):
            sys.add_row({("duflo", k): columns[k].coefficient(key)
                         for k in columns}, -base.coefficient(key))
        if keys:
            last = sys.solve()
            if not last.consistent:
                raise MathInconsistencyError(
                    f"no Duflo function fits at weight {w}", weight=w)
    if last is None:
        return ScalarSeries.zero(duflo_cut)
    return ScalarSeries(duflo_cut,
                        {k: last.solution[("duflo", k)] for k in columns})


def kv2_solve_h(F: Automorphism, inst: KVInstance) -> ScalarSeries:
    """Duflo function making the cocycle equation hold for F, if any."""
    base = j_cocycle(F) + r_element(inst.alphabet, inst.deg)
    columns = {k: inst.duflo_column(k).scale(-1)
               for k in range(1, inst.duflo_cut() + 1)}
    return _solve_duflo_like(base, columns, inst.duflo_cut())


@dataclass
class KrvReport:
    passed: bool
    duflo: ScalarSeries = None
    reason: str = ""


def krv_check(u: TangentialDerivation, inst: KVInstance) -> KrvReport:
    """Membership test: u(phi) = 0 and div(u) of Duflo form in phi."""
    if u.alphabet != inst.alphabet or u.cut != inst.cut:
        raise ContextMismatchError("derivation does not match the instance")
    uphi = u.apply_lie(inst.phi)
    if not uphi.is_zero():
        return KrvReport(False, reason="u(phi) is nonzero at weights "
                         f"{uphi.weights()}")
    d = div(u)
    kcut = max(1, d.cut // 2)
    columns = {k: inst.krv_column(k, d.cut).scale(-1)
               for k in range(1, kcut + 1)}
    try:
        h = _solve_duflo_like(d, columns, kcut)
    except MathInconsistencyError as err:
        return KrvReport(False, reason=str(err))
    return KrvReport(True, duflo=h)


def krv_basis(inst: KVInstance, m: int):
    """Basis of the weight-m solutions of the krv constraints."""
    if m < 1:
        raise ValueError("weight must be positive")
    if m + 2 > inst.cut:
        raise ValueError(
            f"weight {m} krv constraints need containers at cut {m + 2}")
    alphabet, cut = inst.alphabet, inst.cut
    basis = tangential_basis(alphabet, cut, m)
    variables = [vid for vid, _ in basis]
    duflo_var = None
    if m % 2 == 0:
        duflo_var = ("duflo", m // 2)
        variables.append(duflo_var)
    sys = AffineSystem(variables)
    phi_cols = {vid: e.apply_lie(inst.phi) for vid, e in basis}
    keys = set()
    for col in phi_cols.values():
        keys.update(col.terms)
    for key in sorted(keys):
        sys.add_row({vid: phi_cols[vid].coefficient(key) for vid, _ in basis}, 0)
    div_cols = {vid: div(e) for vid, e in basis}
    dcol = (inst.krv_column(m // 2, max(1, inst.cut - 1))
            .weight_component(m) if duflo_var else None)
    keys = set()
    for col in div_cols.values():
        keys.update(col.terms)
    if dcol is not None:
        keys.update(dcol.terms)
    for key in sorted(keys):
        row = {vid: div_cols[vid].coefficient(key) for vid, _ in basis}
        if duflo_var:
            row[duflo_var] = -dcol.coefficient(key)
        sys.add_row(row, 0)
    out = []
    for vec in sys.solve().nullspace:
        e = _build_combination(alphabet, cut, basis, vec)
        if not e.is_zero():
            out.append(e)
    return out


def stabilizer_check(G: Automorphism, inst: KVInstance):
    """Group-level krv condition: G(phi) = phi and j(G) of Duflo form."""
    if G.alphabet != inst.alphabet or G.cut != inst.cut:
        raise ContextMismatchError("automorphism does not match the instance")
    drift = (G.apply_lie(inst.phi) - inst.phi).truncate(inst.deg)
    if not drift.is_zero():
        raise MathInconsistencyError(
            f"stabilizer check failed: G moves phi at weights {drift.weights()}")
    base = j_cocycle(G)
    kcut = max(1, base.cut // 2)
    columns = {k: inst.krv_column(k, base.cut).scale(-1)
               for k in range(1, kcut + 1)}
    return _solve_duflo_like(base, columns, inst.duflo_cut())


def torsor_act(cand: KVSolutionCandidate, G: Automorphism) -> KVSolutionCandidate:
    """Right action F -> F o G by a KRV stabilizer element; the Duflo
    function shifts by the one certified for G."""
    inst = cand.instance
    h_extra = stabilizer_check(G, inst)
    new_aut = cand.aut.compose(G)
    new_h = cand.duflo + h_extra
    out = KVSolutionCandidate(inst, new_aut, new_h)
    report = out.certify()
    if not report.passed:
        raise MathInconsistencyError(
            "torsor action produced an uncertified candidate:\n"
            + "\n".join(report.lines()))
    return out
