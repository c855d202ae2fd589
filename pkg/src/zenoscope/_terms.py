"""Term assembly for the second-order survival probability.

The survival probability of a repeatedly prepared state is expanded to
second order in the tunneling amplitude.  Every contribution is a product

    prefactor * exp(i*eps*(c_tau*tau + c1*t1 + c2*t2)) * <bath word>

integrated over nothing, a line, the triangle 0 <= t2 <= t1 <= tau, or the
square [0, tau]^2.  A bath word is an ordered product of displacement
exponentials ``exp(s*chi(u))`` whose times are drawn from {0, tau, t1, t2};
its Gaussian expectation value is

    exp( -(L/2)*phi_R2 - sum_{m<m'} s_m s_m' phi_R1(u_m - u_m')
         + i*sum_{m<m'} s_m s_m' phi_I(u_m - u_m') )

with operator-ordered pairs (m < m').  Terms are compiled once into integer
coefficient tables keyed by time-tag pairs, so evaluating a term is a small
linear combination of shared base arrays followed by one exponential.

Term generation walks the Dyson expansion directly:

* effective rate: the measured projector evolves freely while the state
  evolves with the full propagator split into zeroth-, first- and
  second-order interaction pieces (one triangle-ordered double commutator
  term plus the sandwich term on the square),
* modified rate: a second Dyson layer with bare bath operators undoes the
  system part of the evolution; its first and second orders, and the cross
  terms with the first layer, are kept up to total second order.

Each thermal branch n (system level occupied by the free thermal state)
yields its own term list; branch weights are combined by the caller.
"""

from dataclasses import dataclass

import numpy as np

from .quadrature import gauss_legendre_01, oscillation_nodes
from .state import SIGMA_Z_EIG, dressing_power

T0, TAU, T1, T2 = 0, 1, 2, 3
_TAGS = (T0, TAU, T1, T2)


def _dw(i, j, tag):
    p = dressing_power(i, j)
    return [] if p == 0 else [(p, tag)]


def _compile_word(word):
    """Reduce a word to pair-coefficient tables.

    Returns (length, r1, ii) where r1 maps an unordered tag pair to the
    integer coefficient of phi_R1(diff) (same-tag keys mean phi_R2) and ii
    maps an ordered-canonical tag pair (a, b), a < b, to the coefficient of
    phi_I(time_b - time_a).
    """
    word = [(int(s), int(tag)) for s, tag in word]
    # cancel adjacent inverse pairs (pure optimization; the tables below are
    # exact either way)
    changed = True
    while changed:
        changed = False
        for m in range(len(word) - 1):
            (s1, g1), (s2, g2) = word[m], word[m + 1]
            if g1 == g2 and s1 == -s2:
                del word[m:m + 2]
                changed = True
                break
    r1 = {}
    ii = {}
    L = len(word)
    for m in range(L):
        sm, gm = word[m]
        for mp in range(m + 1, L):
            sp, gp = word[mp]
            c = sm * sp
            a, b = (gm, gp) if gm <= gp else (gp, gm)
            r1[(a, b)] = r1.get((a, b), 0) + c
            if gm != gp:
                # master formula uses phi_I(u_m - u_mp); canonical base is
                # phi_I(time_b - time_a) with a < b in tag order
                sign = 1 if gm == b else -1
                ii[(a, b)] = ii.get((a, b), 0) + sign * c
    r1 = {k: v for k, v in r1.items() if v != 0}
    ii = {k: v for k, v in ii.items() if v != 0}
    return L, r1, ii


@dataclass(frozen=True)
class Term:
    domain: str  # "const" | "line" | "tri" | "sq"
    weight: complex
    double_re: bool
    c_tau: int
    c1: int
    c2: int
    length: int
    r1: tuple  # ((key, coeff), ...)
    ii: tuple

    def _replace_weight(self, weight):
        return Term(domain=self.domain, weight=complex(weight),
                    double_re=self.double_re, c_tau=self.c_tau, c1=self.c1,
                    c2=self.c2, length=self.length, r1=self.r1, ii=self.ii)


def _term(domain, weight, double_re, word, c_tau=0, c1=0, c2=0):
    L, r1, ii = _compile_word(word)
    return Term(domain=domain, weight=complex(weight), double_re=double_re,
                c_tau=c_tau, c1=c1, c2=c2, length=L,
                r1=tuple(sorted(r1.items())), ii=tuple(sorted(ii.items())))


def _phase_coeff(a, b):
    """Coefficient of eps*tau in the free projector phase for |a><b|."""
    return (SIGMA_Z_EIG[a] - SIGMA_Z_EIG[b]) // 2


def effective_terms(n, z, delta):
    """Terms of the effective-rate survival for thermal branch n."""
    terms = []
    # zeroth order: dressed projector overlap
    for a in (0, 1):
        for b in (0, 1):
            w = abs(z[a]) ** 2 * abs(z[b]) ** 2
            if w == 0:
                continue
            word = _dw(n, a, T0) + _dw(a, b, TAU) + _dw(b, n, T0)
            terms.append(_term("const", w, False, word,
                               c_tau=_phase_coeff(a, b)))
    # first order in the interaction
    for a in (0, 1):
        for mu in (0, 1):
            b, j, c1, bsign = (1, 0, -1, +1) if mu == 0 else (0, 1, +1, -1)
            pref = abs(z[a]) ** 2 * np.conjugate(z[b]) * z[j]
            if pref == 0:
                continue
            word = (_dw(n, a, T0) + _dw(a, b, TAU) + [(bsign, T1)]
                    + _dw(j, n, T0))
            terms.append(_term("line", -0.5j * delta * pref, True, word,
                               c_tau=_phase_coeff(a, b), c1=c1))
    # second order, time-ordered (triangle) piece
    for a in (0, 1):
        for mu in (0, 1):
            if mu == 0:
                b, c1, c2, bw = 1, -1, +1, [(+1, T1), (-1, T2)]
            else:
                b, c1, c2, bw = 0, +1, -1, [(-1, T1), (+1, T2)]
            pref = abs(z[a]) ** 2 * abs(z[b]) ** 2
            if pref == 0:
                continue
            word = _dw(n, a, T0) + _dw(a, b, TAU) + bw + _dw(b, n, T0)
            terms.append(_term("tri", -0.25 * delta ** 2 * pref, True, word,
                               c_tau=_phase_coeff(a, b), c1=c1, c2=c2))
    # second order, sandwich (square) piece
    for nu in (0, 1):
        cidx, a, c2, sl = (0, 1, +1, -1) if nu == 0 else (1, 0, -1, +1)
        for mu in (0, 1):
            b, d, c1, sr = (1, 0, -1, +1) if mu == 0 else (0, 1, +1, -1)
            pref = (z[a] * np.conjugate(z[b]) * np.conjugate(z[cidx]) * z[d])
            if pref == 0:
                continue
            word = (_dw(n, cidx, T0) + [(sl, T2)] + _dw(a, b, TAU)
                    + [(sr, T1)] + _dw(d, n, T0))
            terms.append(_term("sq", 0.25 * delta ** 2 * pref, False, word,
                               c_tau=_phase_coeff(a, b), c1=c1, c2=c2))
    return terms


def modified_terms(n, z, delta):
    """Terms of the modified-rate survival for thermal branch n.

    Identical to the effective list but with the free projector phases
    removed, plus the contributions of the second (system-undoing) Dyson
    layer whose bare bath operators all sit at time tau after the
    environment evolution is commuted through.
    """
    terms = []
    # layer-0 and layer-1 of the first expansion, without projector phases
    for a in (0, 1):
        for b in (0, 1):
            w = abs(z[a]) ** 2 * abs(z[b]) ** 2
            if w == 0:
                continue
            word = _dw(n, a, T0) + _dw(a, b, TAU) + _dw(b, n, T0)
            terms.append(_term("const", w, False, word))
    for a in (0, 1):
        for mu in (0, 1):
            b, j, c1, bsign = (1, 0, -1, +1) if mu == 0 else (0, 1, +1, -1)
            pref = abs(z[a]) ** 2 * np.conjugate(z[b]) * z[j]
            if pref == 0:
                continue
            word = (_dw(n, a, T0) + _dw(a, b, TAU) + [(bsign, T1)]
                    + _dw(j, n, T0))
            terms.append(_term("line", -0.5j * delta * pref, True, word,
                               c1=c1))
    for a in (0, 1):
        for mu in (0, 1):
            if mu == 0:
                b, c1, c2, bw = 1, -1, +1, [(+1, T1), (-1, T2)]
            else:
                b, c1, c2, bw = 0, +1, -1, [(-1, T1), (+1, T2)]
            pref = abs(z[a]) ** 2 * abs(z[b]) ** 2
            if pref == 0:
                continue
            word = _dw(n, a, T0) + _dw(a, b, TAU) + bw + _dw(b, n, T0)
            terms.append(_term("tri", -0.25 * delta ** 2 * pref, True, word,
                               c1=c1, c2=c2))
    for nu in (0, 1):
        cidx, a, c2, sl = (0, 1, +1, -1) if nu == 0 else (1, 0, -1, +1)
        for mu in (0, 1):
            b, d, c1, sr = (1, 0, -1, +1) if mu == 0 else (0, 1, +1, -1)
            pref = (z[a] * np.conjugate(z[b]) * np.conjugate(z[cidx]) * z[d])
            if pref == 0:
                continue
            word = (_dw(n, cidx, T0) + [(sl, T2)] + _dw(a, b, TAU)
                    + [(sr, T1)] + _dw(d, n, T0))
            terms.append(_term("sq", 0.25 * delta ** 2 * pref, False, word,
                               c1=c1, c2=c2))
    # first order of the undoing layer (bare bath operators at time tau)
    for grp in (0, 1):
        r, src, c1, bsign = (1, 0, -1, +1) if grp == 0 else (0, 1, +1, -1)
        for b in (0, 1):
            pref = z[src] * np.conjugate(z[r]) * abs(z[b]) ** 2
            if pref == 0:
                continue
            word = (_dw(n, r, T0) + [(bsign, TAU)] + _dw(src, b, TAU)
                    + _dw(b, n, T0))
            terms.append(_term("line", -0.5j * delta * pref, True, word,
                               c1=c1))
    # second order of the undoing layer, ordered piece (bath operators cancel)
    for r in (0, 1):
        c1, c2 = (+1, -1) if r == 0 else (-1, +1)
        for b in (0, 1):
            pref = abs(z[r]) ** 2 * abs(z[b]) ** 2
            if pref == 0:
                continue
            word = _dw(n, r, T0) + _dw(r, b, TAU) + _dw(b, n, T0)
            terms.append(_term("tri", -0.25 * delta ** 2 * pref, True, word,
                               c1=c1, c2=c2))
    # second order of the undoing layer, sandwich piece
    for mu in (0, 1):
        a, r, c1, sl = (0, 1, -1, +1) if mu == 0 else (1, 0, +1, -1)
        for nu in (0, 1):
            b, cidx, c2, sr = (0, 1, +1, -1) if nu == 0 else (1, 0, -1, +1)
            pref = (z[a] * np.conjugate(z[b]) * np.conjugate(z[r]) * z[cidx])
            if pref == 0:
                continue
            word = (_dw(n, r, T0) + [(sl, TAU)] + _dw(a, b, TAU)
                    + [(sr, TAU)] + _dw(cidx, n, T0))
            terms.append(_term("sq", 0.25 * delta ** 2 * pref, False, word,
                               c1=c1, c2=c2))
    # cross terms between the two layers, one interaction each
    for fam in (0, 1):
        if fam == 0:
            cidx, asign, c1 = 0, -1, +1  # raising component of layer 1
            r, src, c2, bsign = 1, 0, -1, +1
        else:
            cidx, asign, c1 = 1, +1, -1
            r, src, c2, bsign = 0, 1, +1, -1
        for b in (0, 1):
            pref = abs(z[cidx]) ** 2 * abs(z[b]) ** 2
            if pref == 0:
                continue
            word = (_dw(n, cidx, T0) + [(asign, T1)] + [(bsign, TAU)]
                    + _dw(src, b, TAU) + _dw(b, n, T0))
            terms.append(_term("sq", 0.25 * delta ** 2 * pref, True, word,
                               c1=c1, c2=c2))
    for grp in (0, 1):
        r, src, c2, bsign = (1, 0, -1, +1) if grp == 0 else (0, 1, +1, -1)
        for comp in (0, 1):
            b, d, c1, rsign = (1, 0, -1, +1) if comp == 0 else (0, 1, +1, -1)
            pref = (z[src] * np.conjugate(z[b]) * np.conjugate(z[r]) * z[d])
            if pref == 0:
                continue
            word = (_dw(n, r, T0) + [(bsign, TAU)] + _dw(src, b, TAU)
                    + [(rsign, T1)] + _dw(d, n, T0))
            terms.append(_term("sq", -0.25 * delta ** 2 * pref, True, word,
                               c1=c1, c2=c2))
    return terms


class _Domain:
    """Base arrays of one integration domain at fixed tau."""

    def __init__(self, weights, t1, t2, tau, phases):
        self.weights = weights
        self.t1 = t1
        self.t2 = t2
        diffs = {(T0, TAU): tau}
        if t1 is not None:
            diffs[(T0, T1)] = t1
            diffs[(TAU, T1)] = t1 - tau
        if t2 is not None:
            diffs[(T0, T2)] = t2
            diffs[(TAU, T2)] = t2 - tau
            diffs[(T1, T2)] = t2 - t1
        self.r1 = {k: phases.phi_r1_values(v) for k, v in diffs.items()}
        self.ii = {k: phases.phi_i_values(v) for k, v in diffs.items()}


class EvalContext:
    """Shared quadrature grids and phase arrays for one value of tau."""

    def __init__(self, phases, eps, tau, nodes_2d):
        if tau <= 0:
            raise ValueError("tau must be positive")
        self.eps = eps
        self.tau = tau
        self.phi_r2 = phases.phi_R2()
        n2 = oscillation_nodes(nodes_2d, eps, tau)
        x, w = gauss_legendre_01(n2)
        tl = tau * x
        self._line = _Domain(tau * w, tl, None, tau, phases)
        x2, w2 = gauss_legendre_01(n2)
        t1 = tau * x2
        t1c = t1[:, None]
        u, wu = gauss_legendre_01(n2)
        self._tri = _Domain((tau * w2 * t1)[:, None] * wu[None, :],
                            t1c, t1c * u[None, :], tau, phases)
        self._sq = _Domain((tau * w2)[:, None] * (tau * w2)[None, :],
                           t1c, t1[None, :], tau, phases)
        self._const = _Domain(None, None, None, tau, phases)
        self._domains = {"line": self._line, "tri": self._tri,
                         "sq": self._sq, "const": self._const}

    def evaluate(self, term):
        dom = self._domains[term.domain]
        mag = -0.5 * term.length * self.phi_r2
        for key, coef in term.r1:
            base = self.phi_r2 if key[0] == key[1] else dom.r1[key]
            mag = mag - coef * base
        ph = 0.0
        for key, coef in term.ii:
            ph = ph + coef * dom.ii[key]
        if term.c_tau:
            ph = ph + self.eps * term.c_tau * self.tau
        if term.c1:
            ph = ph + self.eps * term.c1 * dom.t1
        if term.c2:
            ph = ph + self.eps * term.c2 * dom.t2
        val = np.exp(mag + 1j * ph)
        if dom.weights is not None:
            val = np.sum(val * dom.weights)
        contrib = term.weight * complex(val)
        return 2.0 * contrib.real if term.double_re else contrib


def survival_from_terms(terms, ctx):
    """Sum all term contributions; returns the complex survival value."""
    total = 0.0 + 0.0j
    for term in terms:
        total += ctx.evaluate(term)
    return total
