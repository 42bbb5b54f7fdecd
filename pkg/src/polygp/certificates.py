"""Coefficient tests and constructive sum-of-binomial-squares certificates.

A binomial-square certificate writes a polynomial as

    sum_j  w_j * (cb_j*X^beta_j - cg_j*X^gamma_j)^2  +  sum_k c_k * X^(2*delta_k)

with all w_j, c_k >= 0.  The diagonal-minus-monomial forms
sum_i alpha_i*X_i^2d - 2d*X^alpha admit exact rational certificates via a
split-and-recurse construction; scaled variants (arbitrary positive diagonal)
are obtained from those by a change of variables, which introduces the
per-side coefficients cb/cg.  On top of the certificates sit boolean
coefficient conditions that are sufficient for a polynomial to be a sum of
squares, and the witness check they all specialize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

from .polynomial import (
    DecompositionView,
    ExponentVector,
    SparsePolynomial,
    decompose,
)

Number = Union[int, float, Fraction]

EQ_TOL = 1e-9      # relative tolerance for the product-equality witness condition
INEQ_TOL = 0.0     # slack for the diagonal inequalities (strict by default)
CERT_TOL = 1e-9    # relative tolerance for floating-point certificate expansion


class CertificateError(ValueError):
    """No certificate exists for the request, or a witness fails its check."""


class WitnessError(ValueError):
    """Witness entries do not match the polynomial's non-square term set."""


def _log_pow(alpha: Iterable[int]) -> float:
    """log of prod alpha_i^alpha_i, with 0^0 = 1."""
    return sum(e * math.log(e) for e in alpha if e)


# ---------------------------------------------------------------------------
# certificate containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinomialSquare:
    """One summand ``weight * (coef_beta*X^beta - coef_gamma*X^gamma)^2``."""

    weight: Number
    beta: ExponentVector
    gamma: ExponentVector
    coef_beta: Number = 1
    coef_gamma: Number = 1

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("binomial weight must be nonnegative")


@dataclass(frozen=True)
class SobsCertificate:
    """A weighted list of binomial squares plus monomial-square remainder.

    ``square_remainder`` entries (c, delta) stand for ``c * X^(2*delta)``.
    Expanding the certificate must reproduce the target polynomial (exactly
    when all weights are rational, within CERT_TOL otherwise).
    """

    n: int
    binomials: Tuple[BinomialSquare, ...]
    square_remainder: Tuple[Tuple[Number, ExponentVector], ...]

    def __post_init__(self):
        for c, _ in self.square_remainder:
            if c < 0:
                raise ValueError("remainder coefficient must be nonnegative")

    @property
    def is_rational(self) -> bool:
        vals = [x for b in self.binomials for x in (b.weight, b.coef_beta, b.coef_gamma)]
        vals += [c for c, _ in self.square_remainder]
        return all(isinstance(v, (int, Fraction)) for v in vals)

    def to_json_dict(self) -> dict:
        bins = []
        for b in self.binomials:
            entry = {
                "w": _num_to_json(b.weight),
                "beta": list(b.beta),
                "gamma": list(b.gamma),
            }
            if b.coef_beta != 1:
                entry["cb"] = _num_to_json(b.coef_beta)
            if b.coef_gamma != 1:
                entry["cg"] = _num_to_json(b.coef_gamma)
            bins.append(entry)
        squares = [{"c": _num_to_json(c), "beta": list(v)} for c, v in self.square_remainder]
        return {"n": self.n, "binomials": bins, "squares": squares}

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "SobsCertificate":
        bins = tuple(
            BinomialSquare(
                _num_from_json(e["w"]),
                ExponentVector(e["beta"]),
                ExponentVector(e["gamma"]),
                _num_from_json(e.get("cb", 1)),
                _num_from_json(e.get("cg", 1)),
            )
            for e in data["binomials"]
        )
        squares = tuple(
            (_num_from_json(e["c"]), ExponentVector(e["beta"])) for e in data["squares"]
        )
        return cls(int(data["n"]), bins, squares)


def _num_to_json(v: Number):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return v
    return float(v)


def _num_from_json(v) -> Number:
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, int):
        return v
    return float(v)


class AWitness:
    """Per-term diagonal allocations a[(alpha, i)] > 0, stored on the support.

    Entries at positions with alpha_i = 0 (or with value 0) are dropped on
    construction, so the stored map always satisfies "present iff alpha_i != 0
    and positive"; dropping such entries never weakens the witness conditions.
    """

    __slots__ = ("_n", "_entries")

    def __init__(self, n: int, entries: Mapping) -> None:
        self._n = int(n)
        clean = {}
        for (alpha, i), value in entries.items():
            vec = alpha if isinstance(alpha, ExponentVector) else ExponentVector(alpha)
            if len(vec) != self._n:
                raise ValueError("witness exponent length mismatch")
            if not 0 <= i < self._n:
                raise ValueError(f"witness variable index {i} out of range")
            v = float(value)
            if v < 0:
                raise ValueError("witness entries must be nonnegative")
            if v == 0.0 or vec[i] == 0:
                continue
            clean[(vec, i)] = v
        self._entries = clean

    @classmethod
    def from_nested(cls, n: int, nested: Mapping) -> "AWitness":
        flat = {}
        for alpha, row in nested.items():
            for i, v in row.items():
                flat[(alpha, i)] = v
        return cls(n, flat)

    @classmethod
    def empty(cls, n: int) -> "AWitness":
        return cls(n, {})

    @property
    def n(self) -> int:
        return self._n

    @property
    def entries(self) -> Mapping:
        return MappingProxyType(self._entries)

    def alphas(self) -> frozenset:
        return frozenset(alpha for alpha, _ in self._entries)

    def get(self, alpha, i: int) -> float:
        vec = alpha if isinstance(alpha, ExponentVector) else ExponentVector(alpha)
        return self._entries.get((vec, i), 0.0)

    def vector_for(self, alpha) -> Tuple[float, ...]:
        return tuple(self.get(alpha, i) for i in range(self._n))

    def column_sum(self, i: int) -> float:
        return sum(v for (_, j), v in self._entries.items() if j == i)

    def to_json_dict(self) -> dict:
        return {
            "n": self._n,
            "entries": [
                {"alpha": list(alpha), "i": i, "value": v}
                for (alpha, i), v in sorted(self._entries.items())
            ],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "AWitness":
        return cls(
            int(data["n"]),
            {(ExponentVector(e["alpha"]), int(e["i"])): float(e["value"]) for e in data["entries"]},
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, AWitness):
            return NotImplemented
        return self._n == other._n and self._entries == other._entries

    def __repr__(self) -> str:
        return f"AWitness({self._n}, {self._entries!r})"


# ---------------------------------------------------------------------------
# equivalence / coefficient checks
# ---------------------------------------------------------------------------

def fk_equivalence_check(
    beta: Sequence[float], mu: float, alpha, tol: float = 1e-9
) -> bool:
    """Decide positive semidefiniteness of sum_i beta_i*X_i^2d - mu*X^alpha.

    For |alpha| = 2d and beta >= 0 the form is PSD -- equivalently a sum of
    binomial squares -- exactly when |mu|^2d * prod alpha_i^alpha_i is at most
    (2d)^2d * prod beta_i^alpha_i; the comparison is done in the log domain.
    """
    avec = alpha if isinstance(alpha, ExponentVector) else ExponentVector(alpha)
    two_d = avec.total_degree()
    if two_d == 0:
        raise ValueError("alpha must have positive total degree")
    if len(beta) != len(avec):
        raise ValueError("beta and alpha must have the same length")
    bs = [float(b) for b in beta]
    if any(b < 0 for b in bs):
        raise ValueError("beta entries must be nonnegative")
    if mu == 0:
        return True
    if any(b == 0.0 and e for b, e in zip(bs, avec)):
        return False
    lhs = two_d * math.log(abs(mu)) + _log_pow(avec)
    rhs = two_d * math.log(two_d) + sum(e * math.log(b) for e, b in zip(avec, bs) if e)
    return lhs <= rhs + tol


def _form_decomposition(f: SparsePolynomial) -> DecompositionView:
    if not f.is_form or f.is_constant:
        raise ValueError("expected a non-constant form (all terms of equal degree)")
    return decompose(f)


def check_lasserre(f: SparsePolynomial) -> bool:
    """Constant-term/diagonal domination test; True implies f is SOS.

    Requires f0 to cover sum |f_a|*(2d-|a|)/2d over non-square terms and each
    diagonal coefficient to cover sum |f_a|*a_i/2d.
    """
    dec = decompose(f)
    two_d = dec.two_d
    if dec.f0 < sum(
        abs(fa) * (two_d - a.total_degree()) / two_d
        for a, fa in ((a, f.coefficient(a)) for a in dec.delta)
    ):
        return False
    for i in range(dec.n):
        if dec.diag[i] < sum(abs(f.coefficient(a)) * a[i] / two_d for a in dec.delta):
            return False
    return True


def check_fk(f: SparsePolynomial) -> bool:
    """Smallest-diagonal test for forms; True implies f is SOBS."""
    dec = _form_decomposition(f)
    two_d = dec.two_d
    bound = sum(
        math.exp(math.log(abs(f.coefficient(a))) + _log_pow(a) / two_d)
        for a in dec.delta
    ) / two_d
    return min(dec.diag) >= bound


def check_fk_improved(f: SparsePolynomial) -> bool:
    """Weighted-diagonal refinement of check_fk; needs positive diagonal."""
    dec = _form_decomposition(f)
    two_d = dec.two_d
    if any(d <= 0 for d in dec.diag):
        raise ValueError("every diagonal coefficient must be positive")
    log_diag = [math.log(d) for d in dec.diag]
    total = sum(
        math.exp(
            math.log(abs(f.coefficient(a)))
            + _log_pow(a) / two_d
            - math.log(two_d)
            - sum(e * ld for e, ld in zip(a, log_diag)) / two_d
        )
        for a in dec.delta
    )
    return total <= 1.0


def check_newcrt(f: SparsePolynomial) -> bool:
    """Per-variable root-weighted test for forms; True implies f is SOBS."""
    dec = _form_decomposition(f)
    two_d = dec.two_d
    for i in range(dec.n):
        need = 0.0
        for a in dec.delta:
            if a[i] == 0:
                continue
            log_ratio = math.log(abs(f.coefficient(a))) - math.log(two_d)
            need += a[i] * math.exp(two_d / (a[i] * a.n_nonzero) * log_ratio)
        if dec.diag[i] < need:
            return False
    return True


def check_suffcnd(
    f: SparsePolynomial,
    witness: AWitness,
    tol_eq: float = EQ_TOL,
    tol_ineq: float = INEQ_TOL,
) -> bool:
    """Witness check subsuming the coefficient tests; True implies f is SOBS.

    Condition (1): for each non-square term, (2d)^2d * prod a_i^alpha_i must
    equal |f_alpha|^2d * prod alpha_i^alpha_i within relative tol_eq.
    Condition (2): each diagonal coefficient must dominate its column sum.
    """
    dec = _form_decomposition(f)
    if witness.n != f.n:
        raise WitnessError("witness has wrong variable count")
    if witness.alphas() != dec.delta:
        raise WitnessError("witness terms do not match the non-square term set")
    two_d = dec.two_d
    for a in dec.delta:
        lhs = two_d * math.log(two_d)
        ok = True
        for i in a.support():
            v = witness.get(a, i)
            if v == 0.0:
                ok = False
                break
            lhs += a[i] * math.log(v)
        if not ok:
            return False
        rhs = two_d * math.log(abs(f.coefficient(a))) + _log_pow(a)
        if abs(lhs - rhs) > tol_eq:
            return False
    for i in range(dec.n):
        if witness.column_sum(i) > dec.diag[i] + tol_ineq:
            return False
    return True


# ---------------------------------------------------------------------------
# constructive certificates
# ---------------------------------------------------------------------------

def hurwitz_reznick_certificate(alpha) -> SobsCertificate:
    """Exact rational certificate for sum_i alpha_i*X_i^2d - 2d*X^alpha.

    Splits alpha = beta + gamma with |beta| = |gamma| = d and recurses on the
    doubled halves while more than two variables occur; with two effective
    variables it iterates the one-sided split until the exponent pair repeats
    or balances, resolving a repeat through the geometric factor
    1/(1 - 2^(t0-m)).  All weights are Fractions, so expansion is exact.
    """
    avec = alpha if isinstance(alpha, ExponentVector) else ExponentVector(alpha)
    two_d = avec.total_degree()
    if two_d == 0 or two_d % 2:
        raise ValueError("alpha must have positive even total degree")
    d = two_d // 2
    n = len(avec)
    out: list = []

    def axis(i: int, power: int) -> ExponentVector:
        return ExponentVector.axis(n, i, power)

    def two_var(cur_alpha: ExponentVector, scale: Fraction) -> None:
        i, j = cur_alpha.support()
        a, b = cur_alpha[i], cur_alpha[j]
        if a == d and b == d:
            out.append(BinomialSquare(scale * d, axis(i, d), axis(j, d)))
            return
        steps = []
        seen = {(a, b): 0}
        cur = (a, b)
        while True:
            a_, b_ = cur
            if a_ > b_:
                beta = axis(i, d)
                gamma = ExponentVector(
                    (a_ - d) if k == i else (b_ if k == j else 0) for k in range(n)
                )
                nxt = (2 * (a_ - d), 2 * b_)
            else:
                beta = axis(j, d)
                gamma = ExponentVector(
                    a_ if k == i else ((b_ - d) if k == j else 0) for k in range(n)
                )
                nxt = (2 * a_, 2 * (b_ - d))
            steps.append((beta, gamma))
            m = len(steps)
            if nxt == (d, d):
                resolution = ("balanced", m, m)
                break
            if nxt in seen:
                resolution = ("repeat", seen[nxt], m)
                break
            seen[nxt] = m
            cur = nxt
        kind, t0, m = resolution
        boost = Fraction(1)
        if kind == "repeat":
            boost = 1 / (1 - Fraction(1, 2 ** (m - t0)))
        for t, (beta, gamma) in enumerate(steps):
            w = scale * d * Fraction(1, 2 ** t)
            if kind == "repeat" and t >= t0:
                w *= boost
            out.append(BinomialSquare(w, beta, gamma))
        if kind == "balanced":
            out.append(BinomialSquare(scale * d * Fraction(1, 2 ** m), axis(i, d), axis(j, d)))

    def work(cur_alpha: ExponentVector, scale: Fraction) -> None:
        supp = cur_alpha.support()
        if len(supp) <= 1:
            return  # the form is identically zero
        if len(supp) == 2:
            two_var(cur_alpha, scale)
            return
        # at least two support entries are <= d; split off the two smallest
        smalls = [i for i in supp if cur_alpha[i] <= d]
        i1, i2 = smalls[0], smalls[1]
        beta = [0] * n
        beta[i2] = cur_alpha[i2]
        budget = d - cur_alpha[i2]
        for i in supp:
            if budget == 0:
                break
            if i in (i1, i2):
                continue
            take = min(cur_alpha[i], budget)
            beta[i] = take
            budget -= take
        gamma = [a - b for a, b in zip(cur_alpha, beta)]
        beta_v, gamma_v = ExponentVector(beta), ExponentVector(gamma)
        out.append(BinomialSquare(scale * d, beta_v, gamma_v))
        work(ExponentVector(2 * e for e in beta_v), scale / 2)
        work(ExponentVector(2 * e for e in gamma_v), scale / 2)

    work(avec, Fraction(1))
    return SobsCertificate(n, tuple(out), ())


def agiform_certificate(beta: Sequence[float], mu: float, alpha) -> SobsCertificate:
    """Certificate for sum_i beta_i*X_i^2d - mu*X^alpha (|alpha| = 2d).

    Requires fk_equivalence_check to hold.  The diagonal is rescaled onto the
    balanced case by X_i -> (alpha_i/beta_i)^(1/2d)*Y_i, the balanced
    certificate is pulled back (which puts irrational coefficients on the two
    binomial sides), and the slack 1 - mu1/2d goes onto diagonal monomial
    squares.  Variables outside the monomial's support contribute plain
    squares; a negative mu is handled by flipping the sign of one odd-power
    variable throughout.
    """
    avec = alpha if isinstance(alpha, ExponentVector) else ExponentVector(alpha)
    two_d = avec.total_degree()
    if two_d == 0 or two_d % 2:
        raise ValueError("alpha must have positive even total degree")
    n = len(avec)
    if len(beta) != n:
        raise ValueError("beta and alpha must have the same length")
    bs = [float(b) for b in beta]
    if any(b < 0 for b in bs):
        raise ValueError("beta entries must be nonnegative")
    if not fk_equivalence_check(bs, mu, avec):
        raise CertificateError("the form is not PSD; no certificate exists")
    d = two_d // 2

    def axis(i: int, power: int) -> ExponentVector:
        return ExponentVector.axis(n, i, power)

    diag_squares = [(bs[i], axis(i, d)) for i in range(n) if bs[i] > 0]
    if mu == 0:
        return SobsCertificate(n, (), tuple(diag_squares))

    flip_index: Optional[int] = None
    work_mu = float(mu)
    if mu < 0:
        odd = [i for i, e in enumerate(avec) if e % 2]
        if not odd:
            # all exponents even: -mu*X^alpha is itself a monomial square
            remainder = diag_squares + [(-float(mu), ExponentVector(e // 2 for e in avec))]
            return SobsCertificate(n, (), tuple(remainder))
        flip_index = odd[0]
        work_mu = -work_mu

    if work_mu == two_d and all(b == float(a) for b, a in zip(bs, avec)):
        return hurwitz_reznick_certificate(avec)

    supp = avec.support()
    for i in supp:
        if bs[i] == 0.0:
            raise CertificateError("zero diagonal against a used variable")
    log_a = {i: math.log(avec[i]) for i in supp}
    log_b = {i: math.log(bs[i]) for i in supp}
    mu1 = work_mu * math.exp(sum(avec[i] * (log_a[i] - log_b[i]) for i in supp) / two_d)
    ratio = min(mu1 / two_d, 1.0)

    remainder = [(bs[i], axis(i, d)) for i in range(n) if i not in supp and bs[i] > 0]
    if ratio < 1.0:
        remainder += [((1.0 - ratio) * bs[i], axis(i, d)) for i in supp]

    def side_scale(vec: ExponentVector) -> float:
        return math.exp(sum(vec[i] * (log_b[i] - log_a[i]) for i in supp if vec[i]) / two_d)

    binomials = []
    for b in hurwitz_reznick_certificate(avec).binomials:
        cb = side_scale(b.beta)
        cg = side_scale(b.gamma)
        if flip_index is not None:
            cb *= (-1.0) ** b.beta[flip_index]
            cg *= (-1.0) ** b.gamma[flip_index]
        binomials.append(BinomialSquare(ratio * float(b.weight), b.beta, b.gamma, cb, cg))
    return SobsCertificate(n, tuple(binomials), tuple(remainder))


def suffcnd_certificate(f: SparsePolynomial, witness: AWitness) -> SobsCertificate:
    """Assemble a certificate for a form from a verified witness.

    Concatenates the per-term scaled certificates, then adds the leftover
    diagonal and every square term of f as monomial squares.
    """
    if not check_suffcnd(f, witness):
        raise CertificateError("witness fails the sufficiency check")
    dec = _form_decomposition(f)
    n = f.n
    d = dec.two_d // 2
    binomials: list = []
    remainder: list = []
    for a in sorted(dec.delta):
        sub = agiform_certificate(witness.vector_for(a), -f.coefficient(a), a)
        binomials.extend(sub.binomials)
        remainder.extend(sub.square_remainder)
    for i in range(n):
        surplus = dec.diag[i] - witness.column_sum(i)
        if surplus > 0:
            remainder.append((surplus, ExponentVector.axis(n, i, d)))
    for a in sorted(dec.omega - dec.delta):
        remainder.append((f.coefficient(a), ExponentVector(e // 2 for e in a)))
    return SobsCertificate(n, tuple(binomials), tuple(remainder))


def extend_witness_to_homogenization(f: SparsePolynomial, witness: AWitness) -> AWitness:
    """Lift a witness for f to one for the homogenization of f.

    The non-square terms of the homogenization are those of f with the new
    variable's exponent appended; the new-variable allocation for a term of
    degree < 2d is pinned by the product-equality condition and is computed
    here, so the lifted witness satisfies it exactly.
    """
    dec = decompose(f)
    if witness.n != f.n:
        raise WitnessError("witness has wrong variable count")
    if witness.alphas() != dec.delta:
        raise WitnessError("witness terms do not match the non-square term set")
    two_d = dec.two_d
    n = f.n
    entries = {}
    for a in dec.delta:
        abar = ExponentVector(tuple(a) + (two_d - a.total_degree(),))
        log_prod = 0.0
        for i in a.support():
            v = witness.get(a, i)
            if v <= 0.0:
                raise WitnessError("witness must be positive on each term's support")
            entries[(abar, i)] = v
            log_prod += a[i] * math.log(v)
        gap = two_d - a.total_degree()
        if gap:
            log_ay = (
                two_d * math.log(abs(f.coefficient(a)))
                + _log_pow(a)
                - two_d * math.log(two_d)
                - log_prod
            ) / gap
            entries[(abar, n)] = gap * math.exp(log_ay)
    return AWitness(n + 1, entries)


# ---------------------------------------------------------------------------
# expansion
# ---------------------------------------------------------------------------

def _expand_terms(cert: SobsCertificate) -> dict:
    acc: dict = {}

    def add(vec: ExponentVector, val) -> None:
        cur = acc.get(vec, 0) + val
        if cur == 0:
            acc.pop(vec, None)
        else:
            acc[vec] = cur

    for b in cert.binomials:
        two_beta = ExponentVector(2 * e for e in b.beta)
        two_gamma = ExponentVector(2 * e for e in b.gamma)
        cross = ExponentVector(x + y for x, y in zip(b.beta, b.gamma))
        add(two_beta, b.weight * b.coef_beta * b.coef_beta)
        add(cross, -2 * b.weight * b.coef_beta * b.coef_gamma)
        add(two_gamma, b.weight * b.coef_gamma * b.coef_gamma)
    for c, half in cert.square_remainder:
        add(ExponentVector(2 * e for e in half), c)
    return acc


def expand_certificate(cert: SobsCertificate) -> SparsePolynomial:
    """Expand and collect the certificate into a polynomial (float coefficients)."""
    return SparsePolynomial(cert.n, {k: float(v) for k, v in _expand_terms(cert).items()})


def expand_certificate_exact(cert: SobsCertificate) -> dict:
    """Expand in exact rational arithmetic; raises if any entry is a float."""
    if not cert.is_rational:
        raise TypeError("certificate carries floating-point entries")
    return {k: Fraction(v) for k, v in _expand_terms(cert).items()}
