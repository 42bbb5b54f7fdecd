"""Certified lower bounds for polynomials with positive diagonal leading terms.

The headline bound solves a geometric program whose variables allocate each
diagonal coefficient across the non-square terms; its optimum m* gives the
bound f0 - m*.  Three closed-form bounds (rl, rfk, rdmt) evaluate the same
objective at explicit feasible points, two of them through the unique
positive root of an auxiliary univariate polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

from .certificates import AWitness, _log_pow
from .gpsolver import (
    GeometricProgram,
    GpSolution,
    GpSolverError,
    GpStatus,
    LogMonomialTerm,
    SolverOptions,
    solve,
)
from .polynomial import DecompositionView, ExponentVector, SparsePolynomial, decompose


class BoundPreconditionError(ValueError):
    """The polynomial violates a bound's hypotheses (reported, no value)."""


@dataclass(frozen=True)
class MinusInfinityVerdict:
    """Triage outcome: the bound is -infinity and no program is emitted."""

    reason: str


@dataclass
class BoundResult:
    method: str
    value: float
    witness: Optional[AWitness] = None
    k_used: Optional[float] = None
    status_detail: str = ""
    diagnostics: Optional[dict] = field(default=None, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "value": "-inf" if self.value == -math.inf else self.value,
            "witness": self.witness.to_json_dict() if self.witness is not None else None,
            "k": self.k_used,
            "detail": self.status_detail,
        }

    @classmethod
    def from_json_dict(cls, data) -> "BoundResult":
        value = data["value"]
        return cls(
            method=data["method"],
            value=-math.inf if value == "-inf" else float(value),
            witness=AWitness.from_json_dict(data["witness"]) if data["witness"] else None,
            k_used=data["k"],
            status_detail=data["detail"],
        )


def _sorted_delta(dec: DecompositionView):
    return sorted(dec.delta, key=lambda a: (a.total_degree(), tuple(a)))


# ---------------------------------------------------------------------------
# the geometric program behind f0 - m*
# ---------------------------------------------------------------------------

def fgp_program(f: SparsePolynomial) -> Union[GeometricProgram, MinusInfinityVerdict]:
    """Assemble the bound program, or decide -infinity outright.

    Triage: a negative diagonal coefficient, or a zero one for a variable some
    non-square term uses, forces the verdict.  Remaining zero-diagonal columns
    simply contribute no variables.  Program variables are the pairs
    (alpha, i) with alpha_i != 0; all coefficients are assembled in the log
    domain.
    """
    dec = decompose(f)
    two_d = dec.two_d
    for i, di in enumerate(dec.diag):
        if di < 0:
            return MinusInfinityVerdict(f"diagonal coefficient of variable {i + 1} is negative")
    for a in _sorted_delta(dec):
        for i in a.support():
            if dec.diag[i] == 0.0:
                return MinusInfinityVerdict(
                    f"diagonal coefficient of variable {i + 1} is zero but a "
                    "non-square term uses that variable"
                )

    delta = _sorted_delta(dec)
    variables = tuple((a, i) for a in delta for i in a.support())

    objective = []
    for a in delta:
        gap = two_d - a.total_degree()
        if gap == 0:
            continue
        log_fa = math.log(abs(f.coefficient(a)))
        log_c = math.log(gap) + (two_d * (log_fa - math.log(two_d)) + _log_pow(a)) / gap
        objective.append(
            LogMonomialTerm(log_c, {(a, i): -a[i] / gap for i in a.support()})
        )

    ineqs = []
    for i in range(dec.n):
        users = [a for a in delta if a[i]]
        if not users:
            continue
        log_di = math.log(dec.diag[i])
        ineqs.append(tuple(LogMonomialTerm(-log_di, {(a, i): 1.0}) for a in users))

    eqs = []
    for a in delta:
        if a.total_degree() != two_d:
            continue
        log_fa = math.log(abs(f.coefficient(a)))
        log_c = two_d * (math.log(two_d) - log_fa) - _log_pow(a)
        eqs.append(LogMonomialTerm(log_c, {(a, i): float(a[i]) for i in a.support()}))

    return GeometricProgram(
        vars=variables,
        objective=tuple(objective),
        ineq_constraints=tuple(ineqs),
        eq_constraints=tuple(eqs),
    )


def _single_term_analytic(f: SparsePolynomial, dec: DecompositionView):
    """Closed-form value and witness when only one non-diagonal term exists."""
    (a,) = dec.omega
    two_d = dec.two_d
    if a not in dec.delta:
        return dec.f0, AWitness.empty(f.n)
    log_ratio = (
        two_d * math.log(abs(f.coefficient(a))) + _log_pow(a) - two_d * math.log(two_d)
    )
    log_prod_diag = sum(a[i] * math.log(dec.diag[i]) for i in a.support())
    gap = two_d - a.total_degree()
    if gap:
        value = dec.f0 - gap * math.exp((log_ratio - log_prod_diag) / gap)
        witness = AWitness(f.n, {(a, i): dec.diag[i] for i in a.support()})
        return value, witness
    s = math.exp((log_ratio - log_prod_diag) / two_d)
    if s <= 1.0 + 1e-12:
        witness = AWitness(f.n, {(a, i): s * dec.diag[i] for i in a.support()})
        return dec.f0, witness
    return -math.inf, None


def compute_fgp(f: SparsePolynomial, opts: Optional[SolverOptions] = None) -> BoundResult:
    """The geometric-programming lower bound with its optimal witness.

    With a single non-diagonal term the solver result is cross-checked
    against the closed-form value (the two must agree; the better one is
    returned and a disagreement is flagged in status_detail).
    """
    program = fgp_program(f)
    dec = decompose(f)
    if isinstance(program, MinusInfinityVerdict):
        return BoundResult("gp", -math.inf, status_detail=program.reason)

    sol = solve(program, opts)
    if sol.status in (GpStatus.Unbounded, GpStatus.NumericalFailure):
        raise GpSolverError(f"solver returned {sol.status.value}: {sol.detail}")

    diagnostics = {
        "status": sol.status.value,
        "iterations": sol.iterations,
        "kkt_residual": sol.kkt_residual,
    }
    if sol.status is GpStatus.Infeasible:
        value, witness = -math.inf, None
        detail = sol.detail or "equality constraints are jointly unsatisfiable"
    elif sol.status is GpStatus.ConstantObjective:
        value, witness = dec.f0, AWitness(f.n, sol.point)
        detail = "no objective terms; bound equals the constant term"
    else:
        value, witness = dec.f0 - sol.optimum, AWitness(f.n, sol.point)
        detail = ""

    if len(dec.omega) == 1:
        a_value, a_witness = _single_term_analytic(f, dec)
        agree = (
            (value == -math.inf and a_value == -math.inf)
            or abs(value - a_value) <= 1e-6 * (1.0 + abs(a_value))
        )
        note = "single-term closed form agrees" if agree else (
            f"single-term closed form {a_value!r} disagrees with solver {value!r}"
        )
        detail = f"{detail}; {note}" if detail else note
        if a_value > value:
            value, witness = a_value, a_witness
    return BoundResult("gp", value, witness, None, detail, diagnostics)


# ---------------------------------------------------------------------------
# unique positive root
# ---------------------------------------------------------------------------

def positive_root(coeffs: Sequence[float], n: int) -> float:
    """The unique positive root of t^n - sum_{i<n} a_i t^i, a_i >= 0, some a_i > 0.

    Brackets in [0, 1 + max a_i] and runs Newton safeguarded by bisection to
    absolute tolerance 1e-12 * (1 + root).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    a = [float(v) for v in coeffs]
    if len(a) > n:
        raise ValueError("too many coefficients")
    a += [0.0] * (n - len(a))
    if any(v < 0 for v in a):
        raise ValueError("coefficients must be nonnegative")
    if all(v == 0 for v in a):
        raise ValueError("all coefficients are zero; no positive root")
    # factor out t^k so the constant term is nonzero (the positive root is unchanged)
    while a[0] == 0.0:
        a.pop(0)
        n -= 1

    poly = [-v for v in a] + [1.0]  # coefficient of t^j at index j

    def eval_p(t: float):
        p = dp = 0.0
        for c in reversed(poly):
            dp = dp * t + p
            p = p * t + c
        return p, dp

    hi = 1.0 + max(a)
    for _ in range(200):
        if eval_p(hi)[0] > 0:
            break
        hi *= 2.0
    lo = 0.0
    x = hi
    for _ in range(200):
        p, dp = eval_p(x)
        if p > 0:
            hi = x
        else:
            lo = x
        if hi - lo <= 1e-12 * (1.0 + x):
            break
        if dp > 0:
            step = x - p / dp
            x = step if lo < step < hi else 0.5 * (lo + hi)
        else:
            x = 0.5 * (lo + hi)
    return 0.5 * (lo + hi) if hi - lo > 1e-12 * (1.0 + x) else x


# ---------------------------------------------------------------------------
# explicit bounds
# ---------------------------------------------------------------------------

def _explicit_setup(f: SparsePolynomial) -> DecompositionView:
    dec = decompose(f)
    if any(d <= 0 for d in dec.diag):
        raise BoundPreconditionError("every diagonal coefficient must be positive")
    if any(a.total_degree() >= dec.two_d for a in dec.delta):
        raise BoundPreconditionError("a non-square term has full degree 2d")
    return dec


def bound_rl(f: SparsePolynomial) -> BoundResult:
    """Explicit bound from per-variable positive roots (largest of them)."""
    dec = _explicit_setup(f)
    two_d = dec.two_d
    if not dec.delta:
        return BoundResult("rl", dec.f0, status_detail="no non-square terms")
    k = 0.0
    for i in range(dec.n):
        coeffs = [0.0] * two_d
        log_di = math.log(dec.diag[i])
        used = False
        for a in dec.delta:
            if a[i]:
                j = a.total_degree()
                coeffs[j] += (
                    a[i]
                    * abs(f.coefficient(a))
                    * math.exp(-(j / two_d) * log_di)
                    / two_d
                )
                used = True
        if used:
            k = max(k, positive_root(coeffs, two_d))
    total = 0.0
    for a in dec.delta:
        j = a.total_degree()
        log_scale = -sum(a[i] * math.log(dec.diag[i]) for i in a.support()) / two_d
        total += (two_d - j) * abs(f.coefficient(a)) * k ** j * math.exp(log_scale)
    return BoundResult("rl", dec.f0 - total / two_d, k_used=k)


def bound_rfk(f: SparsePolynomial) -> BoundResult:
    """Explicit bound through one aggregated positive root: f0 - k^2d."""
    dec = _explicit_setup(f)
    two_d = dec.two_d
    if not dec.delta:
        return BoundResult("rfk", dec.f0, status_detail="no non-square terms")
    coeffs = [0.0] * two_d
    for a in dec.delta:
        j = a.total_degree()
        log_term = (
            _log_pow(a) - sum(a[i] * math.log(dec.diag[i]) for i in a.support())
        ) / two_d
        coeffs[j] += (
            (two_d - j) ** ((two_d - j) / two_d)
            * abs(f.coefficient(a))
            * math.exp(log_term)
            / two_d
        )
    k = positive_root(coeffs, two_d)
    return BoundResult("rfk", dec.f0 - math.exp(two_d * math.log(k)), k_used=k)


def bound_rdmt(f: SparsePolynomial) -> BoundResult:
    """Direct formula at the equal-split feasible point a_{alpha,i} = diag_i/|Delta|."""
    dec = _explicit_setup(f)
    two_d = dec.two_d
    if not dec.delta:
        return BoundResult("rdmt", dec.f0, status_detail="no non-square terms")
    t = len(dec.delta)
    total = 0.0
    for a in dec.delta:
        j = a.total_degree()
        gap = two_d - j
        log_inner = (
            two_d * (math.log(abs(f.coefficient(a))) - math.log(two_d))
            + j * math.log(t)
            + _log_pow(a)
            - sum(a[i] * math.log(dec.diag[i]) for i in a.support())
        )
        total += gap * math.exp(log_inner / gap)
    return BoundResult("rdmt", dec.f0 - total)


# ---------------------------------------------------------------------------
# the feasible points behind the explicit bounds
# ---------------------------------------------------------------------------

def rl_feasible_point(f: SparsePolynomial) -> Tuple[Dict, float]:
    """GP point reproducing bound_rl; keys are the program's (alpha, i) ids."""
    dec = _explicit_setup(f)
    two_d = dec.two_d
    k = bound_rl(f).k_used or 0.0
    point = {}
    for a in dec.delta:
        j = a.total_degree()
        for i in a.support():
            point[(a, i)] = (
                a[i]
                / (two_d * k ** (two_d - j))
                * abs(f.coefficient(a))
                * dec.diag[i] ** (1.0 - j / two_d)
            )
    return point, k


def rfk_feasible_point(f: SparsePolynomial) -> Tuple[Dict, float]:
    """GP point reproducing bound_rfk."""
    dec = _explicit_setup(f)
    two_d = dec.two_d
    k = bound_rfk(f).k_used or 0.0
    point = {}
    for a in dec.delta:
        j = a.total_degree()
        base = (
            (two_d - j) ** ((two_d - j) / two_d)
            * abs(f.coefficient(a))
            / two_d
            * math.exp(
                (_log_pow(a) - sum(a[i] * math.log(dec.diag[i]) for i in a.support()))
                / two_d
            )
            * k ** (j - two_d)
        )
        for i in a.support():
            point[(a, i)] = base * dec.diag[i]
    return point, k


def rdmt_feasible_point(f: SparsePolynomial) -> Dict:
    """GP point reproducing bound_rdmt: diag_i split evenly across terms."""
    dec = _explicit_setup(f)
    t = len(dec.delta)
    return {(a, i): dec.diag[i] / t for a in dec.delta for i in a.support()}


# ---------------------------------------------------------------------------
# diagonal shift
# ---------------------------------------------------------------------------

def apply_diagonal_shift(f: SparsePolynomial, epsilon: float) -> SparsePolynomial:
    """Replace the whole top-degree part by epsilon * sum_i X_i^deg.

    Sound as a lower-bound transformation only under the caller's assertion
    that the removed part minus the inserted diagonal is itself a sum of
    squares; nothing is verified here.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if f.is_constant:
        raise ValueError("constant polynomial has no leading form")
    deg = f.degree
    terms = {a: c for a, c in f.terms.items() if a.total_degree() < deg}
    for i in range(f.n):
        terms[ExponentVector.axis(f.n, i, deg)] = float(epsilon)
    return SparsePolynomial(f.n, terms)
