"""Self-contained geometric-program solver.

A geometric program minimizes a posynomial subject to posynomial <= 1 and
monomial == 1 constraints over strictly positive variables.  Substituting
x = exp(y) turns every posynomial into a log-sum-exp of affine functions of y
and every monomial equality into one affine equation, giving a convex
problem.  Equalities are eliminated through a null-space parametrization
y = y0 + Z u (they then hold to machine precision for every iterate), a
phase-I slack minimization finds a strictly feasible u or certifies
infeasibility, and a log-barrier Newton path-following loop drives the
duality-gap bound (#inequalities)/t below the requested tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Hashable, Mapping, Optional, Sequence, Tuple

import numpy as np

Posynomial = Tuple["LogMonomialTerm", ...]


class GpStatus(Enum):
    Optimal = "optimal"
    Infeasible = "infeasible"
    Unbounded = "unbounded"
    ConstantObjective = "constant_objective"
    NumericalFailure = "numerical_failure"


class GpSolverError(RuntimeError):
    """Raised by callers that cannot proceed past a failed solve."""


@dataclass(frozen=True)
class LogMonomialTerm:
    """One monomial term c * prod x_v^a_v, stored as log c plus exponents.

    Coefficients are carried in the log domain throughout so that quantities
    like |f|^2d / (2d)^2d at 2d = 40 never materialize as doubles.
    """

    log_c: float
    exponents: Mapping[Hashable, float]

    def __post_init__(self):
        object.__setattr__(self, "exponents", dict(self.exponents))

    @property
    def coefficient(self) -> float:
        return math.exp(self.log_c)


@dataclass(frozen=True)
class GeometricProgram:
    """Posynomial objective, posynomial <= 1 constraints, monomial == 1 constraints."""

    vars: Tuple[Hashable, ...]
    objective: Posynomial = ()
    ineq_constraints: Tuple[Posynomial, ...] = ()
    eq_constraints: Tuple[LogMonomialTerm, ...] = ()

    def __post_init__(self):
        declared = set(self.vars)
        if len(declared) != len(self.vars):
            raise ValueError("duplicate variable ids")
        for term in self._all_terms():
            for v in term.exponents:
                if v not in declared:
                    raise ValueError(f"term references undeclared variable {v!r}")

    def _all_terms(self):
        yield from self.objective
        for posy in self.ineq_constraints:
            yield from posy
        yield from self.eq_constraints

    @property
    def is_constant_objective(self) -> bool:
        return not self.objective


@dataclass(frozen=True)
class SolverOptions:
    tol_gap: float = 1e-8
    tol_feas: float = 1e-8
    max_iters: int = 200
    barrier_growth: float = 10.0
    t_init: float = 1.0


@dataclass
class GpSolution:
    status: GpStatus
    optimum: float
    point: Dict[Hashable, float] = field(default_factory=dict)
    iterations: int = 0
    kkt_residual: float = 0.0
    detail: str = ""


# ---------------------------------------------------------------------------
# posynomial evaluation on the original (positive) variables
# ---------------------------------------------------------------------------

def evaluate_posynomial(terms: Sequence[LogMonomialTerm], x: Mapping) -> float:
    """Sum of exp(log_c + sum a_v*log x_v); empty posynomials evaluate to 0."""
    if not terms:
        return 0.0
    logs = []
    for term in terms:
        z = term.log_c
        for v, a in term.exponents.items():
            xv = float(x[v])
            if xv <= 0.0:
                raise ValueError(f"variable {v!r} must be positive, got {xv}")
            z += a * math.log(xv)
        logs.append(z)
    m = max(logs)
    if m == -math.inf:
        return 0.0
    total = m + math.log(sum(math.exp(z - m) for z in logs))
    try:
        return math.exp(total)
    except OverflowError:
        return math.inf


def check_feasible(gp: GeometricProgram, x: Mapping, tol: float = 1e-8) -> bool:
    """True iff every inequality is <= 1 + tol and every equality within tol of 1."""
    for posy in gp.ineq_constraints:
        if evaluate_posynomial(posy, x) > 1.0 + tol:
            return False
    for term in gp.eq_constraints:
        value = evaluate_posynomial([term], x)
        if abs(value - 1.0) > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# convexification
# ---------------------------------------------------------------------------

@dataclass
class _Convexified:
    names: Tuple[Hashable, ...]
    c0: np.ndarray
    E0: np.ndarray
    cons: list            # list of (c, E) for nonempty inequality posynomials
    A: np.ndarray
    b: np.ndarray


def _convexify(gp: GeometricProgram) -> _Convexified:
    names = tuple(gp.vars)
    index = {v: j for j, v in enumerate(names)}
    N = len(names)

    def pack(terms: Sequence[LogMonomialTerm]):
        c = np.array([t.log_c for t in terms], dtype=float)
        E = np.zeros((len(terms), N))
        for r, t in enumerate(terms):
            for v, a in t.exponents.items():
                E[r, index[v]] = float(a)
        return c, E

    c0, E0 = pack(gp.objective)
    cons = [pack(posy) for posy in gp.ineq_constraints if posy]
    A = np.zeros((len(gp.eq_constraints), N))
    b = np.zeros(len(gp.eq_constraints))
    for r, term in enumerate(gp.eq_constraints):
        for v, a in term.exponents.items():
            A[r, index[v]] = float(a)
        b[r] = -term.log_c
    return _Convexified(names, c0, E0, cons, A, b)


def debug_dump(gp: GeometricProgram) -> dict:
    """The convexified problem data as plain lists, for external cross-checks."""
    conv = _convexify(gp)
    return {
        "vars": [str(v) for v in conv.names],
        "objective": {"log_c": conv.c0.tolist(), "exponents": conv.E0.tolist()},
        "inequalities": [
            {"log_c": c.tolist(), "exponents": E.tolist()} for c, E in conv.cons
        ],
        "equalities": {"rows": conv.A.tolist(), "rhs": conv.b.tolist()},
    }


# ---------------------------------------------------------------------------
# numerical pieces
# ---------------------------------------------------------------------------

def _lse(c: np.ndarray, E: np.ndarray, u: np.ndarray):
    """Value, softmax weights and per-term rows of log sum exp(c + E u)."""
    z = c + E @ u
    m = float(np.max(z))
    w = np.exp(z - m)
    s = float(np.sum(w))
    return m + math.log(s), w / s


def _lse_grad_hess(c: np.ndarray, E: np.ndarray, u: np.ndarray):
    value, p = _lse(c, E, u)
    g = E.T @ p
    H = (E.T * p) @ E - np.outer(g, g)
    return value, g, H


def _solve_newton(H: np.ndarray, g: np.ndarray) -> Optional[np.ndarray]:
    """Newton step -H^{-1} g, escalating ridge regularization until the step
    is finite and an actual descent direction (singular systems can "solve"
    to garbage without raising)."""
    dim = H.shape[0]
    reg = 0.0
    for _ in range(8):
        try:
            step = np.linalg.solve(H + reg * np.eye(dim), -g)
        except np.linalg.LinAlgError:
            step = None
        if step is not None and np.all(np.isfinite(step)) and -float(g @ step) > 0.0:
            return step
        reg = max(reg * 100.0, 1e-10 * (1.0 + abs(float(np.trace(H))) / max(dim, 1)))
    return None


def _cap_step(step: np.ndarray, cap: float):
    """Rescale over-long steps; regularized singular Newton systems can
    otherwise produce astronomically long (but correctly oriented) steps."""
    norm = float(np.linalg.norm(step))
    if norm > cap:
        return step * (cap / norm), True
    return step, False


def _null_space(A: np.ndarray, b: np.ndarray, tol: float = 1e-10):
    """Particular solution and null-space basis of A y = b; None if inconsistent."""
    U, s, Vt = np.linalg.svd(A, full_matrices=True)
    cutoff = tol * (s[0] if s.size else 1.0)
    rank = int(np.sum(s > cutoff))
    y0 = Vt[:rank].T @ ((U[:, :rank].T @ b) / s[:rank]) if rank else np.zeros(A.shape[1])
    residual = float(np.max(np.abs(A @ y0 - b))) if A.size else float(np.max(np.abs(b), initial=0.0))
    if residual > 1e-8 * (1.0 + float(np.max(np.abs(b), initial=0.0))):
        return None, None
    Z = Vt[rank:].T
    return y0, Z


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

_STRICT_MARGIN = 1e-10  # how far inside the inequalities phase II requires
_CENTER_TOL = 1e-10     # Newton-decrement^2 / 2 threshold per centering


class _IterationBudget(Exception):
    pass


class _Counter:
    def __init__(self, limit: int):
        self.count = 0
        self.limit = limit

    def tick(self) -> None:
        self.count += 1
        if self.count > self.limit:
            raise _IterationBudget()


def _phase1(cons, k: int, opts: SolverOptions, counter: _Counter):
    """Minimize the slack s over lse_i(u) <= s; returns (u, max_violation)."""
    u = np.zeros(k)

    def max_violation(uu):
        return max(_lse(c, E, uu)[0] for c, E in cons)

    viol = max_violation(u)
    if viol <= -1e-6:
        return u, viol
    s = viol + 1.0
    t = 1.0
    m = len(cons)
    for _ in range(64):
        cap = 10.0 * (1.0 + float(np.linalg.norm(u)) + abs(s))
        for _ in range(60):
            counter.tick()
            vals, grads, hesses = [], [], []
            for c, E in cons:
                v, g, H = _lse_grad_hess(c, E, u)
                vals.append(v)
                grads.append(g)
                hesses.append(H)
            gaps = np.array([s - v for v in vals])
            r = 1.0 / gaps
            grad_u = sum(ri * gi for ri, gi in zip(r, grads))
            grad_s = t - float(np.sum(r))
            H_uu = sum(ri * ri * np.outer(gi, gi) + ri * Hi for ri, gi, Hi in zip(r, grads, hesses))
            H_us = -sum(ri * ri * gi for ri, gi in zip(r, grads))
            H_ss = float(np.sum(r * r))
            if k:
                H = np.block([[H_uu, H_us.reshape(-1, 1)], [H_us.reshape(1, -1), np.array([[H_ss]])]])
                grad = np.concatenate([grad_u, [grad_s]])
            else:
                H = np.array([[H_ss]])
                grad = np.array([grad_s])
            step = _solve_newton(H, grad)
            if step is None:
                break
            if -float(grad @ step) / 2.0 <= _CENTER_TOL:
                break
            step, capped = _cap_step(step, cap)
            decrement = -float(grad @ step)
            phi0 = t * s - float(np.sum(np.log(gaps)))
            alpha = 1.0
            du, ds = (step[:k], step[k]) if k else (np.zeros(0), step[0])
            accepted = False
            while alpha > 1e-14:
                u_new, s_new = u + alpha * du, s + alpha * ds
                new_vals = [_lse(c, E, u_new)[0] for c, E in cons]
                if all(s_new - v > 0 for v in new_vals):
                    phi_new = t * s_new - sum(math.log(s_new - v) for v in new_vals)
                    if phi_new <= phi0 - 0.25 * alpha * decrement:
                        u, s = u_new, s_new
                        accepted = True
                        break
                alpha *= 0.5
            if not accepted:
                break
            if capped and alpha == 1.0:
                cap *= 4.0
            viol = max(new_vals)
            if viol <= -1e-6:
                return u, viol
        if m / t <= 1e-10:
            break
        t *= opts.barrier_growth
    return u, max_violation(u)


def _phase2(obj, cons, u: np.ndarray, opts: SolverOptions, counter: _Counter):
    """Barrier path-following; returns (u, kkt_residual, status)."""
    c0, E0 = obj
    k = u.size
    m = len(cons)
    unbounded_level = -1.0 / opts.tol_gap

    if m == 0:
        cap = 10.0 * (1.0 + float(np.linalg.norm(u)))
        for _ in range(opts.max_iters):
            counter.tick()
            value, g, H = _lse_grad_hess(c0, E0, u)
            if value < unbounded_level:
                return u, 0.0, GpStatus.Unbounded
            step = _solve_newton(H, g)
            if step is None:
                break
            if -float(g @ step) / 2.0 <= 1e-13:
                break
            step, capped = _cap_step(step, cap)
            decrement = -float(g @ step)
            alpha = 1.0
            accepted = False
            while alpha > 1e-14:
                u_new = u + alpha * step
                if _lse(c0, E0, u_new)[0] <= value - 0.25 * alpha * decrement:
                    u = u_new
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                break
            if capped and alpha == 1.0:
                cap *= 4.0
        value, g, _ = _lse_grad_hess(c0, E0, u)
        if value < unbounded_level:
            return u, 0.0, GpStatus.Unbounded
        return u, float(np.max(np.abs(g), initial=0.0)), GpStatus.Optimal

    t = opts.t_init
    for _ in range(200):
        cap = 10.0 * (1.0 + float(np.linalg.norm(u)))
        for _ in range(60):
            counter.tick()
            f0, g0, H0 = _lse_grad_hess(c0, E0, u)
            if f0 < unbounded_level:
                return u, 0.0, GpStatus.Unbounded
            vals, grads, hesses = [], [], []
            for c, E in cons:
                v, g, H = _lse_grad_hess(c, E, u)
                vals.append(v)
                grads.append(g)
                hesses.append(H)
            neg = np.array([-v for v in vals])
            grad = t * g0 + sum(gi / ngi for gi, ngi in zip(grads, neg))
            H = t * H0 + sum(
                np.outer(gi, gi) / (ngi * ngi) + Hi / ngi
                for gi, Hi, ngi in zip(grads, hesses, neg)
            )
            step = _solve_newton(H, grad)
            if step is None:
                break
            if -float(grad @ step) / 2.0 <= _CENTER_TOL:
                break
            step, capped = _cap_step(step, cap)
            decrement = -float(grad @ step)
            phi0 = t * f0 - float(np.sum(np.log(neg)))
            alpha = 1.0
            accepted = False
            while alpha > 1e-14:
                u_new = u + alpha * step
                new_vals = [_lse(c, E, u_new)[0] for c, E in cons]
                if all(v < 0 for v in new_vals):
                    phi_new = t * _lse(c0, E0, u_new)[0] - sum(math.log(-v) for v in new_vals)
                    if phi_new <= phi0 - 0.25 * alpha * decrement:
                        u = u_new
                        accepted = True
                        break
                alpha *= 0.5
            if not accepted:
                break
            if capped and alpha == 1.0:
                cap *= 4.0
        if m / t <= opts.tol_gap:
            break
        t *= opts.barrier_growth

    _, g0, _ = _lse_grad_hess(c0, E0, u)
    dual = g0.copy()
    for c, E in cons:
        v, g = _lse(c, E, u)[0], _lse_grad_hess(c, E, u)[1]
        dual += g / (t * (-v))
    return u, float(np.max(np.abs(dual), initial=0.0)), GpStatus.Optimal


def solve(gp: GeometricProgram, opts: Optional[SolverOptions] = None) -> GpSolution:
    """Solve the program; see GpStatus for the possible outcomes.

    ConstantObjective is returned for the empty-objective program once
    feasibility is confirmed (its optimum is 0, the empty posynomial).
    """
    opts = opts or SolverOptions()
    conv = _convexify(gp)
    N = len(conv.names)

    def finish(status, optimum, y=None, iters=0, kkt=0.0, detail=""):
        point = {}
        if y is not None:
            point = {v: math.exp(float(yv)) for v, yv in zip(conv.names, y)}
        return GpSolution(status, optimum, point, iters, kkt, detail)

    # equality elimination
    if conv.A.shape[0]:
        y0, Z = _null_space(conv.A, conv.b)
        if y0 is None:
            return finish(GpStatus.Infeasible, math.inf, detail="inconsistent equality constraints")
    else:
        y0, Z = np.zeros(N), np.eye(N)
    k = Z.shape[1]

    red_obj = (conv.c0 + conv.E0 @ y0, conv.E0 @ Z)
    red_cons = [(c + E @ y0, E @ Z) for c, E in conv.cons]
    counter = _Counter(2 * opts.max_iters)

    # phase I
    u = np.zeros(k)
    if red_cons:
        try:
            u, viol = _phase1(red_cons, k, opts, counter)
        except _IterationBudget:
            return finish(GpStatus.NumericalFailure, math.nan, iters=counter.count,
                          detail="phase I exceeded the iteration budget")
        if viol > opts.tol_feas:
            return finish(GpStatus.Infeasible, math.inf, iters=counter.count,
                          detail=f"phase I slack {viol:.3e}")
        if viol > -_STRICT_MARGIN and not gp.is_constant_objective:
            return finish(GpStatus.Infeasible, math.inf, iters=counter.count,
                          detail="feasible set has empty interior")

    if gp.is_constant_objective:
        return finish(GpStatus.ConstantObjective, 0.0, y0 + Z @ u, counter.count)

    # phase II
    try:
        u, kkt, status = _phase2(red_obj, red_cons, u, opts, counter)
    except _IterationBudget:
        return finish(GpStatus.NumericalFailure, math.nan, y0 + Z @ u, counter.count,
                      detail="phase II exceeded the iteration budget")
    y = y0 + Z @ u
    if status is GpStatus.Unbounded:
        return finish(GpStatus.Unbounded, 0.0, y, counter.count,
                      detail="objective unbounded below in the log domain")
    f0 = _lse(red_obj[0], red_obj[1], u)[0]
    if not math.isfinite(f0):
        return finish(GpStatus.NumericalFailure, math.nan, y, counter.count,
                      detail="non-finite objective value")
    try:
        optimum = math.exp(f0)
    except OverflowError:
        optimum = math.inf
    return finish(GpStatus.Optimal, optimum, y, counter.count, kkt)
