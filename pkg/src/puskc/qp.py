"""Dense convex quadratic programming with linear inequality constraints.

Solves ``min 1/2 x'Qx + c'x  s.t.  Ax <= b`` with a primal-dual
interior-point method (Mehrotra predictor-corrector) on the slack form
``Ax + s = b, s >= 0``.  Q may be positive semidefinite with a nontrivial
null space; the per-iteration normal matrix gets a tiny diagonal jitter on
unregularized coordinates inside the factorization only.  Problem sizes of
interest are small and dense (n up to a few hundred), so every linear solve
is a direct factorization.

``assemble_pu_qp`` builds the training program of the PU set-kernel
classifier: variables ``[alpha (M); beta (1); xi (N_U)]`` where the slack
block xi majorizes the double hinge loss on unlabeled bags.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .errors import DataError, NumericalError

OPTIMAL = "optimal"
MAX_ITER = "max_iter"
INFEASIBLE = "infeasible"

_BASE_JITTER = 1e-10
_MAX_JITTER = 1e-4


@dataclass(frozen=True, eq=False)
class QpProblem:
    Q: np.ndarray  # (n, n) symmetric PSD
    c: np.ndarray  # (n,)
    A: np.ndarray  # (m, n); rows encode A x <= b
    b: np.ndarray  # (m,)

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        c = np.asarray(self.c, dtype=float).ravel()
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float).ravel()
        n = c.shape[0]
        if Q.shape != (n, n):
            raise DataError(f"Q must be ({n}, {n}), got {Q.shape}")
        if A.size == 0:
            A = A.reshape(0, n)
        if A.ndim != 2 or A.shape[1] != n:
            raise DataError(f"A must have {n} columns, got shape {A.shape}")
        if b.shape[0] != A.shape[0]:
            raise DataError(f"b length {b.shape[0]} does not match {A.shape[0]} rows")
        if not np.allclose(Q, Q.T, atol=1e-12, rtol=0.0):
            raise DataError("Q must be symmetric within 1e-12")
        for arr in (Q, c, A, b):
            arr.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[0]

    def objective(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x + self.c @ x)


@dataclass(frozen=True, eq=False)
class QpSolution:
    x: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    status: str


def _kkt_residual(p: QpProblem, x: np.ndarray, z: np.ndarray) -> float:
    """Max violation of stationarity, primal feasibility, and complementarity."""
    stationarity = np.abs(p.Q @ x + p.c + p.A.T @ z).max() if p.n else 0.0
    if p.m == 0:
        return float(stationarity)
    slack = p.b - p.A @ x
    primal = max(0.0, float((-slack).max()))
    complementarity = float(np.abs(z * slack).max())
    return float(max(stationarity, primal, complementarity))


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    """Largest step in (0, 1] keeping v + step*dv strictly positive."""
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-v[neg] / dv[neg])))


def _factor_normal(M: np.ndarray, jitter_mask: np.ndarray):
    """Cholesky of the normal matrix with escalating jitter on flagged coords."""
    jitter = _BASE_JITTER
    while jitter <= _MAX_JITTER:
        try:
            return cho_factor(M + np.diag(jitter * jitter_mask), lower=True)
        except LinAlgError:
            jitter *= 100.0
    return None


def _solve_unconstrained(p: QpProblem, tol: float) -> QpSolution:
    x, *_ = np.linalg.lstsq(p.Q, -p.c, rcond=None)
    residual = float(np.abs(p.Q @ x + p.c).max()) if p.n else 0.0
    if residual > max(tol, 1e-8 * (1.0 + np.abs(p.c).max(initial=0.0))):
        raise NumericalError("unconstrained QP is unbounded below (inconsistent gradient)")
    return QpSolution(
        x=x,
        objective=p.objective(x),
        kkt_residual=residual,
        iterations=0,
        status=OPTIMAL,
    )


def solve(p: QpProblem, tol: float = 1e-8, max_iter: int = 100) -> QpSolution:
    """Solve the QP to KKT residual `tol`, or report the best iterate found."""
    if p.m == 0:
        return _solve_unconstrained(p, tol)

    n, m = p.n, p.m
    jitter_mask = (np.diag(p.Q) == 0.0).astype(float)

    x = np.zeros(n)
    s = np.clip(p.b - p.A @ x, 1.0, None)
    z = np.ones(m)

    best_x, best_z = x.copy(), z.copy()
    best_res = _kkt_residual(p, x, z)

    status = MAX_ITER
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        r_dual = p.Q @ x + p.c + p.A.T @ z
        r_primal = p.A @ x + s - p.b
        mu = float(s @ z) / m

        d = z / s
        M = p.Q + (p.A.T * d) @ p.A
        factor = _factor_normal(M, jitter_mask)

        def newton(r_comp):
            rhs = -r_dual + p.A.T @ ((r_comp - z * r_primal) / s)
            if factor is not None:
                dx = cho_solve(factor, rhs)
            else:
                dx, *_ = np.linalg.lstsq(M, rhs, rcond=None)
            ds = -r_primal - p.A @ dx
            dz = (-r_comp - z * ds) / s
            return dx, ds, dz

        # predictor
        dx_a, ds_a, dz_a = newton(s * z)
        alpha_p = _max_step(s, ds_a)
        alpha_d = _max_step(z, dz_a)
        mu_affine = float((s + alpha_p * ds_a) @ (z + alpha_d * dz_a)) / m
        sigma = (max(mu_affine, 0.0) / mu) ** 3 if mu > 0 else 0.0

        # corrector
        dx, ds, dz = newton(s * z + ds_a * dz_a - sigma * mu)
        alpha_p = min(1.0, 0.995 * _max_step(s, ds))
        alpha_d = min(1.0, 0.995 * _max_step(z, dz))
        x = x + alpha_p * dx
        s = s + alpha_p * ds
        z = z + alpha_d * dz

        res = _kkt_residual(p, x, z)
        if res < best_res:
            best_res = res
            best_x, best_z = x.copy(), z.copy()
        if res <= tol:
            status = OPTIMAL
            break

        primal_inf = max(0.0, float((p.A @ x - p.b).max()))
        if np.abs(z).max() > 1e12 and primal_inf > np.sqrt(tol):
            status = INFEASIBLE
            break

    x, z = best_x, best_z
    res = best_res
    if res <= tol:
        status = OPTIMAL
    return QpSolution(
        x=x,
        objective=p.objective(x),
        kkt_residual=res,
        iterations=iterations,
        status=status,
    )


def assemble_pu_qp(
    phi_pos: np.ndarray, phi_unl: np.ndarray, pi: float, lam: float
) -> QpProblem:
    """Training program of the PU set-kernel classifier.

    Variables are ``x = [alpha (M); beta; xi (N_U)]``; the three constraint
    groups force each xi to sit above the double hinge of the corresponding
    unlabeled score, so at the optimum the linear xi term equals the mean
    unlabeled loss.
    """
    phi_pos = np.atleast_2d(np.asarray(phi_pos, dtype=float))
    phi_unl = np.atleast_2d(np.asarray(phi_unl, dtype=float))
    if phi_pos.shape[1] != phi_unl.shape[1]:
        raise DataError("positive and unlabeled basis widths differ")
    if not 0.0 < pi < 1.0:
        raise DataError(f"class prior must lie in (0, 1), got {pi}")
    if lam < 0:
        raise DataError("lambda must be non-negative")

    n_pos, width = phi_pos.shape
    n_unl = phi_unl.shape[0]
    n = width + 1 + n_unl

    Q = np.zeros((n, n))
    Q[:width, :width] = lam * np.eye(width)

    c = np.concatenate(
        [
            -(pi / n_pos) * phi_pos.sum(axis=0),
            [-pi],
            np.full(n_unl, 1.0 / n_unl),
        ]
    )

    ones = np.ones((n_unl, 1))
    eye = np.eye(n_unl)
    zeros = np.zeros((n_unl, width))
    A = np.vstack(
        [
            np.hstack([zeros, 0.0 * ones, -eye]),  # xi >= 0
            np.hstack([0.5 * phi_unl, 0.5 * ones, -eye]),  # xi >= (1 + g)/2
            np.hstack([phi_unl, ones, -eye]),  # xi >= g
        ]
    )
    b = np.concatenate([np.zeros(n_unl), np.full(n_unl, -0.5), np.zeros(n_unl)])
    return QpProblem(Q=Q, c=c, A=A, b=b)
