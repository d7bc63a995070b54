"""Numerical stability certificates for the tracking loop.

Solves the 2x2 Lyapunov equations behind both stability arguments,
evaluates the disturbance-margin coefficient kappa, the coupled-system
matrix Q and its positivity threshold, the ISS bound constants, and fits
the affine disturbance envelope from logged residual samples. Everything
here is 2x2 (or 4x4 block-diagonal assembly) and solved by a 3-unknown
linear system; no general Lyapunov machinery.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .sim import rk4_step

LYAP_RESIDUAL_TOL = 1e-10

B = np.array([0.0, 1.0])


def controller_matrices(a: float, b: float, eps0: float
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Closed-loop matrix F and its eps0-scaled companion F0."""
    F = np.array([[0.0, 1.0], [-a / eps0 ** 2, -b / eps0]])
    F0 = np.array([[0.0, 1.0], [-a, -b]])
    return F, F0


def observer_matrix(l1: float, l2: float) -> np.ndarray:
    return np.array([[-l1, 1.0], [-l2, 0.0]])


def solve_lyapunov_2x2(A: np.ndarray) -> np.ndarray:
    """Positive-definite P with P A + A^T P = -I for a Hurwitz 2x2 A.

    Solved as a 3-unknown linear system in (p11, p12, p22).
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (2, 2):
        raise ValueError("A must be 2x2")
    tr = A[0, 0] + A[1, 1]
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if tr >= 0.0:
        raise ValueError(f"A is not Hurwitz: trace = {tr:.6g} >= 0")
    if det <= 0.0:
        raise ValueError(f"A is not Hurwitz: det = {det:.6g} <= 0")
    # unknowns x = (p11, p12, p22); equations from entries (11), (12), (22)
    M = np.array([
        [2.0 * A[0, 0], 2.0 * A[1, 0], 0.0],
        [A[0, 1], A[0, 0] + A[1, 1], A[1, 0]],
        [0.0, 2.0 * A[0, 1], 2.0 * A[1, 1]],
    ])
    p11, p12, p22 = np.linalg.solve(M, [-1.0, 0.0, -1.0])
    P = np.array([[p11, p12], [p12, p22]])
    resid = np.max(np.abs(P @ A + A.T @ P + np.eye(2)))
    if resid > LYAP_RESIDUAL_TOL:
        raise ArithmeticError(f"Lyapunov residual {resid:.3e} too large")
    return P


def kappa_of(eps0: float, P0: np.ndarray, l: float) -> float:
    """Disturbance-margin coefficient 1/eps0 - 1 - 2 eps0 ||P0 B|| l."""
    if eps0 <= 0.0:
        raise ValueError("eps0 must be positive")
    if l < 0.0:
        raise ValueError("l must be nonnegative")
    return 1.0 / eps0 - 1.0 - 2.0 * eps0 * float(np.linalg.norm(P0 @ B)) * l


def alpha_of(b: float, eps0: float, l: float, P0: np.ndarray,
             P: np.ndarray) -> float:
    """Cross-coupling coefficient between the tracking and observer-error
    subsystems."""
    return (b / eps0 * float(np.linalg.norm(P0 @ B))
            + eps0 * l * float(np.linalg.norm(P @ B)))


class CertificationFailure(RuntimeError):
    pass


def q_matrix(kappa: float, alpha: float, eps: float) -> np.ndarray:
    return np.array([[kappa, -alpha], [-alpha, 1.0 / eps - 1.0]])


def q_and_eps_star(kappa: float, alpha: float) -> float:
    """Largest eps keeping Q positive definite: 1 / (1 + alpha^2/kappa).

    Follows from det Q > 0 with kappa > 0; kappa <= 0 means no eps works.
    """
    if kappa <= 0.0:
        raise CertificationFailure(
            f"kappa = {kappa:.6g} <= 0: no observer speed certifies the "
            "coupled system")
    return 1.0 / (1.0 + alpha * alpha / kappa)


def spectral_norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2))


@dataclass
class IssConstants:
    lambda1: float
    lambda2: float
    lambda3: float
    C0: float = math.nan


def theorem1_constants(P0: np.ndarray, kappa: float) -> IssConstants:
    """Decay / gain / overshoot constants of the state-feedback bound."""
    eigs = np.linalg.eigvalsh(P0)
    lam_min, lam_max = float(eigs[0]), float(eigs[-1])
    return IssConstants(
        lambda1=kappa / lam_max,
        lambda2=spectral_norm(P0) ** 2 / lam_min,   # ||B|| = 1
        lambda3=lam_max / lam_min,
    )


def theorem2_constants(P0: np.ndarray, P: np.ndarray, kappa: float,
                       alpha: float, eps: float) -> IssConstants:
    """Constants of the combined tracking + observer bound, with the
    composite weight taken as block-diag(P0, P) so it sandwiches the
    composite Lyapunov function."""
    Q = q_matrix(kappa, alpha, eps)
    Pp = np.block([[P0, np.zeros((2, 2))], [np.zeros((2, 2)), P]])
    eigs = np.linalg.eigvalsh(Pp)
    lam_min, lam_max = float(eigs[0]), float(eigs[-1])
    q_min = float(np.linalg.eigvalsh(Q)[0])
    return IssConstants(
        lambda1=q_min / lam_max,
        lambda2=lam_max / lam_min,
        lambda3=lam_min,
        C0=(spectral_norm(P0) ** 2 + spectral_norm(P) ** 2),
    )


def estimate_delta_bound(delta_samples: np.ndarray, x1_samples: np.ndarray,
                         n_grid: int = 201) -> tuple[float, float]:
    """Fit minimal (l, d) with |Delta_i| <= l |x1_i| + d for all samples.

    Scans l over a grid, takes d = max(|Delta_i| - l |x1_i|), and keeps
    the pair minimizing the area under the envelope over the sampled
    |x1| range (ties broken toward smaller l).
    """
    dl = np.abs(np.asarray(delta_samples, dtype=float))
    x1 = np.abs(np.asarray(x1_samples, dtype=float))
    if dl.size == 0 or dl.size != x1.size:
        raise ValueError("need matching, non-empty sample arrays")
    if np.all(dl == 0.0):
        return 0.0, 0.0
    X = float(np.max(x1))
    l_hi = float(np.max(dl)) / X if X > 0.0 else 0.0
    best = None
    for l in np.linspace(0.0, l_hi, n_grid):
        d = float(np.max(dl - l * x1))
        d = max(d, 0.0)
        area = 0.5 * l * X * X + d * X if X > 0.0 else d
        if best is None or area < best[0] - 1e-15 * max(1.0, best[0]):
            best = (area, float(l), d)
    return best[1], best[2]


def verify_linear_iss_bound(F: np.ndarray, d: float, x0: np.ndarray,
                            eps0: float, P0: np.ndarray,
                            horizon: float = 100.0, dt: float = 0.01
                            ) -> tuple[bool, float, np.ndarray]:
    """Simulate xdot = F x + B d and check the ISS envelope pointwise.

    With a positive decay rate the envelope is the simplified
    sqrt-lambda3 exponential-plus-offset form; when the certificate
    degenerates (kappa <= 0, so the fitted rate is negative) the exact
    pre-simplification envelope is used, with the rate taken against
    lambda_min so the comparison stays a true bound. Returns
    (pass, worst margin, margin history); margin = bound - ||x||.
    """
    F = np.asarray(F, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if np.trace(F) >= 0.0 or np.linalg.det(F) <= 0.0:
        raise ValueError("F must be Hurwitz")
    kappa = kappa_of(eps0, P0, 0.0)
    eigs = np.linalg.eigvalsh(P0)
    lam_min, lam_max = float(eigs[0]), float(eigs[-1])
    lambda2 = spectral_norm(P0) ** 2 / lam_min
    lambda3 = lam_max / lam_min
    phi = np.diag([eps0, 1.0])
    phi_norm = max(eps0, 1.0)

    n = int(round(horizon / dt))
    ts = np.arange(n + 1) * dt
    xs = np.empty((n + 1, 2))
    xs[0] = x0
    rhs = lambda t, x: F @ x + B * d
    for k in range(n):
        xs[k + 1] = rk4_step(rhs, ts[k], xs[k], dt)
    norms = np.linalg.norm(xs, axis=1)

    if kappa > 0.0:
        lambda1 = kappa / lam_max
        bound = (math.sqrt(lambda3) * np.exp(-0.5 * lambda1 * ts)
                 * np.linalg.norm(x0)
                 + phi_norm * math.sqrt(lambda2 / lambda1) * d)
    else:
        lambda1 = kappa / lam_min          # valid decay rate for kappa <= 0
        z0 = np.linalg.solve(phi, x0)
        z0sq = float(z0 @ z0)
        if lambda1 == 0.0:
            growth = lambda2 * ts * d * d
        else:
            growth = (lambda2 / lambda1) * (1.0 - np.exp(-lambda1 * ts)) * d * d
        bound = phi_norm * np.sqrt(lambda3 * np.exp(-lambda1 * ts) * z0sq
                                   + growth)
    margin = bound - norms
    worst = float(np.min(margin))
    return worst >= -1e-9, worst, margin


@dataclass
class CertifyReport:
    """All certificate quantities for one gain set, JSON-serializable."""

    a: float
    b: float
    eps0: float
    l1: float
    l2: float
    eps: float
    l_est: float
    d_est: float
    P0: list
    P: list
    kappa: float
    alpha: float
    Q: Optional[list]
    eps1_star: Optional[float]
    theorem1: dict
    theorem2: Optional[dict]
    certified: bool
    notes: list = field(default_factory=list)

    def to_json(self, path=None) -> str:
        doc = json.dumps(self.__dict__, indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(doc + "\n")
        return doc


def build_report(a, b, eps0, l1, l2, eps, l_est=0.0, d_est=0.0
                 ) -> CertifyReport:
    """Solve every certificate quantity for one gain set.

    A non-positive kappa is reported as a failed certificate with the
    remaining constants still populated.
    """
    _, F0 = controller_matrices(a, b, eps0)
    A0 = observer_matrix(l1, l2)
    P0 = solve_lyapunov_2x2(F0)
    P = solve_lyapunov_2x2(A0)
    kappa = kappa_of(eps0, P0, l_est)
    alpha = alpha_of(b, eps0, l_est, P0, P)
    t1 = theorem1_constants(P0, kappa)
    t2 = theorem2_constants(P0, P, kappa, alpha, eps)
    notes = []
    try:
        eps1_star = q_and_eps_star(kappa, alpha)
        certified = eps < eps1_star
        if not certified:
            notes.append(f"observer eps = {eps} not below eps1* = "
                         f"{eps1_star:.6g}")
    except CertificationFailure as exc:
        eps1_star = None
        certified = False
        notes.append(str(exc))
    return CertifyReport(
        a=a, b=b, eps0=eps0, l1=l1, l2=l2, eps=eps,
        l_est=l_est, d_est=d_est,
        P0=P0.tolist(), P=P.tolist(), kappa=kappa, alpha=alpha,
        Q=q_matrix(kappa, alpha, eps).tolist(),
        eps1_star=eps1_star,
        theorem1=t1.__dict__, theorem2=t2.__dict__,
        certified=certified, notes=notes)
