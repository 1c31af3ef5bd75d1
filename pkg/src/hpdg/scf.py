"""Self-consistent field loop for the discrete nonlinear eigenvalue problem.

Each sweep freezes the nonlinearity at the current iterate, solves the linear
eigenproblem (A_sip + N(u_k), M), aligns the sign of the new eigenvector with
the old iterate, damps, renormalizes, and evaluates the self-consistency
residual |<(A(u) - lambda) u, u>| with the nonlinearity reassembled at the new
state.  The residual of the frozen linearization is identically zero, so this
is the only reading under which the stopping rule bites.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import PenaltyConfig, Potential, SipAssembler
from .eigsolve import smallest_eigenpair
from .hpspace import DiscreteField, HpSpace, constant_field


@dataclass
class ScfConfig:
    eps_tol: float = 1e-10
    max_iter: int = 100
    theta: float = 1.0  # damping; 1.0 is the plain fixed point
    delta: int | None = 3  # nonlinearity exponent; None solves the linear problem
    nonlinear_scale: float = 1.0  # test hook scaling the nonlinear coupling
    eig_tol: float | None = None  # default: min(1e-10, eps_tol / 10)

    def __post_init__(self):
        if self.eps_tol <= 0:
            raise ValueError(f"eps_tol must be positive, got {self.eps_tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not (0.0 < self.theta <= 1.0):
            raise ValueError(f"theta must lie in (0, 1], got {self.theta}")


@dataclass
class ScfReport:
    lam: float
    iterations: int
    residuals: list = field(default_factory=list)
    lambdas: list = field(default_factory=list)
    alignments: list = field(default_factory=list)  # (u_{k+1}, u_k)_M per sweep
    converged: bool = False


def discrete_energy(space: HpSpace, potential: Potential, penalty: PenaltyConfig,
                    u: DiscreteField, delta: int | None) -> float:
    """Debug hook: the discrete energy 1/2 a(u,u) + 1/(delta+1) int |u|^(delta+1).

    At the ground state this equals lambda/2 - (1/2 - 1/(delta+1)) times the
    nonlinear integral.
    """
    from .quadrature import element_rule
    from .hpspace import basis_matrix

    asm = SipAssembler(space, potential, penalty)
    a = asm.sip()
    val = 0.5 * float(u.coeffs @ (a @ u.coeffs))
    if delta is not None:
        nl = 0.0
        for e in space.mesh.elements:
            p = int(space.degrees[e.id])
            rule = element_rule(e, p + 4)
            phi = basis_matrix(e, p, rule.points)
            nl += float(rule.weights @ np.abs(phi @ u.local(e.id)) ** (delta + 1))
        val += nl / (delta + 1)
    return val


def solve_ground_state(space: HpSpace, potential: Potential,
                       penalty: PenaltyConfig, cfg: ScfConfig,
                       u0: DiscreteField | None = None, log=None):
    """Ground state of the (non)linear problem on the given hp space.

    Returns ``(u, report)``; non-convergence is reported through the
    ``converged`` flag, with the last iterate returned.  ``log`` may be a
    callable receiving one "k lambda residual" line per sweep.
    """
    asm = SipAssembler(space, potential, penalty)
    a_sip = asm.sip()
    m = asm.mass()
    eig_tol = cfg.eig_tol if cfg.eig_tol is not None else min(1e-10, cfg.eps_tol / 10.0)

    def m_normalize(c):
        return c / np.sqrt(c @ (m @ c))

    cold = u0 is None
    if cold:
        coeffs = m_normalize(constant_field(space, 1.0).coeffs)
    else:
        coeffs = m_normalize(np.asarray(u0.coeffs, dtype=float).copy())
    u = DiscreteField(space, coeffs)

    report = ScfReport(lam=np.nan, iterations=0)

    if cfg.delta is None:
        res = smallest_eigenpair(a_sip, m, tol=eig_tol, x0=u.coeffs,
                                 orient=u.coeffs, cold=cold)
        u = DiscreteField(space, res.x)
        resid = abs(float(u.coeffs @ (a_sip @ u.coeffs)) - res.lam)
        report.lam = float(u.coeffs @ (a_sip @ u.coeffs))
        report.iterations = 1
        report.residuals.append(resid)
        report.lambdas.append(res.lam)
        report.alignments.append(abs(float(u.coeffs @ (m @ u.coeffs))))
        report.converged = resid <= cfg.eps_tol
        if log is not None:
            log(f"1 {report.lam!r} {resid!r}")
        return u, report

    n_mat = asm.nonlinear_mass(u, cfg.delta, cfg.nonlinear_scale)
    lam_prev = None
    for k in range(1, cfg.max_iter + 1):
        a_k = a_sip + n_mat
        shift = None if lam_prev is None else lam_prev - 1.0
        eig = smallest_eigenpair(a_k, m, tol=eig_tol, x0=u.coeffs, shift=shift,
                                 orient=u.coeffs, cold=(cold and k == 1))
        lam_prev = eig.lam
        new = m_normalize((1.0 - cfg.theta) * u.coeffs + cfg.theta * eig.x)
        align = float(new @ (m @ u.coeffs))
        u = DiscreteField(space, new)
        n_mat = asm.nonlinear_mass(u, cfg.delta, cfg.nonlinear_scale)
        rayleigh = float(new @ ((a_sip + n_mat) @ new))
        resid = abs(rayleigh - eig.lam * float(new @ (m @ new)))
        report.iterations = k
        report.residuals.append(resid)
        report.lambdas.append(eig.lam)
        report.alignments.append(align)
        if log is not None:
            log(f"{k} {eig.lam!r} {resid!r}")
        if resid <= cfg.eps_tol:
            report.lam = rayleigh
            report.converged = True
            return u, report
    report.lam = float(u.coeffs @ ((a_sip + n_mat) @ u.coeffs))
    report.converged = False
    return u, report
