"""Full-Newton AC power flow used as the validation oracle.

Works on the standard (non-adjusted) admittance matrices only; nothing from
the linear model is reused here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .admittance import AdmittanceSet, build_matrices
from .netmodel import NetworkCase

TOL = 1e-8
MAX_ITER = 50
LIMIT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PfSolution:
    v: np.ndarray
    theta: np.ndarray
    p_f: np.ndarray
    q_f: np.ndarray
    p_t: np.ndarray
    q_t: np.ndarray
    slack_p: float
    slack_q: float
    converged: bool
    iterations: int
    max_mismatch: float

    @property
    def losses(self) -> complex:
        return complex(np.sum(self.p_f + self.p_t), np.sum(self.q_f + self.q_t))


@dataclass(frozen=True)
class Violation:
    kind: str  # v_max | v_min | rating
    index: int  # bus position or branch position in case.branches
    value: float
    limit: float

    @property
    def margin(self) -> float:
        return abs(self.value - self.limit)


def _jacobian(Y: np.ndarray, V: np.ndarray, pq: np.ndarray) -> np.ndarray:
    I = Y @ V
    Vn = V / np.abs(V)
    dS_dVm = V[:, None] * np.conj(Y * Vn[None, :]) + np.diag(np.conj(I) * Vn)
    dS_dVa = 1j * V[:, None] * np.conj(np.diag(I) - Y * V[None, :])
    sub = np.ix_(pq, pq)
    return np.block([
        [dS_dVa[sub].real, dS_dVm[sub].real],
        [dS_dVa[sub].imag, dS_dVm[sub].imag],
    ])


def solve_pf(case: NetworkCase, p_inj, q_inj, v0: float | None = None,
             adm: AdmittanceSet | None = None, tol: float = TOL,
             max_iter: int = MAX_ITER) -> PfSolution:
    """Solve the AC power flow for net non-slack injections ``p_inj, q_inj``.

    Starts flat (v=1, theta=0) with the slack held at ``v0`` (default: the
    slack set-point). Non-convergence is reported through ``converged``,
    never raised.
    """
    adm = build_matrices(case) if adm is None else adm
    Y = adm.Y_b
    n = case.n_buses
    slack = case.slack_index
    v0 = case.v0 if v0 is None else v0
    pq = np.delete(np.arange(n), slack)
    S_spec = np.asarray(p_inj, float) + 1j * np.asarray(q_inj, float)
    if S_spec.shape != (n - 1,):
        raise ValueError(f"expected {n - 1} non-slack injections, got {S_spec.shape}")

    Vm = np.ones(n)
    Va = np.zeros(n)
    Vm[slack] = v0
    V = Vm * np.exp(1j * Va)
    m = n - 1
    it = 0
    converged = False
    while True:
        S = V * np.conj(Y @ V)
        mis = S[pq] - S_spec
        F = np.concatenate([mis.real, mis.imag])
        err = float(np.max(np.abs(F))) if m else 0.0
        if not np.isfinite(err):
            break
        if err < tol:
            converged = True
            break
        if it >= max_iter or err > 1e6:
            break
        J = _jacobian(Y, V, pq)
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        it += 1
        Va[pq] += dx[:m]
        Vm[pq] += dx[m:]
        if np.any(Vm[pq] <= 0):
            break
        V = Vm * np.exp(1j * Va)

    S_f = (adm.C_f @ V) * np.conj(adm.Y_f @ V)
    S_t = (adm.C_t @ V) * np.conj(adm.Y_t @ V)
    S_slack = V[slack] * np.conj(Y[slack] @ V)
    return PfSolution(
        v=np.abs(V),
        theta=np.angle(V),
        p_f=S_f.real,
        q_f=S_f.imag,
        p_t=S_t.real,
        q_t=S_t.imag,
        slack_p=float(S_slack.real),
        slack_q=float(S_slack.imag),
        converged=converged,
        iterations=it,
        max_mismatch=err,
    )


def check_limits(sol: PfSolution, case: NetworkCase, adm: AdmittanceSet | None = None,
                 tol: float = LIMIT_TOL) -> list[Violation]:
    """Voltage-band and apparent-power violations of a converged solution.

    Ratings are checked as true circles at both branch ends. Values exactly
    on a limit are feasible.
    """
    out: list[Violation] = []
    for k, bus in enumerate(case.buses):
        v = float(sol.v[k])
        if v > bus.v_max + tol:
            out.append(Violation("v_max", k, v, bus.v_max))
        elif v < bus.v_min - tol:
            out.append(Violation("v_min", k, v, bus.v_min))
    rows = adm.branch_index if adm is not None else \
        tuple(k for k, br in enumerate(case.branches) if br.status)
    s_from = np.hypot(sol.p_f, sol.q_f)
    s_to = np.hypot(sol.p_t, sol.q_t)
    for i, k in enumerate(rows):
        s = case.branches[k].s_rating
        if s > 0:
            worst = float(max(s_from[i], s_to[i]))
            if worst > s + tol:
                out.append(Violation("rating", k, worst, s))
    return out
