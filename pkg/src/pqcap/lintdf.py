"""Lossless linear power flow and transfer distribution factors.

The linear model maps nodal injections ``[p; q]`` (slack excluded) to
voltage angles/magnitudes and to from-end branch flows::

    [theta; v] = [THETA_TDF; VTDF] @ [p; q] + [1*theta0; 1*v0]
    [p_f; q_f] = PTDF @ [p; q] + branch_offset

Injection vectors are stacked ``[p_1..p_{n-1}, q_1..q_{n-1}]`` over the
non-slack buses in case order.
"""

from __future__ import annotations

import csv
import io
import logging
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .admittance import AdmittanceSet, build_matrices
from .netmodel import NetworkCase

logger = logging.getLogger(__name__)

COND_WARN = 1e12


class SingularSystemError(np.linalg.LinAlgError):
    """The slack-reduced linear system cannot be inverted."""


@dataclass(frozen=True, eq=False)
class TdfSet:
    theta_tdf: np.ndarray
    v_tdf: np.ndarray
    ptdf: np.ndarray | None
    branch_offset: np.ndarray | None
    slack_index: int
    v0: float
    theta0: float = 0.0

    @property
    def n_buses(self) -> int:
        return self.theta_tdf.shape[0] + 1

    @property
    def n_branches(self) -> int:
        return 0 if self.ptdf is None else self.ptdf.shape[0] // 2

    @property
    def tdf(self) -> np.ndarray:
        return np.vstack([self.theta_tdf, self.v_tdf])

    def non_slack(self) -> np.ndarray:
        return np.delete(np.arange(self.n_buses), self.slack_index)


def _block(y_adj: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.block([[-y_adj.imag, y.real], [-y_adj.real, -y.imag]])


def build_linear_system(adm: AdmittanceSet) -> np.ndarray:
    """Full ``2n x 2n`` coefficient matrix acting on ``[theta; v]``."""
    return _block(adm.Y_b_adj, adm.Y_b)


def _reduced_columns(n: int, slack: int) -> np.ndarray:
    keep = np.delete(np.arange(n), slack)
    return np.concatenate([keep, keep + n])


def compute_tdfs(system: np.ndarray, slack_index: int, v0: float = 1.0,
                 theta0: float = 0.0) -> TdfSet:
    """Invert the slack-reduced linear system into THETA_TDF and VTDF.

    Raises
    ------
    SingularSystemError
        If the reduced matrix is singular, which signals a disconnected
        or degenerate network.
    """
    n = system.shape[0] // 2
    if n < 2:
        raise SingularSystemError("network needs at least one non-slack bus")
    keep = _reduced_columns(n, slack_index)
    reduced = system[np.ix_(keep, keep)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(reduced, check_finite=True)
    diag = np.abs(np.diag(lu))
    if diag.min() <= np.finfo(float).eps * max(diag.max(), 1.0) * reduced.shape[0]:
        raise SingularSystemError("slack-reduced linear power-flow matrix is singular")
    inv = scipy.linalg.lu_solve((lu, piv), np.eye(reduced.shape[0]))
    cond = np.linalg.norm(reduced, 1) * np.linalg.norm(inv, 1)
    if cond > COND_WARN:
        logger.warning("ill-conditioned linear power-flow system (cond ~ %.3g)", cond)
    m = n - 1
    return TdfSet(
        theta_tdf=inv[:m],
        v_tdf=inv[m:],
        ptdf=None,
        branch_offset=None,
        slack_index=slack_index,
        v0=v0,
        theta0=theta0,
    )


def compute_ptdf(tdf: TdfSet, adm: AdmittanceSet,
                 with_offset: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Extended PTDF and the constant branch flow at zero injections."""
    n = adm.n_buses
    if n != tdf.n_buses:
        raise ValueError(f"TDFs cover {tdf.n_buses} buses, admittances {n}")
    full = _block(adm.Y_f_adj, adm.Y_f)
    keep = _reduced_columns(n, tdf.slack_index)
    ptdf = full[:, keep] @ tdf.tdf
    if with_offset:
        x0 = np.concatenate([np.full(n, tdf.theta0), np.full(n, tdf.v0)])
        offset = full @ x0
    else:
        offset = np.zeros(full.shape[0])
    return ptdf, offset


def build_tdfs(case: NetworkCase, adm: AdmittanceSet | None = None,
               with_offset: bool = True) -> TdfSet:
    """Convenience pipeline: admittances -> linear system -> TDFs -> PTDF."""
    adm = build_matrices(case) if adm is None else adm
    base = compute_tdfs(build_linear_system(adm), case.slack_index, v0=case.v0)
    ptdf, offset = compute_ptdf(base, adm, with_offset=with_offset)
    return TdfSet(
        theta_tdf=base.theta_tdf,
        v_tdf=base.v_tdf,
        ptdf=ptdf,
        branch_offset=offset,
        slack_index=base.slack_index,
        v0=base.v0,
        theta0=base.theta0,
    )


def _injections(tdf: TdfSet, p, q) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    m = tdf.n_buses - 1
    if p.shape != (m,) or q.shape != (m,):
        raise ValueError(f"expected injection vectors of length {m}, got {p.shape} and {q.shape}")
    return np.concatenate([p, q])


def eval_voltages(tdf: TdfSet, p, q) -> tuple[np.ndarray, np.ndarray]:
    """Full-length ``(theta, v)`` for non-slack injections ``p, q``."""
    x = tdf.tdf @ _injections(tdf, p, q)
    m = tdf.n_buses - 1
    theta = np.insert(x[:m] + tdf.theta0, tdf.slack_index, tdf.theta0)
    v = np.insert(x[m:] + tdf.v0, tdf.slack_index, tdf.v0)
    return theta, v


def eval_branch_flows(tdf: TdfSet, p, q) -> tuple[np.ndarray, np.ndarray]:
    """Linearized from-end branch flows ``(p_f, q_f)``."""
    if tdf.ptdf is None:
        raise ValueError("TdfSet has no PTDF; build it with build_tdfs or compute_ptdf")
    flows = tdf.ptdf @ _injections(tdf, p, q) + tdf.branch_offset
    n_l = tdf.n_branches
    return flows[:n_l], flows[n_l:]


def tdf_tables(tdf: TdfSet) -> dict[str, str]:
    """CSV text of theta_tdf, v_tdf and ptdf (rows: bus or branch, columns: injections)."""
    ns = tdf.non_slack()
    header = ["row"] + [f"p{k}" for k in ns] + [f"q{k}" for k in ns]
    tables = [("theta_tdf", tdf.theta_tdf, [f"bus{k}" for k in ns]),
              ("v_tdf", tdf.v_tdf, [f"bus{k}" for k in ns])]
    if tdf.ptdf is not None:
        n_l = tdf.n_branches
        labels = [f"pf{i}" for i in range(n_l)] + [f"qf{i}" for i in range(n_l)]
        tables.append(("ptdf", tdf.ptdf, labels))
    out = {}
    for name, mat, labels in tables:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for label, row in zip(labels, mat):
            writer.writerow([label] + [repr(float(x)) for x in row])
        out[name] = buf.getvalue()
    return out


def dump_csv(tdf: TdfSet, directory) -> list[Path]:
    from .reports import atomic_write

    return [atomic_write(Path(directory) / f"{name}.csv", text)
            for name, text in tdf_tables(tdf).items()]
