"""Standard and adjusted admittance matrices of the pi-branch model.

The adjusted variants keep series admittance, tap and phase shift but drop
line charging and bus shunts, which makes the angle coupling of the linear
power-flow model lossless on plain lines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netmodel import Branch, CaseError, NetworkCase


@dataclass(frozen=True, eq=False)
class AdmittanceSet:
    Y_b: np.ndarray
    Y_b_adj: np.ndarray
    Y_f: np.ndarray
    Y_f_adj: np.ndarray
    Y_t: np.ndarray
    Y_t_adj: np.ndarray
    C_f: np.ndarray
    C_t: np.ndarray
    y_sh: np.ndarray
    # positions of the in-service branches within case.branches
    branch_index: tuple[int, ...]

    @property
    def C_br(self) -> np.ndarray:
        return self.C_f - self.C_t

    @property
    def n_buses(self) -> int:
        return self.Y_b.shape[0]

    @property
    def n_branches(self) -> int:
        return self.Y_f.shape[0]


def _series(branch: Branch) -> complex:
    z = complex(branch.r_s, branch.x_s)
    if z == 0:
        raise CaseError("zero series impedance")
    return 1.0 / z


def branch_admittances(branch: Branch) -> tuple[complex, complex, complex, complex]:
    """Return ``(y_ff, y_ft, y_tf, y_tt)`` of the standard pi model."""
    y = _series(branch)
    charge = 0.5j * branch.b_c
    tap = branch.tap
    y_ff = (y + charge) / tap**2
    y_ft = -y / (tap * np.exp(-1j * branch.shift))
    y_tf = -y / (tap * np.exp(1j * branch.shift))
    y_tt = y + charge
    return complex(y_ff), complex(y_ft), complex(y_tf), complex(y_tt)


def adjusted_branch_admittances(branch: Branch) -> tuple[complex, complex, complex, complex]:
    """Like :func:`branch_admittances` with the charge susceptance omitted."""
    y = _series(branch)
    tap = branch.tap
    y_ft = -y / (tap * np.exp(-1j * branch.shift))
    y_tf = -y / (tap * np.exp(1j * branch.shift))
    return complex(y / tap**2), complex(y_ft), complex(y_tf), complex(y)


def build_matrices(case: NetworkCase) -> AdmittanceSet:
    """Assemble dense nodal and branch admittance matrices for ``case``.

    Out-of-service branches are skipped; ``branch_index`` maps the rows of
    the branch matrices back to ``case.branches``.
    """
    n_b = case.n_buses
    idx = case.bus_index
    rows = [k for k, br in enumerate(case.branches) if br.status]
    n_l = len(rows)
    C_f = np.zeros((n_l, n_b))
    C_t = np.zeros((n_l, n_b))
    Y_f = np.zeros((n_l, n_b), dtype=complex)
    Y_t = np.zeros((n_l, n_b), dtype=complex)
    Y_f_adj = np.zeros((n_l, n_b), dtype=complex)
    Y_t_adj = np.zeros((n_l, n_b), dtype=complex)
    for i, k in enumerate(rows):
        br = case.branches[k]
        f, t = idx[br.from_bus], idx[br.to_bus]
        C_f[i, f] = 1.0
        C_t[i, t] = 1.0
        y_ff, y_ft, y_tf, y_tt = branch_admittances(br)
        Y_f[i, f], Y_f[i, t] = y_ff, y_ft
        Y_t[i, f], Y_t[i, t] = y_tf, y_tt
        a_ff, a_ft, a_tf, a_tt = adjusted_branch_admittances(br)
        Y_f_adj[i, f], Y_f_adj[i, t] = a_ff, a_ft
        Y_t_adj[i, f], Y_t_adj[i, t] = a_tf, a_tt
    y_sh = np.array([complex(b.shunt_g, b.shunt_b) for b in case.buses])
    Y_b = C_f.T @ Y_f + C_t.T @ Y_t + np.diag(y_sh)
    Y_b_adj = C_f.T @ Y_f_adj + C_t.T @ Y_t_adj
    return AdmittanceSet(
        Y_b=Y_b,
        Y_b_adj=Y_b_adj,
        Y_f=Y_f,
        Y_f_adj=Y_f_adj,
        Y_t=Y_t,
        Y_t_adj=Y_t_adj,
        C_f=C_f,
        C_t=C_t,
        y_sh=y_sh,
        branch_index=tuple(rows),
    )
