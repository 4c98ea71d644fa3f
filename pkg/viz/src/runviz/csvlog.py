"""Parser for the simulator's wide run-log CSV.

The file contract: column ``t`` first, then for every agent i (1-based) the
blocks eta_i_1..6, nu_i_1..6, eps1_i_1..6, eps2_i_1..6, tau_i_1..6, u_i_1..6,
theta_i, mu_i_1..6.  This module owns its copy of that schema; it deliberately
does not import the simulator package.
"""

from dataclasses import dataclass

import numpy as np

BLOCKS = ("eta", "nu", "eps1", "eps2", "tau", "u")
COLUMNS_PER_AGENT = 43


class SchemaMismatch(ValueError):
    """CSV header or row shape deviates from the run-log contract."""


@dataclass(frozen=True)
class RunTable:
    """Parsed log: t (T,), six (T, n, 6) blocks, theta (T, n), mu (T, n, 6)."""

    t: np.ndarray
    eta: np.ndarray
    nu: np.ndarray
    eps1: np.ndarray
    eps2: np.ndarray
    tau: np.ndarray
    u: np.ndarray
    theta: np.ndarray
    mu: np.ndarray

    @property
    def n(self) -> int:
        return self.eta.shape[1]


def expected_header(n: int) -> list:
    cols = ["t"]
    for i in range(1, n + 1):
        for block in BLOCKS:
            cols.extend(f"{block}_{i}_{k}" for k in range(1, 7))
        cols.append(f"theta_{i}")
        cols.extend(f"mu_{i}_{k}" for k in range(1, 7))
    return cols


def parse_run_csv(path) -> RunTable:
    """Read and validate a run CSV; raises SchemaMismatch on any deviation."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
    except OSError as exc:
        raise SchemaMismatch(f"cannot read {path}: {exc}") from exc
    cols = header.split(",")
    if len(cols) < 1 + COLUMNS_PER_AGENT or (len(cols) - 1) % COLUMNS_PER_AGENT != 0:
        raise SchemaMismatch(
            f"{path}: {len(cols)} columns do not fit the 1 + 43n layout"
        )
    n = (len(cols) - 1) // COLUMNS_PER_AGENT
    if cols != expected_header(n):
        raise SchemaMismatch(f"{path}: header does not match the run-log schema")
    try:
        wide = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise SchemaMismatch(f"{path}: {exc}") from exc
    if wide.shape[1] != len(cols):
        raise SchemaMismatch(
            f"{path}: rows carry {wide.shape[1]} fields, header names {len(cols)}"
        )
    if wide.shape[0] < 1:
        raise SchemaMismatch(f"{path}: no samples")
    samples = wide.shape[0]
    data = {name: np.empty((samples, n, 6)) for name in BLOCKS}
    theta = np.empty((samples, n))
    mu = np.empty((samples, n, 6))
    col = 1
    for i in range(n):
        for name in BLOCKS:
            data[name][:, i, :] = wide[:, col: col + 6]
            col += 6
        theta[:, i] = wide[:, col]
        col += 1
        mu[:, i, :] = wide[:, col: col + 6]
        col += 6
    return RunTable(t=wide[:, 0], theta=theta, mu=mu, **data)
