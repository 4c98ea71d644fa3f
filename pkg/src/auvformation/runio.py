"""Lossless CSV persistence of run logs.

Wide format, one row per sample: column ``t`` first, then for each agent i
(1-based) the blocks eta_i_1..6, nu_i_1..6, eps1_i_1..6, eps2_i_1..6,
tau_i_1..6, u_i_1..6, theta_i, mu_i_1..6.  Floats are printed with 17
significant digits, which round-trips IEEE doubles exactly.
"""

import numpy as np

from .sim import RunLog

_BLOCKS = ("eta", "nu", "eps1", "eps2", "tau", "u")


def csv_header(n: int) -> list:
    cols = ["t"]
    for i in range(1, n + 1):
        for block in _BLOCKS:
            cols.extend(f"{block}_{i}_{k}" for k in range(1, 7))
        cols.append(f"theta_{i}")
        cols.extend(f"mu_{i}_{k}" for k in range(1, 7))
    return cols


def write_csv(log: RunLog, path) -> None:
    """Write the log in the wide CSV schema."""
    n = log.n
    parts = [log.t[:, None]]
    for i in range(n):
        for block in _BLOCKS:
            parts.append(getattr(log, block)[:, i, :])
        parts.append(log.theta[:, i: i + 1])
        parts.append(log.mu[:, i, :])
    wide = np.hstack(parts)
    np.savetxt(path, wide, fmt="%.17g", delimiter=",",
               header=",".join(csv_header(n)), comments="")


def read_csv(path) -> RunLog:
    """Parse a run CSV back into a log; raises ValueError on a schema mismatch."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
    cols = header.split(",")
    if (len(cols) - 1) % 43 != 0 or len(cols) < 44:
        raise ValueError(f"CSV has {len(cols)} columns, not 1 + 43n")
    n = (len(cols) - 1) // 43
    if cols != csv_header(n):
        raise ValueError("CSV header does not match the run-log schema")
    wide = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if wide.shape[1] != len(cols):
        raise ValueError(f"CSV rows have {wide.shape[1]} fields, header has {len(cols)}")
    samples = wide.shape[0]
    blocks = {name: np.empty((samples, n, 6)) for name in _BLOCKS}
    theta = np.empty((samples, n))
    mu = np.empty((samples, n, 6))
    col = 1
    for i in range(n):
        for name in _BLOCKS:
            blocks[name][:, i, :] = wide[:, col: col + 6]
            col += 6
        theta[:, i] = wide[:, col]
        col += 1
        mu[:, i, :] = wide[:, col: col + 6]
        col += 6
    return RunLog(t=wide[:, 0], theta=theta, mu=mu, **blocks)
