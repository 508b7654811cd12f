"""Iterative projection estimation of demands from link loads.

The plain solver sweeps the rows of A, orthogonally projecting the iterate
onto each hyperplane a_i . x = b_i (optionally clipping at zero). The
distribution-constrained estimator interleaves those sweeps with "snaps":
the sorted iterate is replaced by a scaled random vector drawn from the
target normalized cdf, preserving rank order, with the scale chosen to
minimize the squared deviation from the load constraints.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dist import ks_distance, make_rng
from .errors import DegenerateCandidate, TmestError, ZeroRow
from .traffic import TrafficVector, _as_matrix, _as_vector


@dataclass(frozen=True)
class ProjDConfig:
    """Knobs for the distribution-constrained projection estimator.

    cycles: outer rounds, each ending in one snap.
    inner_cycles: full row sweeps between snaps.
    retries: candidate draws per snap; the minimum-deviation one is kept.
    row_order: "cyclic" or "randomized" (rows picked with probability
        proportional to their squared norm).
    tolerance: relative-residual stop threshold for sweep phases.
    final_polish_cycles: projection-only sweeps after the last snap
        (defaults to inner_cycles; 0 ends the run on a snap).
    """

    cycles: int = 20
    inner_cycles: int = 50
    retries: int = 8
    row_order: str = "cyclic"
    tolerance: float = 1e-9
    final_polish_cycles: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.cycles < 1 or self.inner_cycles < 1 or self.retries < 1:
            raise TmestError("cycles, inner_cycles and retries must all be >= 1")
        if not self.tolerance > 0:
            raise TmestError("tolerance must be positive")
        if self.row_order not in ("cyclic", "randomized"):
            raise TmestError(f"unknown row order {self.row_order!r}")
        if self.final_polish_cycles is not None and self.final_polish_cycles < 0:
            raise TmestError("final_polish_cycles must be >= 0")

    @property
    def polish_cycles(self) -> int:
        return self.inner_cycles if self.final_polish_cycles is None else self.final_polish_cycles


@dataclass(frozen=True)
class SnapReport:
    """Outcome of one snap: chosen scale, its deviation, and which draw won."""

    scale: float
    deviation: float
    candidate_index: int

    def __post_init__(self):
        if self.scale < 0 or self.deviation < 0:
            raise TmestError("scale and deviation must be nonnegative")


@dataclass
class ProjDDiagnostics:
    residual_trace: list[float] = field(default_factory=list)
    snap_reports: list[SnapReport] = field(default_factory=list)
    final_l2: float = np.nan
    final_relative: float = np.nan
    final_ks: float | None = None


def _row_norms_sq(A: np.ndarray) -> np.ndarray:
    norms = np.einsum("ij,ij->i", A, A)
    if np.any(norms == 0):
        raise ZeroRow(f"row {int(np.argmax(norms == 0))} has no nonzero entries")
    return norms


def kaczmarz_project_row(x, a_i, b_i: float, nonneg: bool = False) -> np.ndarray:
    """Project x onto the hyperplane a_i . x = b_i; optionally clip at zero."""
    a = _as_vector(a_i)
    xv = np.array(_as_vector(x), dtype=float)
    nn = float(a @ a)
    if nn == 0.0:
        raise ZeroRow("projection row has no nonzero entries")
    out = xv + a * ((b_i - a @ xv) / nn)
    if nonneg:
        np.maximum(out, 0.0, out=out)
    return out


def _sweep(A, b, x, norms_sq, order, nonneg: bool) -> None:
    """One pass of row projections over the given row order, in place."""
    for i in order:
        a = A[i]
        x += a * ((b[i] - a @ x) / norms_sq[i])
        if nonneg:
            np.maximum(x, 0.0, out=x)


def _stop_metric(A, b, x, b_norm: float) -> float:
    r = float(np.linalg.norm(A @ x - b))
    return r / b_norm if b_norm > 0 else r


def _row_orders(mode: str, m: int, norms_sq, rng):
    if mode == "cyclic":
        order = np.arange(m)
        while True:
            yield order
    else:
        probs = norms_sq / norms_sq.sum()
        while True:
            yield rng.choice(m, size=m, p=probs)


def cyclic_projection_solve(
    A,
    b,
    *,
    nonneg: bool = False,
    row_order: str = "cyclic",
    max_cycles: int = 10_000,
    tolerance: float = 1e-9,
    seed: int = 0,
    x0=None,
) -> tuple[np.ndarray, float]:
    """Solve A x = b by repeated row projections.

    Returns the final iterate and its relative residual (absolute when
    ||b|| = 0). From a zero start without the nonnegativity clip, the
    iterate converges to the minimum-norm solution of a consistent system.
    """
    mat = _as_matrix(A)
    bv = _as_vector(b)
    m, p = mat.shape
    norms_sq = _row_norms_sq(mat)
    x = np.zeros(p) if x0 is None else np.array(_as_vector(x0), dtype=float)
    b_norm = float(np.linalg.norm(bv))
    orders = _row_orders(row_order, m, norms_sq, make_rng(seed))
    res = _stop_metric(mat, bv, x, b_norm)
    for _ in range(max_cycles):
        if res <= tolerance:
            break
        _sweep(mat, bv, x, norms_sq, next(orders), nonneg)
        res = _stop_metric(mat, bv, x, b_norm)
    return x, res


def optimal_lambda(A, y, b) -> float:
    """Scale minimizing sum_j (lambda * (A y)_j - b_j)^2, clamped at zero."""
    Ay = _as_matrix(A) @ _as_vector(y)
    s2 = float(Ay @ Ay)
    if s2 == 0.0:
        raise DegenerateCandidate("candidate vector maps to zero loads")
    return max(0.0, float(Ay @ _as_vector(b)) / s2)


def deviation(A, y, b, scale: float) -> float:
    """Sum of squared load-constraint violations of the scaled candidate."""
    r = scale * (_as_matrix(A) @ _as_vector(y)) - _as_vector(b)
    return float(r @ r)


def snap_to_distribution(x, A, b, target, retries: int = 8, seed=0) -> tuple[np.ndarray, SnapReport]:
    """Replace x by a scaled target-distributed vector, preserving rank order.

    Draws `retries` sorted candidates from the target cdf, scales each by its
    optimal lambda, and keeps the one with the smallest deviation. The i-th
    smallest component of x (ties broken by component index) is replaced by
    the i-th candidate value.
    """
    mat = _as_matrix(A)
    xv = _as_vector(x)
    bv = _as_vector(b)
    p = len(xv)
    rng = make_rng(seed)
    best = None
    for r in range(retries):
        y = target.sample_sorted(p, rng)
        Ay = mat @ y
        s2 = float(Ay @ Ay)
        if s2 == 0.0:
            continue
        lam = max(0.0, float(Ay @ bv) / s2)
        dev = float(np.sum((lam * Ay - bv) ** 2))
        if best is None or dev < best[1]:
            best = (lam, dev, r, y)
    if best is None:
        raise DegenerateCandidate("all candidate draws map to zero loads")
    lam, dev, idx, y = best
    order = np.argsort(xv, kind="stable")
    out = np.empty(p)
    out[order] = lam * y
    return out, SnapReport(scale=lam, deviation=dev, candidate_index=idx)


def _active_system(mat: np.ndarray, bv: np.ndarray):
    """Drop rows for links no supported pair uses; their load must be zero."""
    norms = np.einsum("ij,ij->i", mat, mat)
    zero = norms == 0
    if np.any(zero & (bv != 0)):
        i = int(np.argmax(zero & (bv != 0)))
        raise ZeroRow(f"row {i} carries no supported pair but has nonzero load")
    keep = ~zero
    return mat[keep], bv[keep], norms[keep]


def proj_d_estimate(A, b, target, config: ProjDConfig | None = None) -> tuple[TrafficVector, ProjDDiagnostics]:
    """Distribution-constrained projection estimate of the demand vector.

    Runs `cycles` rounds of [`inner_cycles` nonnegative sweeps + one snap],
    then `polish_cycles` projection-only sweeps so the returned estimate fits
    the load constraints tightly. The estimate is nonnegative and the run is
    deterministic given the seed. Links used by no supported pair are ignored
    (they constrain nothing) unless they report a nonzero load, which no
    demand vector can satisfy.
    """
    cfg = config or ProjDConfig()
    mat = _as_matrix(A)
    bv = _as_vector(b)
    if np.any(bv < 0):
        raise TmestError("link loads must be nonnegative")
    m, p = mat.shape
    if len(bv) != m:
        raise TmestError(f"load vector has {len(bv)} entries, matrix has {m} rows")
    full_mat, full_b = mat, bv
    mat, bv, norms_sq = _active_system(mat, bv)
    m = mat.shape[0]
    if m == 0:
        x = np.zeros(p)
        diag = ProjDDiagnostics(final_l2=0.0, final_relative=0.0)
        return TrafficVector(x), diag
    b_norm = float(np.linalg.norm(bv))
    rng = make_rng(cfg.seed)
    orders = _row_orders(cfg.row_order, m, norms_sq, rng)
    diag = ProjDDiagnostics()
    x = np.zeros(p)

    def run_phase(n_cycles: int) -> None:
        for _ in range(n_cycles):
            _sweep(mat, bv, x, norms_sq, next(orders), nonneg=True)
            res = _stop_metric(mat, bv, x, b_norm)
            diag.residual_trace.append(res)
            if res <= cfg.tolerance:
                break

    for _ in range(cfg.cycles):
        run_phase(cfg.inner_cycles)
        x, report = snap_to_distribution(x, mat, bv, target, cfg.retries, rng)
        diag.snap_reports.append(report)
        diag.residual_trace.append(_stop_metric(mat, bv, x, b_norm))
    run_phase(cfg.polish_cycles)

    r = full_mat @ x - full_b
    diag.final_l2 = float(np.linalg.norm(r))
    diag.final_relative = diag.final_l2 / b_norm if b_norm > 0 else diag.final_l2
    if x.max() > 0:
        diag.final_ks = ks_distance(x[x > 0] / x.max(), target)
    return TrafficVector(x), diag
