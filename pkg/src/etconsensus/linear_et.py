"""Single-plant event-triggered toolkit.

Given a stabilizing feedback u = Kx held between update times, the Lyapunov
value V(t) = x^T P x is compared against the performance trajectory
S(t) = x_s^T P x_s of an auxiliary Hurwitz system restarted at each update.
Events fire when the gap f = V - S turns nonnegative. The first singularity
of the associated gap matrix M(t) yields a uniform lower bound on inter-event
times, so the whole schedule is certifiably Zeno-free.

Dense linear algebra throughout; intended for desk-scale systems (n <= 10).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidParameter,
    NoRootFound,
    NotHurwitz,
    NotSPD,
)

#: Time tolerance for root bisection (event times and det M roots).
ROOT_TOL = 1e-10

#: Default number of grid points for sign-change scans.
GRID_POINTS = 10_000


# ---------------------------------------------------------------------------
# Dense primitives
# ---------------------------------------------------------------------------

def matrix_exponential(m, t: float = 1.0) -> np.ndarray:
    """e^{M t} by scaling-and-squaring with a diagonal Pade approximant.

    The argument is halved until its 1-norm is at most 0.5, approximated with
    the [10/10] Pade form, then squared back; relative accuracy is far below
    1e-10 for ||M t|| <= 50.

    Raises OverflowError when ||M t|| is too extreme for double precision.
    """
    a = np.asarray(m, dtype=float) * float(t)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidParameter("matrix entries must be finite")
    norm = float(np.linalg.norm(a, 1))
    if norm > 600.0:
        raise OverflowError(f"||M t|| = {norm:.3g} is too large for the exponential")
    squarings = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    a = a / (2.0 ** squarings)

    q = 10
    n = a.shape[0]
    ident = np.eye(n)
    coeff = 1.0
    term = ident
    numer = ident.copy()
    denom = ident.copy()
    sign = 1.0
    for j in range(1, q + 1):
        coeff *= (q - j + 1) / ((2 * q - j + 1) * j)
        term = term @ a
        sign = -sign
        numer = numer + coeff * term
        denom = denom + (sign * coeff) * term
    result = np.linalg.solve(denom, numer)
    for _ in range(squarings):
        result = result @ result
    return result


def _check_spd(mat: np.ndarray, name: str) -> None:
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NotSPD(f"{name} must be square, got shape {mat.shape}")
    scale = max(1.0, float(np.abs(mat).max()))
    if float(np.abs(mat - mat.T).max()) > 1e-9 * scale:
        raise NotSPD(f"{name} is not symmetric")
    if float(np.linalg.eigvalsh(mat)[0]) <= 0.0:
        raise NotSPD(f"{name} is not positive definite")


def _check_hurwitz(mat: np.ndarray, name: str) -> None:
    reals = np.real(np.linalg.eigvals(mat))
    if float(reals.max()) >= -1e-10:
        raise NotHurwitz(
            f"{name} has an eigenvalue with real part {reals.max():.3g} >= -1e-10"
        )


def solve_lyapunov(a_cl, q) -> np.ndarray:
    """Unique P with Acl^T P + P Acl = -Q, via the Kronecker vectorization.

    Requires Acl Hurwitz and Q symmetric positive definite; the returned P is
    symmetrized. Dense n^2 x n^2 solve, fine at desk scale.
    """
    a_cl = np.asarray(a_cl, dtype=float)
    q = np.asarray(q, dtype=float)
    if a_cl.ndim != 2 or a_cl.shape[0] != a_cl.shape[1]:
        raise DimensionMismatch(f"Acl must be square, got shape {a_cl.shape}")
    if q.shape != a_cl.shape:
        raise DimensionMismatch(f"Q shape {q.shape} does not match Acl {a_cl.shape}")
    _check_hurwitz(a_cl, "Acl")
    _check_spd(q, "Q")
    n = a_cl.shape[0]
    ident = np.eye(n)
    # Row-major vec: vec(A^T P) = kron(A^T, I) vec(P), vec(P A) = kron(I, A^T) vec(P).
    system = np.kron(a_cl.T, ident) + np.kron(ident, a_cl.T)
    p = np.linalg.solve(system, -q.reshape(-1)).reshape(n, n)
    return 0.5 * (p + p.T)


# ---------------------------------------------------------------------------
# System assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearEtSystem:
    """Plant, feedback, and the Lyapunov design pair (Q, R) with comparison
    dynamics A_s."""

    a: np.ndarray
    b: np.ndarray
    k: np.ndarray
    q: np.ndarray
    r: np.ndarray
    a_s: np.ndarray

    def __post_init__(self) -> None:
        for name in ("a", "b", "k", "q", "r", "a_s"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def closed_loop(self) -> np.ndarray:
        return self.a + self.b @ self.k


@dataclass(frozen=True)
class LyapunovData:
    """Solved Lyapunov matrix P with the extended dynamics F, comparison
    dynamics F_s, and the state selector C = [I 0]."""

    p: np.ndarray
    f: np.ndarray
    f_s: np.ndarray
    c: np.ndarray

    def __post_init__(self) -> None:
        for name in ("p", "f", "f_s", "c"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.p.shape[0]


def design(a, b, k, q, r, a_s=None):
    """Validate a plant/feedback/design tuple and assemble the toolkit data.

    A + BK must be Hurwitz; Q, R, and Q - R must all be symmetric positive
    definite. When no comparison dynamics are supplied, A_s = -P^{-1} R / 2 is
    used: it satisfies A_s^T P + P A_s = -R symmetrically and is Hurwitz
    because P and R are positive definite.

    Returns:
        (LinearEtSystem, LyapunovData)
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    k = np.asarray(k, dtype=float)
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise DimensionMismatch(f"A must be square, got {a.shape}")
    if b.ndim != 2 or b.shape[0] != n:
        raise DimensionMismatch(f"B must be n x m with n={n}, got {b.shape}")
    m = b.shape[1]
    if k.shape != (m, n):
        raise DimensionMismatch(f"K must be {m} x {n}, got {k.shape}")
    if q.shape != (n, n) or r.shape != (n, n):
        raise DimensionMismatch("Q and R must match the state dimension")
    _check_spd(q, "Q")
    _check_spd(r, "R")
    _check_spd(q - r, "Q - R")
    a_cl = a + b @ k
    p = solve_lyapunov(a_cl, q)  # also checks A + BK Hurwitz

    if a_s is None:
        a_s = -0.5 * np.linalg.solve(p, r)
    else:
        a_s = np.asarray(a_s, dtype=float)
        if a_s.shape != (n, n):
            raise DimensionMismatch(f"A_s must be {n} x {n}, got {a_s.shape}")
        residual = a_s.T @ p + p @ a_s + r
        if float(np.linalg.norm(residual, "fro")) > 1e-9 * max(
            1.0, float(np.linalg.norm(r, "fro"))
        ):
            raise InvalidParameter("supplied A_s does not solve A_s^T P + P A_s = -R")
    _check_hurwitz(a_s, "A_s")

    bk = b @ k
    f = np.block([[a_cl, bk], [-a_cl, -bk]])
    f_s = np.block([[a_s, np.zeros((n, n))], [np.zeros((n, n)), np.zeros((n, n))]])
    c = np.hstack([np.eye(n), np.zeros((n, n))])
    sys = LinearEtSystem(a=a, b=b, k=k, q=q, r=r, a_s=a_s)
    return sys, LyapunovData(p=p, f=f, f_s=f_s, c=c)


# ---------------------------------------------------------------------------
# Gap function, event times, inter-event floor
# ---------------------------------------------------------------------------

def trigger_gap(sys: LinearEtSystem, lyap: LyapunovData, t: float, x_ell) -> float:
    """Gap f(t) = V(t) - S(t) at elapsed time t after an update at state x_ell.

    Exactly zero at t = 0; the event condition is the first sign change to
    nonnegative.
    """
    x_ell = np.asarray(x_ell, dtype=float)
    n = lyap.n
    if x_ell.shape != (n,):
        raise DimensionMismatch(f"x_ell must have length {n}, got {x_ell.shape}")
    y = np.concatenate([x_ell, np.zeros(n)])
    xv = (matrix_exponential(lyap.f, t) @ y)[:n]
    xs = (matrix_exponential(lyap.f_s, t) @ y)[:n]
    return float(xv @ lyap.p @ xv - xs @ lyap.p @ xs)


def gap_matrix(lyap: LyapunovData, t: float) -> np.ndarray:
    """Matrix M(t) with f(t) = x_ell^T M(t) x_ell; events exist once it is
    singular."""
    n = lyap.n
    cpc = lyap.c.T @ lyap.p @ lyap.c
    phi = matrix_exponential(lyap.f, t)
    phi_s = matrix_exponential(lyap.f_s, t)
    full = phi.T @ cpc @ phi - phi_s.T @ cpc @ phi_s
    return full[:n, :n]


def next_event_time(
    sys: LinearEtSystem,
    lyap: LyapunovData,
    x_ell,
    t_max: float,
    grid_points: int = GRID_POINTS,
) -> Optional[float]:
    """First elapsed time in (0, t_max] where the gap crosses zero from below.

    Scans a uniform grid, then bisects the bracketing cell to ROOT_TOL.
    Returns None when no crossing occurs before t_max (in particular for
    x_ell = 0, where the gap is identically zero).
    """
    if t_max <= 0.0:
        raise InvalidParameter(f"t_max must be positive, got {t_max}")
    x_ell = np.asarray(x_ell, dtype=float)
    n = lyap.n
    if x_ell.shape != (n,):
        raise DimensionMismatch(f"x_ell must have length {n}, got {x_ell.shape}")
    if float(np.linalg.norm(x_ell)) == 0.0:
        return None

    step = t_max / grid_points
    phi_step = matrix_exponential(lyap.f, step)
    phi_s_step = matrix_exponential(lyap.f_s, step)
    y = np.concatenate([x_ell, np.zeros(n)])
    v = y.copy()
    s = y.copy()
    p = lyap.p
    f_prev = 0.0
    t_prev = 0.0
    for kk in range(1, grid_points + 1):
        v = phi_step @ v
        s = phi_s_step @ s
        f_k = float(v[:n] @ p @ v[:n] - s[:n] @ p @ s[:n])
        t_k = kk * step
        if f_k >= 0.0 and (f_prev < 0.0 or kk == 1):
            lo, hi = t_prev, t_k
            if kk == 1:
                # f(0) = 0 exactly; walk in until the gap is genuinely negative.
                lo = _negative_start(sys, lyap, x_ell, t_k)
                if lo is None:
                    return None
            while hi - lo > ROOT_TOL:
                mid = 0.5 * (lo + hi)
                if trigger_gap(sys, lyap, mid, x_ell) >= 0.0:
                    hi = mid
                else:
                    lo = mid
            # Left end of the final bracket: within ROOT_TOL of the root with
            # the gap still negative, so resetting there keeps V <= S one-sided.
            return lo
        f_prev, t_prev = f_k, t_k
    return None


def _negative_start(sys, lyap, x_ell, upper: float) -> Optional[float]:
    t = 0.5 * upper
    for _ in range(60):
        if trigger_gap(sys, lyap, t, x_ell) < 0.0:
            return t
        t *= 0.5
    return None


def min_inter_event_time(
    sys: LinearEtSystem,
    lyap: LyapunovData,
    t_max: float,
    grid_points: int = GRID_POINTS,
) -> float:
    """Uniform inter-event floor: the first t > 0 where det M(t) = 0.

    det M(t) is scanned for a sign change on a uniform grid over (0, t_max]
    (cumulative products of the per-step exponentials keep the scan cheap),
    then the bracketing cell is bisected to ROOT_TOL using direct
    evaluations. The sign is taken from slogdet, which stays usable when the
    determinant magnitude over- or underflows.

    Raises NoRootFound if the determinant never changes sign in the window;
    the caller is responsible for choosing t_max large enough.
    """
    if t_max <= 0.0:
        raise InvalidParameter(f"t_max must be positive, got {t_max}")
    n = lyap.n
    cpc = lyap.c.T @ lyap.p @ lyap.c
    step = t_max / grid_points
    phi_step = matrix_exponential(lyap.f, step)
    phi_s_step = matrix_exponential(lyap.f_s, step)
    phi = np.eye(2 * n)
    phi_s = np.eye(2 * n)

    def det_sign(mat: np.ndarray) -> float:
        sign, _ = np.linalg.slogdet(mat)
        return float(sign)

    baseline = 0.0
    t_prev = 0.0
    for kk in range(1, grid_points + 1):
        phi = phi_step @ phi
        phi_s = phi_s_step @ phi_s
        m_k = (phi.T @ cpc @ phi - phi_s.T @ cpc @ phi_s)[:n, :n]
        sign_k = det_sign(m_k)
        t_k = kk * step
        if baseline == 0.0:
            baseline = sign_k
        elif sign_k != baseline:
            lo, hi = t_prev, t_k
            while hi - lo > ROOT_TOL:
                mid = 0.5 * (lo + hi)
                if det_sign(gap_matrix(lyap, mid)) == baseline:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)
        t_prev = t_k
    raise NoRootFound(
        f"det M(t) does not change sign on (0, {t_max}]; enlarge t_max"
    )


# ---------------------------------------------------------------------------
# Sample-and-hold closed loop
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleHoldTrace:
    """Sampled V/S pair along the event-triggered closed loop."""

    times: np.ndarray
    states: np.ndarray
    v_values: np.ndarray
    s_values: np.ndarray
    event_times: tuple

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(np.asarray(self.event_times))


def simulate_sample_hold(
    sys: LinearEtSystem,
    lyap: LyapunovData,
    x0,
    horizon: float,
    samples_per_interval: int = 20,
    t_max: Optional[float] = None,
) -> SampleHoldTrace:
    """Run the event-triggered closed loop, sampling V and S between events.

    Each inter-event segment is propagated through the extended dynamics
    (y = [x, e]) and the comparison dynamics restarted at the segment's
    initial state. Events are scheduled with :func:`next_event_time`; when no
    event occurs before t_max the trajectory coasts to the horizon.
    """
    x = np.asarray(x0, dtype=float).copy()
    n = lyap.n
    if x.shape != (n,):
        raise DimensionMismatch(f"x0 must have length {n}, got {x.shape}")
    if horizon <= 0.0:
        raise InvalidParameter(f"horizon must be positive, got {horizon}")
    if t_max is None:
        t_max = 100.0 / max(float(np.linalg.norm(lyap.f, 2)), 1e-12)

    p = lyap.p
    t = 0.0
    times: list[float] = []
    states: list[np.ndarray] = []
    v_vals: list[float] = []
    s_vals: list[float] = []
    event_times: list[float] = [0.0]

    first_segment = True
    while t < horizon - 1e-12:
        dt_event = next_event_time(sys, lyap, x, t_max)
        seg = horizon - t if dt_event is None else min(dt_event, horizon - t)
        tau_step = seg / samples_per_interval
        phi_tau = matrix_exponential(lyap.f, tau_step)
        es_tau = matrix_exponential(sys.a_s, tau_step)
        y = np.concatenate([x, np.zeros(n)])
        xs = x.copy()
        if first_segment:
            times.append(t)
            states.append(x.copy())
            v_vals.append(float(x @ p @ x))
            s_vals.append(float(x @ p @ x))
            first_segment = False
        for j in range(1, samples_per_interval + 1):
            y = phi_tau @ y
            xs = es_tau @ xs
            xj = y[:n]
            times.append(t + j * tau_step)
            states.append(xj.copy())
            v_vals.append(float(xj @ p @ xj))
            s_vals.append(float(xs @ p @ xs))
        t = t + seg
        x = y[:n].copy()
        if dt_event is not None and seg == dt_event:
            event_times.append(t)

    return SampleHoldTrace(
        times=np.array(times),
        states=np.array(states),
        v_values=np.array(v_vals),
        s_values=np.array(s_vals),
        event_times=tuple(event_times),
    )
