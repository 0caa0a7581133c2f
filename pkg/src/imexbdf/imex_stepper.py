"""Implicit-explicit multistep time integration.

One step solves

    (delta_0/tau + A(t_n)) u_n =
        sum_i gamma_i B(t_{n-i-1}, u_{n-i-1}) - (1/tau) sum_{i>=1} delta_i u_{n-i},

so each step costs exactly one shifted linear solve.  The implicit side
sees only A, the explicit side only B, both through the operator
interfaces.  A run marches the recursion at fixed step size and flags
divergence instead of raising, so threshold experiments can treat
blow-up as data.

Runs are sequential in n; different runs share no mutable state and can
execute concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bdf_coeffs import BdfScheme, bdf_scheme
from .errors import DomainError, StepError

DIVERGENCE_FACTOR = 1e8  # relative overflow guard for blow-up flagging


@dataclass
class Trajectory:
    """Computed time grid and states, plus blow-up bookkeeping.

    ``states[n]`` approximates the solution at ``times[n] = n*tau``.
    When ``blow_up`` is set, the states stop at that index and carry the
    first offending value.
    """

    tau: float
    times: np.ndarray
    states: list[np.ndarray]
    grid: object
    blow_up: int | None = None
    solve_diagnostics: list[dict] = field(default_factory=list)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def bounded(self) -> bool:
        return self.blow_up is None


class _ForcedTerm:
    """Explicit term plus a state-independent forcing, evaluated at the
    same explicit time points and gamma-combined alongside it."""

    def __init__(self, term, forcing):
        self.term = term
        self.forcing = forcing

    def evaluate(self, t, v):
        out = self.forcing(t)
        if self.term is not None:
            out = out + self.term.evaluate(t, v)
        return out


def imex_step(
    scheme: BdfScheme,
    A,
    B,
    history: list[np.ndarray],
    t_n: float,
    tau: float,
    extra_rhs=None,
):
    """Advance one step.  ``history`` holds the last k states oldest
    first, so ``history[k-i]`` is u_{n-i}.  ``extra_rhs`` is an optional
    state added to the right-hand side before the solve (implicit-side
    forcing)."""
    k = scheme.k
    if len(history) != k:
        raise DomainError(f"history must hold exactly {k} states, got {len(history)}")
    if tau <= 0.0:
        raise DomainError(f"step size must be positive, got {tau}")
    for j, state in enumerate(history):
        if not np.all(np.isfinite(np.asarray(state, dtype=complex))):
            raise StepError(f"non-finite value in history entry {j}")
    delta = scheme.delta_f
    gamma = scheme.gamma_f
    rhs = np.zeros_like(np.asarray(history[-1], dtype=complex))
    for i in range(1, k + 1):
        rhs -= (delta[i] / tau) * np.asarray(history[k - i], dtype=complex)
    if B is not None:
        for i in range(k):
            t_exp = t_n - (i + 1) * tau
            rhs += gamma[i] * B.evaluate(t_exp, history[k - i - 1])
    if extra_rhs is not None:
        rhs = rhs + extra_rhs
    sigma = delta[0] / tau
    try:
        return A.shifted_solve(t_n, sigma, rhs)
    except Exception as exc:  # noqa: BLE001 - backend failures become StepError
        raise StepError(
            f"shifted solve failed at t={t_n} with shift {sigma}: {exc}"
        ) from exc


def run(
    scheme: BdfScheme,
    A,
    B,
    starting_values: list[np.ndarray],
    tau: float,
    N: int,
    divergence_threshold: float | None = None,
    forcing=None,
    forcing_mode: str = "explicit",
    t0: float = 0.0,
) -> Trajectory:
    """March the recursion from k starting states to step N.

    ``forcing`` is an optional state-valued function of t.  In
    ``explicit`` mode it is gamma-combined at the explicit time points
    exactly like B; in ``implicit`` mode it is evaluated at t_n and
    added to the right-hand side of the solve.  ``t0`` shifts the clock
    (step n runs at t = t0 + n*tau); the default keeps t_n = n*tau.
    """
    k = scheme.k
    if len(starting_values) != k:
        raise DomainError(
            f"need exactly {k} starting values, got {len(starting_values)}"
        )
    if N < k:
        raise DomainError(f"N={N} must be at least k={k}")
    if forcing_mode not in ("explicit", "implicit"):
        raise DomainError(f"unknown forcing mode {forcing_mode!r}")
    if tau <= 0.0:
        raise DomainError(f"step size must be positive, got {tau}")

    states = [np.asarray(u, dtype=complex).copy() for u in starting_values]
    if divergence_threshold is None:
        divergence_threshold = DIVERGENCE_FACTOR * (
            1.0 + float(np.max(np.abs(states[-1])))
        )

    effective_B = B
    if forcing is not None and forcing_mode == "explicit":
        effective_B = _ForcedTerm(B, forcing)

    diagnostics: list[dict] = []
    blow_up = None
    for n in range(k, N + 1):
        t_n = t0 + n * tau
        extra = forcing(t_n) if (forcing is not None and forcing_mode == "implicit") else None
        solves_before = getattr(A, "factorization_count", 0)
        u_n = imex_step(scheme, A, effective_B, states[-k:], t_n, tau, extra_rhs=extra)
        diagnostics.append(
            {
                "step": n,
                "t": t_n,
                "refactorized": getattr(A, "factorization_count", 0) > solves_before,
            }
        )
        states.append(u_n)
        peak = float(np.max(np.abs(u_n)))
        if not np.isfinite(peak) or peak > divergence_threshold:
            blow_up = n
            break

    times = t0 + tau * np.arange(len(states))
    return Trajectory(
        tau=tau,
        times=times,
        states=states,
        grid=getattr(A, "grid", None),
        blow_up=blow_up,
        solve_diagnostics=diagnostics,
    )


def make_starting_values(exact_solution, scheme: BdfScheme, tau: float):
    """Exact nodal starting states u(0), u(tau), ..., u((k-1)tau)."""
    return [
        np.asarray(exact_solution(i * tau), dtype=complex) for i in range(scheme.k)
    ]


def bootstrap_starting_values(
    scheme: BdfScheme,
    A,
    B,
    u0,
    tau: float,
    forcing=None,
    forcing_mode: str = "explicit",
):
    """Starting values via fine backward-Euler substeps when no exact
    solution is available.

    The substep size tau_sub = max(tau^(k+1), 1e-12*tau) makes the
    bootstrap error O(tau^(k+1)), below the scheme's own accuracy.  The
    cost grows like tau^(-k), so this is meant for moderate step sizes;
    manufactured-solution studies should use make_starting_values.
    """
    k = scheme.k
    if k == 1:
        return [np.asarray(u0, dtype=complex).copy()]
    euler = bdf_scheme(1)
    tau_sub = max(tau ** (k + 1), 1e-12 * tau)
    per_interval = max(1, round(tau / tau_sub))
    tau_sub = tau / per_interval  # land on the coarse nodes exactly
    values = [np.asarray(u0, dtype=complex).copy()]
    current = values[0]
    for j in range(k - 1):
        traj = run(
            euler,
            A,
            B,
            [current],
            tau_sub,
            per_interval,
            forcing=forcing,
            forcing_mode=forcing_mode,
            t0=j * tau,
        )
        if traj.blow_up is not None:
            raise StepError(f"bootstrap diverged inside interval {j}")
        current = traj.final_state
        values.append(current)
    return values
