"""Hot numeric loops, written once and optionally compiled.

Both the cascade sampler and the integrator consume only scalar arithmetic
and ``rng.random()`` so that the compiled and interpreted variants walk the
random stream identically; backend choice can never change a result, only
the speed. Binomial and Poisson draws are therefore built from uniforms
inline instead of calling the generator's vectorized methods.
"""

from __future__ import annotations

import math

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

    def njit(fn):
        return fn


def cascade_counts(
    rng,
    n0,
    p0,
    steps,
    use_poisson,
    friend_mean,
    friend_const,
    share_prob,
    alpha_nn,
    alpha_pn,
    per_offspring,
    out_n,
    out_p,
    out_z,
):
    """Run wake-up events, filling count arrays of length steps + 1.

    Per event the draws are: waker type, friend count (Poisson model only),
    one share coin per friend, then the comment type (one coin in batch
    mode, one per sharing friend otherwise). Returns the event index at
    which the population died, or -1; after extinction the tail is frozen
    and no further draws are consumed.
    """
    n = n0
    p = p0
    out_n[0] = n
    out_p[0] = p
    out_z[0] = n + p
    for i in range(1, steps + 1):
        z = n + p
        wakes_negative = rng.random() * z < n
        if use_poisson:
            # Knuth product-of-uniforms Poisson draw.
            limit = math.exp(-friend_mean)
            prod = rng.random()
            friends = 0
            while prod > limit:
                friends += 1
                prod *= rng.random()
        else:
            friends = friend_const
        sharers = 0
        for _ in range(friends):
            if rng.random() < share_prob:
                sharers += 1
        alpha = alpha_nn if wakes_negative else alpha_pn
        if per_offspring:
            negative_joiners = 0
            for _ in range(sharers):
                if rng.random() < alpha:
                    negative_joiners += 1
        else:
            negative_joiners = sharers if rng.random() < alpha else 0
        if wakes_negative:
            n -= 1
        else:
            p -= 1
        n += negative_joiners
        p += sharers - negative_joiners
        out_n[i] = n
        out_p[i] = p
        out_z[i] = n + p
        if n + p == 0:
            for j in range(i + 1, steps + 1):
                out_n[j] = n
                out_p[j] = p
                out_z[j] = 0
            return i
    return -1


def ode_field(z, n, alpha_nn, alpha_pn, mean_offspring):
    """Drift of the population size and the negative-receiver count."""
    if z <= 0.0:
        return 0.0, 0.0
    eta = n / z
    dz = mean_offspring - 1.0 - z
    dn = (
        eta * (alpha_nn * mean_offspring - 1.0)
        + (1.0 - eta) * alpha_pn * mean_offspring
        - n
    )
    return dz, dn


def _make_rk4(field):
    def rk4_integrate(z0, n0, alpha_nn, alpha_pn, mean_offspring, horizon, step_size):
        steps = int(round(horizon / step_size))
        z = z0
        n = n0
        h = step_size
        for _ in range(steps):
            dz1, dn1 = field(z, n, alpha_nn, alpha_pn, mean_offspring)
            dz2, dn2 = field(
                z + 0.5 * h * dz1, n + 0.5 * h * dn1,
                alpha_nn, alpha_pn, mean_offspring,
            )
            dz3, dn3 = field(
                z + 0.5 * h * dz2, n + 0.5 * h * dn2,
                alpha_nn, alpha_pn, mean_offspring,
            )
            dz4, dn4 = field(
                z + h * dz3, n + h * dn3,
                alpha_nn, alpha_pn, mean_offspring,
            )
            z += h * (dz1 + 2.0 * dz2 + 2.0 * dz3 + dz4) / 6.0
            n += h * (dn1 + 2.0 * dn2 + 2.0 * dn3 + dn4) / 6.0
        return z, n

    return rk4_integrate


cascade_counts_numpy = cascade_counts
rk4_integrate_numpy = _make_rk4(ode_field)

if HAS_NUMBA:
    cascade_counts_numba = njit(cascade_counts)
    rk4_integrate_numba = njit(_make_rk4(njit(ode_field)))
else:
    cascade_counts_numba = None
    rk4_integrate_numba = None
