"""Compiled Monte Carlo core: counter-based substreams and binomial sampling.

The null-model simulation draws on the order of 1e7..1e10 binomial variates
per analysis, which rules out numpy's array-parameter sampler on a single
core.  This module provides a numba-compiled sampler (BTRS transformed
rejection for n*p >= 10, sequential inversion below) driven by a splitmix64
counter generator.  Every (iteration, station) pair gets its own stream
derived from (seed, iteration, station), so results do not depend on loop
order or on how iterations are partitioned across workers.

All uint64 arithmetic is kept in explicit np.uint64 to avoid numba's silent
int64/uint64 -> float64 promotion.
"""

from math import floor, log, sqrt

import numba
import numpy as np

U64 = np.uint64

_GOLDEN = U64(0x9E3779B97F4A7C15)
_SALT = U64(0xD1B54A32D192ED03)


@numba.njit(inline="always", nogil=True)
def _mix64(z):
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@numba.njit(inline="always", nogil=True)
def _next_u01(state):
    """Advance a splitmix64 state; return (state, uniform in [0, 1))."""
    state = state + _GOLDEN
    z = _mix64(state)
    return state, np.float64(z >> U64(11)) * (1.0 / 9007199254740992.0)


@numba.njit(nogil=True)
def stream_state(seed, a, b):
    """Initial state for the substream identified by (seed, a, b)."""
    return _mix64(_mix64(U64(seed) + U64(a) * _GOLDEN) ^ (U64(b) * _SALT + _GOLDEN))


@numba.njit(inline="always", nogil=True)
def _stirling_tail(k):
    # ln(k!) minus Stirling's approximation; table below 10, series above.
    if k <= 9:
        tbl = (0.08106146679532726, 0.04134069595540929, 0.02767792568499834,
               0.02079067210376509, 0.01664469118982119, 0.01387612882307075,
               0.01189670994589177, 0.01041126526197209, 0.009255462182712733,
               0.008330563433362871)
        return tbl[int(k)]
    kp1sq = (k + 1.0) * (k + 1.0)
    return (1.0 / 12 - (1.0 / 360 - 1.0 / 1260 / kp1sq) / kp1sq) / (k + 1)


@numba.njit(nogil=True)
def _binom_small(state, n, p):
    # Sequential CDF inversion (BINV); requires n*p < 10 and p <= 0.5.
    q = 1.0 - p
    s = p / q
    a = (n + 1) * s
    r = q ** n
    state, u = _next_u01(state)
    x = 0
    while u > r:
        u -= r
        x += 1
        if x > n:
            # Numerically unreachable tail; the CDF sums to 1 over [0, n].
            return state, n
        r *= (a / x - s)
    return state, x


@numba.njit(nogil=True)
def _binom_btrs(state, n, p):
    # Hormann's transformed rejection; requires n*p >= 10 and p <= 0.5.
    q = 1.0 - p
    stddev = sqrt(n * p * q)
    b = 1.15 + 2.53 * stddev
    a = -0.0873 + 0.0248 * b + 0.01 * p
    c = n * p + 0.5
    v_r = 0.92 - 4.2 / b
    r = p / q
    alpha = (2.83 + 5.1 / b) * stddev
    m = floor((n + 1) * p)
    lg_m = (m + 0.5) * log((m + 1) / (r * (n - m + 1)))
    st_m = _stirling_tail(m) + _stirling_tail(n - m)
    while True:
        state, u = _next_u01(state)
        u -= 0.5
        state, v = _next_u01(state)
        us = 0.5 - abs(u)
        k = int(floor((2.0 * a / us + b) * u + c))
        if us >= 0.07 and v <= v_r:
            return state, k
        if k < 0 or k > n:
            continue
        if v == 0.0:
            v = 5e-324
        v = log(v * alpha / (a / (us * us) + b))
        ub = (lg_m
              + (n + 1) * log((n - m + 1.0) / (n - k + 1.0))
              + (k + 0.5) * log(r * (n - k + 1) / (k + 1.0))
              + st_m - _stirling_tail(k) - _stirling_tail(n - k))
        if v <= ub:
            return state, k


@numba.njit(nogil=True)
def binom_draw(state, n, p):
    """One Binomial(n, p) variate; returns (state, draw)."""
    if n <= 0 or p <= 0.0:
        return state, 0
    if p >= 1.0:
        return state, n
    if p <= 0.5:
        if n * p < 10.0:
            return _binom_small(state, n, p)
        return _binom_btrs(state, n, p)
    if n * (1.0 - p) < 10.0:
        state, k = _binom_small(state, n, 1.0 - p)
    else:
        state, k = _binom_btrs(state, n, 1.0 - p)
    return state, n - k


@numba.njit(nogil=True)
def uniform_draw(state):
    """One uniform variate in [0, 1); returns (state, draw)."""
    return _next_u01(state)


@numba.njit(nogil=True, cache=False)
def mc_integer_counts(seed, registered, turnout_rate, leader_rate,
                      it_lo, it_hi, halfwidth, klo, khi, jitter_on):
    """Integer-hit counts under the plug-in binomial null.

    Simulates iterations [it_lo, it_hi): per station, ballots* ~
    Binomial(registered, turnout_rate), leader* ~ Binomial(ballots*,
    leader_rate), one jitter draw per metric, then integer-window
    classification.  Returns:

      counts      (it_hi - it_lo, 3) int64 -- per-iteration hit counts for
                  turnout, leader result, either
      per_t/per_l/per_e  (101,) int64 -- hit totals per integer, summed over
                  the iteration range ("either" attributes a doubly-hitting
                  station to its turnout integer)

    Stations loop outermost so the BTRS constants for the turnout draw are
    set up once per station; correctness does not depend on loop order
    because each (iteration, station) pair re-derives its own stream.
    """
    n_stations = registered.shape[0]
    n_iters = it_hi - it_lo
    counts = np.zeros((n_iters, 3), np.int64)
    per_t = np.zeros(101, np.int64)
    per_l = np.zeros(101, np.int64)
    per_e = np.zeros(101, np.int64)
    for i in range(n_stations):
        ni = registered[i]
        pt = turnout_rate[i]
        pl = leader_rate[i]
        # Setup for the turnout binomial, hoisted out of the iteration loop.
        flip = pt > 0.5
        pc = 1.0 - pt if flip else pt
        degenerate = pc <= 0.0
        big = ni * pc >= 10.0
        if big:
            qc = 1.0 - pc
            stddev = sqrt(ni * pc * qc)
            bb = 1.15 + 2.53 * stddev
            aa = -0.0873 + 0.0248 * bb + 0.01 * pc
            cc = ni * pc + 0.5
            v_r = 0.92 - 4.2 / bb
            rr = pc / qc
            alpha = (2.83 + 5.1 / bb) * stddev
            m = floor((ni + 1) * pc)
            lg_m = (m + 0.5) * log((m + 1) / (rr * (ni - m + 1)))
            st_m = _stirling_tail(m) + _stirling_tail(ni - m)
        else:
            qc = 1.0 - pc
            ss = pc / qc if qc > 0.0 else 0.0
            aa2 = (ni + 1) * ss
            r0 = qc ** ni
        for it in range(it_lo, it_hi):
            st = stream_state(seed, it, i)
            if degenerate:
                k = 0
            elif big:
                while True:
                    st, u = _next_u01(st)
                    u -= 0.5
                    st, v = _next_u01(st)
                    us = 0.5 - abs(u)
                    k = int(floor((2.0 * aa / us + bb) * u + cc))
                    if us >= 0.07 and v <= v_r:
                        break
                    if k < 0 or k > ni:
                        continue
                    if v == 0.0:
                        v = 5e-324
                    v = log(v * alpha / (aa / (us * us) + bb))
                    ub = (lg_m
                          + (ni + 1) * log((ni - m + 1.0) / (ni - k + 1.0))
                          + (k + 0.5) * log(rr * (ni - k + 1) / (k + 1.0))
                          + st_m - _stirling_tail(k) - _stirling_tail(ni - k))
                    if v <= ub:
                        break
            else:
                st, u = _next_u01(st)
                k = 0
                r = r0
                while u > r:
                    u -= r
                    k += 1
                    if k > ni:
                        k = ni
                        break
                    r *= (aa2 / k - ss)
            ballots = ni - k if flip else k
            st, leader = binom_draw(st, ballots, pl)
            if jitter_on:
                st, ut = _next_u01(st)
                st, ul = _next_u01(st)
            else:
                ut = 0.5
                ul = 0.5
            row = it - it_lo
            pct_t = (ballots + ut - 0.5) * 100.0 / ni
            kt = int(floor(pct_t + 0.5))
            hit_t = klo <= kt <= khi and abs(pct_t - kt) <= halfwidth
            hit_l = False
            kl = 0
            if ballots > 0:
                pct_l = (leader + ul - 0.5) * 100.0 / ballots
                kl = int(floor(pct_l + 0.5))
                hit_l = klo <= kl <= khi and abs(pct_l - kl) <= halfwidth
            if hit_t:
                counts[row, 0] += 1
                per_t[kt] += 1
            if hit_l:
                counts[row, 1] += 1
                per_l[kl] += 1
            if hit_t or hit_l:
                counts[row, 2] += 1
                per_e[kt if hit_t else kl] += 1
    return counts, per_t, per_l, per_e
