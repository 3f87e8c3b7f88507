# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.  See ``_pykernels`` for the reference semantics."""
import numpy as np


def ctmc_walk(Py_ssize_t state, double t, double t_end, double t_keep,
              const double[::1] exit_rates, const double[:, ::1] cum_jump,
              const double[::1] exps, const double[::1] unifs, double[::1] occupancy):
    cdef Py_ssize_t n = cum_jump.shape[1]
    cdef Py_ssize_t used = 0
    cdef Py_ssize_t n_draws = exps.shape[0]
    cdef Py_ssize_t nxt
    cdef double t_next, lo, hi, u
    while used < n_draws:
        t_next = t + exps[used] / exit_rates[state]
        lo = t if t > t_keep else t_keep
        hi = t_next if t_next < t_end else t_end
        if hi > lo:
            occupancy[state] += hi - lo
        if t_next >= t_end:
            return state, t_end, used + 1
        u = unifs[used]
        nxt = 0
        while nxt < n - 1 and cum_jump[state, nxt] <= u:
            nxt += 1
        state = nxt
        t = t_next
        used += 1
    return state, t, used


cdef bint _chain_ok(const long long[:, ::1] agg, const double[::1] delay_tab, const long long[:, ::1] offsets,
                    const double[::1] thresholds, Py_ssize_t n_tiers, Py_ssize_t n_tenants) noexcept nogil:
    cdef Py_ssize_t i, m
    cdef double total
    for i in range(n_tenants):
        total = 0.0
        for m in range(n_tiers):
            total += delay_tab[offsets[m, i] + agg[m, i]]
        if not total <= thresholds[i]:
            return False
    return True


def chain_walk(long long[::1] states, const long long[::1] replica_tier, double t, double t_end, double t_keep,
               const double[:, ::1] exit_rates, const double[:, :, ::1] cum_jump,
               const long long[:, :, ::1] caps, long long[:, ::1] agg, const double[::1] delay_tab,
               const long long[:, ::1] offsets, const double[::1] thresholds,
               const double[::1] exps, const double[:, ::1] unifs, double[::1] counters):
    cdef Py_ssize_t n_rep = states.shape[0]
    cdef Py_ssize_t n_states = cum_jump.shape[2]
    cdef Py_ssize_t n_tiers = agg.shape[0]
    cdef Py_ssize_t n_tenants = agg.shape[1]
    cdef Py_ssize_t n_draws = exps.shape[0]
    cdef Py_ssize_t used = 0
    cdef Py_ssize_t r, m, s, nxt, i
    cdef double total_rate, t_next, lo, hi, target, acc, u
    cdef bint ok = _chain_ok(agg, delay_tab, offsets, thresholds, n_tiers, n_tenants)
    while used < n_draws:
        total_rate = 0.0
        for r in range(n_rep):
            total_rate += exit_rates[replica_tier[r], states[r]]
        t_next = t + exps[used] / total_rate
        lo = t if t > t_keep else t_keep
        hi = t_next if t_next < t_end else t_end
        if hi > lo:
            counters[1] += hi - lo
            if ok:
                counters[0] += hi - lo
        if t_next >= t_end:
            return t_end, used + 1
        target = unifs[used, 0] * total_rate
        acc = 0.0
        r = 0
        while r < n_rep - 1:
            acc += exit_rates[replica_tier[r], states[r]]
            if target < acc:
                break
            r += 1
        m = replica_tier[r]
        s = states[r]
        u = unifs[used, 1]
        nxt = 0
        while nxt < n_states - 1 and cum_jump[m, s, nxt] <= u:
            nxt += 1
        for i in range(n_tenants):
            agg[m, i] += caps[m, nxt, i] - caps[m, s, i]
        states[r] = nxt
        ok = _chain_ok(agg, delay_tab, offsets, thresholds, n_tiers, n_tenants)
        t = t_next
        used += 1
    return t, used


def mgc_sojourn(const double[::1] interarrivals, const double[::1] services, Py_ssize_t c,
                double[::1] sojourn):
    cdef double[::1] free
    cdef double arrival = 0.0
    cdef double start
    cdef Py_ssize_t j, k, k_min
    free = np.zeros(c)
    for j in range(interarrivals.shape[0]):
        arrival += interarrivals[j]
        k_min = 0
        for k in range(1, c):
            if free[k] < free[k_min]:
                k_min = k
        start = arrival if arrival > free[k_min] else free[k_min]
        free[k_min] = start + services[j]
        sojourn[j] = free[k_min] - arrival


def threshold_mass(const double[::1] pa, const double[:, ::1] da, const double[::1] pb,
                   const double[:, ::1] db, const double[::1] thresholds):
    cdef Py_ssize_t n_a = da.shape[0]
    cdef Py_ssize_t k = da.shape[1]
    cdef Py_ssize_t n_b = db.shape[0]
    cdef Py_ssize_t a, b, i
    cdef double total = 0.0
    cdef double partial, d0
    cdef bint ok
    with nogil:
        for a in range(n_a):
            partial = 0.0
            d0 = da[a, 0]
            for b in range(n_b):
                if d0 + db[b, 0] > thresholds[0]:
                    break
                ok = True
                for i in range(1, k):
                    if not da[a, i] + db[b, i] <= thresholds[i]:
                        ok = False
                        break
                if ok:
                    partial += pb[b]
            total += pa[a] * partial
    return total
