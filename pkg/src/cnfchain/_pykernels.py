"""Pure-Python reference kernels.

The simulation kernels mirror ``_ckernels.pyx`` statement for statement, so
that given the same pre-drawn random numbers both produce identical
trajectories.  ``threshold_mass`` is vectorized with numpy instead and
agrees with the compiled loop up to summation order.  Used when the
compiled extension is unavailable.
"""
import numpy as np


def ctmc_walk(state, t, t_end, t_keep, exit_rates, cum_jump, exps, unifs, occupancy):
    """Advance one CTMC trajectory, accumulating time spent per state.

    Time in ``[t_keep, t_end]`` is added to ``occupancy[state]``.  Returns
    ``(state, t, used)`` where ``used`` is the number of random pairs
    consumed; the walk stops at ``t_end`` or when the draws run out.
    """
    n = cum_jump.shape[1]
    used = 0
    n_draws = exps.shape[0]
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


def _chain_ok(agg, delay_tab, offsets, thresholds, n_tiers, n_tenants):
    for i in range(n_tenants):
        total = 0.0
        for m in range(n_tiers):
            total += delay_tab[offsets[m, i] + agg[m, i]]
        if not total <= thresholds[i]:
            return False
    return True


def chain_walk(states, replica_tier, t, t_end, t_keep, exit_rates, cum_jump, caps, agg,
               delay_tab, offsets, thresholds, exps, unifs, counters):
    """Superposed trajectory of independent replica CTMCs.

    ``counters[0]`` accumulates kept time with every tenant's chain delay
    within threshold, ``counters[1]`` all kept time.  ``agg[m, i]`` holds the
    aggregate capacity of tier ``m`` for tenant ``i`` and is kept in sync
    with ``states``.  Returns ``(t, used)``.
    """
    n_rep = states.shape[0]
    n_states = cum_jump.shape[2]
    n_tiers = agg.shape[0]
    n_tenants = agg.shape[1]
    n_draws = exps.shape[0]
    used = 0
    ok = _chain_ok(agg, delay_tab, offsets, thresholds, n_tiers, n_tenants)
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


def mgc_sojourn(interarrivals, services, c, sojourn):
    """FCFS multi-server queue; each job takes the earliest-free server.

    Fills ``sojourn`` with per-job time in system.
    """
    free = [0.0] * c
    arrival = 0.0
    for j in range(interarrivals.shape[0]):
        arrival += interarrivals[j]
        k_min = 0
        for k in range(1, c):
            if free[k] < free[k_min]:
                k_min = k
        start = arrival if arrival > free[k_min] else free[k_min]
        free[k_min] = start + services[j]
        sojourn[j] = free[k_min] - arrival


def threshold_mass(pa, da, pb, db, thresholds):
    """Mass of the product of two term sets whose summed delays meet thresholds.

    ``db`` must be sorted ascending on column 0, which bounds the candidate
    rows for each left-hand term.  Vectorized over ``b``; the compiled
    kernel loops.
    """
    pa = np.asarray(pa)
    da = np.asarray(da)
    pb = np.asarray(pb)
    db = np.asarray(db)
    w = np.asarray(thresholds)
    total = 0.0
    for a in range(da.shape[0]):
        stop = int(np.searchsorted(db[:, 0], w[0] - da[a, 0], side="right")) + 1
        rows = db[:stop]
        mask = np.all(da[a] + rows <= w, axis=1)
        total += pa[a] * float(pb[:stop][mask].sum())
    return total
