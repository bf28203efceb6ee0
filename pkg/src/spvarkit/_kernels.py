"""Numba kernels for the Monte Carlo samplers.

All kernels draw from a private splitmix64 stream held in a one-element
uint64 array, so results depend only on the seeds passed in.
"""
import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_S63 = np.uint64(63)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def _next(state):
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def _uniform(state):
    return np.float64(_next(state) >> _S11) * _INV53


@njit(cache=True, inline="always")
def _randint(state, n):
    return np.int64(_next(state) % np.uint64(n))


@njit(cache=True)
def _random_spins(state, s):
    for i in range(s.size):
        s[i] = 1 if (_next(state) >> _S63) else -1


@njit(cache=True)
def _local_fields(indptr, indices, weights, h, s, field):
    for i in range(h.size):
        f = h[i]
        for k in range(indptr[i], indptr[i + 1]):
            f += weights[k] * s[indices[k]]
        field[i] = f


@njit(cache=True)
def _energy(indptr, indices, weights, h, s):
    e = 0.0
    for i in range(h.size):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            if j > i:
                acc += weights[k] * s[j]
        e += s[i] * (acc + h[i])
    return e


@njit(cache=True, inline="always")
def _state_code(s):
    code = 0
    for i in range(s.size):
        code = 2 * code + (1 if s[i] > 0 else 0)
    return code


@njit(cache=True)
def _metropolis_pass(indptr, indices, weights, h, s, field, beta, state):
    _local_fields(indptr, indices, weights, h, s, field)
    for i in range(h.size):
        de = -2.0 * s[i] * field[i]
        # zero-cost flips taken with probability 1/2: always taking them makes
        # fixed-order sweeps periodic on zero-field spins
        if de < 0.0 or (de == 0.0 and _uniform(state) < 0.5) or \
                (de > 0.0 and _uniform(state) < np.exp(-beta * de)):
            s[i] = -s[i]
            two_s = 2.0 * s[i]
            for k in range(indptr[i], indptr[i + 1]):
                field[indices[k]] += two_s * weights[k]


@njit(cache=True, nogil=True)
def sa_anneal(indptr, indices, weights, h, betas, seeds, out, trace):
    """One anneal per seed; final states go to ``out`` rows.

    ``trace`` (length ``len(betas)`` or 0) receives the state code of the first
    read after every sweep.
    """
    n = h.size
    field = np.empty(n)
    state = np.empty(1, dtype=np.uint64)
    s = np.empty(n, dtype=np.int8)
    for r in range(seeds.size):
        state[0] = seeds[r]
        _random_spins(state, s)
        for t in range(betas.size):
            _metropolis_pass(indptr, indices, weights, h, s, field, betas[t], state)
            if r == 0 and trace.size:
                trace[t] = _state_code(s)
        out[r, :] = s


@njit(cache=True)
def flood_flip(indptr, indices, s1, s2, start, mark, stack):
    """Flip the connected cluster of sites where ``s1 != s2`` that contains ``start``.

    Returns the cluster size. ``mark`` and ``stack`` are caller-provided scratch.
    """
    mark[:] = False
    mark[start] = True
    stack[0] = start
    top = 1
    size = 0
    while top:
        top -= 1
        i = stack[top]
        size += 1
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            if not mark[j] and s1[j] != s2[j]:
                mark[j] = True
                stack[top] = j
                top += 1
    for i in range(s1.size):
        if mark[i]:
            s1[i] = -s1[i]
            s2[i] = -s2[i]
    return size


@njit(cache=True)
def _icm(indptr, indices, s1, s2, mark, stack, sites, state):
    m = 0
    for i in range(s1.size):
        if s1[i] != s2[i]:
            sites[m] = i
            m += 1
    if m == 0:
        return 0
    return flood_flip(indptr, indices, s1, s2, sites[_randint(state, m)], mark, stack)


@njit(cache=True)
def _track(elite_e, elite_s, count, e, s, tol):
    k = count[0]
    cap = elite_e.size
    worst = -1
    if k == cap:
        worst = 0
        for a in range(1, cap):
            if elite_e[a] > elite_e[worst]:
                worst = a
        if e >= elite_e[worst]:
            return
    for a in range(k):
        if abs(elite_e[a] - e) <= tol:
            same = True
            for i in range(s.size):
                if elite_s[a, i] != s[i]:
                    same = False
                    break
            if same:
                return
    slot = k if worst < 0 else worst
    elite_e[slot] = e
    elite_s[slot, :] = s
    if worst < 0:
        count[0] = k + 1


@njit(cache=True, nogil=True)
def pticm_run(indptr, indices, weights, h, betas, num_chains, num_sweeps, icm,
              tracked_from, elite_e, elite_s, elite_count, seed, trace, tol):
    """Parallel tempering with optional isoenergetic cluster moves.

    Temperatures are indexed by ascending beta; ``num_chains`` chains (1 or 2)
    run at every temperature. Each sweep: one Metropolis pass per chain,
    adjacent-temperature exchange attempts per chain row, then one cluster
    move per temperature when ``icm``. Temperatures ``t >= tracked_from`` keep
    their lowest-energy distinct states in ``elite_*`` (indexed
    ``[t - tracked_from, chain]``). ``trace`` receives the state code of chain 0
    at the coldest temperature after every sweep.
    """
    n = h.size
    nt = betas.size
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed
    spins = np.empty((nt, num_chains, n), dtype=np.int8)
    energy = np.empty((nt, num_chains))
    field = np.empty(n)
    tmp = np.empty(n, dtype=np.int8)
    mark = np.empty(n, dtype=np.bool_)
    stack = np.empty(max(n, 1), dtype=np.int64)
    sites = np.empty(max(n, 1), dtype=np.int64)
    for t in range(nt):
        for c in range(num_chains):
            _random_spins(state, spins[t, c])

    for sweep in range(num_sweeps):
        for t in range(nt):
            for c in range(num_chains):
                _metropolis_pass(indptr, indices, weights, h, spins[t, c], field, betas[t], state)
                energy[t, c] = _energy(indptr, indices, weights, h, spins[t, c])
        for c in range(num_chains):
            for t in range(nt - 1):
                x = (betas[t + 1] - betas[t]) * (energy[t + 1, c] - energy[t, c])
                if x >= 0.0 or _uniform(state) < np.exp(x):
                    tmp[:] = spins[t, c]
                    spins[t, c] = spins[t + 1, c]
                    spins[t + 1, c] = tmp
                    e = energy[t, c]
                    energy[t, c] = energy[t + 1, c]
                    energy[t + 1, c] = e
        if icm and num_chains == 2:
            for t in range(nt):
                if _icm(indptr, indices, spins[t, 0], spins[t, 1], mark, stack, sites, state):
                    energy[t, 0] = _energy(indptr, indices, weights, h, spins[t, 0])
                    energy[t, 1] = _energy(indptr, indices, weights, h, spins[t, 1])
        for t in range(tracked_from, nt):
            for c in range(num_chains):
                a = t - tracked_from
                _track(elite_e[a, c], elite_s[a, c], elite_count[a, c:c + 1],
                       energy[t, c], spins[t, c], tol)
        if trace.size:
            trace[sweep] = _state_code(spins[nt - 1, 0])
