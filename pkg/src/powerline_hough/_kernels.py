"""Compiled inner loops.

Kept free of package imports so numba can cache them independently.
"""

import math

import numba
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_UNIT = 1.0 / 9007199254740992.0


@numba.njit(cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@numba.njit(cache=True)
def _pair_params(x1, y1, x2, y2):
    theta = math.atan2(-(x2 - x1), y2 - y1)
    if theta < 0.0:
        theta += math.pi
    if theta >= math.pi:
        theta -= math.pi
    return theta, x1 * math.cos(theta) + y1 * math.sin(theta)


@numba.njit(cache=True)
def rht_accumulate(xs, ys, n_samples, seed, eps_theta, eps_rho, cell_theta, cell_rho, rho_max):
    """Sequential two-point voting into a sparse list of running-mean entries.

    Each sample joins the earliest-created entry whose current mean is within
    (eps_theta, eps_rho), wrap-aware, or starts a new entry.  A uniform grid of
    cells no smaller than the tolerances limits each lookup to 3x3 cells.
    """
    n = xs.shape[0]
    # equal theta cells no narrower than requested, so wrap neighbours stay adjacent
    n_ct = max(1, int(math.floor(math.pi / cell_theta)))
    cell_theta = math.pi / n_ct
    n_cr = int(math.ceil(2.0 * rho_max / cell_rho)) + 1
    head = np.full((n_ct, n_cr), -1, dtype=np.int64)
    nxt = np.full(n_samples, -1, dtype=np.int64)
    cell_t = np.empty(n_samples, dtype=np.int64)
    cell_r = np.empty(n_samples, dtype=np.int64)
    th = np.empty(n_samples, dtype=np.float64)
    rh = np.empty(n_samples, dtype=np.float64)
    votes = np.zeros(n_samples, dtype=np.int64)
    count = 0
    state = np.uint64(seed)
    for _ in range(n_samples):
        state = state + _GOLDEN
        i = int(float(_mix(state) >> _S11) * _UNIT * n)
        state = state + _GOLDEN
        j = int(float(_mix(state) >> _S11) * _UNIT * (n - 1))
        if j >= i:
            j += 1
        theta, rho = _pair_params(float(xs[i]), float(ys[i]), float(xs[j]), float(ys[j]))
        tc = min(int(theta / cell_theta), n_ct - 1)

        best = -1
        best_flip = False
        for dt in range(-1, 2):
            t2 = tc + dt
            flip = False
            if t2 < 0:
                t2 += n_ct
                flip = True
            elif t2 >= n_ct:
                t2 -= n_ct
                flip = True
            if flip:
                st = theta + math.pi if dt < 0 else theta - math.pi
                sr = -rho
            else:
                st = theta
                sr = rho
            rc = int(math.floor((sr + rho_max) / cell_rho))
            for dr in range(-1, 2):
                r2 = rc + dr
                if r2 < 0 or r2 >= n_cr:
                    continue
                e = head[t2, r2]
                while e >= 0:
                    if abs(th[e] - st) <= eps_theta and abs(rh[e] - sr) <= eps_rho:
                        if best < 0 or e < best:
                            best = e
                            best_flip = flip
                    e = nxt[e]

        if best < 0:
            e = count
            count += 1
            th[e] = theta
            rh[e] = rho
            votes[e] = 1
            rc = min(max(int(math.floor((rho + rho_max) / cell_rho)), 0), n_cr - 1)
            cell_t[e] = tc
            cell_r[e] = rc
            nxt[e] = head[tc, rc]
            head[tc, rc] = e
            continue

        e = best
        if best_flip:
            st = theta + math.pi if th[e] > theta else theta - math.pi
            sr = -rho
        else:
            st = theta
            sr = rho
        votes[e] += 1
        th[e] += (st - th[e]) / votes[e]
        rh[e] += (sr - rh[e]) / votes[e]
        if th[e] < 0.0:
            th[e] += math.pi
            rh[e] = -rh[e]
        elif th[e] >= math.pi:
            th[e] -= math.pi
            rh[e] = -rh[e]
        nt = min(int(th[e] / cell_theta), n_ct - 1)
        nr = min(max(int(math.floor((rh[e] + rho_max) / cell_rho)), 0), n_cr - 1)
        if nt != cell_t[e] or nr != cell_r[e]:
            # unlink from the old cell's chain, push onto the new one
            ot, orr = cell_t[e], cell_r[e]
            if head[ot, orr] == e:
                head[ot, orr] = nxt[e]
            else:
                p = head[ot, orr]
                while nxt[p] != e:
                    p = nxt[p]
                nxt[p] = nxt[e]
            cell_t[e] = nt
            cell_r[e] = nr
            nxt[e] = head[nt, nr]
            head[nt, nr] = e
    return th[:count].copy(), rh[:count].copy(), votes[:count].copy()


@numba.njit(cache=True)
def longest_runs(mask, x_start, x_end):
    """Per-row longest horizontal run of True within columns [x_start, x_end).

    Returns ``(length, start)`` arrays, start = -1 for empty rows; ties keep
    the leftmost run.
    """
    h = mask.shape[0]
    best_len = np.zeros(h, dtype=np.int64)
    best_start = np.full(h, -1, dtype=np.int64)
    for y in range(h):
        run = 0
        for x in range(x_start, x_end):
            if mask[y, x]:
                run += 1
                if run > best_len[y]:
                    best_len[y] = run
                    best_start[y] = x - run + 1
            else:
                run = 0
    return best_len, best_start


@numba.njit(cache=True)
def strip_runs(mask, bounds):
    """``longest_runs`` for every strip ``[bounds[i], bounds[i + 1])`` in one pass."""
    h = mask.shape[0]
    n = bounds.size - 1
    best_len = np.zeros((n, h), dtype=np.int64)
    best_start = np.full((n, h), -1, dtype=np.int64)
    for y in range(h):
        for i in range(n):
            run = 0
            for x in range(bounds[i], bounds[i + 1]):
                if mask[y, x]:
                    run += 1
                    if run > best_len[i, y]:
                        best_len[i, y] = run
                        best_start[i, y] = x - run + 1
                else:
                    run = 0
    return best_len, best_start
