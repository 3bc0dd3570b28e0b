"""Hot numeric kernels.

Each kernel exists twice: an explicit-loop version compiled with numba
(``*_nb``) and a vectorised numpy version (``*_np``).  The module-level names
without suffix point at whichever backend :mod:`wdnsta._accel` selected.  The
two paths agree to round-off; tests exercise both.

Status codes returned by the hydraulic kernels:

* ``OK`` - converged;
* ``NONCONVERGED`` - iteration budget exhausted or singular Jacobian;
* ``NEEDS_TREE`` - a zero-diameter link lies on the spanning tree, so the
  caller must rebuild the decomposition for that design;
* ``DISCONNECTED`` - set by callers when the rebuilt graph misses a node.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

OK = 0
NONCONVERGED = 1
NEEDS_TREE = 2
DISCONNECTED = 3


# -- Newton-Raphson on chord flows ------------------------------------------

def newton_chords_np(base, coeff, r, offset, alpha, tol, max_iter, max_halvings, q_eps):
    """Solve coeff.T @ (r*Q*|Q|^(alpha-1) - offset) = 0 with Q = base + coeff @ x.

    Returns ``(x, Q, max_residual, iterations, status)``.
    """
    m = coeff.shape[1]
    x = np.zeros(m)
    q = base.copy()
    if m == 0:
        return x, q, 0.0, 0, OK
    ct = coeff.T

    def residual(q):
        return ct @ (r * q * np.abs(q) ** (alpha - 1.0) - offset)

    f = residual(q)
    fnorm = np.abs(f).max()
    it = 0
    while fnorm > tol and it < max_iter:
        g = alpha * r * (np.abs(q) + q_eps) ** (alpha - 1.0)
        jac = ct @ (g[:, None] * coeff)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            return x, q, fnorm, it, NONCONVERGED
        f2 = f @ f
        lam = 1.0
        for _ in range(max_halvings + 1):
            xn = x + lam * step
            qn = base + coeff @ xn
            fn = residual(qn)
            if fn @ fn < f2:
                break
            lam *= 0.5
        x, q, f = xn, qn, fn
        fnorm = np.abs(f).max()
        it += 1
    return x, q, fnorm, it, (OK if fnorm <= tol else NONCONVERGED)


@njit
def _residual_nb(base, row_ptr, row_col, row_val, pos, r, offset, alpha, x, q, h, f):
    n = base.shape[0]
    for c in range(f.shape[0]):
        f[c] = 0.0
    for j in range(n):
        s = base[j]
        for t in range(row_ptr[j], row_ptr[j + 1]):
            p = pos[row_col[t]]
            if p >= 0:
                s += row_val[t] * x[p]
        q[j] = s
        h[j] = r[j] * s * abs(s) ** (alpha - 1.0) - offset[j]
        for t in range(row_ptr[j], row_ptr[j + 1]):
            p = pos[row_col[t]]
            if p >= 0:
                f[p] += row_val[t] * h[j]


@njit
def _cholesky_solve_nb(a, b, out):
    """Solve a @ out = b for symmetric positive definite ``a``; False if not SPD."""
    m = a.shape[0]
    lo = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1):
            s = a[i, j]
            for k in range(j):
                s -= lo[i, k] * lo[j, k]
            if i == j:
                if not s > 0.0:
                    return False
                lo[i, i] = np.sqrt(s)
            else:
                lo[i, j] = s / lo[j, j]
    y = np.empty(m)
    for i in range(m):
        s = b[i]
        for k in range(i):
            s -= lo[i, k] * y[k]
        y[i] = s / lo[i, i]
    for i in range(m - 1, -1, -1):
        s = y[i]
        for k in range(i + 1, m):
            s -= lo[k, i] * out[k]
        out[i] = s / lo[i, i]
    return True


@njit
def newton_sparse_nb(base, row_ptr, row_col, row_val, pos, m, r, offset, alpha,
                     tol, max_iter, max_halvings, q_eps):
    """Loop version of :func:`newton_chords_np` on a row-compressed ``coeff``.

    ``pos[c]`` maps full chord column ``c`` to its slot among the ``m`` open
    chords, or -1 for a closed chord (its flow is pinned at zero).
    """
    n = base.shape[0]
    x = np.zeros(m)
    q = np.empty(n)
    h = np.empty(n)
    f = np.empty(m)
    _residual_nb(base, row_ptr, row_col, row_val, pos, r, offset, alpha, x, q, h, f)
    if m == 0:
        return x, q, 0.0, 0, OK
    fnorm = 0.0
    for c in range(m):
        fnorm = max(fnorm, abs(f[c]))
    xn = np.empty(m)
    qn = np.empty(n)
    fn = np.empty(m)
    jac = np.empty((m, m))
    step = np.empty(m)
    rhs = np.empty(m)
    it = 0
    while fnorm > tol and it < max_iter:
        jac[:, :] = 0.0
        for j in range(n):
            g = alpha * r[j] * (abs(q[j]) + q_eps) ** (alpha - 1.0)
            for t in range(row_ptr[j], row_ptr[j + 1]):
                a = pos[row_col[t]]
                if a < 0:
                    continue
                va = row_val[t] * g
                for u in range(row_ptr[j], row_ptr[j + 1]):
                    b = pos[row_col[u]]
                    if b >= 0:
                        jac[a, b] += va * row_val[u]
        for c in range(m):
            rhs[c] = -f[c]
        if not _cholesky_solve_nb(jac, rhs, step):
            return x, q, fnorm, it, NONCONVERGED
        f2 = 0.0
        for c in range(m):
            f2 += f[c] * f[c]
        lam = 1.0
        for _ in range(max_halvings + 1):
            for c in range(m):
                xn[c] = x[c] + lam * step[c]
            _residual_nb(base, row_ptr, row_col, row_val, pos, r, offset, alpha, xn, qn, h, fn)
            fn2 = 0.0
            for c in range(m):
                fn2 += fn[c] * fn[c]
            if fn2 < f2:
                break
            lam *= 0.5
        fnorm = 0.0
        for c in range(m):
            x[c] = xn[c]
            f[c] = fn[c]
            fnorm = max(fnorm, abs(f[c]))
        for j in range(n):
            q[j] = qn[j]
        it += 1
    status = OK if fnorm <= tol else NONCONVERGED
    return x, q, fnorm, it, status


def to_csr(coeff):
    """Row-compressed (row_ptr, col, val) view of a dense coefficient matrix."""
    coeff = np.asarray(coeff, dtype=np.float64)
    rows, cols = np.nonzero(coeff)
    row_ptr = np.zeros(coeff.shape[0] + 1, dtype=np.int64)
    np.add.at(row_ptr, rows + 1, 1)
    return np.cumsum(row_ptr), cols.astype(np.int64), coeff[rows, cols].copy()


def newton_chords_nb(base, coeff, r, offset, alpha, tol, max_iter, max_halvings, q_eps):
    row_ptr, row_col, row_val = to_csr(coeff)
    m = coeff.shape[1]
    return newton_sparse_nb(np.ascontiguousarray(base, dtype=np.float64), row_ptr, row_col, row_val,
                            np.arange(m, dtype=np.int64), m,
                            np.ascontiguousarray(r, dtype=np.float64),
                            np.ascontiguousarray(offset, dtype=np.float64),
                            alpha, tol, max_iter, max_halvings, q_eps)


# -- head walk along the spanning tree ---------------------------------------

@njit
def head_walk(n_nodes, res_nodes, res_heads, tree_link, tree_parent, tree_child,
              tree_sign, r, q, alpha):
    """Total heads from reservoir heads minus losses along tree links (BFS order)."""
    heads = np.full(n_nodes, np.nan)
    for k in range(res_nodes.shape[0]):
        heads[res_nodes[k]] = res_heads[k]
    for k in range(tree_link.shape[0]):
        j = tree_link[k]
        loss = r[j] * q[j] * abs(q[j]) ** (alpha - 1.0)
        heads[tree_child[k]] = heads[tree_parent[k]] - tree_sign[k] * loss
    return heads


# -- batch evaluation of candidate designs ----------------------------------

@njit
def evaluate_batch_nb(idx, dec_link, link_k, link_d, cat_d, cat_cost, dec_len,
                      base, coeff, row_ptr, row_col, row_val, chord_link, offset,
                      res_nodes, res_heads, tree_link, tree_parent, tree_child, tree_sign,
                      junctions, required, alpha, beta, rho,
                      tol, max_iter, max_halvings, q_eps):
    """Cost, summed deficit**rho and solver status for each row of ``idx`` (0-based)."""
    n_cand = idx.shape[0]
    n_dec = idx.shape[1]
    n_links = link_k.shape[0]
    m = chord_link.shape[0]
    n_nodes = required.shape[0]
    objective = np.zeros(n_cand)
    violation = np.zeros(n_cand)
    status = np.zeros(n_cand, dtype=np.int64)
    iters = np.zeros(n_cand, dtype=np.int64)
    is_chord = np.zeros(n_links, dtype=np.bool_)
    for c in range(m):
        is_chord[chord_link[c]] = True
    d = np.empty(n_links)
    r = np.empty(n_links)
    pos = np.empty(m, dtype=np.int64)
    for i in range(n_cand):
        for j in range(n_links):
            d[j] = link_d[j]
        cost = 0.0
        for k in range(n_dec):
            d[dec_link[k]] = cat_d[idx[i, k]]
            cost += dec_len[k] * cat_cost[idx[i, k]]
        objective[i] = cost
        broken = False
        for j in range(n_links):
            if d[j] > 0.0:
                r[j] = link_k[j] / d[j] ** beta
            else:
                r[j] = 0.0
                if not is_chord[j]:
                    broken = True
        if broken:
            status[i] = NEEDS_TREE
            continue
        n_act = 0
        for c in range(m):
            if d[chord_link[c]] > 0.0:
                pos[c] = n_act
                n_act += 1
            else:
                pos[c] = -1
        x, q, res, it, st = newton_sparse_nb(base, row_ptr, row_col, row_val, pos, n_act, r,
                                             offset, alpha, tol, max_iter, max_halvings, q_eps)
        status[i] = st
        iters[i] = it
        if st != OK:
            continue
        heads = head_walk(n_nodes, res_nodes, res_heads, tree_link, tree_parent,
                          tree_child, tree_sign, r, q, alpha)
        v = 0.0
        for t in range(junctions.shape[0]):
            node = junctions[t]
            deficit = required[node] - heads[node]
            if deficit > 0.0:
                v += deficit ** rho
        violation[i] = v
    return objective, violation, status, iters


def evaluate_batch_np(idx, dec_link, link_k, link_d, cat_d, cat_cost, dec_len,
                      base, coeff, row_ptr, row_col, row_val, chord_link, offset,
                      res_nodes, res_heads, tree_link, tree_parent, tree_child, tree_sign,
                      junctions, required, alpha, beta, rho,
                      tol, max_iter, max_halvings, q_eps):
    n_cand = idx.shape[0]
    objective = cat_cost[idx] @ dec_len
    violation = np.zeros(n_cand)
    status = np.zeros(n_cand, dtype=np.int64)
    iters = np.zeros(n_cand, dtype=np.int64)
    d = np.tile(link_d, (n_cand, 1))
    d[:, dec_link] = cat_d[idx]
    closed = d <= 0.0
    tree_closed = closed.copy()
    tree_closed[:, chord_link] = False
    with np.errstate(divide="ignore"):
        r_all = np.where(closed, 0.0, link_k / np.where(closed, 1.0, d) ** beta)
    for i in range(n_cand):
        if tree_closed[i].any():
            status[i] = NEEDS_TREE
            continue
        keep = ~closed[i, chord_link]
        x, q, res, it, st = newton_chords_np(base, coeff[:, keep], r_all[i], offset, alpha,
                                             tol, max_iter, max_halvings, q_eps)
        status[i] = st
        iters[i] = it
        if st != OK:
            continue
        heads = head_walk(required.shape[0], res_nodes, res_heads, tree_link, tree_parent,
                          tree_child, tree_sign, r_all[i], q, alpha)
        deficit = required[junctions] - heads[junctions]
        violation[i] = np.sum(np.maximum(deficit, 0.0) ** rho)
    return objective, violation, status, iters


# -- Monte Carlo toy problem for the risk/restore probabilities -------------

@njit
def mc_runs_nb(draws, p1, p2):
    """Final archive value f* per run; ``draws`` has shape (runs, iterations, 3)."""
    runs, n_iter = draws.shape[0], draws.shape[1]
    out = np.empty(runs)
    for k in range(runs):
        f_star = 0.5
        f = f_star
        for t in range(n_iter):
            r1 = draws[k, t, 0]
            if f < r1:
                f = r1
            elif draws[k, t, 1] < p2:
                f = r1
            if f_star < f:
                f_star = f
            if draws[k, t, 2] < p1:
                f = f_star
        out[k] = f_star
    return out


def mc_runs_np(draws, p1, p2):
    runs, n_iter = draws.shape[0], draws.shape[1]
    f_star = np.full(runs, 0.5)
    f = f_star.copy()
    for t in range(n_iter):
        r1 = draws[:, t, 0]
        take = (f < r1) | (draws[:, t, 1] < p2)
        f = np.where(take, r1, f)
        f_star = np.maximum(f_star, f)
        f = np.where(draws[:, t, 2] < p1, f_star, f)
    return f_star


if USE_NUMBA:
    newton_chords = newton_chords_nb
    evaluate_batch = evaluate_batch_nb
    mc_runs = mc_runs_nb
else:
    newton_chords = newton_chords_np
    evaluate_batch = evaluate_batch_np
    mc_runs = mc_runs_np
