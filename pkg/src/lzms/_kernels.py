"""Compiled numerical kernels: small dense matrix exponential and the
adaptive exponential propagator for generators linear in time.

Everything here works on preallocated workspaces so the inner stepping
loop never touches the allocator; that is what makes 10^5-10^6 steps per
trajectory affordable for 3x3 and 16x16 systems.
"""

import math

import numba as nb
import numpy as np

# Backward-error thresholds for diagonal Pade approximants of degree 3, 5, 7
# (Higham 2005, double precision).
_THETA3 = 1.495585217958292e-2
_THETA5 = 2.539398330063230e-1
_THETA7 = 9.504178996162932e-1

_PADE3 = np.array([120.0, 60.0, 12.0, 1.0])
_PADE5 = np.array([30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0])
_PADE7 = np.array([17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0])

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_NONFINITE = 2


@nb.njit(cache=True)
def _onenorm(A):
    n = A.shape[0]
    best = 0.0
    for j in range(n):
        s = 0.0
        for i in range(n):
            s += abs(A[i, j])
        if s > best:
            best = s
    return best


@nb.njit(cache=True)
def _matmul(A, B, out):
    n = A.shape[0]
    for i in range(n):
        for j in range(n):
            s = 0j
            for k in range(n):
                s += A[i, k] * B[k, j]
            out[i, j] = s


@nb.njit(cache=True)
def _solve_inplace(M, R):
    """Overwrite R with M^{-1} R (partial pivoting); M is destroyed."""
    n = M.shape[0]
    for c in range(n):
        piv = c
        big = abs(M[c, c])
        for r in range(c + 1, n):
            v = abs(M[r, c])
            if v > big:
                big = v
                piv = r
        if piv != c:
            for k in range(n):
                tmp = M[c, k]
                M[c, k] = M[piv, k]
                M[piv, k] = tmp
                tmp = R[c, k]
                R[c, k] = R[piv, k]
                R[piv, k] = tmp
        inv = 1.0 / M[c, c]
        for r in range(c + 1, n):
            f = M[r, c] * inv
            if f != 0:
                for k in range(c, n):
                    M[r, k] -= f * M[c, k]
                for k in range(n):
                    R[r, k] -= f * R[c, k]
    for c in range(n - 1, -1, -1):
        inv = 1.0 / M[c, c]
        for k in range(n):
            s = R[c, k]
            for j in range(c + 1, n):
                s -= M[c, j] * R[j, k]
            R[c, k] = s * inv


@nb.njit(cache=True)
def expm_into(A, out, work):
    """exp(A) into ``out`` by scaling and squaring with a diagonal Pade
    approximant; ``work`` must have shape (6, n, n)."""
    n = A.shape[0]
    norm = _onenorm(A)
    s = 0
    if norm <= _THETA3:
        b = _PADE3
        deg = 3
    elif norm <= _THETA5:
        b = _PADE5
        deg = 5
    else:
        b = _PADE7
        deg = 7
        if norm > _THETA7:
            s = int(math.ceil(math.log2(norm / _THETA7)))
    scale = 1.0 / (2.0 ** s)

    X = work[0]
    X2 = work[1]
    P = work[2]
    U = work[3]
    V = work[4]
    T = work[5]
    for i in range(n):
        for j in range(n):
            X[i, j] = A[i, j] * scale
    _matmul(X, X, X2)

    # U = X * (odd coefficients), V = even coefficients, both as polynomials in X2
    for i in range(n):
        for j in range(n):
            T[i, j] = b[deg] * X2[i, j]
            V[i, j] = b[deg - 1] * X2[i, j]
        T[i, i] += b[deg - 2]
        V[i, i] += b[deg - 3]
    k = deg - 4
    while k >= 1:
        _matmul(T, X2, P)
        for i in range(n):
            for j in range(n):
                T[i, j] = P[i, j]
            T[i, i] += b[k]
        _matmul(V, X2, P)
        for i in range(n):
            for j in range(n):
                V[i, j] = P[i, j]
            V[i, i] += b[k - 1]
        k -= 2
    _matmul(X, T, U)

    # (V - U) R = (V + U)
    for i in range(n):
        for j in range(n):
            P[i, j] = V[i, j] - U[i, j]
            out[i, j] = V[i, j] + U[i, j]
    _solve_inplace(P, out)

    for _ in range(s):
        _matmul(out, out, P)
        for i in range(n):
            for j in range(n):
                out[i, j] = P[i, j]


@nb.njit(cache=True)
def expm(A):
    n = A.shape[0]
    A = np.ascontiguousarray(A).astype(np.complex128)
    out = np.empty((n, n), dtype=np.complex128)
    work = np.empty((6, n, n), dtype=np.complex128)
    expm_into(A, out, work)
    return out


@nb.njit(cache=True)
def _step_generator(M0, M1, t, h, order, G, Mm, C):
    """G = h*M(t+h/2) [+ h^3/12 [M1, M(t+h/2)] for the fourth-order scheme]."""
    n = M0.shape[0]
    tm = t + 0.5 * h
    for i in range(n):
        for j in range(n):
            Mm[i, j] = M0[i, j] + tm * M1[i, j]
    if order == 4:
        _matmul(M1, Mm, G)
        _matmul(Mm, M1, C)
        c = h * h * h / 12.0
        for i in range(n):
            for j in range(n):
                G[i, j] = h * Mm[i, j] + c * (G[i, j] - C[i, j])
    else:
        for i in range(n):
            for j in range(n):
                G[i, j] = h * Mm[i, j]


@nb.njit(cache=True)
def _apply(E, y, out):
    n = E.shape[0]
    for i in range(n):
        s = 0j
        for k in range(n):
            s += E[i, k] * y[k]
        out[i] = s


@nb.njit(cache=True)
def _advance(M0, M1, t, h, order, y, out, G, Mm, C, E, work):
    _step_generator(M0, M1, t, h, order, G, Mm, C)
    expm_into(G, E, work)
    _apply(E, y, out)


@nb.njit(cache=True)
def _hermitize(y, d):
    for i in range(d):
        y[i * d + i] = y[i * d + i].real + 0j
        for j in range(i + 1, d):
            a = 0.5 * (y[i * d + j] + np.conj(y[j * d + i]))
            y[i * d + j] = a
            y[j * d + i] = np.conj(a)


@nb.njit(cache=True)
def propagate_linear(M0, M1, y0, t_out, rtol, atol, h_init, h_max, h_min,
                     order, adaptive, herm_dim, states):
    """Integrate dy/dt = (M0 + t*M1) y from t_out[0] through every t_out[k].

    Each step applies exp(G) with G the exponential-midpoint (order 2) or
    fourth-order Magnus generator; both are exact-in-structure for a
    generator linear in t. In adaptive mode the local error is estimated by
    step doubling and the two-half-step result is kept. ``states[k]`` receives
    y(t_out[k]). ``herm_dim > 0`` treats y as a row-major herm_dim x
    herm_dim density matrix and re-symmetrizes it after every step.

    Returns (status, t, h, accepted_steps, rejected_steps).
    """
    n = M0.shape[0]
    G = np.empty((n, n), dtype=np.complex128)
    Mm = np.empty((n, n), dtype=np.complex128)
    C = np.empty((n, n), dtype=np.complex128)
    E = np.empty((n, n), dtype=np.complex128)
    work = np.empty((6, n, n), dtype=np.complex128)
    y = y0.copy()
    y_full = np.empty(n, dtype=np.complex128)
    y_mid = np.empty(n, dtype=np.complex128)
    y_half = np.empty(n, dtype=np.complex128)

    for i in range(n):
        states[0, i] = y[i]
    t = t_out[0]
    h = min(h_init, h_max)
    accepted = 0
    rejected = 0
    denom = 2.0 ** order - 1.0
    expo = 1.0 / (order + 1.0)

    for k in range(1, t_out.shape[0]):
        t_end = t_out[k]
        if not adaptive:
            seg = t_end - t
            nsub = int(math.ceil(seg / h_max - 1e-9))
            if nsub < 1:
                nsub = 1
            hs = seg / nsub
            for m in range(nsub):
                _advance(M0, M1, t, hs, order, y, y_full, G, Mm, C, E, work)
                for i in range(n):
                    y[i] = y_full[i]
                if herm_dim > 0:
                    _hermitize(y, herm_dim)
                t = t_out[k - 1] + (m + 1) * hs
                accepted += 1
            t = t_end
        else:
            while t < t_end:
                last = False
                h_try = h
                if t + h_try >= t_end:
                    h_try = t_end - t
                    last = True
                _advance(M0, M1, t, h_try, order, y, y_full, G, Mm, C, E, work)
                _advance(M0, M1, t, 0.5 * h_try, order, y, y_mid, G, Mm, C, E, work)
                _advance(M0, M1, t + 0.5 * h_try, 0.5 * h_try, order, y_mid, y_half,
                         G, Mm, C, E, work)
                err = 0.0
                finite = True
                for i in range(n):
                    d = abs(y_half[i] - y_full[i])
                    if not math.isfinite(d):
                        finite = False
                        break
                    a = abs(y_half[i])
                    b = abs(y[i])
                    sc = atol + rtol * (a if a > b else b)
                    e = d / (denom * sc)
                    if e > err:
                        err = e
                if not finite:
                    return STATUS_NONFINITE, t, h_try, accepted, rejected
                if err <= 1.0:
                    for i in range(n):
                        y[i] = y_half[i]
                    if herm_dim > 0:
                        _hermitize(y, herm_dim)
                    t = t_end if last else t + h_try
                    accepted += 1
                    fac = 5.0 if err < 1e-10 else min(5.0, 0.9 * err ** (-expo))
                    # a step shortened to land on an output time says nothing
                    # about the natural step size
                    if not last or h_try * fac > h:
                        h = h_try * fac
                else:
                    rejected += 1
                    h = h_try * max(0.2, 0.9 * err ** (-expo))
                    if h < h_min:
                        return STATUS_STEP_UNDERFLOW, t, h, accepted, rejected
                if h > h_max:
                    h = h_max
        for i in range(n):
            states[k, i] = y[i]
    return STATUS_OK, t, h, accepted, rejected
