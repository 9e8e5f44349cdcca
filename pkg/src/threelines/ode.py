"""Batched Dormand-Prince 5(4) integration of dF/dz = F A(z) along segments.

Every segment za[i] -> zb[i] is parametrized by t in [0, 1]; each carries its
own step size, so one call integrates many edge propagators at once.
"""

import numpy as np

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


class StepSizeUnderflow(RuntimeError):
    pass


def propagate(coef, za, zb, F0=None, rtol=1e-11, atol=1e-13, h0=0.05, max_steps=100000):
    """Solve dF/dz = F coef(z) along each straight segment.

    ``coef`` maps a 1-d array of points to an array of shape (n, 2, 2).
    Returns the frames at zb, shape (n, 2, 2), and the number of steps.
    """
    za = np.atleast_1d(np.asarray(za, dtype=complex))
    zb = np.atleast_1d(np.asarray(zb, dtype=complex))
    n = za.size
    F = np.broadcast_to(np.eye(2, dtype=complex), (n, 2, 2)).copy() if F0 is None \
        else np.array(F0, dtype=complex).reshape(n, 2, 2)
    dz = zb - za
    t = np.zeros(n)
    h = np.full(n, h0)
    active = np.nonzero(dz != 0)[0]
    steps = 0
    while active.size:
        steps += 1
        if steps > max_steps:
            raise StepSizeUnderflow("step budget exhausted")
        hi = np.minimum(h[active], 1.0 - t[active])
        Fi = F[active]
        K = []
        for s in range(7):
            Y = Fi.copy()
            for j, a in enumerate(_A[s]):
                if a:
                    Y = Y + (hi * a)[:, None, None] * K[j]
            zs = za[active] + (t[active] + _C[s] * hi) * dz[active]
            K.append(Y @ coef(zs) * dz[active][:, None, None])
        Y5 = Fi + sum((hi * b)[:, None, None] * k for b, k in zip(_B5, K) if b)
        err = np.abs(sum((hi * e)[:, None, None] * k for e, k in zip(_E, K) if e))
        scale = atol + rtol * np.maximum(np.abs(Fi), np.abs(Y5))
        enorm = np.sqrt(np.mean((err / scale).reshape(-1, 4) ** 2, axis=1))
        ok = enorm <= 1.0
        idx = active[ok]
        F[idx] = Y5[ok]
        t[idx] = t[idx] + hi[ok]
        fac = np.clip(0.9 * np.where(enorm > 0, enorm, 1e-10) ** -0.2, 0.2, 5.0)
        h[active] = hi * np.where(ok, fac, np.minimum(fac, 1.0))
        if np.any(h[active] < 1e-14):
            raise StepSizeUnderflow("step size underflow (singular point on the path?)")
        active = active[t[active] < 1.0 - 1e-15]
    return F, steps


def propagate_path(coef, path, F0=None, **kw):
    """Frame at the end of a polyline, starting from F0 (identity by default)."""
    path = np.asarray(path, dtype=complex)
    F = np.eye(2, dtype=complex) if F0 is None else np.array(F0, dtype=complex)
    for a, b in zip(path[:-1], path[1:]):
        F = propagate(coef, [a], [b], F0=F[None], **kw)[0][0]
    return F
