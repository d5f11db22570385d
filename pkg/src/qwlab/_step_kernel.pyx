# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop for coin-step walk evolution.

Same contract as ``qwlab._step_numpy.evolve_steps``; see there for the
reference semantics.  The walk buffer is ping-ponged against a scratch
array so every step is a single linear pass over the occupied window.
"""

import numpy as np


def evolve_steps(amps, coin, Py_ssize_t steps, Py_ssize_t lo, Py_ssize_t hi):
    """Advance ``amps`` in place by ``steps`` shift∘coin applications.

    ``amps`` is a C-contiguous (2, L) complex128 array whose occupied
    window is [lo, hi].  Requires lo - steps >= 1 and hi + steps <= L - 2
    so the light cone stays inside the buffer.  Returns the new (lo, hi).
    """
    cdef double complex[:, ::1] a = amps
    cdef Py_ssize_t L = a.shape[1]
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if lo - steps < 1 or hi + steps > L - 2:
        raise ValueError("amplitude buffer too small for requested steps")

    scratch = np.zeros((2, L), dtype=np.complex128)
    cdef double complex[:, ::1] b = scratch
    cdef double complex c00 = coin[0, 0]
    cdef double complex c01 = coin[0, 1]
    cdef double complex c10 = coin[1, 0]
    cdef double complex c11 = coin[1, 1]
    cdef double complex[:, ::1] src = a
    cdef double complex[:, ::1] dst = b
    cdef double complex[:, ::1] tmp
    cdef Py_ssize_t s, k
    cdef bint in_scratch = False

    for s in range(steps):
        for k in range(lo - 1, hi + 2):
            dst[0, k] = 0
            dst[1, k] = 0
        for k in range(lo, hi + 1):
            dst[0, k + 1] = c00 * src[0, k] + c01 * src[1, k]
            dst[1, k - 1] = c10 * src[0, k] + c11 * src[1, k]
        tmp = src
        src = dst
        dst = tmp
        in_scratch = not in_scratch
        lo -= 1
        hi += 1

    if in_scratch:
        a[:, :] = src
    return lo, hi
