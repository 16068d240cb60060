"""Compiled amplitude-update kernels.

Each kernel enumerates exactly the basis-index pairs of a gate's active
subspace (all control bits set, target bit 0/1).  Indices are built by
inserting zero bits into a running counter at the involved bit positions
(b0 < b1 < b2 are the bit *values*, i.e. powers of two); the lowest involved
bit makes the inner loop walk contiguous runs.  Serial loops: the arrays are
memory-bound and the host has few cores.
"""

import numba


@numba.njit(cache=True)
def pairs0(a, tb, u00, u01, u10, u11):
    nruns = (a.shape[0] >> 1) // tb
    for r in range(nruns):
        base = (r * tb) << 1
        for off in range(tb):
            i0 = base + off
            i1 = i0 | tb
            x0 = a[i0]
            x1 = a[i1]
            a[i0] = u00 * x0 + u01 * x1
            a[i1] = u10 * x0 + u11 * x1


@numba.njit(cache=True)
def pairs1(a, tb, b0, b1, cmask, u00, u01, u10, u11):
    nruns = (a.shape[0] >> 2) // b0
    for r in range(nruns):
        i = (r * b0) << 1
        lo = i & (b1 - 1)
        base = ((((i - lo) << 1) | lo)) | cmask
        for off in range(b0):
            i0 = base + off
            i1 = i0 | tb
            x0 = a[i0]
            x1 = a[i1]
            a[i0] = u00 * x0 + u01 * x1
            a[i1] = u10 * x0 + u11 * x1


@numba.njit(cache=True)
def pairs2(a, tb, b0, b1, b2, cmask, u00, u01, u10, u11):
    nruns = (a.shape[0] >> 3) // b0
    for r in range(nruns):
        i = (r * b0) << 1
        lo = i & (b1 - 1)
        i = ((i - lo) << 1) | lo
        lo = i & (b2 - 1)
        base = (((i - lo) << 1) | lo) | cmask
        for off in range(b0):
            i0 = base + off
            i1 = i0 | tb
            x0 = a[i0]
            x1 = a[i1]
            a[i0] = u00 * x0 + u01 * x1
            a[i1] = u10 * x0 + u11 * x1


@numba.njit(cache=True)
def diag0(a, tb, d0, d1):
    nruns = (a.shape[0] >> 1) // tb
    for r in range(nruns):
        base = (r * tb) << 1
        for off in range(tb):
            i0 = base + off
            i1 = i0 | tb
            a[i0] = d0 * a[i0]
            a[i1] = d1 * a[i1]


@numba.njit(cache=True)
def diag1(a, tb, b0, b1, cmask, d0, d1):
    nruns = (a.shape[0] >> 2) // b0
    for r in range(nruns):
        i = (r * b0) << 1
        lo = i & (b1 - 1)
        base = ((((i - lo) << 1) | lo)) | cmask
        for off in range(b0):
            i0 = base + off
            i1 = i0 | tb
            a[i0] = d0 * a[i0]
            a[i1] = d1 * a[i1]
