"""Pure-python (numpy) lane for the hot path kernels.

The compiled extension `parabranch._core` implements the same operations
as single-pass C loops; this module is the fallback selected at import
when the extension is unavailable (see `parabranch._backend`).  Both lanes
consume identical pre-drawn arrays, accumulate in the same order, and
agree to floating round-off (numpy's vector exp may differ from libm by
ulps).
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def walk_levy(dt_arr, cont_inc, jump_inc, b, rec_idx):
    """Walk a piecewise-linear-between-jumps Levy path on its grid.

    Grid points are t_0 = 0 < t_1 < ... < t_n; interval i carries a
    continuous increment cont_inc[i] over length dt_arr[i] and a jump
    jump_inc[i] applied at its right endpoint.  Returns, for each grid
    index in rec_idx, the cadlag path value L and the trapezoid
    accumulation I = int_0^t exp(-b L_s) ds (exact at jump epochs: the
    integrand uses the pre-jump value on the closing side).
    """
    dt_arr = np.asarray(dt_arr, dtype=np.float64)
    cont_inc = np.asarray(cont_inc, dtype=np.float64)
    jump_inc = np.asarray(jump_inc, dtype=np.float64)
    rec_idx = np.asarray(rec_idx, dtype=np.int64)
    n = dt_arr.shape[0]

    # interleave (cont, jump) so the running sum matches the compiled
    # loop's addition order bit-for-bit
    inc2 = np.empty(2 * n, dtype=np.float64)
    inc2[0::2] = cont_inc
    inc2[1::2] = jump_inc
    seq = np.cumsum(inc2)
    l_pre = seq[0::2]    # value at right endpoint, before its jump
    l_post = seq[1::2]   # value at right endpoint, after its jump

    l_left = np.empty(n, dtype=np.float64)
    l_left[0] = 0.0
    l_left[1:] = l_post[:-1]

    areas = 0.5 * (np.exp(-b * l_left) + np.exp(-b * l_pre)) * dt_arr
    i_cum = np.cumsum(areas)

    l_rec = np.empty(rec_idx.shape[0], dtype=np.float64)
    i_rec = np.empty(rec_idx.shape[0], dtype=np.float64)
    for k, idx in enumerate(rec_idx):
        if idx == 0:
            l_rec[k] = 0.0
            i_rec[k] = 0.0
        else:
            l_rec[k] = l_post[idx - 1]
            i_rec[k] = i_cum[idx - 1]
    return l_rec, i_rec
