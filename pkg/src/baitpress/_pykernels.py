"""Pure-Python dual coordinate descent passes (fallback for the C core).

One call runs a single pass over the rows in the given order, updating the
dual variables and the primal weight vector in place, and returns the largest
projected-gradient violation seen. The compiled module `_ckernels` implements
the same contract; `_kernels` picks whichever is available.
"""

from __future__ import annotations

BACKEND = "python"


def svr_pass(indptr, indices, data, qd, y, beta, w, perm, c, epsilon):
    """Epsilon-insensitive L1-loss SVR, duals beta in [-c, c]."""
    max_violation = 0.0
    for i in perm.tolist():
        lo, hi = indptr[i], indptr[i + 1]
        cols = indices[lo:hi]
        vals = data[lo:hi]
        g = float(vals @ w[cols]) - y[i]
        gp = g + epsilon
        gn = g - epsilon
        b = beta[i]

        violation = 0.0
        if b == 0.0:
            if gp < 0.0:
                violation = -gp
            elif gn > 0.0:
                violation = gn
        elif b >= c:
            if gp > 0.0:
                violation = gp
        elif b <= -c:
            if gn < 0.0:
                violation = -gn
        elif b > 0.0:
            violation = abs(gp)
        else:
            violation = abs(gn)
        if violation > max_violation:
            max_violation = violation

        # exact minimizer of the one-variable piecewise quadratic
        if gp < qd[i] * b:
            d = -gp / qd[i]
        elif gn > qd[i] * b:
            d = -gn / qd[i]
        else:
            d = -b
        if abs(d) < 1e-12:
            continue
        nb = min(max(b + d, -c), c)
        if nb != b:
            beta[i] = nb
            w[cols] += (nb - b) * vals
    return max_violation


def svc_pass(indptr, indices, data, qd, y, alpha, w, perm, c):
    """Squared-hinge SVC, duals alpha >= 0; qd already includes + 1/(2c)."""
    max_violation = 0.0
    half_inv_c = 1.0 / (2.0 * c)
    for i in perm.tolist():
        lo, hi = indptr[i], indptr[i + 1]
        cols = indices[lo:hi]
        vals = data[lo:hi]
        yi = y[i]
        a = alpha[i]
        g = yi * float(vals @ w[cols]) - 1.0 + a * half_inv_c

        pg = min(g, 0.0) if a == 0.0 else g
        if abs(pg) > max_violation:
            max_violation = abs(pg)
        if abs(pg) > 1e-12:
            na = max(a - g / qd[i], 0.0)
            if na != a:
                alpha[i] = na
                w[cols] += (na - a) * yi * vals
    return max_violation
