# Compiled dual coordinate descent passes; contract mirrors _pykernels.

BACKEND = "cython"


def svr_pass(const long long[::1] indptr, const long long[::1] indices,
             const double[::1] data, const double[::1] qd, const double[::1] y,
             double[::1] beta, double[::1] w, const long long[::1] perm,
             double c, double epsilon):
    cdef double max_violation = 0.0
    cdef double g, gp, gn, b, violation, d, nb
    cdef Py_ssize_t p, i, j, lo, hi
    with nogil:
        for p in range(perm.shape[0]):
            i = <Py_ssize_t> perm[p]
            lo = <Py_ssize_t> indptr[i]
            hi = <Py_ssize_t> indptr[i + 1]

            g = 0.0
            for j in range(lo, hi):
                g += data[j] * w[indices[j]]
            g -= y[i]
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
                violation = gp if gp >= 0.0 else -gp
            else:
                violation = gn if gn >= 0.0 else -gn
            if violation > max_violation:
                max_violation = violation

            if gp < qd[i] * b:
                d = -gp / qd[i]
            elif gn > qd[i] * b:
                d = -gn / qd[i]
            else:
                d = -b
            if d < 1e-12 and d > -1e-12:
                continue
            nb = b + d
            if nb > c:
                nb = c
            elif nb < -c:
                nb = -c
            if nb != b:
                beta[i] = nb
                d = nb - b
                for j in range(lo, hi):
                    w[indices[j]] += d * data[j]
    return max_violation


def svc_pass(const long long[::1] indptr, const long long[::1] indices,
             const double[::1] data, const double[::1] qd, const double[::1] y,
             double[::1] alpha, double[::1] w, const long long[::1] perm,
             double c):
    cdef double max_violation = 0.0
    cdef double half_inv_c = 1.0 / (2.0 * c)
    cdef double g, pg, a, na, d, yi
    cdef Py_ssize_t p, i, j, lo, hi
    with nogil:
        for p in range(perm.shape[0]):
            i = <Py_ssize_t> perm[p]
            lo = <Py_ssize_t> indptr[i]
            hi = <Py_ssize_t> indptr[i + 1]
            yi = y[i]
            a = alpha[i]

            g = 0.0
            for j in range(lo, hi):
                g += data[j] * w[indices[j]]
            g = yi * g - 1.0 + a * half_inv_c

            pg = g
            if a == 0.0 and g > 0.0:
                pg = 0.0
            if pg > max_violation:
                max_violation = pg
            elif -pg > max_violation:
                max_violation = -pg
            if pg > 1e-12 or pg < -1e-12:
                na = a - g / qd[i]
                if na < 0.0:
                    na = 0.0
                if na != a:
                    alpha[i] = na
                    d = (na - a) * yi
                    for j in range(lo, hi):
                        w[indices[j]] += d * data[j]
    return max_violation
