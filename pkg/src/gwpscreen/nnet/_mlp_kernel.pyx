# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled training kernel.

Same parameter layout and arithmetic as ``_fallback``: layer ``l`` stores a
row-major ``fan_out x fan_in`` weight block followed by ``fan_out`` biases.
Matrix products go through BLAS ``dgemm`` on column-major views of the
row-major buffers.  Activations call NumPy's own float64 ``tanh`` and
``exp`` loops, so they match the fallback bit for bit and keep its SIMD
speed.
"""

from libc.math cimport fabs, sqrt, pow
from libc.stdlib cimport free, malloc
from scipy.linalg.cython_blas cimport dgemm

cimport numpy as cnp
import numpy as np

cnp.import_array()
cnp.import_ufunc()

ctypedef void (*_loop_t)(char**, cnp.npy_intp*, cnp.npy_intp*, void*) noexcept nogil

cdef _loop_t _tanh_loop = NULL
cdef void* _tanh_data = NULL
cdef _loop_t _exp_loop = NULL
cdef void* _exp_data = NULL


cdef int _double_loop(cnp.ufunc uf, _loop_t* fn, void** data) except -1:
    cdef int i
    for i in range(uf.ntypes):
        if uf.types[2 * i] == cnp.NPY_DOUBLE and uf.types[2 * i + 1] == cnp.NPY_DOUBLE:
            fn[0] = <_loop_t> uf.functions[i]
            data[0] = uf.data[i] if uf.data != NULL else NULL
            return 0
    raise ImportError(f"numpy.{uf.__name__} has no float64 loop")


_double_loop(np.tanh, &_tanh_loop, &_tanh_data)
_double_loop(np.exp, &_exp_loop, &_exp_data)


cdef inline void _ufunc(_loop_t fn, void* data, double* buf, long n) noexcept nogil:
    # in place, contiguous
    cdef char* args[2]
    cdef cnp.npy_intp dims[1]
    cdef cnp.npy_intp steps[2]
    args[0] = <char*> buf
    args[1] = <char*> buf
    dims[0] = n
    steps[0] = sizeof(double)
    steps[1] = sizeof(double)
    fn(args, dims, steps, data)


cdef inline void _activate(double* c, long n, int code, double* tmp) noexcept nogil:
    cdef long r
    if code == 0:
        _ufunc(_tanh_loop, _tanh_data, c, n)
        return
    # stable sigmoid from e = exp(-|z|), as in the fallback
    for r in range(n):
        tmp[r] = -fabs(c[r])
    _ufunc(_exp_loop, _exp_data, tmp, n)
    for r in range(n):
        if c[r] >= 0:
            c[r] = 1.0 / (1.0 + tmp[r])
        else:
            c[r] = tmp[r] / (1.0 + tmp[r])


cdef inline void _mm_nt(int rows, int cols, int inner, double* a, double* w, double* c, double beta) noexcept nogil:
    # row-major C(rows x cols) = A(rows x inner) @ W(cols x inner)^T + beta*C
    cdef char ta = b'T'
    cdef char tb = b'N'
    cdef double one = 1.0
    dgemm(&ta, &tb, &cols, &rows, &inner, &one, w, &inner, a, &inner, &beta, c, &cols)


cdef inline void _mm_tn(int rows, int cols, int inner, double* d, double* a, double* g) noexcept nogil:
    # row-major G(rows x cols) = D(inner x rows)^T @ A(inner x cols)
    cdef char ta = b'N'
    cdef char tb = b'T'
    cdef double one = 1.0
    cdef double zero = 0.0
    dgemm(&ta, &tb, &cols, &rows, &inner, &one, a, &cols, d, &rows, &zero, g, &cols)


cdef inline void _mm_nn(int rows, int cols, int inner, double* d, double* w, double* p) noexcept nogil:
    # row-major P(rows x cols) = D(rows x inner) @ W(inner x cols)
    cdef char ta = b'N'
    cdef char tb = b'N'
    cdef double one = 1.0
    cdef double zero = 0.0
    dgemm(&ta, &tb, &cols, &rows, &inner, &one, w, &cols, d, &inner, &zero, p, &cols)


cdef double _gradient(
    double* theta, double* grad, long* layout, int nl,
    double* acts, long* act_off, double* y, int b, int code,
    double* d1, double* d2,
) noexcept nogil:
    cdef int l, r, j, fan_in, fan_out
    cdef long off = 0
    cdef long* woff = <long*> malloc(nl * sizeof(long))
    cdef double* a
    cdef double* c
    cdef double* tmp
    cdef double* bias
    cdef double loss = 0.0
    cdef double diff, s, av
    for l in range(nl):
        woff[l] = off
        off += layout[2 * l] * layout[2 * l + 1] + layout[2 * l + 1]
    # forward
    for l in range(nl):
        fan_in = <int> layout[2 * l]
        fan_out = <int> layout[2 * l + 1]
        a = acts + act_off[l]
        c = acts + act_off[l + 1]
        bias = theta + woff[l] + fan_in * fan_out
        for r in range(b):
            for j in range(fan_out):
                c[r * fan_out + j] = bias[j]
        _mm_nt(b, fan_out, fan_in, a, theta + woff[l], c, 1.0)
        if l < nl - 1:
            # d2 is free until the backward pass and holds batch x width doubles
            _activate(c, b * fan_out, code, d2)
    c = acts + act_off[nl]
    for r in range(b):
        diff = c[r] - y[r]
        loss += diff * diff
        d1[r] = 2.0 * diff / b
    loss /= b
    # backward
    for l in range(nl - 1, -1, -1):
        fan_in = <int> layout[2 * l]
        fan_out = <int> layout[2 * l + 1]
        a = acts + act_off[l]
        _mm_tn(fan_out, fan_in, b, d1, a, grad + woff[l])
        bias = grad + woff[l] + fan_in * fan_out
        for j in range(fan_out):
            s = 0.0
            for r in range(b):
                s += d1[r * fan_out + j]
            bias[j] = s
        if l > 0:
            _mm_nn(b, fan_in, fan_out, d1, theta + woff[l], d2)
            for r in range(b * fan_in):
                av = a[r]
                if code == 0:
                    d2[r] *= 1.0 - av * av
                else:
                    d2[r] *= av * (1.0 - av)
            tmp = d1
            d1 = d2
            d2 = tmp
    free(woff)
    return loss


cdef class _Workspace:
    cdef double* acts
    cdef long* act_off
    cdef double* d1
    cdef double* d2
    cdef long* lay
    cdef int nl

    def __cinit__(self, long[:, ::1] layout, int batch):
        cdef int l
        cdef long width = 1, total = 0
        self.nl = layout.shape[0]
        self.lay = <long*> malloc(2 * self.nl * sizeof(long))
        self.act_off = <long*> malloc((self.nl + 1) * sizeof(long))
        for l in range(self.nl):
            self.lay[2 * l] = layout[l, 0]
            self.lay[2 * l + 1] = layout[l, 1]
            self.act_off[l] = total
            total += batch * layout[l, 0]
            width = max(width, layout[l, 0])
        self.act_off[self.nl] = total
        total += batch * layout[self.nl - 1, 1]
        self.acts = <double*> malloc(total * sizeof(double))
        self.d1 = <double*> malloc(batch * width * sizeof(double))
        self.d2 = <double*> malloc(batch * width * sizeof(double))
        if not (self.acts and self.d1 and self.d2 and self.lay and self.act_off):
            raise MemoryError()

    def __dealloc__(self):
        free(self.acts)
        free(self.act_off)
        free(self.d1)
        free(self.d2)
        free(self.lay)


def gradient(double[::1] theta, long[:, ::1] layout, double[:, ::1] x, double[::1] y, int act, double[::1] grad):
    """Mean-squared error on ``(x, y)``; writes the gradient into ``grad``."""
    cdef int b = x.shape[0]
    cdef int fan_in = x.shape[1]
    cdef _Workspace ws = _Workspace(layout, b)
    cdef int r, j
    for r in range(b):
        for j in range(fan_in):
            ws.acts[r * fan_in + j] = x[r, j]
    with nogil:
        loss = _gradient(&theta[0], &grad[0], ws.lay, ws.nl, ws.acts, ws.act_off, &y[0], b, act, ws.d1, ws.d2)
    return loss


def run_epoch(
    double[::1] theta, double[::1] m, double[::1] v, long t,
    long[:, ::1] layout, double[:, ::1] x, double[::1] y, long[::1] order,
    int batch_size, double lr, double beta1, double beta2, double eps, int act,
):
    """One pass of mini-batch Adam over ``x[order]``; updates in place.

    Returns the size-weighted mean batch loss and the new step count.
    """
    cdef int n = order.shape[0]
    cdef int fan_in = x.shape[1]
    cdef Py_ssize_t p = theta.shape[0]
    cdef _Workspace ws = _Workspace(layout, min(batch_size, n))
    cdef double* grad = <double*> malloc(p * sizeof(double))
    cdef double* yb = <double*> malloc(batch_size * sizeof(double))
    cdef double total = 0.0, loss, c1, c2, g
    cdef int start, b, r, j
    cdef long row
    cdef Py_ssize_t k
    if not grad or not yb:
        raise MemoryError()
    with nogil:
        start = 0
        while start < n:
            b = min(batch_size, n - start)
            for r in range(b):
                row = order[start + r]
                yb[r] = y[row]
                for j in range(fan_in):
                    ws.acts[r * fan_in + j] = x[row, j]
            loss = _gradient(&theta[0], grad, ws.lay, ws.nl, ws.acts, ws.act_off, yb, b, act, ws.d1, ws.d2)
            total += loss * b
            t += 1
            c1 = 1.0 - pow(beta1, <double> t)
            c2 = 1.0 - pow(beta2, <double> t)
            for k in range(p):
                g = grad[k]
                m[k] = beta1 * m[k] + (1.0 - beta1) * g
                v[k] = beta2 * v[k] + (1.0 - beta2) * g * g
                theta[k] -= lr * (m[k] / c1) / (sqrt(v[k] / c2) + eps)
            start += b
    free(grad)
    free(yb)
    return total / n, t
