"""Forcing signals for the DAE solver.

Three kinds: piecewise polynomial (exact derivatives, the preferred path),
sampled on a uniform grid (4th-order finite-difference derivatives, limited
smoothness), and callable (user-supplied derivative functions).
"""

import numpy as np

from .exceptions import InsufficientSmoothness

__all__ = [
    "ForcingSignal",
    "PolynomialForcing",
    "SampledForcing",
    "CallableForcing",
    "zero_forcing",
]


class ForcingSignal:
    """Common interface: value(t), derivative(t, order), max_derivative_order."""

    kind = "abstract"
    dim = 0
    max_derivative_order = 0

    def value(self, t):
        raise NotImplementedError

    def derivative(self, t, order):
        raise NotImplementedError

    def require_order(self, order):
        if order > self.max_derivative_order:
            raise InsufficientSmoothness(order, self.max_derivative_order)


class PolynomialForcing(ForcingSignal):
    """Piecewise polynomial with exact derivatives.

    breakpoints t_0 < ... < t_m delimit the pieces; coeffs[i] is an
    (n, d_i+1) array of vector coefficients in the local variable s = t - t_i:
    f(t) = sum_j coeffs[i][:, j] s^j.
    """

    kind = "piecewise-polynomial"
    max_derivative_order = 10 ** 6  # effectively unlimited

    def __init__(self, breakpoints, coeffs):
        self.breakpoints = np.asarray(breakpoints, dtype=float)
        if self.breakpoints.size < 2 or np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing, >= 2")
        if len(coeffs) != self.breakpoints.size - 1:
            raise ValueError("need one coefficient block per piece")
        self.coeffs = [np.atleast_2d(np.asarray(c, dtype=complex))
                       for c in coeffs]
        dims = {c.shape[0] for c in self.coeffs}
        if len(dims) != 1:
            raise ValueError("pieces must share the vector dimension")
        self.dim = dims.pop()

    @classmethod
    def from_coeffs(cls, coeffs, t_f, t_0=0.0):
        """Single-piece polynomial on [t_0, t_f]."""
        return cls([t_0, t_f], [coeffs])

    @classmethod
    def constant(cls, vec, t_f, t_0=0.0):
        v = np.asarray(vec, dtype=complex).reshape(-1, 1)
        return cls([t_0, t_f], [v])

    @classmethod
    def zero(cls, dim, t_f, t_0=0.0):
        return cls.constant(np.zeros(dim), t_f, t_0)

    def piece_index(self, t):
        i = int(np.searchsorted(self.breakpoints, t, side="right") - 1)
        return min(max(i, 0), len(self.coeffs) - 1)

    def _eval_piece(self, i, s, order):
        c = self.coeffs[i]
        d = c.shape[1] - 1
        out = np.zeros(self.dim, dtype=complex)
        for j in range(order, d + 1):
            fac = 1.0
            for q in range(j, j - order, -1):
                fac *= q
            out += fac * c[:, j] * s ** (j - order)
        return out

    def value(self, t):
        i = self.piece_index(t)
        return self._eval_piece(i, t - self.breakpoints[i], 0)

    def derivative(self, t, order):
        i = self.piece_index(t)
        return self._eval_piece(i, t - self.breakpoints[i], order)

    def left_multiplied(self, M):
        """The signal M f(t) for a constant matrix M."""
        return PolynomialForcing(self.breakpoints,
                                 [M @ c for c in self.coeffs])


class SampledForcing(ForcingSignal):
    """Values on a uniform time grid; derivatives via 4th-order stencils.

    Only first and second derivatives are trusted, so solves needing higher
    orders (index >= 3) are refused upstream.
    """

    kind = "sampled"
    max_derivative_order = 2

    def __init__(self, times, values):
        self.times = np.asarray(times, dtype=float)
        self.values = np.atleast_2d(np.asarray(values, dtype=complex))
        if self.values.shape[1] != self.times.size:
            raise ValueError("values must have one column per sample time")
        if self.times.size < 5:
            raise ValueError("need at least 5 samples for the stencils")
        h = np.diff(self.times)
        if not np.allclose(h, h[0], rtol=1e-9, atol=0):
            raise ValueError("sample grid must be uniform")
        self.h = float(h[0])
        self.dim = self.values.shape[0]

    def _nearest(self, t):
        i = int(round((t - self.times[0]) / self.h))
        return min(max(i, 0), self.times.size - 1)

    def value(self, t):
        # cubic interpolation through the 4 nearest samples
        n = self.times.size
        i = self._nearest(t)
        lo = min(max(i - 1, 0), n - 4)
        ts = self.times[lo:lo + 4]
        out = np.zeros(self.dim, dtype=complex)
        for a in range(4):
            w = 1.0
            for b in range(4):
                if b != a:
                    w *= (t - ts[b]) / (ts[a] - ts[b])
            out += w * self.values[:, lo + a]
        return out

    def derivative(self, t, order):
        self.require_order(order)
        if order == 0:
            return self.value(t)
        n = self.times.size
        i = self._nearest(t)
        h = self.h
        v = self.values
        if order == 1:
            if 2 <= i <= n - 3:
                return (-v[:, i + 2] + 8 * v[:, i + 1]
                        - 8 * v[:, i - 1] + v[:, i - 2]) / (12 * h)
            # one-sided 4th-order stencil at the edges
            if i < 2:
                j = i
                return (-25 * v[:, j] + 48 * v[:, j + 1] - 36 * v[:, j + 2]
                        + 16 * v[:, j + 3] - 3 * v[:, j + 4]) / (12 * h)
            j = i
            return (25 * v[:, j] - 48 * v[:, j - 1] + 36 * v[:, j - 2]
                    - 16 * v[:, j - 3] + 3 * v[:, j - 4]) / (12 * h)
        # order == 2
        if 2 <= i <= n - 3:
            return (-v[:, i + 2] + 16 * v[:, i + 1] - 30 * v[:, i]
                    + 16 * v[:, i - 1] - v[:, i - 2]) / (12 * h * h)
        if i < 2:
            j = min(i, n - 4)
            return (2 * v[:, j] - 5 * v[:, j + 1] + 4 * v[:, j + 2]
                    - v[:, j + 3]) / (h * h)
        j = i
        return (2 * v[:, j] - 5 * v[:, j - 1] + 4 * v[:, j - 2]
                - v[:, j - 3]) / (h * h)


class CallableForcing(ForcingSignal):
    """f given as a function of t, optionally with derivative functions."""

    kind = "callable"

    def __init__(self, dim, fn, derivatives=()):
        self.dim = dim
        self.fn = fn
        self.derivs = list(derivatives)
        self.max_derivative_order = len(self.derivs)

    def value(self, t):
        return np.asarray(self.fn(t), dtype=complex).reshape(-1)

    def derivative(self, t, order):
        if order == 0:
            return self.value(t)
        self.require_order(order)
        return np.asarray(self.derivs[order - 1](t), dtype=complex).reshape(-1)


def zero_forcing(dim, t_f):
    return PolynomialForcing.zero(dim, t_f)
