"""Concrete Hadamard-manifold models and their geodesic calculus.

A `SymmetricSpace` is an ordered product of factors:

* ``Euclidean(l)`` -- flat R^l;
* ``Hyperbolic(m, kappa)`` -- the hyperboloid sheet Q(x,x) = -1/kappa^2
  in Minkowski space R^{m,1}, constant curvature -kappa^2;
* ``SPD(n, lam)`` -- unit-determinant symmetric positive-definite n x n
  matrices with metric g = lam * beta, beta the Killing form of sl(n,R)
  (beta(X,Y) = 2n tr(XY) on tangents).

Points and tangents are stored per factor.  All closed forms (exp, log,
transport, exp differential) are exact up to rounding; constraint drift
is repaired by projection after every exp.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm_frechet
from scipy.optimize import minimize

from .errors import (ConfigError, DegeneratePlaneError, InputDomainError,
                     UnsupportedVolumeError)
from .lie_structure import MatrixLieAlgebra, metric_scale_bound, restricted_roots
from .numeric_kernel import spd_inv_sqrt, sym_exp

POINT_TOL = 1e-10
SPD_CURVATURE_MARGIN = 0.05
_SPD_CURVATURE_SAMPLES = 10_000


@dataclass(frozen=True)
class Point:
    """A point of a product space; one array per factor."""
    space: "SymmetricSpace"
    parts: tuple

    def __repr__(self):
        return f"Point({[np.round(p, 6) for p in self.parts]})"


@dataclass(frozen=True)
class Tangent:
    """A tangent vector at `base`; one array per factor."""
    space: "SymmetricSpace"
    base: Point
    parts: tuple


# ---------------------------------------------------------------------------
# factors
# ---------------------------------------------------------------------------

class EuclideanFactor:
    kind = "euclidean"

    def __init__(self, dim: int):
        if dim < 1:
            raise ConfigError("Euclidean factor needs dim >= 1")
        self.dim = dim

    def spec(self):
        return f"euclidean:{self.dim}"

    def origin(self):
        return np.zeros(self.dim)

    def project_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,) or not math.isfinite(float(np.sum(np.abs(x)))):
            raise InputDomainError("invalid Euclidean point")
        return x

    def inner(self, x, u, v):
        return float(np.dot(u, v))

    def exp(self, x, v):
        return x + v

    def exp_raw(self, x, v):
        return x + v

    def log(self, x, y):
        return y - x

    def dist(self, x, y):
        return float(np.linalg.norm(y - x))

    def transport(self, x, y, v):
        return v

    def frame(self, x):
        return [e.copy() for e in np.eye(self.dim)]

    def to_coords(self, x, v):
        return np.asarray(v, dtype=float)

    def from_coords(self, x, c):
        return np.asarray(c, dtype=float)

    def dexp(self, x, v, w):
        return np.asarray(w, dtype=float)

    def curvature_lower_bound(self):
        return 0.0

    def sectional_numerator(self, x, u, v):
        return 0.0

    def check_tangent(self, x, v, tol=POINT_TOL):
        pass

    # Busemann closed forms -------------------------------------------------

    def bus_value(self, o, v, x):
        return -float(np.dot(v, x - o))

    def bus_value_many(self, o, v, xs):
        return -(xs - o) @ v

    def bus_grad(self, o, v, x):
        return -v

    def bus_hess_op(self, o, v, x):
        def apply(w):
            return np.zeros_like(w)
        return apply

    def bus_trunc_value(self, o, v, x, t):
        w = x - o
        num = float(np.dot(w, w)) - 2.0 * t * float(np.dot(w, v))
        return num / (np.linalg.norm(w - t * v) + t)

    def translate(self, o, x, u):
        return -np.asarray(u, dtype=float)

    def ray_time_cap(self, x, v):
        return math.inf

    def ray_log(self, o, x, u, t):
        return (x - t * u) - o

    def dist_many(self, xs, y):
        return np.linalg.norm(xs - y, axis=-1)


class HyperbolicFactor:
    kind = "hyperbolic"

    def __init__(self, dim: int, kappa: float):
        if dim < 2:
            raise ConfigError("Hyperbolic factor needs dim >= 2")
        if not kappa > 0:
            raise ConfigError("Hyperbolic curvature scale must be positive")
        self.dim = dim
        self.kappa = float(kappa)

    def spec(self):
        return f"hyperbolic:{self.dim},kappa={_fmt(self.kappa)}"

    def minkowski(self, x, y):
        return np.sum(x[..., :-1] * y[..., :-1], axis=-1) - x[..., -1] * y[..., -1]

    def origin(self):
        o = np.zeros(self.dim + 1)
        o[-1] = 1.0 / self.kappa
        return o

    def project_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim + 1,) or not np.all(np.isfinite(x)):
            raise InputDomainError("invalid hyperboloid point")
        q = self.minkowski(x, x)
        if q >= 0 or x[-1] <= 0:
            raise InputDomainError("point off the future hyperboloid sheet")
        return x / (self.kappa * np.sqrt(-q))

    def inner(self, x, u, v):
        return float(self.minkowski(u, v))

    def check_tangent(self, x, v, tol=POINT_TOL):
        if abs(self.minkowski(x, v)) > tol * (1.0 + np.linalg.norm(v)):
            raise InputDomainError("tangent not Minkowski-orthogonal to base point")

    def exp(self, x, v):
        k = self.kappa
        t = math.sqrt(max(self.minkowski(v, v), 0.0))
        if t < 1e-300:
            return x.copy()
        y = math.cosh(k * t) * x + (math.sinh(k * t) / (k * t)) * v
        return self.project_point(y)

    def exp_raw(self, x, v):
        """exp without the constraint repair/check.

        Far out on a ray the quadratic-form check loses all precision
        (terms of size e^{2 kappa t}) although the coordinates themselves
        stay accurate to relative rounding; asymptotic-ray evaluation
        uses this path.
        """
        k = self.kappa
        t = math.sqrt(max(self.minkowski(v, v), 0.0))
        if t < 1e-300:
            return x.copy()
        return math.cosh(k * t) * x + (math.sinh(k * t) / (k * t)) * v

    def log(self, x, y):
        k = self.kappa
        z = max(-k * k * self.minkowski(x, y), 1.0)
        d = math.acosh(z) / k
        if d < 1e-300:
            return np.zeros_like(x)
        u = (y - z * x) * (k / math.sinh(k * d))
        return d * u

    def dist(self, x, y):
        z = max(-self.kappa ** 2 * self.minkowski(x, y), 1.0)
        return math.acosh(z) / self.kappa

    def dist_many(self, xs, y):
        z = np.maximum(-self.kappa ** 2 * self.minkowski(xs, y), 1.0)
        return np.arccosh(z) / self.kappa

    def transport(self, x, y, v):
        k2 = self.kappa ** 2
        denom = 1.0 - k2 * self.minkowski(x, y)
        return v + (k2 * self.minkowski(y, v) / denom) * (x + y)

    def frame(self, x):
        k2 = self.kappa ** 2
        frame = []
        for i in range(self.dim):
            e = np.zeros(self.dim + 1)
            e[i] = 1.0
            w = e + k2 * self.minkowski(x, e) * x
            for f in frame:
                w = w - self.minkowski(f, w) * f
            nrm = math.sqrt(self.minkowski(w, w))
            frame.append(w / nrm)
        return frame

    def to_coords(self, x, v):
        f = np.stack(self.frame(x))
        return f[:, :-1] @ v[:-1] - f[:, -1] * v[-1]

    def from_coords(self, x, c):
        return np.asarray(c, dtype=float) @ np.stack(self.frame(x))

    def dexp(self, x, v, w):
        """d/ds exp_x(v + s w) at s = 0 (closed form, stable near v = 0)."""
        k = self.kappa
        t = math.sqrt(max(self.minkowski(v, v), 0.0))
        z = k * t
        qvw = self.minkowski(v, w)
        if z < 1e-4:
            s = 1.0 + z * z / 6.0 + z ** 4 / 120.0
            a1 = k * k * (1.0 + z * z / 6.0)
            a2 = k * k * (1.0 / 3.0 + z * z / 30.0)
        else:
            s = math.sinh(z) / z
            a1 = k * math.sinh(z) / t
            a2 = (k * math.cosh(z) - math.sinh(z) / t) / (k * t * t)
        return a1 * qvw * x + a2 * qvw * v + s * w

    def curvature_lower_bound(self):
        return self.kappa

    def sectional_numerator(self, x, u, v):
        # constant curvature -kappa^2
        g_uu = self.minkowski(u, u)
        g_vv = self.minkowski(v, v)
        g_uv = self.minkowski(u, v)
        return -self.kappa ** 2 * (g_uu * g_vv - g_uv * g_uv)

    # Busemann closed forms (ideal point p = o + v/kappa, Q(p,p) = 0) -------

    def bus_value(self, o, v, x):
        k = self.kappa
        p = o + v / k
        return math.log(-k * k * self.minkowski(x, p)) / k

    def bus_value_many(self, o, v, xs):
        k = self.kappa
        p = o + v / k
        return np.log(-k * k * self.minkowski(xs, p)) / k

    def bus_grad(self, o, v, x):
        k = self.kappa
        p = o + v / k
        return p / (k * self.minkowski(x, p)) + k * x

    def bus_hess_op(self, o, v, x):
        k = self.kappa
        grad = self.bus_grad(o, v, x)

        def apply(w):
            return k * (w - self.minkowski(grad, w) * grad)
        return apply

    def bus_trunc_value(self, o, v, x, t):
        """d(x, gamma_v(t)) - t evaluated in the log domain (no overflow)."""
        k = self.kappa
        a = -k * k * self.minkowski(x, o)
        b = -k * self.minkowski(x, v)
        z_arg = k * t
        if z_arg < 30.0:
            z = math.cosh(z_arg) * a + math.sinh(z_arg) * b
            return math.acosh(max(z, 1.0)) / k - t
        # z = e^{kt}(a+b)/2 + e^{-kt}(a-b)/2 ; acosh(z) = ln z + ln(1+sqrt(1-z^-2))
        ln_z = z_arg + math.log(0.5 * (a + b) + 0.5 * (a - b) * math.exp(-2.0 * z_arg))
        inv_z2 = math.exp(-2.0 * ln_z)
        return (ln_z - z_arg + math.log(1.0 + math.sqrt(max(1.0 - inv_z2, 0.0)))) / k

    def translate(self, o, x, u):
        k = self.kappa
        p = x - u / k  # null vector of the ray exp_x(-t u)
        c = -1.0 / (k * k * self.minkowski(o, p))
        return k * (c * p - o)

    def ray_time_cap(self, x, v):
        # keep cosh(kappa t) squarable in double precision
        return 300.0 / self.kappa

    def ray_log(self, o, x, u, t):
        return self.log(o, self.exp_raw(x, -t * u))


class SPDFactor:
    kind = "spd"

    def __init__(self, n: int, lam: float | None = None):
        if n < 2:
            raise ConfigError("SPD factor needs n >= 2")
        self.n = n
        self.algebra = _sl_algebra(n)
        self.root_datum = restricted_roots(self.algebra)
        if lam is None:
            lam = self.root_datum.max_root_norm ** 2  # makes kappa = 1 (up to margin)
        if not lam > 0:
            raise ConfigError("SPD metric scale must be positive")
        self.lam = float(lam)
        self.dim = n * (n + 1) // 2 - 1
        # g-orthonormal frame of the tangent space at the identity: the
        # beta_theta-orthonormal basis of p, rescaled for g = lam * beta
        self._frame_identity = [2.0 * m / math.sqrt(self.lam)
                                for m in self.algebra.p_basis_matrices()]
        self._p_dim = self.algebra.p_dim

    def spec(self):
        return f"spd:{self.n},lambda={_fmt(self.lam)}"

    def origin(self):
        return np.eye(self.n)

    def project_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n, self.n) or not np.all(np.isfinite(x)):
            raise InputDomainError("invalid SPD point")
        x = 0.5 * (x + x.T)
        w = np.linalg.eigvalsh(x)
        if w[0] <= 0:
            raise InputDomainError("point is not positive definite")
        det = float(np.prod(w))
        return x / det ** (1.0 / self.n)

    def metric_coef(self) -> float:
        """g(u, v) = metric_coef * tr(x^-1 u x^-1 v).

        The factor n*lam/2 makes g the pullback of lam * Killing under the
        symmetric-space identification (algebra tangent X maps to the SPD
        coordinate tangent 2X, since exp(tX) exp(tX)^T = exp(2tX)).
        """
        return 0.5 * self.n * self.lam

    def inner(self, x, u, v):
        xi = np.linalg.inv(x)
        return self.metric_coef() * float(np.trace(xi @ u @ xi @ v))

    def check_tangent(self, x, v, tol=POINT_TOL):
        v = np.asarray(v, dtype=float)
        sym_resid = np.max(np.abs(v - v.T))
        tr_resid = abs(np.trace(np.linalg.solve(x, v)))
        if sym_resid > tol * (1 + np.max(np.abs(v))) or \
           tr_resid > tol * (1 + np.max(np.abs(v))):
            raise InputDomainError("SPD tangent must be symmetric and x^-1-traceless")

    def exp(self, x, v):
        xs, xsi = spd_inv_sqrt(x)
        y = xs @ sym_exp(xsi @ v @ xsi) @ xs
        return self.project_point(y)

    def exp_raw(self, x, v):
        xs, xsi = spd_inv_sqrt(x)
        y = xs @ sym_exp(xsi @ v @ xsi) @ xs
        return 0.5 * (y + y.T)

    def log(self, x, y):
        xs, xsi = spd_inv_sqrt(x)
        m = xsi @ y @ xsi
        w, q = np.linalg.eigh(0.5 * (m + m.T))
        l = (q * np.log(w)) @ q.T
        return xs @ l @ xs

    def dist(self, x, y):
        xs, xsi = spd_inv_sqrt(x)
        m = xsi @ y @ xsi
        w = np.linalg.eigvalsh(0.5 * (m + m.T))
        return math.sqrt(self.metric_coef()) * float(np.linalg.norm(np.log(w)))

    def dist_many(self, xs_stack, y):
        ys, ysi = spd_inv_sqrt(y)
        m = ysi @ xs_stack @ ysi
        m = 0.5 * (m + np.swapaxes(m, -1, -2))
        w = np.linalg.eigvalsh(m)
        return math.sqrt(self.metric_coef()) * np.linalg.norm(np.log(w), axis=-1)

    def transport(self, x, y, v):
        xs, xsi = spd_inv_sqrt(x)
        s = xsi @ y @ xsi
        w, q = np.linalg.eigh(0.5 * (s + s.T))
        half = (q * np.sqrt(w)) @ q.T  # expm(logm(s)/2)
        e = xs @ half @ xsi
        return e @ v @ e.T

    def frame(self, x):
        xs, _ = spd_inv_sqrt(x)
        return [xs @ f @ xs for f in self._frame_identity]

    def to_coords(self, x, v):
        xi = np.linalg.inv(x)
        m = xi @ v @ xi
        return self.metric_coef() * np.tensordot(
            np.stack(self.frame(x)), m, axes=2)

    def from_coords(self, x, c):
        return np.tensordot(np.asarray(c, dtype=float),
                            np.stack(self.frame(x)), axes=1)

    def dexp(self, x, v, w):
        xs, xsi = spd_inv_sqrt(x)
        _, fr = expm_frechet(xsi @ v @ xsi, xsi @ w @ xsi)
        return xs @ fr @ xs

    def curvature_lower_bound(self):
        return _spd_kappa(self.n, self.lam)

    def sectional_numerator(self, x, u, v):
        xsi = spd_inv_sqrt(x)[1]
        u0 = xsi @ u @ xsi
        v0 = xsi @ v @ xsi
        w = u0 @ v0 - v0 @ u0
        return 0.125 * self.n * self.lam * float(np.trace(w @ w))

    # Busemann closed forms (Iwasawa principal-minor formula) ----------------

    def _direction_data(self, o, v):
        """Translate (o, v) to the identity and diagonalize the direction."""
        osq, osi = spd_inv_sqrt(o)
        v0 = osi @ v @ osi
        delta, k = np.linalg.eigh(0.5 * (v0 + v0.T))
        order = np.argsort(delta)[::-1]
        delta, k = delta[order], k[:, order]
        breaks = [i for i in range(self.n - 1) if delta[i] - delta[i + 1] > 1e-12]
        return osq, osi, delta, k, breaks

    def bus_value(self, o, v, x):
        osq, osi, delta, k, breaks = self._direction_data(o, v)
        x0 = osi @ x @ osi
        s = k.T @ np.linalg.inv(x0) @ k
        total = 0.0
        for i in breaks:
            sign, logdet = np.linalg.slogdet(s[:i + 1, :i + 1])
            total += (delta[i] - delta[i + 1]) * logdet
        return self.metric_coef() * total

    def bus_value_many(self, o, v, xs_stack):
        osq, osi, delta, k, breaks = self._direction_data(o, v)
        x0 = osi @ xs_stack @ osi
        s = np.einsum("ij,...jk,kl->...il", k.T, np.linalg.inv(x0), k)
        total = np.zeros(s.shape[:-2])
        for i in breaks:
            _, logdet = np.linalg.slogdet(s[..., :i + 1, :i + 1])
            total = total + (delta[i] - delta[i + 1]) * logdet
        return self.metric_coef() * total

    def bus_grad(self, o, v, x):
        osq, osi, delta, k, breaks = self._direction_data(o, v)
        x0 = osi @ x @ osi
        s = k.T @ np.linalg.inv(x0) @ k
        g0 = np.zeros((self.n, self.n))
        for i in breaks:
            blk = np.zeros((self.n, self.n))
            blk[:i + 1, :i + 1] = np.linalg.inv(s[:i + 1, :i + 1])
            g0 -= (delta[i] - delta[i + 1]) * (k @ blk @ k.T)
        g0 = 0.5 * (g0 + g0.T)
        g = osq @ g0 @ osq
        # the minor formula lives on the det = 1 slice only; remove the
        # component normal to the slice (the trace direction x)
        g = g - (np.trace(np.linalg.solve(x, g)) / self.n) * x
        return g

    def hess_matrix_identity_frame(self, u0):
        """Hessian operator sqrt(ad_u^2)|_p in the identity frame coordinates.

        `u0` is the gradient translated to the identity (g-unit, symmetric
        traceless).  Valid in the frame of `self._frame_identity`; the frame
        at a general point is the isometric pushforward of that frame, in
        which the matrix is unchanged.
        """
        from .numeric_kernel import psd_sqrt
        u_beta = 0.5 * math.sqrt(self.lam) * u0  # beta-unit algebra representative
        ad = self.algebra.ad_matrix_ortho(u_beta)
        a2 = (ad @ ad)[:self._p_dim, :self._p_dim]
        return psd_sqrt(0.5 * (a2 + a2.T)).a / math.sqrt(self.lam)

    def bus_trunc_value(self, o, v, x, t):
        """d(x, gamma_v(t)) - t via overflow-safe log-eigenvalues.

        For n <= 3 the three log-eigenvalues of x0^{-1/2} e^{tV} x0^{-1/2}
        come from lambda_max of the matrix and of its inverse plus the
        unit-determinant constraint; larger n falls back to mpmath.
        """
        osq, osi, delta, k, _ = self._direction_data(o, v)
        x0 = osi @ x @ osi
        x0s, x0si = spd_inv_sqrt(0.5 * (x0 + x0.T))
        scale = math.sqrt(self.metric_coef())
        if self.n <= 3:
            half = np.exp(0.5 * t * delta)
            b = x0si @ k  # m = b e^{t D} b^T,  m^-1 = binv^T e^{-t D} binv
            binv = k.T @ x0s
            m = (b * half) @ (b * half).T
            mi = (binv.T / half) @ (binv.T / half).T
            l1 = math.log(np.linalg.eigvalsh(m)[-1])
            ln = -math.log(np.linalg.eigvalsh(mi)[-1])
            if self.n == 2:
                ls = [l1, -l1]
            else:
                ls = [l1, -l1 - ln, ln]
            d = scale * math.sqrt(sum(v * v for v in ls))
        else:
            d = _mpmath_spd_distance(x0si, k, delta, t, scale)
        return d - t

    def translate(self, o, x, u):
        """Unit direction at o asymptotic to the ray exp_x(t * (-u)).

        After translating o to the identity, the ray is h exp(tD) h^T with
        h = x0^{1/2} k; its ideal class keeps D and replaces h by the
        orthogonal factor of its QR decomposition (the upper-triangular part
        drifts off at bounded distance), giving the ray q exp(tD) q^T from
        the identity with initial direction q D q^T.
        """
        osq, osi = spd_inv_sqrt(o)
        x0 = osi @ x @ osi
        x0s, x0si = spd_inv_sqrt(0.5 * (x0 + x0.T))
        w = -x0si @ (osi @ u @ osi) @ x0si
        dvals, k = np.linalg.eigh(0.5 * (w + w.T))
        order = np.argsort(dvals)[::-1]
        dvals, k = dvals[order], k[:, order]
        q, r = np.linalg.qr(x0s @ k)
        q = q * np.sign(np.diag(r))
        v0 = (q * dvals) @ q.T
        return osq @ v0 @ osq

    def ray_time_cap(self, x, v):
        return math.inf

    def ray_log(self, o, x, u, t):
        """log_o(exp_x(t * (-u))), stable for large t.

        Far ray points have eigenvalue spread e^{t(d_max - d_min)}; past
        the double-precision eigensolver's reliable range the principal
        logarithm is computed in mpmath working precision instead.
        """
        osq, osi = spd_inv_sqrt(o)
        xs, xsi = spd_inv_sqrt(x)
        w = -xsi @ u @ xsi
        dvals, k = np.linalg.eigh(0.5 * (w + w.T))
        spread = t * float(dvals[-1] - dvals[0])
        if spread <= 25.0:
            return self.log(o, self.exp_raw(x, -t * u))
        import mpmath as mp
        b = osi @ xs @ k
        with mp.workdps(int(spread / math.log(10.0)) + 30):
            bm = mp.matrix(b.tolist())
            e = mp.diag([mp.exp(mp.mpf(t) * mp.mpf(float(d))) for d in dvals])
            m = bm * e * bm.T
            wv, q = mp.eigsy((m + m.T) / 2)
            logw = [float(mp.log(wv[i])) for i in range(self.n)]
            qf = np.array(q.tolist(), dtype=float)
        logm = (qf * logw) @ qf.T
        return osq @ (0.5 * (logm + logm.T)) @ osq


def _mpmath_spd_distance(x0si, k, delta, t, scale):
    import mpmath as mp
    n = len(delta)
    spread = float(delta[0] - delta[-1])
    digits = int(t * spread / math.log(10.0)) + 40
    with mp.workdps(digits):
        b = mp.matrix(x0si.tolist()) * mp.matrix(k.tolist())
        e = mp.diag([mp.exp(mp.mpf(t) * mp.mpf(float(dd)) / 2) for dd in delta])
        h = b * e
        m = h * h.T
        w = mp.eigsy(m, eigvals_only=True)
        total = mp.mpf(0)
        for i in range(n):
            total += mp.log(w[i]) ** 2
        return float(scale * mp.sqrt(total))


@lru_cache(maxsize=None)
def _sl_algebra(n: int) -> MatrixLieAlgebra:
    return MatrixLieAlgebra("sl", n)


@lru_cache(maxsize=None)
def _spd_kappa(n: int, lam: float) -> float:
    """Certified-conservative curvature bound for SPD(n, lam).

    Samples 10^4 random 2-planes, refines from the worst by local descent,
    and inflates by a 5% safety margin.
    """
    rng = np.random.default_rng(1234567)
    d = n * n
    xs = rng.standard_normal((_SPD_CURVATURE_SAMPLES, n, n))
    ys = rng.standard_normal((_SPD_CURVATURE_SAMPLES, n, n))

    def to_p(a):
        a = 0.5 * (a + np.swapaxes(a, -1, -2))
        tr = np.trace(a, axis1=-2, axis2=-1) / n
        return a - tr[..., None, None] * np.eye(n)

    xs, ys = to_p(xs), to_p(ys)
    sec = _spd_sec_batch(xs, ys, n, lam)
    worst = int(np.argmin(sec))

    def objective(flat):
        a = to_p(flat[:d].reshape(n, n))
        b = to_p(flat[d:].reshape(n, n))
        s = _spd_sec_batch(a[None], b[None], n, lam)[0]
        return s

    x0 = np.concatenate([xs[worst].ravel(), ys[worst].ravel()])
    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"maxiter": 4000, "xatol": 1e-10, "fatol": 1e-12})
    sec_min = min(float(np.min(sec)), float(res.fun))
    return math.sqrt(max(-sec_min, 0.0)) * (1.0 + SPD_CURVATURE_MARGIN)


def _spd_sec_batch(xs, ys, n, lam):
    w = xs @ ys - ys @ xs
    num = np.einsum("...ij,...ji->...", w, w)
    txx = np.einsum("...ij,...ji->...", xs, xs)
    tyy = np.einsum("...ij,...ji->...", ys, ys)
    txy = np.einsum("...ij,...ji->...", xs, ys)
    gram = txx * tyy - txy * txy
    with np.errstate(divide="ignore", invalid="ignore"):
        sec = num / (lam * 2.0 * n * gram)
    # near-degenerate planes make the ratio pure rounding noise; exclude them
    sec = np.where(gram > 1e-9 * txx * tyy, sec, 0.0)
    return sec


# ---------------------------------------------------------------------------
# product space
# ---------------------------------------------------------------------------

class SymmetricSpace:
    """A finite product of the model factors."""

    def __init__(self, factors):
        factors = list(factors)
        if not factors:
            raise ConfigError("at least one factor is required")
        self.factors = factors
        self.total_dim = sum(f.dim for f in factors)
        if self.total_dim < 2:
            raise ConfigError("total dimension must be at least 2")
        self._kappa = max(f.curvature_lower_bound() for f in factors)
        for f in factors:
            if f.kind == "spd":
                bound = metric_scale_bound(f.root_datum, self._kappa)
                if f.lam < bound * (1.0 - 1e-12):
                    raise ConfigError(
                        f"metric scale {f.lam} below admissible bound {bound}")

    # -- construction and parsing ------------------------------------------

    def spec_string(self) -> str:
        return "x".join(f.spec() for f in self.factors)

    @property
    def curvature_lower_bound(self) -> float:
        """kappa >= 0 with all sectional curvatures >= -kappa^2."""
        return self._kappa

    def constant_curvature_only(self) -> bool:
        return all(f.kind in ("euclidean", "hyperbolic") for f in self.factors)

    # -- points and tangents -------------------------------------------------

    def origin(self) -> Point:
        return Point(self, tuple(f.origin() for f in self.factors))

    def point(self, parts) -> Point:
        parts = tuple(f.project_point(p) for f, p in zip(self.factors, parts))
        if len(parts) != len(self.factors):
            raise InputDomainError("wrong number of factor components")
        return Point(self, parts)

    def tangent(self, base: Point, parts) -> Tangent:
        parts = tuple(np.asarray(p, dtype=float) for p in parts)
        for f, x, v in zip(self.factors, base.parts, parts):
            f.check_tangent(x, v, tol=1e-8)
        return Tangent(self, base, parts)

    def inner(self, u: Tangent, v: Tangent) -> float:
        return sum(f.inner(x, a, b) for f, x, a, b
                   in zip(self.factors, u.base.parts, u.parts, v.parts))

    def norm(self, u: Tangent) -> float:
        return math.sqrt(max(self.inner(u, u), 0.0))

    def scale(self, u: Tangent, c: float) -> Tangent:
        return Tangent(self, u.base, tuple(c * p for p in u.parts))

    def add(self, u: Tangent, v: Tangent) -> Tangent:
        return Tangent(self, u.base, tuple(a + b for a, b in zip(u.parts, v.parts)))

    def zero_tangent(self, x: Point) -> Tangent:
        return Tangent(self, x, tuple(np.zeros_like(p) for p in x.parts))

    # -- geodesic calculus ----------------------------------------------------

    def exp_map(self, x: Point, v: Tangent) -> Point:
        return Point(self, tuple(
            f.project_point(f.exp(xp, vp))
            for f, xp, vp in zip(self.factors, x.parts, v.parts)))

    def exp_map_raw(self, x: Point, v: Tangent) -> Point:
        """exp without per-factor constraint repair (for far ray points)."""
        return Point(self, tuple(
            f.exp_raw(xp, vp)
            for f, xp, vp in zip(self.factors, x.parts, v.parts)))

    def log_map(self, x: Point, y: Point) -> Tangent:
        return Tangent(self, x, tuple(
            f.log(xp, yp) for f, xp, yp in zip(self.factors, x.parts, y.parts)))

    def distance(self, x: Point, y: Point) -> float:
        return math.sqrt(sum(
            f.dist(xp, yp) ** 2
            for f, xp, yp in zip(self.factors, x.parts, y.parts)))

    def distance_many(self, parts_stacks, y: Point):
        """Distances from a stack of points (list of stacked factor arrays)."""
        total = None
        for f, xs, yp in zip(self.factors, parts_stacks, y.parts):
            d = f.dist_many(xs, yp) ** 2
            total = d if total is None else total + d
        return np.sqrt(total)

    def parallel_transport(self, x: Point, y: Point, v: Tangent) -> Tangent:
        return Tangent(self, y, tuple(
            f.transport(xp, yp, vp)
            for f, xp, yp, vp in zip(self.factors, x.parts, y.parts, v.parts)))

    def point_symmetry(self, x: Point, y: Point) -> Point:
        return self.exp_map(x, self.scale(self.log_map(x, y), -1.0))

    def exp_differential(self, x: Point, v: Tangent, w: Tangent) -> Tangent:
        """d/ds exp_x(v + s w) at s = 0, as a tangent at exp_x(v)."""
        y = self.exp_map(x, v)
        return Tangent(self, y, tuple(
            f.dexp(xp, vp, wp)
            for f, xp, vp, wp in zip(self.factors, x.parts, v.parts, w.parts)))

    # -- frames and coordinates ----------------------------------------------

    def frame_at(self, x: Point):
        """Deterministic orthonormal frame of T_xN, factor blocks in order."""
        frame = []
        for i, (f, xp) in enumerate(zip(self.factors, x.parts)):
            for fv in f.frame(xp):
                parts = [np.zeros_like(p) if j != i else fv
                         for j, p in enumerate(x.parts)]
                frame.append(Tangent(self, x, tuple(parts)))
        return frame

    def tangent_to_coords(self, v: Tangent) -> np.ndarray:
        if len(self.factors) == 1:
            return np.atleast_1d(
                self.factors[0].to_coords(v.base.parts[0], v.parts[0]))
        return np.concatenate([
            np.atleast_1d(f.to_coords(xp, vp))
            for f, xp, vp in zip(self.factors, v.base.parts, v.parts)])

    def coords_to_tangent(self, x: Point, c) -> Tangent:
        c = np.asarray(c, dtype=float)
        if len(self.factors) == 1:
            return Tangent(self, x, (self.factors[0].from_coords(x.parts[0], c),))
        parts, k = [], 0
        for f, xp in zip(self.factors, x.parts):
            parts.append(f.from_coords(xp, c[k:k + f.dim]))
            k += f.dim
        return Tangent(self, x, tuple(parts))

    # -- curvature -------------------------------------------------------------

    def sectional_curvature_sample(self, x: Point, u: Tangent, v: Tangent) -> float:
        g_uu = self.inner(u, u)
        g_vv = self.inner(v, v)
        g_uv = self.inner(u, v)
        gram = g_uu * g_vv - g_uv * g_uv
        if gram < 1e-14 * (1.0 + g_uu) * (1.0 + g_vv):
            raise DegeneratePlaneError("tangent vectors are linearly dependent")
        num = sum(f.sectional_numerator(xp, up, vp)
                  for f, xp, up, vp in zip(self.factors, x.parts, u.parts, v.parts))
        return num / gram

    # -- sampling ---------------------------------------------------------------

    def random_tangent(self, x: Point, rng) -> Tangent:
        c = rng.standard_normal(self.total_dim)
        return self.coords_to_tangent(x, c)

    def random_unit_tangent(self, x: Point, rng) -> Tangent:
        v = self.random_tangent(x, rng)
        return self.scale(v, 1.0 / self.norm(v))

    def random_point(self, o: Point, rng, radius: float) -> Point:
        v = self.random_unit_tangent(o, rng)
        r = radius * rng.random() ** (1.0 / self.total_dim)
        return self.exp_map(o, self.scale(v, r))


# ---------------------------------------------------------------------------
# specification grammar
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x)) if x != int(x) else str(int(x))


_FACTOR_RE = re.compile(
    r"^(euclidean|hyperbolic|spd):(\d+)((?:,[a-z]+=[-0-9.eE+]+)*)$")


def parse_space(spec: str) -> SymmetricSpace:
    """Parse the CLI space grammar, e.g. ``hyperbolic:2,kappa=1xeuclidean:1``."""
    factors = []
    for token in spec.strip().split("x"):
        m = _FACTOR_RE.match(token.strip())
        if not m:
            raise ConfigError(f"cannot parse space factor {token!r}")
        kind, dim, opts_str = m.group(1), int(m.group(2)), m.group(3)
        opts = {}
        if opts_str:
            for kv in opts_str.lstrip(",").split(","):
                key, val = kv.split("=")
                opts[key] = float(val)
        if kind == "euclidean":
            if opts:
                raise ConfigError(f"euclidean factor takes no options: {token!r}")
            factors.append(EuclideanFactor(dim))
        elif kind == "hyperbolic":
            kappa = opts.pop("kappa", 1.0)
            if opts:
                raise ConfigError(f"unknown options {sorted(opts)} in {token!r}")
            factors.append(HyperbolicFactor(dim, kappa))
        else:
            lam = opts.pop("lambda", None)
            if opts:
                raise ConfigError(f"unknown options {sorted(opts)} in {token!r}")
            factors.append(SPDFactor(dim, lam))
    return SymmetricSpace(factors)
