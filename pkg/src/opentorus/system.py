"""Hyperbolic toral automorphisms with exact and float point arithmetic.

A system is an integer matrix A with |det A| = 1 and no eigenvalue on the
unit circle, acting on the torus R^m / Z^m.  Discrete time only.  The
expanding eigenspace H carries a max-norm coordinate system in which balls
are boxes; pushing a box forward by A^t scales each side by e^{rate * t},
so Bowen balls have exact volumes.

Two point modes:

* ``exact``  -- coordinates are rationals num/q with a shared denominator q;
  the map acts by integer matrix multiplication mod q, which is exact for
  all times.
* ``float``  -- coordinates are binary64 values; the map is applied to the
  dyadic rational the float denotes, again exactly, so no precision is lost
  no matter how large t gets.

Positions along an unstable leaf at large times are produced by
:func:`leaf_positions`, which splits A^t(x + s u) = A^t x + s lam^t u into
an exact orbit part and an eigenline part evaluated with enough working
precision to survive the e^{rate * t} blowup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .errors import (
    ComplexSpectrumUnsupported,
    DenominatorOverflow,
    NotHyperbolic,
    NotUnimodular,
    RadiusTooLarge,
)

# Unit-circle exclusion band for the hyperbolicity test.
UNIT_BAND = 1e-12

# Bookkeeping injectivity radius: Euclidean balls of radius < R0 embed in
# the torus with room to spare for the thickenings used downstream.
R0 = 0.25

# Default ceiling (in bits) for intermediates of exact-mode arithmetic.
EXACT_WIDTH_BITS = 63


def _int_det(mat: list[list[int]]) -> int:
    """Exact determinant of an integer matrix (fraction-free Bareiss)."""
    a = [row[:] for row in mat]
    m = len(a)
    sign = 1
    prev = 1
    for k in range(m - 1):
        if a[k][k] == 0:
            for i in range(k + 1, m):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, m):
            for j in range(k + 1, m):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[m - 1][m - 1]


def _char_poly(mat: list[list[int]]) -> list[int]:
    """Characteristic polynomial coefficients, leading first (monic, exact).

    Faddeev-LeVerrier over rationals; the results are integers for an
    integer matrix.
    """
    m = len(mat)
    a = [[Fraction(x) for x in row] for row in mat]
    coeffs = [Fraction(1)]
    mk = [[Fraction(1) if i == j else Fraction(0) for j in range(m)] for i in range(m)]
    for k in range(1, m + 1):
        # mk = A @ mk_prev + c_{k-1} I  (first iteration: mk = I)
        if k > 1:
            prod = [[sum(a[i][l] * mk[l][j] for l in range(m)) for j in range(m)] for i in range(m)]
            for i in range(m):
                prod[i][i] += coeffs[-1]
            mk = prod
        am = [[sum(a[i][l] * mk[l][j] for l in range(m)) for j in range(m)] for i in range(m)]
        trace = sum(am[i][i] for i in range(m))
        coeffs.append(-trace / k)
    out = []
    for c in coeffs:
        assert c.denominator == 1
        out.append(int(c))
    return out


def _matpow_mod(mat: np.ndarray, t: int, q: int) -> list[list[int]]:
    """A^t mod q via binary exponentiation over Python ints."""
    m = mat.shape[0]
    result = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    base = [[int(mat[i, j]) % q for j in range(m)] for i in range(m)]

    def mul(x, y):
        return [[sum(x[i][l] * y[l][j] for l in range(m)) % q for j in range(m)] for i in range(m)]

    e = t
    while e:
        if e & 1:
            result = mul(result, base)
        base = mul(base, base)
        e >>= 1
    return result


def _matpow_int(mat: np.ndarray, t: int) -> list[list[int]]:
    """A^t over arbitrary-precision integers."""
    m = mat.shape[0]
    result = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    base = [[int(mat[i, j]) for j in range(m)] for i in range(m)]

    def mul(x, y):
        return [[sum(x[i][l] * y[l][j] for l in range(m)) for j in range(m)] for i in range(m)]

    e = t
    while e:
        if e & 1:
            result = mul(result, base)
        base = mul(base, base)
        e >>= 1
    return result


@dataclass(frozen=True)
class Point:
    """A point of the torus in exact or float mode.

    Exact mode stores integer numerators with a shared denominator q and
    represents (nums[0]/q, ..., nums[m-1]/q).  Float mode stores binary64
    coordinates in [0, 1).
    """

    mode: str
    coords: tuple[float, ...] | None = None
    nums: tuple[int, ...] | None = None
    q: int | None = None

    @staticmethod
    def from_floats(vals) -> "Point":
        c = tuple(float(v) % 1.0 for v in vals)
        return Point(mode="float", coords=c)

    @staticmethod
    def exact(nums, q: int) -> "Point":
        if q <= 0:
            raise ValueError("denominator q must be positive")
        return Point(mode="exact", nums=tuple(int(v) % q for v in nums), q=q)

    @property
    def dim(self) -> int:
        if self.mode == "exact":
            return len(self.nums)
        return len(self.coords)

    def float_coords(self) -> np.ndarray:
        if self.mode == "exact":
            return np.array([n / self.q for n in self.nums], dtype=float)
        return np.array(self.coords, dtype=float)


@dataclass(frozen=True)
class UnstableCoord:
    """Coordinates of a point of H in the eigenbasis; norm is the max norm."""

    values: tuple[float, ...]

    @property
    def norm(self) -> float:
        return max(abs(v) for v in self.values)


class ToralSystem:
    """Spectral and geometric data of one hyperbolic toral automorphism."""

    def __init__(self, matrix, m, n, unstable_eigs, unstable_rates,
                 unstable_basis, stable_basis, char_coeffs):
        self.matrix = matrix            # (m, m) int64, read-only
        self.m = m                      # torus dimension
        self.n = n                      # number of expanding directions
        self.unstable_eigs = unstable_eigs      # signed, |.| > 1, descending |.|
        self.unstable_rates = unstable_rates    # log|eig|, same order
        self.lambda0 = float(unstable_rates[0])
        self.unstable_basis = unstable_basis    # (n, m) unit rows
        self.stable_basis = stable_basis        # (m-n, m) unit rows
        self.char_coeffs = char_coeffs          # monic char poly, leading first
        self.r0 = R0
        self._mp_cache: dict[int, list[tuple[mpmath.mpf, list[mpmath.mpf]]]] = {}

    @property
    def rate_sum(self) -> float:
        """Sum of expansion rates = log of the unstable Jacobian of one step."""
        return float(np.sum(self.unstable_rates))

    def __repr__(self):
        return f"ToralSystem(m={self.m}, n={self.n}, lambda0={self.lambda0:.6f})"

    # -- high-precision spectral data ------------------------------------

    def _mp_unstable(self, prec: int):
        """Unstable (eigenvalue, eigenvector) pairs at >= prec bits."""
        if prec in self._mp_cache:
            return self._mp_cache[prec]
        with mpmath.workprec(prec + 32):
            coeffs = [mpmath.mpf(c) for c in self.char_coeffs]
            roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=prec)
            pairs = []
            for rt in roots:
                if abs(mpmath.im(rt)) > mpmath.mpf(2) ** (-prec // 2):
                    continue
                lam = mpmath.re(rt)
                if abs(lam) <= 1:
                    continue
                vec = self._mp_eigenvector(lam)
                pairs.append((lam, vec))
            if len(pairs) != self.n:
                raise ComplexSpectrumUnsupported(
                    f"expected {self.n} real expanding roots, found {len(pairs)}")
            pairs.sort(key=lambda p: (-abs(p[0]), -p[0]))
        self._mp_cache[prec] = pairs
        return pairs

    def _mp_eigenvector(self, lam):
        """Unit eigenvector of A for eigenvalue lam, sign-normalized."""
        m = self.m
        mat = mpmath.matrix(m, m)
        for i in range(m):
            for j in range(m):
                mat[i, j] = mpmath.mpf(int(self.matrix[i, j]))
            mat[i, i] -= lam
        # Solve (A - lam I) v = 0 by fixing the largest float-eigenvector
        # component to 1 and solving a square subsystem.
        float_vec = self._float_eigenvector(float(lam))
        j0 = int(np.argmax(np.abs(float_vec)))
        cols = [j for j in range(m) if j != j0]
        best = None
        for drop in range(m):
            rows = [i for i in range(m) if i != drop]
            sub = mpmath.matrix(m - 1, m - 1)
            rhs = mpmath.matrix(m - 1, 1)
            for a, i in enumerate(rows):
                for b, j in enumerate(cols):
                    sub[a, b] = mat[i, j]
                rhs[a] = -mat[i, j0]
            try:
                sol = mpmath.lu_solve(sub, rhs)
            except ZeroDivisionError:
                continue
            v = [mpmath.mpf(0)] * m
            v[j0] = mpmath.mpf(1)
            for b, j in enumerate(cols):
                v[j] = sol[b]
            resid = max(abs(sum(mat[i, j] * v[j] for j in range(m))) for i in range(m))
            if best is None or resid < best[0]:
                best = (resid, v)
        if best is None:
            raise ComplexSpectrumUnsupported("eigenvector solve failed")
        v = best[1]
        norm = mpmath.sqrt(sum(x * x for x in v))
        v = [x / norm for x in v]
        for x in v:
            if abs(x) > 1e-9:
                if x < 0:
                    v = [-y for y in v]
                break
        return v

    def _float_eigenvector(self, lam: float) -> np.ndarray:
        w, vecs = np.linalg.eig(self.matrix.astype(float))
        idx = int(np.argmin(np.abs(w - lam)))
        v = np.real(vecs[:, idx])
        return v / np.linalg.norm(v)


def make_system(matrix) -> ToralSystem:
    """Validate an integer matrix and build its system.

    Raises NotUnimodular, NotHyperbolic, or ComplexSpectrumUnsupported
    when the matrix fails the entry requirements.
    """
    mat = np.asarray(matrix)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"matrix must be square, got shape {mat.shape}")
    if not np.issubdtype(mat.dtype, np.integer):
        as_int = np.rint(np.asarray(matrix, dtype=float)).astype(np.int64)
        if not np.array_equal(as_int, np.asarray(matrix, dtype=float)):
            raise ValueError("matrix entries must be integers")
        mat = as_int
    mat = mat.astype(np.int64)
    m = mat.shape[0]

    det = _int_det([[int(mat[i, j]) for j in range(m)] for i in range(m)])
    if abs(det) != 1:
        raise NotUnimodular(f"|det| must be 1, got det = {det}")

    eigvals, eigvecs = np.linalg.eig(mat.astype(float))
    mods = np.abs(eigvals)
    if np.any((mods >= 1.0 - UNIT_BAND) & (mods <= 1.0 + UNIT_BAND)):
        raise NotHyperbolic(
            "matrix has an eigenvalue of modulus within 1e-12 of the unit circle")

    unstable_idx = [i for i in range(m) if mods[i] > 1.0 + UNIT_BAND]
    n = len(unstable_idx)
    for i in unstable_idx:
        if abs(np.imag(eigvals[i])) > 1e-9:
            raise ComplexSpectrumUnsupported(
                f"expanding eigenvalue {eigvals[i]:.6g} is not real")
    # v1 restriction: expanding spectrum must be simple so the eigenbasis
    # spans H.
    lam_real = sorted(float(np.real(eigvals[i])) for i in unstable_idx)
    for a, b in zip(lam_real, lam_real[1:]):
        if abs(a - b) < 1e-9:
            raise ComplexSpectrumUnsupported(
                "repeated expanding eigenvalue; unstable eigenbasis is not simple")

    order = sorted(unstable_idx, key=lambda i: (-mods[i], -np.real(eigvals[i])))
    u_eigs = np.array([float(np.real(eigvals[i])) for i in order])
    u_rates = np.log(np.abs(u_eigs))
    u_basis = []
    for i in order:
        v = np.real(eigvecs[:, i])
        v = v / np.linalg.norm(v)
        nz = np.nonzero(np.abs(v) > 1e-9)[0][0]
        if v[nz] < 0:
            v = -v
        u_basis.append(v)
    u_basis = np.array(u_basis).reshape(n, m)

    s_vecs = []
    seen_conj = set()
    for i in range(m):
        if i in unstable_idx or i in seen_conj:
            continue
        if abs(np.imag(eigvals[i])) > 1e-9:
            # complex pair spans a real 2-plane; take real and imaginary parts
            for j in range(i + 1, m):
                if abs(eigvals[j] - np.conj(eigvals[i])) < 1e-9:
                    seen_conj.add(j)
                    break
            s_vecs.append(np.real(eigvecs[:, i]))
            s_vecs.append(np.imag(eigvecs[:, i]))
        else:
            s_vecs.append(np.real(eigvecs[:, i]))
    s_basis = []
    for v in s_vecs:
        v = v / np.linalg.norm(v)
        nz = np.nonzero(np.abs(v) > 1e-9)[0][0]
        if v[nz] < 0:
            v = -v
        s_basis.append(v)
    s_basis = np.array(s_basis).reshape(m - n, m) if s_basis else np.zeros((0, m))

    full = np.vstack([u_basis, s_basis]) if s_basis.size else u_basis
    if abs(np.linalg.det(full)) < 1e-9:
        raise ComplexSpectrumUnsupported("eigenbasis does not span R^m")

    mat.setflags(write=False)
    return ToralSystem(mat, m, n, u_eigs, u_rates, u_basis, s_basis,
                       tuple(_char_poly([[int(mat[i, j]) for j in range(m)] for i in range(m)])))


def step(sys: ToralSystem, x: Point, t: int, width_bits: int = EXACT_WIDTH_BITS) -> Point:
    """Apply the automorphism t times: x -> A^t x mod 1.

    Exact mode runs entirely in integer arithmetic mod q.  Float mode
    applies the integer matrix power to the dyadic rational the float
    coordinates denote, so the result is the exact image of the stored
    point for any t.
    """
    if t < 0 or int(t) != t:
        raise ValueError(f"time must be a nonnegative integer, got {t}")
    t = int(t)
    if x.dim != sys.m:
        raise ValueError(f"point dimension {x.dim} != system dimension {sys.m}")
    if x.mode == "exact":
        q = x.q
        # dot products of residues stay below m * (q-1)^2; enforce the
        # configured width so the int64-portable contract stays visible
        if width_bits is not None and sys.m * (q - 1) * (q - 1) >= (1 << width_bits):
            raise DenominatorOverflow(
                f"q = {q} exceeds the {width_bits}-bit intermediate budget; "
                "raise width_bits or switch to float mode")
        if t == 0:
            return x
        mt = _matpow_mod(sys.matrix, t, q)
        nums = tuple(sum(mt[i][j] * x.nums[j] for j in range(sys.m)) % q
                     for i in range(sys.m))
        return Point(mode="exact", nums=nums, q=q)
    if t == 0:
        return x
    fracs = [Fraction(c) for c in x.coords]
    den = 1
    for f in fracs:
        den = den // math.gcd(den, f.denominator) * f.denominator
    nums = [int(f * den) for f in fracs]
    mt = _matpow_int(sys.matrix, t)
    out = [sum(mt[i][j] * nums[j] for j in range(sys.m)) % den for i in range(sys.m)]
    return Point(mode="float", coords=tuple(o / den for o in out))


def torus_distance(x, y) -> float:
    """Euclidean distance on the torus (min over integer translates).

    Accepts Points or coordinate arrays.
    """
    a = x.float_coords() if isinstance(x, Point) else np.asarray(x, dtype=float)
    b = y.float_coords() if isinstance(y, Point) else np.asarray(y, dtype=float)
    d = wrap_diff(a - b)
    return float(np.sqrt(np.sum(d * d)))


def wrap_diff(d: np.ndarray) -> np.ndarray:
    """Wrap coordinate differences into [-1/2, 1/2) componentwise."""
    return (np.asarray(d, dtype=float) + 0.5) % 1.0 - 0.5


def unstable_translate(sys: ToralSystem, x: Point, h) -> Point:
    """Translate x along the unstable leaf: x + sum_i h_i u_i mod 1.

    The eigendirections are irrational, so the result is a float-mode
    point even for exact-mode input.
    """
    hv = np.asarray(h.values if isinstance(h, UnstableCoord) else h, dtype=float)
    if hv.shape != (sys.n,):
        raise ValueError(f"leaf coordinate must have shape ({sys.n},)")
    pos = (x.float_coords() + hv @ sys.unstable_basis) % 1.0
    return Point.from_floats(pos)


def bowen_halfwidths(sys: ToralSystem, t: int, r: float) -> np.ndarray:
    """Per-direction halfwidths of the Bowen (t, r)-box g_{-t} B^H(r) g_t."""
    if r <= 0:
        raise ValueError("radius must be positive")
    if t < 0:
        raise ValueError("time must be nonnegative")
    return r * np.exp(-sys.unstable_rates * t)


def hball_volume(sys: ToralSystem, r: float) -> float:
    """Leaf measure of the max-norm ball B^H(r): (2r)^n."""
    if r <= 0:
        raise ValueError("radius must be positive")
    return float((2.0 * r) ** sys.n)


def bowen_volume(sys: ToralSystem, t: int, r: float) -> float:
    """Leaf measure of the Bowen (t, r)-box: (2r)^n e^{-t * sum(rates)}."""
    return hball_volume(sys, r) * math.exp(-t * sys.rate_sum)


def xball_volume(sys: ToralSystem, r: float) -> float:
    """Haar measure of a Euclidean r-ball on the torus: V_m r^m (needs r < 1/2)."""
    if r <= 0:
        raise ValueError("radius must be positive")
    if r >= 0.5:
        raise RadiusTooLarge(f"X-ball radius must be < 1/2 to embed, got {r}")
    m = sys.m
    vm = math.pi ** (m / 2.0) / math.gamma(m / 2.0 + 1.0)
    return vm * r ** m


def unit_ball_volume(m: int) -> float:
    """Volume of the Euclidean unit ball in R^m."""
    return math.pi ** (m / 2.0) / math.gamma(m / 2.0 + 1.0)


# -- the counting kernel --------------------------------------------------

def _exact_orbit_floats(sys: ToralSystem, base: Point, t: int) -> np.ndarray:
    """A^t base mod 1 as float64, computed exactly before the final rounding."""
    return step(sys, base, t).float_coords()


def leaf_factors(sys: ToralSystem, t: int, delta: float, scale: int = 1):
    """High-precision leaf data for time t on a grid of pitch delta.

    Returns (w, w_hi, c) where w[i] = frac(delta * lam_i^t * u_i) per torus
    component, w_hi[i] = frac(scale * delta * lam_i^t * u_i) for a hi/lo
    index split, and c[i] = frac(delta/2 * lam_i^t * u_i) is the half-cell
    offset.  All are float64 arrays of shape (n, m) [c summed over nothing].
    """
    rate = float(np.max(sys.unstable_rates))
    prec = 64 + int(math.ceil(t * rate / math.log(2.0))) + 32
    pairs = sys._mp_unstable(prec)
    n, m = sys.n, sys.m
    w = np.zeros((n, m))
    w_hi = np.zeros((n, m))
    c = np.zeros((n, m))
    with mpmath.workprec(prec):
        d = mpmath.mpf(delta)
        s = mpmath.mpf(scale)
        for i, (lam, vec) in enumerate(pairs):
            lt = lam ** t
            for j in range(m):
                term = d * lt * vec[j]
                w[i, j] = float(mpmath.frac(term))
                w_hi[i, j] = float(mpmath.frac(s * term))
                c[i, j] = float(mpmath.frac(term / 2))
    return w, w_hi, c


_HI_BITS = 16
_HI_SPLIT = 1 << _HI_BITS


def leaf_positions(sys: ToralSystem, base: Point, t: int, idx: np.ndarray,
                   delta: float) -> np.ndarray:
    """Torus positions A^t (base + (idx + 1/2) * delta . u) mod 1.

    idx is an int64 array of shape (N,) for n = 1 or (N, n) in general;
    entries index grid cells with centers (idx + 0.5) * delta in unstable
    eigencoordinates.  Exact orbit part plus a high-precision eigenline
    part keep the result accurate to ~1e-11 regardless of t.
    """
    idx = np.asarray(idx, dtype=np.int64)
    if idx.ndim == 1:
        idx = idx[:, None]
    if idx.shape[1] != sys.n:
        raise ValueError(f"index array must have {sys.n} columns")
    b = _exact_orbit_floats(sys, base, t)
    w, w_hi, c = leaf_factors(sys, t, delta, scale=_HI_SPLIT)
    pos = np.tile(b + c.sum(axis=0), (idx.shape[0], 1))
    # exact split idx = hi * 2^16 + lo with lo in [0, 2^16): float products
    # then stay below ~2^16 * ulp, keeping each term accurate to ~1e-11
    hi = idx >> _HI_BITS
    lo = idx - (hi << _HI_BITS)
    pos += lo.astype(float) @ w + hi.astype(float) @ w_hi
    pos %= 1.0
    return pos
