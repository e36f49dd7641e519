"""Phase-space grids, Fourier representations, norms, and transport.

Conventions
-----------
All grids are uniform, centered, power-of-two sized: ``x_m = (m - n/2) * dx``
on ``[-L, L)`` with ``dx = 2L/n``, and the dual grid is
``eta_k = (k - n/2) * pi/L``.  Transforms are unitary per axis,

    F(eta) = (2*pi)^(-1/2) * Integral f(x) exp(-i*eta*x) dx ,

so the discrete Plancherel identity holds exactly and round trips are
identities to machine precision.

Four representations of a k-particle phase-space function are supported:

====== ==================== ====================
tag     position-type axes   velocity-type axes
====== ==================== ====================
XV      x                    v
XXI     x                    xi  (dual of v)
ETA_XI  eta (dual of x)      xi
ETA_V   eta                  v
====== ==================== ====================

Array axis order is ``(x-axes of particles 1..k, v-axes of particles 1..k)``.

The phase-space density of a density matrix uses the ``exp(+i*xi*v)``
convention: a wave packet ``chi((y - Y)/sqrt(eps)) * exp(i*y*W/eps)``
concentrates at ``(Y, -W)``.
"""

from __future__ import annotations

import io
import struct
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import NumericalGuardError, UnsupportedOperationError

__all__ = [
    "Representation",
    "Grid",
    "NormSpec",
    "Distribution",
    "DensityMatrix",
    "DEFAULTS",
    "sample_distribution",
    "to_rep",
    "l2_norm",
    "sobolev_norm",
    "free_transport",
    "wigner",
    "mass",
    "boundary_tail_fraction",
    "save_distribution",
    "load_distribution",
    "write_marginals_csv",
]

#: package-wide default exponents: x-regularity r, velocity weight s, and the
#: generic small parameter delta used by far-field/decay checks.
DEFAULTS = {"r": 1.1, "s": 0.6, "delta": 0.1}


class Representation(Enum):
    XV = "xv"
    XXI = "xxi"
    ETA_XI = "etaxi"
    ETA_V = "etav"

    @property
    def has_position_x(self) -> bool:
        return self in (Representation.XV, Representation.XXI)

    @property
    def has_velocity_v(self) -> bool:
        return self in (Representation.XV, Representation.ETA_V)


def _is_pow2(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Phase-space grid: ``dim_x`` spatial dimensions (0, 1, or 3) with the
    companion velocity dimension (3 for dim_x in {0, 3}, 1 for dim_x = 1)."""

    dim_x: int
    n_x: int | None
    L_x: float | None
    n_v: int
    L_v: float

    def __post_init__(self):
        if self.dim_x not in (0, 1, 3):
            raise ValueError(f"dim_x must be one of 0, 1, 3; got {self.dim_x}")
        if not _is_pow2(self.n_v):
            raise ValueError(f"n_v must be a power of two >= 2, got {self.n_v}")
        if self.L_v <= 0:
            raise ValueError(f"L_v must be positive, got {self.L_v}")
        if self.dim_x > 0:
            if self.n_x is None or not _is_pow2(self.n_x):
                raise ValueError(f"n_x must be a power of two >= 2, got {self.n_x}")
            if self.L_x is None or self.L_x <= 0:
                raise ValueError(f"L_x must be positive, got {self.L_x}")

    @property
    def dim_v(self) -> int:
        return 3 if self.dim_x in (0, 3) else 1

    # -- coordinate axes ----------------------------------------------------
    @property
    def dx(self) -> float:
        return 2.0 * self.L_x / self.n_x

    @property
    def dv(self) -> float:
        return 2.0 * self.L_v / self.n_v

    @property
    def deta(self) -> float:
        return np.pi / self.L_x

    @property
    def dxi(self) -> float:
        return np.pi / self.L_v

    def x_coords(self) -> np.ndarray:
        return (np.arange(self.n_x) - self.n_x // 2) * self.dx

    def v_coords(self) -> np.ndarray:
        return (np.arange(self.n_v) - self.n_v // 2) * self.dv

    def eta_coords(self) -> np.ndarray:
        return (np.arange(self.n_x) - self.n_x // 2) * self.deta

    def xi_coords(self) -> np.ndarray:
        return (np.arange(self.n_v) - self.n_v // 2) * self.dxi

    def axis_coords(self, rep: Representation):
        """(position-type axis coords, velocity-type axis coords) for rep."""
        pos = None
        if self.dim_x > 0:
            pos = self.x_coords() if rep.has_position_x else self.eta_coords()
        vel = self.v_coords() if rep.has_velocity_v else self.xi_coords()
        return pos, vel

    def expected_shape(self, k: int) -> tuple:
        return (self.n_x,) * (self.dim_x * k) + (self.n_v,) * (self.dim_v * k)

    def cell_volume(self, rep: Representation, k: int) -> float:
        if self.dim_x > 0:
            dpos = self.dx if rep.has_position_x else self.deta
        else:
            dpos = 1.0
        dvel = self.dv if rep.has_velocity_v else self.dxi
        return dpos ** (self.dim_x * k) * dvel ** (self.dim_v * k)


@dataclass(frozen=True)
class NormSpec:
    """Weighted-norm exponents: ``<grad_x>^r`` regularity in position and a
    pointwise ``<v>^s`` velocity weight (s >= 0; r may be negative)."""

    r: float
    s: float

    def __post_init__(self):
        if self.s < 0:
            raise ValueError(f"velocity weight exponent must satisfy s >= 0, got {self.s}")


@dataclass
class Distribution:
    """A k-particle phase-space function in one of the four representations.

    ``values`` may be omitted when ``analytic`` (a vectorized callable of the
    axis coordinates) is provided; operators that can stream the callable
    accept such lazy distributions.
    """

    grid: Grid
    rep: Representation
    k: int
    values: np.ndarray | None
    eps: float | None = None
    analytic: object | None = None

    def __post_init__(self):
        if self.k not in (1, 2):
            raise ValueError(f"k must be 1 or 2, got {self.k}")
        if self.values is None and self.analytic is None:
            raise ValueError("need values or an analytic callable")
        if self.values is not None:
            expect = self.grid.expected_shape(self.k)
            if tuple(self.values.shape) != expect:
                raise ValueError(
                    f"values shape {self.values.shape} does not match grid shape {expect}"
                )
            if self.values.dtype != np.complex128:
                self.values = np.ascontiguousarray(self.values, dtype=np.complex128)

    def copy(self) -> "Distribution":
        vals = None if self.values is None else self.values.copy()
        return Distribution(self.grid, self.rep, self.k, vals, self.eps, self.analytic)

    @property
    def n_position_axes(self) -> int:
        return self.grid.dim_x * self.k

    @property
    def n_velocity_axes(self) -> int:
        return self.grid.dim_v * self.k

    def position_axes(self) -> tuple:
        return tuple(range(self.n_position_axes))

    def velocity_axes(self) -> tuple:
        off = self.n_position_axes
        return tuple(range(off, off + self.n_velocity_axes))


def sample_distribution(grid: Grid, rep: Representation, k: int, fn, eps=None) -> Distribution:
    """Sample a broadcastable callable of the axis coordinates onto the grid.

    The callable receives one 1-d-shaped array per axis (position-type axes
    of all particles first, then velocity-type axes) ready for numpy
    broadcasting, and the result keeps ``fn`` as the analytic attribute.
    """
    pos, vel = grid.axis_coords(rep)
    axes = []
    n_pos = grid.dim_x * k
    n_vel = grid.dim_v * k
    total = n_pos + n_vel
    for i in range(n_pos):
        shape = [1] * total
        shape[i] = grid.n_x
        axes.append(pos.reshape(shape))
    for i in range(n_vel):
        shape = [1] * total
        shape[n_pos + i] = grid.n_v
        axes.append(vel.reshape(shape))
    values = np.broadcast_to(np.asarray(fn(*axes), dtype=np.complex128),
                             grid.expected_shape(k)).copy()
    return Distribution(grid, rep, k, values, eps=eps, analytic=fn)


# ---------------------------------------------------------------------------
# unitary transforms
# ---------------------------------------------------------------------------

def _forward_axis(values: np.ndarray, axis: int, delta: float) -> np.ndarray:
    """Unitary forward transform (exp(-i * dual * coord)) along one axis."""
    shifted = np.fft.ifftshift(values, axes=axis)
    spec = np.fft.fft(shifted, axis=axis)
    return np.fft.fftshift(spec, axes=axis) * (delta / np.sqrt(2.0 * np.pi))


def _inverse_axis(values: np.ndarray, axis: int, delta_dual: float) -> np.ndarray:
    """Unitary inverse transform along one axis (delta_dual: dual spacing)."""
    n = values.shape[axis]
    shifted = np.fft.ifftshift(values, axes=axis)
    spec = np.fft.ifft(shifted, axis=axis)
    return np.fft.fftshift(spec, axes=axis) * (n * delta_dual / np.sqrt(2.0 * np.pi))


def to_rep(dist: Distribution, target: Representation) -> Distribution:
    """Convert between the four representations by unitary per-axis FFTs."""
    if dist.values is None:
        raise UnsupportedOperationError("cannot transform a lazy distribution; sample it first")
    g = dist.grid
    out = dist.values
    src = dist.rep
    if g.dim_x > 0 and src.has_position_x != target.has_position_x:
        for ax in range(g.dim_x * dist.k):
            if target.has_position_x:
                out = _inverse_axis(out, ax, g.deta)
            else:
                out = _forward_axis(out, ax, g.dx)
    if src.has_velocity_v != target.has_velocity_v:
        off = g.dim_x * dist.k
        for ax in range(off, off + g.dim_v * dist.k):
            if target.has_velocity_v:
                out = _inverse_axis(out, ax, g.dxi)
            else:
                out = _forward_axis(out, ax, g.dv)
    if out is dist.values:
        out = out.copy()
    return Distribution(g, target, dist.k, out, dist.eps, None)


# ---------------------------------------------------------------------------
# norms and diagnostics
# ---------------------------------------------------------------------------

def l2_norm(dist: Distribution) -> float:
    """L2 norm including cell volume (identical across representations)."""
    vol = dist.grid.cell_volume(dist.rep, dist.k)
    return float(np.sqrt(np.sum(np.abs(dist.values) ** 2) * vol))


def _particle_weight(coords: np.ndarray, dim: int, k: int, which: int, exponent: float,
                     offset: int, total_axes: int, n: int):
    """<(coords of particle `which`)>^exponent as a broadcastable array."""
    axes = range(offset + which * dim, offset + (which + 1) * dim)
    sq = None
    for ax in axes:
        shape = [1] * total_axes
        shape[ax] = n
        c2 = (coords ** 2).reshape(shape)
        sq = c2 if sq is None else sq + c2
    return (1.0 + sq) ** (exponent / 2.0)


def sobolev_norm(dist: Distribution, spec: NormSpec) -> float:
    """Weighted norm ``|| prod_i <grad_{x_i}>^r <v_i>^s f ||_{L2}``.

    Any input representation is accepted; the computation happens in the
    (eta, v) representation where both weights are diagonal.  For
    ``dim_x = 0`` the position weight is identically 1.
    """
    f = to_rep(dist, Representation.ETA_V)
    g = dist.grid
    total = f.values.ndim
    w2 = np.ones((1,) * total)
    if g.dim_x > 0 and spec.r != 0.0:
        eta = g.eta_coords()
        for i in range(dist.k):
            w2 = w2 * _particle_weight(eta, g.dim_x, dist.k, i, spec.r, 0, total, g.n_x)
    if spec.s != 0.0:
        v = g.v_coords()
        off = g.dim_x * dist.k
        for i in range(dist.k):
            w2 = w2 * _particle_weight(v, g.dim_v, dist.k, i, spec.s, off, total, g.n_v)
    vol = g.cell_volume(Representation.ETA_V, dist.k)
    return float(np.sqrt(np.sum((np.abs(f.values) * w2) ** 2) * vol))


def mass(dist: Distribution) -> float:
    """Integral of the distribution over all of phase space (XV input)."""
    if dist.rep is not Representation.XV:
        raise UnsupportedOperationError("mass is defined on the XV representation")
    vol = dist.grid.cell_volume(Representation.XV, dist.k)
    return float(np.real(np.sum(dist.values)) * vol)


def boundary_tail_fraction(dist: Distribution) -> float:
    """max |f| over all outermost grid shells, relative to max |f|.

    A well-truncated distribution keeps this below ~1e-8; larger values mean
    the box (L_x or L_v) is clipping the function.
    """
    a = np.abs(dist.values)
    peak = a.max()
    if peak == 0.0:
        return 0.0
    worst = 0.0
    for ax in range(a.ndim):
        worst = max(worst, a.take(0, axis=ax).max(), a.take(a.shape[ax] - 1, axis=ax).max())
    return float(worst / peak)


# ---------------------------------------------------------------------------
# free transport
# ---------------------------------------------------------------------------

def free_transport(dist: Distribution, t: float) -> Distribution:
    """Exact spectral solution of ``(d_t + v . grad_x) f = 0`` over time t.

    Acts as the multiplier ``exp(-i t sum_i v_i . eta_i)`` in the (eta, v)
    representation, applied factor-by-factor per axis pair, and returns the
    result in the input representation.  For ``dim_x = 0`` transport is a
    no-op (with a warning).
    """
    if dist.grid.dim_x == 0:
        warnings.warn("free transport is a no-op for a homogeneous (dim_x=0) grid")
        return dist.copy()
    g = dist.grid
    f = to_rep(dist, Representation.ETA_V)
    vals = f.values
    eta = g.eta_coords()
    v = g.v_coords()
    total = vals.ndim
    off = g.dim_x * dist.k
    for i in range(dist.k):
        for a in range(g.dim_x):
            ax_eta = i * g.dim_x + a
            ax_v = off + i * g.dim_v + a
            shape_eta = [1] * total
            shape_eta[ax_eta] = g.n_x
            shape_v = [1] * total
            shape_v[ax_v] = g.n_v
            phase = np.exp(-1j * t * eta.reshape(shape_eta) * v.reshape(shape_v))
            vals = vals * phase
    out = Distribution(g, Representation.ETA_V, dist.k, vals, dist.eps, None)
    return to_rep(out, dist.rep)


# ---------------------------------------------------------------------------
# density matrices and the phase-space density
# ---------------------------------------------------------------------------

@dataclass
class DensityMatrix:
    """Single-particle density matrix gamma(y, y') on the spatial grid.

    ``values`` has the y-axes first and the y'-axes second; the matrix must
    be Hermitian to ``tol`` and have unit trace to ``tol``.
    """

    grid: Grid
    values: np.ndarray
    tol: float = 1e-8

    def __post_init__(self):
        g = self.grid
        if g.dim_x not in (1, 3):
            raise UnsupportedOperationError("density matrices need dim_x in {1, 3}")
        expect = (g.n_x,) * (2 * g.dim_x)
        if tuple(self.values.shape) != expect:
            raise ValueError(f"values shape {self.values.shape} != {expect}")
        self.values = np.ascontiguousarray(self.values, dtype=np.complex128)
        d = g.dim_x
        swapped = np.conj(np.moveaxis(self.values, range(d), range(d, 2 * d)))
        scale = np.abs(self.values).max()
        herm = np.abs(self.values - swapped).max()
        if herm > self.tol * max(scale, 1e-300):
            raise ValueError(f"density matrix is not Hermitian: deviation {herm:.3e}")
        tr = self.trace()
        if abs(tr - 1.0) > max(self.tol, 1e-6):
            raise ValueError(f"density matrix trace {tr:.8f} != 1")

    def trace(self) -> float:
        g = self.grid
        d = g.dim_x
        diag = self.values
        for _ in range(d):
            # repeatedly take the diagonal of the first remaining (y, y') pair
            diag = np.diagonal(diag, axis1=0, axis2=d - _)
        return float(np.real(np.sum(diag)) * g.dx**d)


def wigner(dm: DensityMatrix, eps: float) -> Distribution:
    """Phase-space density of a density matrix at scale ``eps``.

    Implements ``f(x, v) = (2*pi*eps)^(-d) Integral gamma(x + r/2, x - r/2)
    exp(i r . v / eps) dr`` on the grid (r-lattice spacing ``2*dx``).  The
    result is exactly real for Hermitian input (stored complex with
    vanishing imaginary part).

    The r-lattice makes the integrand periodic in v with period
    ``pi*eps/dx``; the velocity window must fit inside that band, otherwise
    a :class:`NumericalGuardError` reports the required spacing.
    """
    g = dm.grid
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    band = np.pi * eps / g.dx
    if 2.0 * g.L_v > band * (1.0 + 1e-12):
        raise NumericalGuardError(
            f"velocity window 2*L_v = {2 * g.L_v:g} exceeds the resolvable band "
            f"pi*eps/dx = {band:g}; refine dx below {np.pi * eps / (2 * g.L_v):g} "
            f"or shrink L_v"
        )
    n = g.n_x
    d = g.dim_x
    v = g.v_coords()
    j = np.arange(-(n - 1), n)
    phase = np.exp(1j * (2.0 * g.dx / eps) * np.outer(j, v))  # (2n-1, n_v)
    coef = (2.0 * g.dx) / (2.0 * np.pi * eps)

    out = dm.values
    for a in range(d):
        # contract the axis pair (y_a, y'_a) -> (x_a, v_a); after processing,
        # slot a holds x_a and slot d + a holds v_a, giving (x..., v...) at the end.
        arr = np.moveaxis(out, (a, d + a), (0, 1))
        rest = arr.shape[2:]
        res = np.empty((n, g.n_v) + rest, dtype=np.complex128)
        for m in range(n):
            jm = min(m, n - 1 - m)
            jr = np.arange(-jm, jm + 1)
            sub = arr[m + jr, m - jr]  # (nj, rest...)
            res[m] = coef * np.tensordot(phase[jr + (n - 1)], sub, axes=(0, 0))
        out = np.moveaxis(res, (0, 1), (a, d + a))

    grid_out = g
    return Distribution(grid_out, Representation.XV, 1, out, eps=eps)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_MAGIC = b"QKDIST01"
_REP_CODES = {r: i for i, r in enumerate(Representation)}
_REP_FROM_CODE = {i: r for r, i in _REP_CODES.items()}


def save_distribution(dist: Distribution, path) -> None:
    """Flat binary format: magic, little-endian int64 header
    (dim_x, n_x, n_v, k, rep code), float64 header (L_x, L_v, eps; NaN for
    absent), then the values as little-endian float64 (re, im) pairs."""
    g = dist.grid
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<5q", g.dim_x, g.n_x or 0, g.n_v, dist.k,
                             _REP_CODES[dist.rep]))
        fh.write(struct.pack("<3d", g.L_x if g.L_x is not None else np.nan,
                             g.L_v, dist.eps if dist.eps is not None else np.nan))
        flat = np.ascontiguousarray(dist.values, dtype="<c16")
        fh.write(flat.tobytes())


def load_distribution(path) -> Distribution:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"not a distribution file (magic {magic!r})")
        dim_x, n_x, n_v, k, rep_code = struct.unpack("<5q", fh.read(40))
        L_x, L_v, eps = struct.unpack("<3d", fh.read(24))
        grid = Grid(dim_x, n_x if dim_x > 0 else None,
                    L_x if not np.isnan(L_x) else None, n_v, L_v)
        shape = grid.expected_shape(k)
        count = int(np.prod(shape))
        data = np.frombuffer(fh.read(16 * count), dtype="<c16").reshape(shape)
        return Distribution(grid, _REP_FROM_CODE[rep_code], k,
                            data.astype(np.complex128),
                            eps=None if np.isnan(eps) else eps)


def write_marginals_csv(dist: Distribution, path) -> None:
    """Per-axis marginals (integral over all other axes) as CSV rows
    ``axis,index,coordinate,value`` with deterministic formatting."""
    g = dist.grid
    pos, vel = g.axis_coords(dist.rep)
    vol = g.cell_volume(dist.rep, dist.k)
    names = []
    coords = []
    n_pos = g.dim_x * dist.k
    pos_label = "x" if dist.rep.has_position_x else "eta"
    vel_label = "v" if dist.rep.has_velocity_v else "xi"
    for i in range(n_pos):
        names.append(f"{pos_label}{i}")
        coords.append(pos)
    for i in range(g.dim_v * dist.k):
        names.append(f"{vel_label}{i}")
        coords.append(vel)
    lines = ["axis,index,coordinate,value"]
    vals = np.real(dist.values)
    for ax, (name, cs) in enumerate(zip(names, coords)):
        other = tuple(a for a in range(vals.ndim) if a != ax)
        cell = vol / (cs[1] - cs[0])
        marg = vals.sum(axis=other) * cell
        for idx, (c, m) in enumerate(zip(cs, marg)):
            lines.append(f"{name},{idx},{c:.17g},{m:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
