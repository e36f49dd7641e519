"""Gaussian wave-packet ensembles and their exchange-cycle closed forms.

A semiclassical ensemble places ``n_packets`` Gaussian wave packets at
independent standard-normal centers with independent standard-normal
velocities; the packet width is ``sqrt(eps)`` in position and the phase
carries the velocity at scale ``1/eps``.  (Physically the packet number
tracks the inverse volume ``eps**-3``; the API keeps the two parameters
independent so either axis can be varied alone.)

Everything here is evaluated in closed form or by Monte-Carlo over
ensemble draws — no lattice discretization:

- :func:`cycle_coords` / :func:`cycle_coords_inverse` — the linear change
  of variables attached to a permutation of packet labels, built from the
  light-cone halves ``x + eps*xi`` and ``x - eps*xi`` so the round trip is
  exact.
- :func:`normalization_check` — Monte-Carlo audit that the symmetrized
  ensemble state has unit mean square norm up to ``O(eps**(3/2))``: each
  trial evaluates the overlap Gram matrix of the drawn packets exactly
  (Gaussian integrals) and sums its permanent over packet relabelings.
  :func:`normalization_expectation` is the deterministic companion, a
  closed-form Gaussian expectation per relabeling class.
- :func:`cycle_term_closed_form` — the Gaussian closed form of one
  exchange-cycle contribution to the rescaled pair correlation; on the
  identity permutation its velocity transform is a drifting local
  Maxwellian (:func:`velocity_core_term`).
- :func:`cycle_scaling_fit` — log-log exponent of the weighted
  derivative norm of the two-cycle term along an eps ladder; the norm
  separates into a position-side and a velocity-side radial integral,
  each evaluated by bipolar quadrature.  The expected exponent is
  ``3/2 - 2*s`` for ``s`` position derivatives under velocity weight
  ``<xi>**-w`` with ``w > 3/4``.
- :func:`random_walk_crossings` — sign-change and displacement statistics
  of a Gaussian random walk (the collision-clock model for packet
  recollisions); :func:`expected_crossings` is the exact arccosine-sum
  companion, asymptotically ``2*sqrt(n)/pi``.
- :func:`derangements` / :func:`displaced_permutation_count` — the
  fixed-point-free counts that size the relabeling classes in the
  normalization audit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .bbgky import DEFAULT_EPS_LADDER, ScalingReport, fit_loglog
from .errors import ConfigError, UnsupportedOperationError

__all__ = [
    "WavePacketEnsemble",
    "CycleFrame",
    "cycle_coords",
    "cycle_coords_inverse",
    "cycle_term_closed_form",
    "velocity_core_term",
    "cycle_scaling_fit",
    "normalization_check",
    "normalization_expectation",
    "random_walk_crossings",
    "expected_crossings",
    "derangements",
    "displaced_permutation_count",
]

#: Largest packet count whose relabeling pair sum is evaluated exactly.
_MAX_PACKETS = 4

#: Largest argument for the exact derangement recurrence before the count
#: leaves the 64-bit integer range (21!/e overflows int64).
_MAX_DERANGEMENT = 20

#: Fewest radial quadrature nodes that resolve the rescaled cycle-term
#: profiles (validated by node-doubling in the test suite).
_MIN_RADIAL_NODES = 32

_TWO_PI = 2.0 * math.pi


def _normalize_seed(seed, who: str):
    """Accept an int or a flat tuple/list of ints; return a tuple-or-int key."""
    if isinstance(seed, (int, np.integer)) and not isinstance(seed, bool):
        return int(seed)
    if isinstance(seed, (tuple, list)) and seed and all(
        isinstance(s, (int, np.integer)) and not isinstance(s, bool) for s in seed
    ):
        return tuple(int(s) for s in seed)
    raise ConfigError(f"{who} needs an integer seed (or a flat tuple of integers)")


# ---------------------------------------------------------------------------
# ensemble and cycle frame
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WavePacketEnsemble:
    """A drawn set of Gaussian wave packets.

    ``positions`` and ``momenta`` are ``(n_packets, 3)`` arrays of packet
    centers and packet velocities, drawn i.i.d. standard normal from the
    stored ``seed`` (positions first, then momenta — the draw order is part
    of the reproducibility contract).  ``t_offsets`` shifts each packet
    along its free flight; the default is the initial time.  Only the unit
    Gaussian envelope is supported: it is the one envelope whose overlap
    integrals close in elementary form, which is what every check in this
    module rests on.

    Serialization stores the seed and scalars only (:meth:`to_config`);
    the arrays are re-derived, never persisted.
    """

    eps: float
    positions: np.ndarray
    momenta: np.ndarray
    t_offsets: np.ndarray
    seed: object = 0
    envelope: str = "gaussian"

    def __post_init__(self):
        eps = float(self.eps)
        if eps <= 0.0:
            raise ConfigError(f"ensemble eps must be positive, got {eps}")
        object.__setattr__(self, "eps", eps)
        if self.envelope != "gaussian":
            raise UnsupportedOperationError(
                "only the unit Gaussian envelope has closed-form overlaps; "
                f"got {self.envelope!r}"
            )
        pos = np.array(self.positions, dtype=float)
        mom = np.array(self.momenta, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ConfigError("positions must have shape (n_packets, 3)")
        if mom.shape != pos.shape:
            raise ConfigError("momenta must match positions in shape")
        toff = np.array(self.t_offsets, dtype=float)
        if toff.shape != (pos.shape[0],):
            raise ConfigError("t_offsets must have shape (n_packets,)")
        for arr in (pos, mom, toff):
            arr.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "momenta", mom)
        object.__setattr__(self, "t_offsets", toff)
        object.__setattr__(self, "seed", _normalize_seed(self.seed, "ensemble"))

    @property
    def n_packets(self) -> int:
        return self.positions.shape[0]

    @classmethod
    def draw(cls, n_packets: int, eps: float, seed, t_offsets=None
             ) -> "WavePacketEnsemble":
        """Draw centers and velocities from the seeded generator."""
        if not isinstance(n_packets, (int, np.integer)) or n_packets < 1:
            raise ConfigError(f"n_packets must be a positive integer, got {n_packets}")
        key = _normalize_seed(seed, "draw")
        rng = np.random.default_rng(key)
        positions = rng.standard_normal((int(n_packets), 3))
        momenta = rng.standard_normal((int(n_packets), 3))
        if t_offsets is None:
            t_offsets = np.zeros(int(n_packets))
        return cls(eps=eps, positions=positions, momenta=momenta,
                   t_offsets=t_offsets, seed=key)

    def to_config(self) -> dict:
        """Seed and scalar parameters only; arrays are re-derived on load."""
        seed = self.seed if isinstance(self.seed, int) else tuple(self.seed)
        return {
            "n_packets": self.n_packets,
            "eps": self.eps,
            "seed": seed,
            "t_offsets": tuple(float(t) for t in self.t_offsets),
        }

    @classmethod
    def from_config(cls, config: dict) -> "WavePacketEnsemble":
        try:
            n_packets = config["n_packets"]
            eps = config["eps"]
            seed = config["seed"]
        except (TypeError, KeyError) as exc:
            raise ConfigError(f"ensemble config missing key: {exc}") from exc
        seed = tuple(seed) if isinstance(seed, (tuple, list)) else seed
        t_offsets = config.get("t_offsets")
        return cls.draw(n_packets, eps, seed, t_offsets=t_offsets)


@dataclass(frozen=True)
class CycleFrame:
    """A packet relabeling together with the packet scale.

    ``pi`` maps label ``j`` to ``pi[j - 1]`` on ``{1, .., k}``.  The identity
    relabeling makes :func:`cycle_coords` the identity map exactly.
    """

    pi: tuple
    eps: float

    def __post_init__(self):
        try:
            images = tuple(int(p) for p in self.pi)
        except (TypeError, ValueError) as exc:
            raise ConfigError("pi must be a sequence of integers") from exc
        k = len(images)
        if k < 1 or sorted(images) != list(range(1, k + 1)):
            raise ConfigError(
                f"pi must be a bijection of 1..k as a tuple of images, got {self.pi!r}"
            )
        object.__setattr__(self, "pi", images)
        eps = float(self.eps)
        if eps <= 0.0:
            raise ConfigError(f"frame eps must be positive, got {eps}")
        object.__setattr__(self, "eps", eps)

    @property
    def k(self) -> int:
        return len(self.pi)

    @property
    def is_identity(self) -> bool:
        return self.pi == tuple(range(1, len(self.pi) + 1))

    @classmethod
    def identity(cls, k: int, eps: float) -> "CycleFrame":
        return cls(pi=tuple(range(1, int(k) + 1)), eps=eps)

    @classmethod
    def pair_swap(cls, eps: float) -> "CycleFrame":
        """The two-packet exchange (2 1)."""
        return cls(pi=(2, 1), eps=eps)


def _frame_arrays(x, xi, frame: CycleFrame, who: str):
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if x.shape != xi.shape:
        raise ConfigError(f"{who} needs matching position and frequency shapes")
    if x.ndim < 2 or x.shape[-2] != frame.k:
        raise ConfigError(
            f"{who} expects arrays of shape (..., k, d) with k = {frame.k}, "
            f"got {x.shape}"
        )
    return x, xi


def cycle_coords(x, xi, frame: CycleFrame):
    """Cycle coordinates ``(p, q)`` of packet phase-space points.

    ``p[j] = (x[j] + x[pi(j)])/2 + eps*(xi[j] - xi[pi(j)])/2`` and
    ``q[j] = (xi[j] + xi[pi(j)])/2 + (x[j] - x[pi(j)])/(2*eps)``: the mean
    of a point and its relabeled partner, and the relative separation
    blown up to the packet scale.  Implemented through the light-cone
    halves ``a = x + eps*xi`` and ``b = x - eps*xi``, in which the map is
    ``(a, b) -> (a, b∘pi)`` followed by the inverse half-splitting — so
    :func:`cycle_coords_inverse` recovers the inputs exactly.

    Arrays have shape ``(..., k, d)`` with ``k = frame.k``.
    """
    x, xi = _frame_arrays(x, xi, frame, "cycle_coords")
    if frame.is_identity:
        return x.copy(), xi.copy()
    perm = np.asarray(frame.pi) - 1
    a = x + frame.eps * xi
    b = x - frame.eps * xi
    b_perm = b[..., perm, :]
    p = 0.5 * (a + b_perm)
    q = (a - b_perm) / (2.0 * frame.eps)
    return p, q


def cycle_coords_inverse(p, q, frame: CycleFrame):
    """Invert :func:`cycle_coords`: recover ``(x, xi)`` from ``(p, q)``.

    ``p + eps*q`` returns the ``a`` half unchanged and ``p - eps*q``
    returns the relabeled ``b`` half, so undoing the relabeling and
    re-splitting the halves is exact.
    """
    p, q = _frame_arrays(p, q, frame, "cycle_coords_inverse")
    if frame.is_identity:
        return p.copy(), q.copy()
    perm = np.asarray(frame.pi) - 1
    a = p + frame.eps * q
    b = np.empty_like(a)
    b[..., perm, :] = p - frame.eps * q
    x = 0.5 * (a + b)
    xi = (a - b) / (2.0 * frame.eps)
    return x, xi


# ---------------------------------------------------------------------------
# derangement combinatorics
# ---------------------------------------------------------------------------

def derangements(k: int) -> int:
    """Number of fixed-point-free permutations of ``k`` labels.

    Computed by the recurrence ``D(k) = (k - 1)(D(k - 1) + D(k - 2))``
    with ``D(0) = 1`` and ``D(1) = 0``; equals ``round(k!/e)`` for
    ``k >= 1``.  Arguments above 20 are refused: the count leaves the
    64-bit integer range there.
    """
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise ConfigError(f"derangements needs an integer, got {k!r}")
    if k < 0:
        raise ConfigError(f"derangements needs a nonnegative integer, got {k}")
    if k > _MAX_DERANGEMENT:
        raise UnsupportedOperationError(
            f"derangement counts above k = {_MAX_DERANGEMENT} leave the "
            f"64-bit range; got k = {k}"
        )
    prev, cur = 1, 0  # D(0), D(1)
    if k == 0:
        return prev
    for j in range(2, k + 1):
        prev, cur = cur, (j - 1) * (cur + prev)
    return cur


def displaced_permutation_count(n: int, k: int) -> int:
    """Permutations of ``n`` labels displacing exactly ``k`` of them.

    The displaced set can be chosen ``C(n, k)`` ways and must be deranged
    within itself, so the count is ``C(n, k) * derangements(k)``; it is
    bounded by the falling factorial ``n!/(n - k)!``.  These counts size
    the relabeling classes in :func:`normalization_expectation` and sum
    to ``n!`` over ``k``.
    """
    for name, value in (("n", n), ("k", k)):
        if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
            raise ConfigError(f"displaced_permutation_count needs integer {name}")
    if n < 0 or k < 0 or k > n:
        raise ConfigError(
            f"displaced_permutation_count needs 0 <= k <= n, got n={n}, k={k}"
        )
    return math.comb(int(n), int(k)) * derangements(int(k))


# ---------------------------------------------------------------------------
# normalization audit
# ---------------------------------------------------------------------------

_PERMS_CACHE: dict = {}


def _permutations(n: int):
    if n not in _PERMS_CACHE:
        _PERMS_CACHE[n] = tuple(itertools.permutations(range(n)))
    return _PERMS_CACHE[n]


def _overlap_gram(ensemble: WavePacketEnsemble) -> np.ndarray:
    """Pairwise packet overlaps, normalized so the diagonal is exactly 1.

    Entry ``(a, b)`` is the closed-form Gaussian integral of packet ``a``
    against packet ``b`` divided by the like-packet value ``eps**(3/2)``:
    ``exp(-(|c_a - c_b|^2 + |w_a - w_b|^2)/(4 eps))`` times the phase
    ``exp(i (c_a + c_b)·(w_a - w_b)/(2 eps))`` with ``c_j`` the flown
    centers ``position + 2 t w`` — Hermitian, and rapidly small off the
    diagonal once the packets separate.
    """
    eps = ensemble.eps
    centers = ensemble.positions + 2.0 * ensemble.t_offsets[:, None] * ensemble.momenta
    w = ensemble.momenta
    dc = centers[:, None, :] - centers[None, :, :]
    sc = centers[:, None, :] + centers[None, :, :]
    dw = w[:, None, :] - w[None, :, :]
    amp = np.exp(-(np.sum(dc * dc, axis=-1) + np.sum(dw * dw, axis=-1)) / (4.0 * eps))
    phase = np.exp(1j * np.sum(sc * dw, axis=-1) / (2.0 * eps))
    return amp * phase


def _permanent(matrix: np.ndarray) -> complex:
    n = matrix.shape[0]
    rows = np.arange(n)
    total = 0.0 + 0.0j
    for nu in _permutations(n):
        total += np.prod(matrix[rows, nu])
    return total


def _check_packet_count(n_packets, who: str) -> int:
    if not isinstance(n_packets, (int, np.integer)) or isinstance(n_packets, bool):
        raise ConfigError(f"{who} needs an integer packet count")
    if n_packets < 1:
        raise ConfigError(f"{who} needs at least one packet, got {n_packets}")
    if n_packets > _MAX_PACKETS:
        raise UnsupportedOperationError(
            f"{who} sums (n_packets!)**2 relabeling pairs; counts above "
            f"{_MAX_PACKETS} are unsupported (got {n_packets})"
        )
    return int(n_packets)


def normalization_check(n_packets: int, eps: float, trials: int = 800,
                        seed: int = 0):
    """Monte-Carlo mean square norm of the symmetrized ensemble state.

    Each trial draws one ensemble and evaluates its square norm exactly:
    the permanent of the packet overlap Gram matrix, normalized so a
    perfectly orthogonal draw scores 1.  Averaging over trials estimates
    the expected square norm, which is ``1 + O(eps**(3/2))`` — the
    correction is the chance that two independently drawn packets
    overlap.  (The remainder-series bound behind that reading needs
    ``eps < 1``; larger ``eps`` still evaluates, it just measures a
    regime where the correction is not small.)

    Trials use per-trial derived seeds ``(seed, trial)``, so the
    aggregate is independent of evaluation order.  Returns
    ``(estimate, stderr)``.
    """
    n = _check_packet_count(n_packets, "normalization_check")
    eps = float(eps)
    if eps <= 0.0:
        raise ConfigError(f"normalization_check needs eps > 0, got {eps}")
    if not isinstance(trials, (int, np.integer)) or trials < 200:
        raise ConfigError(f"normalization_check needs trials >= 200, got {trials}")
    base = _normalize_seed(seed, "normalization_check")
    prefix = (base,) if isinstance(base, int) else base
    values = np.empty(int(trials))
    for t in range(int(trials)):
        ensemble = WavePacketEnsemble.draw(n, eps, prefix + (t,))
        values[t] = _permanent(_overlap_gram(ensemble)).real
    estimate = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(trials))
    return estimate, stderr


def normalization_expectation(n_packets: int, eps: float) -> float:
    """Closed-form expectation of the :func:`normalization_check` estimate.

    The expectation of the normalized Gram permanent splits over
    relabelings ``nu``; each term is a Gaussian expectation over the
    centers and velocities, evaluated exactly as ``det(M_nu)**(-3/2)``
    with ``M_nu`` the (complex symmetric, positive-real-part) covariance
    update of the per-axis quadratic form.  The identity relabeling
    contributes exactly 1; a pure two-packet swap contributes
    ``(1 + 2/eps)**(-3)``, which is the whole correction for
    ``n_packets = 2``.
    """
    n = _check_packet_count(n_packets, "normalization_expectation")
    eps = float(eps)
    if eps <= 0.0:
        raise ConfigError(f"normalization_expectation needs eps > 0, got {eps}")
    total = 0.0 + 0.0j
    eye = np.eye(2 * n)
    for nu in _permutations(n):
        if all(i == j for i, j in enumerate(nu)):
            total += 1.0
            continue
        coupling = np.zeros((2 * n, 2 * n), dtype=complex)
        for i, j in enumerate(nu):
            if i == j:
                continue
            diff = np.zeros(n)
            diff[i] += 1.0
            diff[j] -= 1.0
            summ = np.zeros(n)
            summ[i] += 1.0
            summ[j] += 1.0
            block = np.outer(diff, diff) / (2.0 * eps)
            coupling[:n, :n] += block          # center separations
            coupling[n:, n:] += block          # velocity separations
            cross = -1j * np.outer(summ, diff) / (4.0 * eps)
            coupling[:n, n:] += cross          # center-velocity phase
            coupling[n:, :n] += cross.T
        eigenvalues = np.linalg.eigvals(eye + coupling)
        total += np.prod(np.power(eigenvalues, -1.5))
    return float(total.real)


# ---------------------------------------------------------------------------
# cycle-term closed forms
# ---------------------------------------------------------------------------

def _offsets_for(frame_k: int, t_offsets) -> np.ndarray:
    t = np.asarray(t_offsets, dtype=float)
    if t.shape != (frame_k,):
        raise ConfigError(
            f"t_offsets must have shape ({frame_k},), got {t.shape}"
        )
    return t


def cycle_term_closed_form(frame: CycleFrame, t_offsets, x, xi):
    """One relabeling's contribution to the rescaled pair correlation.

    In cycle coordinates the term is a product over packets ``j`` with
    spread ``sigma_j = 1 + 4 t_j**2``::

        sigma**(-3/2) * exp(-2|q|^2 / sigma)
                      * (2 pi)**(-3/2) * exp(-|p|^2 / (2 sigma))
                      * exp(-4i t (q . p) / sigma)

    — the frequency side carries the velocity distribution's transform,
    the position side the center distribution, and free flight couples
    the two through the oscillatory factor.  The value depends on ``eps``
    only through the cycle coordinates; on the identity relabeling those
    are ``(x, xi)`` themselves, so the core term is eps-independent.

    ``x`` and ``xi`` have shape ``(..., k, 3)``; returns a complex array
    of shape ``(...)`` (a scalar for single points).
    """
    t = _offsets_for(frame.k, t_offsets)
    p, q = cycle_coords(x, xi, frame)
    sigma = 1.0 + 4.0 * t * t
    qq = np.sum(q * q, axis=-1)
    pp = np.sum(p * p, axis=-1)
    qp = np.sum(q * p, axis=-1)
    log_amp = (-1.5 * np.log(sigma) - 1.5 * math.log(_TWO_PI)
               - 2.0 * qq / sigma - 0.5 * pp / sigma)
    phase = -4.0 * t * qp / sigma
    per_packet = np.exp(log_amp + 1j * phase)
    out = np.prod(per_packet, axis=-1)
    return complex(out) if out.ndim == 0 else out


def velocity_core_term(x, v, t_offsets):
    """Velocity-side form of the identity-relabeling cycle term.

    Fourier transforming :func:`cycle_term_closed_form` (identity frame)
    in each packet's frequency, with the ``exp(+i v . xi)`` phase-space
    sign convention and a ``(2 pi)**-3`` transform normalization per
    packet, completes the square into drifting local Maxwellians::

        prod_j C * exp(-|x_j - v_j t_j|^2 / 2) * exp(-|v_j|^2 / 8)

    with the exact constant ``C = (2 pi)**(-9/2) (pi/2)**(3/2)`` per
    packet.  ``x`` and ``v`` have shape ``(..., k, 3)``; returns a real
    array of shape ``(...)``.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape != v.shape or x.ndim < 2:
        raise ConfigError("velocity_core_term needs matching (..., k, 3) arrays")
    t = _offsets_for(x.shape[-2], t_offsets)
    drift = x - v * t[..., :, None]
    exponent = -0.5 * np.sum(drift * drift, axis=-1) - 0.125 * np.sum(v * v, axis=-1)
    constant = _TWO_PI ** -4.5 * (math.pi / 2.0) ** 1.5
    out = np.prod(constant * np.exp(exponent), axis=-1)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# two-cycle scaling ladder
# ---------------------------------------------------------------------------

def _gauss_legendre(lo: float, hi: float, n: int):
    nodes, weights = np.polynomial.legendre.leggauss(int(n))
    half = 0.5 * (hi - lo)
    return lo + half * (nodes + 1.0), half * weights


def _x_derivative_factor(s: float, eps: float, n_radial: int, n_angle: int) -> float:
    """Position-side factor: ``s`` derivatives per packet on the two-cycle term.

    The position dependence of the two-cycle term is a Gaussian in the
    packet mean and a Gaussian of width ``eps/2`` in the packet
    separation, so its spectrum splits into the sum frequency ``a``
    (order one) and the difference frequency (order ``1/eps``, rescaled
    here to ``beta``).  Both derivative weights ``|eta_1|^s |eta_2|^s``
    live on the mixed radii, leaving a three-variable bipolar integral
    whose integrand is eps-uniform; the eps power in front is
    ``(3 - 4 s)/2``.
    """
    a, wa = _gauss_legendre(0.0, 8.0, n_radial)
    beta, wb = _gauss_legendre(0.0, 16.0, n_radial)
    cos, wc = _gauss_legendre(-1.0, 1.0, n_angle)
    A = a[:, None, None]
    B = beta[None, :, None]
    C = cos[None, None, :]
    W = wa[:, None, None] * wb[None, :, None] * wc[None, None, :]
    base = (eps * A) ** 2 + B * B
    mix = 2.0 * eps * A * B * C
    radial = (A * A) * (B * B) * np.exp(-0.5 * A * A - 0.125 * B * B)
    integral = float(np.sum(W * radial * ((base + mix) * (base - mix)) ** s))
    return (math.pi / 8.0) * 4.0 ** (-s) * eps ** (1.5 - 2.0 * s) * math.sqrt(integral)


def _xi_weight_factor(w: float, eps: float, n_radial: int, n_angle: int) -> float:
    """Frequency-side factor: ``<xi>**-w`` weights per packet on the two-cycle term.

    The frequency dependence is a Gaussian of width ``1/eps`` in the
    packet frequency difference, so the weighted square integral runs its
    radial variable out to the packet scale; a log-spaced outer panel
    captures the polynomial tail under the Gaussian cutoff.  For
    ``w > 3/4`` the integral converges as ``eps -> 0``, which is what
    makes the weight strong enough to tame the frequency spread.
    """
    big, wbig = _gauss_legendre(0.0, 3.0, n_radial)
    mu_head, w_head = _gauss_legendre(0.0, 10.0, n_radial)
    mu_max = max(20.0, 4.5 / eps)
    u, wu = _gauss_legendre(0.0, math.log(mu_max / 10.0), n_radial)
    mu_tail = 10.0 * np.exp(u)
    mu = np.concatenate([mu_head, mu_tail])
    wmu = np.concatenate([w_head, wu * mu_tail])
    X = big[:, None, None]
    M = mu[None, :, None]
    cos, wc = _gauss_legendre(-1.0, 1.0, n_angle)
    C = cos[None, None, :]
    W = wbig[:, None, None] * wmu[None, :, None] * wc[None, None, :]
    base = 1.0 + X * X + M * M
    mix = 2.0 * X * M * C
    radial = (X * X) * (M * M) * np.exp(-8.0 * X * X - 2.0 * (eps * M) ** 2)
    integral = float(np.sum(W * radial * ((base + mix) * (base - mix)) ** (-w)))
    return 8.0 * math.pi * math.sqrt(integral)


def cycle_scaling_fit(s: float, eps_values=DEFAULT_EPS_LADDER, *,
                      weight_exponent: float = 1.6, n_radial: int = 48,
                      n_angle: int = 32) -> ScalingReport:
    """Log-log exponent of the weighted two-cycle norm along an eps ladder.

    For each ladder value the norm ``|| <xi_1>^-w <xi_2>^-w |grad_1|^s
    |grad_2|^s f ||_{L^2}`` of the two-packet exchange term separates into
    :func:`_x_derivative_factor` times :func:`_xi_weight_factor` (the term
    is a product of a position profile and a frequency profile in mean /
    difference variables).  The fitted slope approaches ``3/2 - 2 s``:
    positive for ``s < 3/4`` (the term vanishes), zero at the critical
    three-quarters derivative, negative beyond (the norm blows up, which
    is the term's irregularity).

    ``weight_exponent`` is the per-packet velocity decay ``w`` and must
    exceed 3/4 for the frequency integral to converge; the canonical
    choice is slightly above 3/2.  Radial rules need at least
    ``_MIN_RADIAL_NODES`` nodes — fewer is refused with the required
    count, since the rescaled profiles are then under-resolved.
    """
    s = float(s)
    if s < 0.0:
        raise ConfigError(f"derivative order s must be nonnegative, got {s}")
    w = float(weight_exponent)
    if w <= 0.75:
        raise ConfigError(
            "weight_exponent must exceed 3/4 so the frequency-side integral "
            f"converges; got {w}"
        )
    if int(n_radial) < _MIN_RADIAL_NODES:
        raise ConfigError(
            f"under-resolved quadrature: the rescaled cycle-term profiles need "
            f"at least {_MIN_RADIAL_NODES} radial nodes, got {n_radial}"
        )
    if int(n_angle) < 8:
        raise ConfigError(f"n_angle must be at least 8, got {n_angle}")
    eps_values = tuple(float(e) for e in eps_values)
    if len(eps_values) < 2 or any(e <= 0.0 for e in eps_values):
        raise ConfigError("eps_values must be at least two positive scales")
    if any(b >= a for a, b in zip(eps_values, eps_values[1:])):
        raise ConfigError("eps_values must be strictly decreasing")
    norms = []
    for eps in eps_values:
        x_part = _x_derivative_factor(s, eps, int(n_radial), int(n_angle))
        xi_part = _xi_weight_factor(w, eps, int(n_radial), int(n_angle))
        norms.append(_TWO_PI ** -3 * x_part * xi_part)
    slope, residual = fit_loglog(eps_values, norms)
    return ScalingReport(points=tuple(zip(eps_values, norms)),
                         slope=slope, residual=residual)


# ---------------------------------------------------------------------------
# random-walk collision clock
# ---------------------------------------------------------------------------

def expected_crossings(n_steps: int) -> float:
    """Exact mean sign-change count of a Gaussian random walk.

    Consecutive partial sums ``(S_k, S_{k+1})`` are jointly Gaussian with
    correlation ``sqrt(k/(k+1))``, so each junction flips sign with
    probability ``arccos(sqrt(k/(k+1)))/pi``; the mean count is the sum
    over junctions, asymptotically ``2 sqrt(n)/pi``.
    """
    if not isinstance(n_steps, (int, np.integer)) or n_steps < 1:
        raise ConfigError(f"n_steps must be a positive integer, got {n_steps}")
    if n_steps == 1:
        return 0.0
    k = np.arange(1, int(n_steps), dtype=float)
    return float(np.sum(np.arccos(np.sqrt(k / (k + 1.0)))) / math.pi)


def random_walk_crossings(n_steps: int, trials: int = 2000, seed: int = 0):
    """Sign changes and final square displacement of a Gaussian walk.

    Simulates ``trials`` walks of ``n_steps`` unit-variance Gaussian
    increments and returns ``(mean_crossings, mean_sq_displacement)``.
    The crossing count approaches ``2 sqrt(n)/pi`` (within 5% once the
    walk has a few hundred steps — see :func:`expected_crossings` for the
    exact finite-``n`` value) and the mean square displacement is
    ``n_steps``.  Short walks are accepted: they still measure
    displacement, just not the crossing asymptote.

    Trials draw from per-trial derived seeds ``(seed, trial)``.
    """
    if not isinstance(n_steps, (int, np.integer)) or n_steps < 1:
        raise ConfigError(f"n_steps must be a positive integer, got {n_steps}")
    if not isinstance(trials, (int, np.integer)) or trials < 1000:
        raise ConfigError(f"random_walk_crossings needs trials >= 1000, got {trials}")
    base = _normalize_seed(seed, "random_walk_crossings")
    prefix = (base,) if isinstance(base, int) else base
    crossings = np.empty(int(trials))
    square_displacement = np.empty(int(trials))
    for t in range(int(trials)):
        rng = np.random.default_rng(prefix + (t,))
        walk = np.cumsum(rng.standard_normal(int(n_steps)))
        crossings[t] = np.count_nonzero(walk[:-1] * walk[1:] < 0.0)
        square_displacement[t] = walk[-1] ** 2
    return float(np.mean(crossings)), float(np.mean(square_displacement))
