"""Fractional-order operators and discrete PID controller realization.

s**alpha is approximated on a finite frequency band by the Oustaloup
recursive filter (geometrically spaced zero/pole pairs). Controller
templates map a parameter vector theta to a ready-to-run discrete TF.

The integer-order form discretizes termwise and sums over a common
discrete denominator, staying polynomial throughout. The fractional form
cannot: its approximation spreads roots over the whole band, and the
expanded coefficients of such a sum lose the slow dynamics entirely in
double precision. It is therefore realized in factored form, mapping
every zero and pole through the bilinear substitution individually and
recovering the zeros of the parallel sum from a structured state-space
assembly, which is the same rational function the common-denominator
route defines, computed without ever expanding it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import signal as _sig

from .lti_core import ContinuousTf, DiscreteTf, DiscreteZpk, DiscretizationError, tustin

__all__ = [
    "FopidParams",
    "IopidParams",
    "OustaloupConfig",
    "ControllerKind",
    "ControllerTemplate",
    "oustaloup",
    "realize_fopid",
    "realize_iopid",
    "realize",
]


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class FopidParams:
    """Fractional PID gains and orders, vector order [kfp, kfi, lam, kfd, mu]."""

    kfp: float
    kfi: float
    lam: float
    kfd: float
    mu: float

    def __post_init__(self):
        for name in ("kfp", "kfi", "lam", "kfd", "mu"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))

    def as_theta(self) -> np.ndarray:
        return np.array([self.kfp, self.kfi, self.lam, self.kfd, self.mu])

    @classmethod
    def from_theta(cls, theta) -> "FopidParams":
        arr = np.asarray(theta, dtype=float).reshape(-1)
        if arr.size != 5:
            raise ValueError(f"fractional PID expects 5 parameters, got {arr.size}")
        return cls(*arr)


@dataclass(frozen=True)
class IopidParams:
    """Integer-order PID gains, vector order [kp, ki, kd]."""

    kp: float
    ki: float
    kd: float

    def __post_init__(self):
        for name in ("kp", "ki", "kd"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))

    def as_theta(self) -> np.ndarray:
        return np.array([self.kp, self.ki, self.kd])

    @classmethod
    def from_theta(cls, theta) -> "IopidParams":
        arr = np.asarray(theta, dtype=float).reshape(-1)
        if arr.size != 3:
            raise ValueError(f"integer PID expects 3 parameters, got {arr.size}")
        return cls(*arr)


@dataclass(frozen=True)
class OustaloupConfig:
    """Band and order of the recursive fractional-operator approximation.

    ``order`` is the filter order per operator; the filter itself carries
    2*order + 1 zero/pole pairs spread geometrically over [w_b, w_h] rad/s.
    """

    order: int = 5
    w_b: float = 1e-6
    w_h: float = 1e3

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValueError("order must be an integer >= 1")
        object.__setattr__(self, "order", int(self.order))
        if not (0.0 < self.w_b < self.w_h):
            raise ValueError("band edges must satisfy 0 < w_b < w_h")

    @property
    def n_sections(self) -> int:
        return 2 * self.order + 1


class ControllerKind(Enum):
    FOPID = "fopid"
    IOPID = "iopid"


@dataclass(frozen=True)
class ControllerTemplate:
    """Controller family plus everything needed to realize it in discrete time."""

    kind: ControllerKind
    sample_time: float
    oustaloup: OustaloupConfig = field(default_factory=OustaloupConfig)

    def __post_init__(self):
        if not isinstance(self.kind, ControllerKind):
            object.__setattr__(self, "kind", ControllerKind(str(self.kind).lower()))
        if not (self.sample_time > 0.0):
            raise ValueError("sample time must be > 0")

    @property
    def theta_dim(self) -> int:
        return 5 if self.kind is ControllerKind.FOPID else 3


def _staircase(a: float, cfg: OustaloupConfig):
    """Corner frequencies and gain of the fractional-part filter.

    For a in (0, 1) the M = 2*order + 1 zero/pole corner pairs are

        w'_k = w_b * (w_h/w_b)**((k - 1 + (1 - a)/2) / M)   (zeros)
        w_k  = w_b * (w_h/w_b)**((k - 1 + (1 + a)/2) / M)   (poles)

    with gain w_h**a, which pins the magnitude at the band's geometric
    midpoint sqrt(w_b*w_h) to the ideal value exactly.
    """
    m = cfg.n_sections
    ratio = cfg.w_h / cfg.w_b
    k = np.arange(1, m + 1)
    wz = cfg.w_b * ratio ** ((k - 1.0 + (1.0 - a) / 2.0) / m)
    wp = cfg.w_b * ratio ** ((k - 1.0 + (1.0 + a) / 2.0) / m)
    return wz, wp, cfg.w_h ** a


def oustaloup(alpha: float, cfg: OustaloupConfig) -> ContinuousTf:
    """Band-limited rational approximation of s**alpha.

    The exponent is split as alpha = n + a with integer n and fractional
    a in [0, 1); the integer part is the exact monomial s**n and only the
    fractional part is approximated by the recursive zero/pole staircase.
    alpha = 0 returns unity and negative alpha returns the reciprocal of
    the positive case.
    """
    alpha = _require_finite("alpha", alpha)
    if alpha < 0.0:
        pos = oustaloup(-alpha, cfg)
        return ContinuousTf(pos.den, pos.num)
    n = int(math.floor(alpha))
    a = alpha - n
    mono = np.zeros(n + 1)
    mono[0] = 1.0
    if a == 0.0:
        return ContinuousTf(mono, [1.0])
    wz, wp, gain = _staircase(a, cfg)
    num, den = _sig.zpk2tf(-wz, -wp, gain)
    return ContinuousTf(np.convolve(mono, np.atleast_1d(num)), den)


def _sum_terms(terms):
    """Combine (num, den) coefficient pairs over a common denominator."""
    num, den = terms[0]
    for n2, d2 in terms[1:]:
        num = np.polyadd(np.convolve(num, d2), np.convolve(n2, den))
        den = np.convolve(den, d2)
    return num, den


def _power_roots(power: float, cfg: OustaloupConfig):
    """Continuous zeros, poles, and gain of the band-limited s**power."""
    if power == 0.0:
        return np.zeros(0), np.zeros(0), 1.0
    mag = abs(power)
    n = int(math.floor(mag))
    a = mag - n
    zeros = [0.0] * n
    poles = []
    gain = 1.0
    if a > 0.0:
        wz, wp, gain = _staircase(a, cfg)
        zeros.extend(-wz)
        poles.extend(-wp)
    zeros = np.asarray(zeros, dtype=float)
    poles = np.asarray(poles, dtype=float)
    if power < 0.0:
        return poles, zeros, 1.0 / gain
    return zeros, poles, gain


def _bilinear_roots(zeros, poles, gain, ts):
    """Map a continuous zpk triple through s -> (2/ts)(z-1)/(z+1).

    Every root maps individually as s0 -> (c + s0)/(c - s0); the side with
    fewer roots picks up images of the roots at infinity, which land on
    z = -1. Accepts improper triples, unlike the polynomial route.
    """
    c = 2.0 / ts
    zd = (c + zeros) / (c - zeros)
    pd = (c + poles) / (c - poles)
    gain = gain * float(np.prod(c - zeros) / np.prod(c - poles))
    deficit = poles.size - zeros.size
    if deficit > 0:
        zd = np.concatenate([zd, -np.ones(deficit)])
    elif deficit < 0:
        pd = np.concatenate([pd, -np.ones(-deficit)])
    return zd, pd, gain


def _chain_arrays(zd, pd, gain):
    """State-space of gain * prod (z - zd_i)/(z - pd_i) as a section chain.

    Section i holds one pole: x_i+ = pd_i x_i + u_i, y_i = u_i +
    (pd_i - zd_i) x_i, with sections fed in series and the gain applied
    at the output, so every matrix entry stays within a few orders of
    magnitude of the root data itself.
    """
    n = pd.size
    A = np.zeros((n, n))
    B = np.ones(n)
    C = np.empty(n)
    for i in range(n):
        A[i, i] = pd[i]
        A[i, :i] = C[:i]
        C[i] = pd[i] - zd[i]
    return A, B, gain * C, gain


def _fopid_branches(p: FopidParams, t: ControllerTemplate):
    """Discrete root triples (zeros, poles, gain) of the active fractional terms.

    Terms whose gain is exactly zero are dropped, so their order parameters
    are ignored. The returned triples are exact up to the bilinear map of
    each individual root; nothing is expanded or summed yet.
    """
    ts = t.sample_time
    branches = []
    if p.kfi != 0.0:
        z, q, k = _power_roots(-p.lam, t.oustaloup)
        branches.append(_bilinear_roots(z, q, p.kfi * k, ts))
    if p.kfd != 0.0:
        z, q, k = _power_roots(p.mu, t.oustaloup)
        branches.append(_bilinear_roots(z, q, p.kfd * k, ts))
    return branches


def realize_fopid(p: FopidParams, t: ControllerTemplate) -> DiscreteZpk:
    """Factored discrete realization of kfp + kfi*s**(-lam) + kfd*s**mu.

    Terms whose gain is exactly zero are dropped before anything is built,
    so their order parameters are ignored and a theta of [1, 0, 1, 0, 1]
    realizes the constant controller 1. Active fractional terms become
    chains of bilinearly mapped first-order sections; the parallel sum is
    assembled as a block-diagonal state space whose transmission zeros
    (eigenvalues of the inverse system) complete the factored form. The
    result is biproper whenever any term is active, because the bilinear
    image of each band-limited term is itself biproper.
    """
    if t.kind is not ControllerKind.FOPID:
        raise ValueError("template kind must be FOPID")
    ts = t.sample_time
    branches = _fopid_branches(p, t)
    if not branches and p.kfp == 0.0:
        return DiscreteZpk((), (), 0.0, ts)
    blocks = [_chain_arrays(zd, pd, k) for zd, pd, k in branches]
    feedthrough = p.kfp + sum(b[3] for b in blocks)
    n = sum(b[0].shape[0] for b in blocks)
    if n == 0:
        return DiscreteZpk((), (), feedthrough, ts)
    scale = abs(p.kfp) + sum(abs(b[3]) for b in blocks)
    if abs(feedthrough) <= 1e-12 * scale:
        raise DiscretizationError("realization has no usable feedthrough")
    A = np.zeros((n, n))
    B = np.zeros(n)
    C = np.zeros(n)
    i = 0
    for Ab, Bb, Cb, _ in blocks:
        m = Ab.shape[0]
        A[i:i + m, i:i + m] = Ab
        B[i:i + m] = Bb
        C[i:i + m] = Cb
        i += m
    pole_list = np.concatenate([np.diag(b[0]) for b in blocks])
    zero_list = np.linalg.eigvals(A - np.outer(B, C / feedthrough))
    return DiscreteZpk(tuple(zero_list), tuple(pole_list), feedthrough, ts)


def realize_iopid(p: IopidParams, t: ControllerTemplate) -> DiscreteTf:
    """Discrete realization of kp + ki/s + kd*s, discretized termwise.

    The continuous sum is improper whenever kd is nonzero, but each term
    has a perfectly good bilinear image, so the terms are mapped first and
    then summed over a common discrete denominator. Zero gains are dropped.
    """
    if t.kind is not ControllerKind.IOPID:
        raise ValueError("template kind must be IOPID")
    ts = t.sample_time
    terms = []
    for g in (
        ContinuousTf([p.kp], [1.0]) if p.kp != 0.0 else None,
        ContinuousTf([p.ki], [1.0, 0.0]) if p.ki != 0.0 else None,
        ContinuousTf([p.kd, 0.0], [1.0]) if p.kd != 0.0 else None,
    ):
        if g is not None:
            gz = tustin(g, ts)
            terms.append((gz.num.as_array(), gz.den.as_array()))
    if not terms:
        return DiscreteTf([0.0], [1.0], ts)
    num, den = _sum_terms(terms)
    return DiscreteTf(num, den, ts)


def realize(theta, t: ControllerTemplate):
    """Realize a parameter vector against a template, dispatching on kind.

    Fractional templates produce a factored DiscreteZpk, integer ones a
    polynomial DiscreteTf; both run everywhere the pipeline needs them.
    """
    if t.kind is ControllerKind.FOPID:
        return realize_fopid(FopidParams.from_theta(theta), t)
    return realize_iopid(IopidParams.from_theta(theta), t)
