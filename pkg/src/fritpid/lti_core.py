"""Minimal SISO LTI toolbox used by the tuner.

Transfer functions come in two discrete flavours: plain polynomial ratios
(coefficients highest power first) for low-order systems, and a factored
zeros/poles/gain form for systems whose dynamics span too many decades for
monomial coefficients to carry. A filter with poles spread over nine decades
has a denominator whose value at z = 1 can sit thirty orders of magnitude
below its coefficients, so the polynomial form cannot represent it in double
precision; the factored form keeps every root exact and simulates through a
cascade of second-order sections. Continuous TFs carry an optional dead
time, discrete ones an integer sample delay. Only what the tuning pipeline
needs is provided: bilinear discretization, difference-equation simulation,
unity feedback, inversion, and pole-based stability checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np
from scipy import signal as _sig

__all__ = [
    "Polynomial",
    "ContinuousTf",
    "DiscreteTf",
    "DiscreteZpk",
    "Signal",
    "BiboStability",
    "SampleTimeError",
    "NonInvertibleError",
    "DiscretizationError",
    "AlgebraicLoopError",
    "tustin",
    "simulate",
    "impulse_response",
    "feedback_unity",
    "invert",
    "poles",
    "is_bibo_stable",
    "co_simulate",
]

#: relative threshold below which a leading coefficient counts as degenerate
_LEAD_TOL = 1e-12

#: absolute feedthrough threshold for inversion of a monic-denominator TF
_FEEDTHROUGH_TOL = 1e-12


class SampleTimeError(ValueError):
    """Signals or systems with incompatible sample times were combined."""


class NonInvertibleError(ValueError):
    """Inversion was requested for a TF without a usable direct feedthrough."""


class DiscretizationError(ValueError):
    """The bilinear substitution produced a degenerate denominator."""


class AlgebraicLoopError(ValueError):
    """A feedback interconnection has no well-posed sample-by-sample solution."""


def _same_ts(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-12 * max(abs(a), abs(b))


def _coerce_coeffs(coeffs) -> tuple:
    if isinstance(coeffs, Polynomial):
        return coeffs.coeffs
    arr = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("coefficients must be a non-empty 1-D sequence")
    # strip exact-zero leading terms, keep at least the constant term
    k = 0
    while k < arr.size - 1 and arr[k] == 0.0:
        k += 1
    return tuple(arr[k:].tolist())


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial, coefficients highest power first.

    Exact-zero leading coefficients are stripped on construction; the zero
    polynomial is kept as the single coefficient (0.0,).
    """

    coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _coerce_coeffs(self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.coeffs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    def __call__(self, x):
        return np.polyval(self.as_array(), x)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(np.convolve(self.as_array(), other.as_array()))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(np.polyadd(self.as_array(), other.as_array()))

    def scaled(self, k: float) -> "Polynomial":
        return Polynomial(k * self.as_array())


PolyLike = Union[Polynomial, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class ContinuousTf:
    """Continuous-time rational transfer function with optional dead time.

    Properness is not enforced: band-limited approximations of fractional
    differentiators are legitimately improper in s, and the bilinear map
    still lands them on a proper discrete TF.
    """

    num: PolyLike
    den: PolyLike
    dead_time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "num", Polynomial(self.num))
        object.__setattr__(self, "den", Polynomial(self.den))
        if self.den.is_zero:
            raise ValueError("denominator must not be identically zero")
        if not (self.dead_time >= 0.0):
            raise ValueError("dead time must be >= 0")

    @property
    def is_proper(self) -> bool:
        return self.num.degree <= self.den.degree


@dataclass(frozen=True)
class DiscreteTf:
    """Proper discrete-time rational TF with a monic denominator.

    ``delay_samples`` is an extra integer input delay kept outside the
    polynomial pair, i.e. the full map is z**(-delay_samples) * num/den.
    """

    num: PolyLike
    den: PolyLike
    sample_time: float
    delay_samples: int = 0

    def __post_init__(self):
        num = Polynomial(self.num)
        den = Polynomial(self.den)
        if den.is_zero:
            raise ValueError("denominator must not be identically zero")
        lead = den.coeffs[0]
        if lead != 1.0:
            num = num.scaled(1.0 / lead)
            den = den.scaled(1.0 / lead)
            # rescaling must leave the lead exactly one
            den = Polynomial((1.0,) + den.coeffs[1:])
        if num.degree > den.degree:
            raise ValueError("improper discrete transfer function")
        if not (self.sample_time > 0.0):
            raise ValueError("sample time must be > 0")
        if self.delay_samples < 0 or int(self.delay_samples) != self.delay_samples:
            raise ValueError("delay must be a non-negative integer sample count")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "delay_samples", int(self.delay_samples))

    @property
    def order(self) -> int:
        return self.den.degree

    @property
    def feedthrough(self) -> float:
        """Direct input-to-output gain at the current sample (0 if delayed)."""
        if self.delay_samples > 0 or self.num.degree < self.den.degree:
            return 0.0
        return self.num.coeffs[0]

    def dc_gain(self) -> float:
        return float(self.num(1.0) / self.den(1.0))


def _sorted_roots(r: np.ndarray) -> np.ndarray:
    order = np.lexsort((np.angle(r), -np.abs(r)))
    return r[order]


def _split_conjugates(roots: np.ndarray):
    """Split roots into (reals desc, upper-half pair members), or None.

    Returns None unless every complex root has its exact conjugate
    present, which is how they arrive from real-matrix eigenvalues.
    """
    real = roots[roots.imag == 0.0].real
    upper = roots[roots.imag > 0.0]
    lower = roots[roots.imag < 0.0]
    if upper.size != lower.size:
        return None
    if upper.size:
        upper = upper[np.lexsort((upper.imag, upper.real))]
        mirrored = np.conj(lower)
        mirrored = mirrored[np.lexsort((mirrored.imag, mirrored.real))]
        if not np.array_equal(upper, mirrored):
            return None
    return np.sort(real)[::-1], upper


def _quadratic_groups(real: np.ndarray, cplx: np.ndarray):
    """(key, coeffs) quadratic factors plus an optional linear tail.

    Adjacent pairing of the sorted real roots keeps each factor local on
    the real axis, so numerator and denominator groups with matching keys
    nearly cancel and the resulting sections stay well conditioned.
    """
    groups = [
        (abs(q), (1.0, -2.0 * q.real, q.real * q.real + q.imag * q.imag))
        for q in cplx
    ]
    for i in range(0, real.size - 1, 2):
        r1, r2 = real[i], real[i + 1]
        groups.append((max(abs(r1), abs(r2)), (1.0, -(r1 + r2), r1 * r2)))
    tail = None
    if real.size % 2:
        r = real[-1]
        tail = (1.0, -r, 0.0)
    return groups, tail


def _fast_sos(zeros: np.ndarray, poles: np.ndarray, gain: float):
    """Second-order sections from conjugate-paired root data.

    Handles any relative degree: pole sections left without a zero group
    get delayed numerators ((0, 0, 1) for a quadratic, (0, 1, 0) for a
    bare linear tail), which keeps the cascade aligned with the z-domain
    transfer function including its implicit delay. Returns None when
    some complex root lacks its exact conjugate; the caller then decides
    on a fallback.
    """
    if poles.size == 0 or zeros.size > poles.size:
        return None
    zsplit = _split_conjugates(zeros)
    psplit = _split_conjugates(poles)
    if zsplit is None or psplit is None:
        return None
    z_groups, z_tail = _quadratic_groups(*zsplit)
    p_groups, p_tail = _quadratic_groups(*psplit)
    z_groups.sort(key=lambda g: g[0])
    p_groups.sort(key=lambda g: g[0])
    spare = len(p_groups) - len(z_groups)
    rows = []
    if z_tail is not None and p_tail is None:
        # odd zero count against even pole count: the leftover linear
        # zero rides on the spare pole section with the nearest key
        if spare == 0:
            return None
        r = -z_tail[1]
        idx = min(range(spare), key=lambda i: abs(p_groups[i][0] - abs(r)))
        _, a = p_groups.pop(idx)
        rows.append([0.0, 1.0, -r] + list(a))
        spare -= 1
        z_tail = None
    for _, a in p_groups[:spare]:
        rows.append([0.0, 0.0, 1.0] + list(a))
    for (_, b), (_, a) in zip(z_groups, p_groups[spare:]):
        rows.append(list(b) + list(a))
    if p_tail is not None:
        if z_tail is not None:
            rows.append(list(z_tail) + list(p_tail))
        else:
            rows.append([0.0, 1.0, 0.0] + list(p_tail))
    sos = np.asarray(rows, dtype=float)
    sos[0, :3] *= gain
    return sos


@dataclass(frozen=True)
class DiscreteZpk:
    """Proper discrete-time TF held as factored zeros, poles, and gain.

    Represents gain * prod(z - zeros_i) / prod(z - poles_j) with no extra
    delay. Roots are stored exactly and sorted (largest magnitude first),
    complex ones in conjugate pairs; all downstream numerics work on the
    roots or on second-order sections built from them, never on expanded
    high-order coefficient vectors.
    """

    zeros: tuple
    poles: tuple
    gain: float
    sample_time: float

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.zeros, dtype=complex)).reshape(-1)
        p = np.atleast_1d(np.asarray(self.poles, dtype=complex)).reshape(-1)
        if z.size and not np.all(np.isfinite(z)):
            raise ValueError("zeros must be finite")
        if p.size and not np.all(np.isfinite(p)):
            raise ValueError("poles must be finite")
        if z.size > p.size:
            raise ValueError("improper discrete transfer function")
        gain = float(self.gain)
        if not np.isfinite(gain):
            raise ValueError("gain must be finite")
        if not (self.sample_time > 0.0):
            raise ValueError("sample time must be > 0")
        object.__setattr__(self, "zeros", tuple(_sorted_roots(z).tolist()))
        object.__setattr__(self, "poles", tuple(_sorted_roots(p).tolist()))
        object.__setattr__(self, "gain", gain)

    @property
    def order(self) -> int:
        return len(self.poles)

    @property
    def is_biproper(self) -> bool:
        return len(self.zeros) == len(self.poles)

    @property
    def feedthrough(self) -> float:
        """Direct input-to-output gain at the current sample."""
        return self.gain if self.is_biproper else 0.0

    def dc_gain(self) -> float:
        num = self.gain * np.prod(np.subtract(1.0, self.zeros))
        den = np.prod(np.subtract(1.0, self.poles))
        with np.errstate(divide="ignore", invalid="ignore"):
            return float(np.real(num / den))

    def response_at(self, z):
        """Frequency response by stable factorwise products, no expansion."""
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self.gain, dtype=complex)
        for z0 in self.zeros:
            out = out * (z - z0)
        for p0 in self.poles:
            out = out / (z - p0)
        return out

    def as_sos(self) -> np.ndarray:
        """Second-order-section matrix of the factored form (gain folded in)."""
        if not self.poles:
            return np.array([[self.gain, 0.0, 0.0, 1.0, 0.0, 0.0]])
        z = np.asarray(self.zeros)
        p = np.asarray(self.poles)
        sos = _fast_sos(z, p, self.gain)
        if sos is not None:
            return sos
        if z.size < p.size:
            # the generic pairing below works in z^-1 coefficients and
            # would silently drop the relative-degree delay
            raise ValueError(
                "sections for a strictly proper factored system need "
                "conjugate-paired roots"
            )
        return _sig.zpk2sos(z, p, self.gain, pairing="nearest")

    def to_transfer_function(self) -> DiscreteTf:
        """Expanded polynomial view; exact only while the order stays small."""
        num = self.gain * np.atleast_1d(np.real(np.poly(np.asarray(self.zeros))))
        den = np.atleast_1d(np.real(np.poly(np.asarray(self.poles))))
        if num.size < den.size:
            num = np.concatenate([np.zeros(den.size - num.size), num])
        return DiscreteTf(num, den, self.sample_time)

    def state_space(self):
        """Dense (A, B, C, D) of the section cascade, states two per section."""
        sos = self.as_sos()
        if not self.poles:
            return (np.zeros((0, 0)), np.zeros(0), np.zeros(0), self.gain)
        n = 2 * sos.shape[0]
        A = np.zeros((n, n))
        B = np.zeros(n)
        row = np.zeros(n)
        through = 1.0
        i = 0
        for b0, b1, b2, _, a1, a2 in sos:
            A[i, i] = -a1
            A[i, i + 1] = -a2
            A[i + 1, i] = 1.0
            A[i, :] += row  # section input carries the upstream output
            B[i] += through
            new_row = np.zeros(n)
            new_row[i] = b1 - b0 * a1
            new_row[i + 1] = b2 - b0 * a2
            row = new_row + b0 * row
            through = b0 * through
            i += 2
        return A, B, row, through


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled real signal."""

    samples: np.ndarray
    sample_time: float

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float, copy=True).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        if not (self.sample_time > 0.0):
            raise ValueError("sample time must be > 0")

    def __len__(self) -> int:
        return self.samples.size

    def l1(self) -> float:
        return float(np.sum(np.abs(self.samples)))

    def _binary(self, other: "Signal", op) -> "Signal":
        if not isinstance(other, Signal):
            return NotImplemented
        if len(self) != len(other):
            raise ValueError("signal lengths differ")
        if not _same_ts(self.sample_time, other.sample_time):
            raise SampleTimeError("signal sample times differ")
        return Signal(op(self.samples, other.samples), self.sample_time)

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)


class BiboStability(NamedTuple):
    stable: bool
    margin: float


# ---------------------------------------------------------------------------
# discretization


def _binomial_powers(base: np.ndarray, q: int) -> list:
    out = [np.array([1.0])]
    for _ in range(q):
        out.append(np.convolve(out[-1], base))
    return out


def _bilinear_expand(coeffs: np.ndarray, q: int, c: float,
                     pow_m1: list, pow_p1: list) -> np.ndarray:
    """Expand poly(s) under s -> c(z-1)/(z+1), multiplied through by (z+1)**q."""
    deg = len(coeffs) - 1
    out = np.zeros(q + 1)
    for i, a in enumerate(coeffs):
        if a == 0.0:
            continue
        k = deg - i
        out += a * (c ** k) * np.convolve(pow_m1[k], pow_p1[q - k])
    return out


def tustin(g: ContinuousTf, sample_time: float) -> DiscreteTf:
    """Bilinear (trapezoidal) discretization, no prewarping.

    Dead time is rounded to the nearest whole number of samples and carried
    as the discrete delay. Improper rational input is accepted; the result
    is proper whenever the substitution point 2/ts is not a pole of g.

    Raises
    ------
    DiscretizationError
        If the mapped denominator degenerates (2/ts hits a pole of g and
        the expansion loses its leading coefficient).
    """
    if not (sample_time > 0.0):
        raise ValueError("sample time must be > 0")
    c = 2.0 / sample_time
    num = g.num.as_array()
    den = g.den.as_array()
    q = max(len(num), len(den)) - 1
    pow_m1 = _binomial_powers(np.array([1.0, -1.0]), q)
    pow_p1 = _binomial_powers(np.array([1.0, 1.0]), q)
    num_z = _bilinear_expand(num, q, c, pow_m1, pow_p1)
    den_z = _bilinear_expand(den, q, c, pow_m1, pow_p1)
    scale = np.max(np.abs(den_z))
    if scale == 0.0 or abs(den_z[0]) <= _LEAD_TOL * scale:
        raise DiscretizationError("improper discretization")
    delay = int(round(g.dead_time / sample_time))
    return DiscreteTf(num_z, den_z, sample_time, delay)


# ---------------------------------------------------------------------------
# simulation


def _filter_coeffs(g: DiscreteTf) -> tuple:
    a = g.den.as_array()
    b = g.num.as_array()
    if b.size < a.size:
        b = np.concatenate([np.zeros(a.size - b.size), b])
    return b, a


def simulate(g, u: Signal) -> Signal:
    """Zero-initial-condition response of g to input u.

    Polynomial systems run the direct-form difference equation; factored
    systems run their second-order-section cascade. Non-finite output
    values are returned as-is; callers decide how to react to divergence.
    """
    if not _same_ts(g.sample_time, u.sample_time):
        raise SampleTimeError("system and input sample times differ")
    if isinstance(g, DiscreteZpk):
        return Signal(_sig.sosfilt(g.as_sos(), u.samples), g.sample_time)
    b, a = _filter_coeffs(g)
    y = _sig.lfilter(b, a, u.samples)
    d = g.delay_samples
    if d > 0:
        if d >= y.size:
            y = np.zeros(y.size)
        else:
            y = np.concatenate([np.zeros(d), y[:-d]])
    return Signal(y, g.sample_time)


def impulse_response(g: DiscreteTf, n: int) -> Signal:
    """First n+1 samples of the response to a unit pulse at k=0."""
    if n < 0:
        raise ValueError("horizon must be >= 0")
    delta = np.zeros(n + 1)
    delta[0] = 1.0
    return simulate(g, Signal(delta, g.sample_time))


# ---------------------------------------------------------------------------
# interconnection


def feedback_unity(p: DiscreteTf, c: DiscreteTf) -> DiscreteTf:
    """Closed loop r -> y for the negative unity-feedback pair (p, c).

    Any input delays of p and c are folded into the loop denominator as an
    explicit z**d shift, so the result is a plain rational function with
    delay_samples == 0.
    """
    if not _same_ts(p.sample_time, c.sample_time):
        raise SampleTimeError("plant and controller sample times differ")
    d = p.delay_samples + c.delay_samples
    n_ol = np.convolve(p.num.as_array(), c.num.as_array())
    d_ol = np.convolve(p.den.as_array(), c.den.as_array())
    den = np.polyadd(np.concatenate([d_ol, np.zeros(d)]), n_ol)
    scale = np.max(np.abs(den))
    if scale == 0.0 or abs(den[0]) <= _LEAD_TOL * scale:
        raise AlgebraicLoopError("feedback loop is not well posed")
    return DiscreteTf(n_ol, den, p.sample_time, 0)


def invert(g):
    """Exact inverse of a biproper, delay-free discrete TF.

    Factored systems invert by swapping zeros and poles, so the inverse
    stays in factored form and never touches expanded coefficients.
    """
    if isinstance(g, DiscreteZpk):
        if not g.is_biproper or abs(g.gain) < _FEEDTHROUGH_TOL:
            raise NonInvertibleError("non-invertible controller")
        return DiscreteZpk(g.poles, g.zeros, 1.0 / g.gain, g.sample_time)
    if g.delay_samples != 0:
        raise NonInvertibleError("non-invertible controller")
    num = g.num.as_array()
    den = g.den.as_array()
    if num.size != den.size or abs(num[0]) < _FEEDTHROUGH_TOL:
        raise NonInvertibleError("non-invertible controller")
    return DiscreteTf(den, num, g.sample_time, 0)


# ---------------------------------------------------------------------------
# poles and stability


def poles(g) -> np.ndarray:
    """Pole locations, largest magnitude first.

    Polynomial systems go through companion-matrix eigenvalues; factored
    systems already hold their poles exactly.
    """
    if isinstance(g, DiscreteZpk):
        return np.asarray(g.poles, dtype=complex)
    den = g.den.as_array()
    if den.size <= 1:
        return np.zeros(0, dtype=complex)
    return _sorted_roots(np.roots(den))


def is_bibo_stable(g, tol: float = 0.0) -> BiboStability:
    """Pole-radius stability test: stable iff max |pole| < 1 - tol."""
    p = poles(g)
    max_mag = float(np.max(np.abs(p))) if p.size else 0.0
    return BiboStability(stable=max_mag < 1.0 - tol, margin=1.0 - max_mag)


# ---------------------------------------------------------------------------
# sample-by-sample closed loop


class _Block:
    """Direct-form II transposed filter with an integer input delay."""

    def __init__(self, g: DiscreteTf):
        b, a = _filter_coeffs(g)
        self.b = b
        self.a = a
        self.delay = g.delay_samples
        self.state = np.zeros(b.size - 1)

    @property
    def feedthrough(self) -> float:
        return 0.0 if self.delay > 0 else float(self.b[0])

    def partial(self, past_inputs: np.ndarray, k: int) -> float:
        """Output contribution already fixed by history at step k."""
        head = float(self.state[0]) if self.state.size else 0.0
        if self.delay > 0:
            x = float(past_inputs[k - self.delay]) if k >= self.delay else 0.0
            return self.feedthrough_free(x) + head
        return head

    def feedthrough_free(self, x: float) -> float:
        return float(self.b[0]) * x

    def advance(self, x: float, y: float) -> None:
        if self.state.size:
            shifted = np.concatenate([self.state[1:], [0.0]])
            self.state = shifted + self.b[1:] * x - self.a[1:] * y


class _StateBlock:
    """Dense state-space stepper for factored systems, same interface."""

    def __init__(self, g: DiscreteZpk):
        self.A, self.B, self.C, self.D = g.state_space()
        self.delay = 0
        self.state = np.zeros(self.B.size)

    @property
    def feedthrough(self) -> float:
        return float(self.D)

    def partial(self, past_inputs: np.ndarray, k: int) -> float:
        if self.state.size:
            return float(self.C @ self.state)
        return 0.0

    def feedthrough_free(self, x: float) -> float:
        return float(self.D) * x

    def advance(self, x: float, y: float) -> None:
        if self.state.size:
            self.state = self.A @ self.state + self.B * x


def _make_block(g):
    return _StateBlock(g) if isinstance(g, DiscreteZpk) else _Block(g)


def co_simulate(p: DiscreteTf, c, r: Signal):
    """Run the unity-feedback loop of (p, c) one sample at a time.

    Returns (y, u). The per-sample feedthrough algebra is solved exactly;
    a loop where 1 + Dc*Dp vanishes raises AlgebraicLoopError. The
    controller may be polynomial or factored.
    """
    if not _same_ts(p.sample_time, c.sample_time):
        raise SampleTimeError("plant and controller sample times differ")
    if not _same_ts(p.sample_time, r.sample_time):
        raise SampleTimeError("reference sample time differs from the loop")
    n = len(r)
    rs = r.samples
    y = np.zeros(n)
    u = np.zeros(n)
    e = np.zeros(n)
    bp = _make_block(p)
    bc = _make_block(c)
    ffp, ffc = bp.feedthrough, bc.feedthrough
    gain = 1.0 + ffc * ffp
    if abs(gain) < _LEAD_TOL:
        raise AlgebraicLoopError("feedback loop is not well posed")
    for k in range(n):
        gp = bp.partial(u, k)
        gc = bc.partial(e, k)
        uk = (gc + ffc * (rs[k] - gp)) / gain
        yk = gp + ffp * uk
        ek = rs[k] - yk
        u[k], y[k], e[k] = uk, yk, ek
        xp = uk if bp.delay == 0 else (u[k - bp.delay] if k >= bp.delay else 0.0)
        xc = ek if bc.delay == 0 else (e[k - bc.delay] if k >= bc.delay else 0.0)
        bp.advance(xp, yk)
        bc.advance(xc, uk)
    return Signal(y, p.sample_time), Signal(u, p.sample_time)
