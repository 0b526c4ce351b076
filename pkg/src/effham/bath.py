"""Gaussian bosonic baths: correlation functions, Wick moments, ordered cumulants.

The bath operator is ``B = sum_j g_j (a_j + a_j^dag)`` (or its continuum
limit) and the connected two-point function is

    C(u) = <dB(t + u) dB(t)> = int_0^inf J(w) [coth(beta w / 2) cos(w u) - i sin(w u)] dw

with ``J(w) = sum_j g_j**2 delta(w - w_j)`` for discrete modes. A bath may
carry a mean ``m(t) = <B(t)>`` (displaced initial state); its fluctuations stay
Gaussian with correlation ``C``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

QUAD_RTOL = 1e-8
MAX_MOMENT_ORDER = 6
QUAD_ABS_FLOOR = 1e-12


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


# -- spectral densities -------------------------------------------------------

@dataclass(frozen=True)
class OhmicExp:
    """``J(w) = alpha * w * exp(-w / omega_c)``."""

    alpha: float
    omega_c: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.omega_c <= 0:
            raise ValueError("omega_c must be positive")

    def __call__(self, w):
        return self.alpha * w * np.exp(-w / self.omega_c)

    @property
    def support_cutoff(self) -> float:
        return 60.0 * self.omega_c

    def to_dict(self) -> dict:
        return {"kind": "ohmic_exp", "alpha": self.alpha, "omega_c": self.omega_c}


@dataclass(frozen=True)
class Drude:
    """``J(w) = (2 lambda gamma / pi) * w / (w**2 + gamma**2)``.

    ``lambda`` is the reorganization energy ``int J(w) / w dw``. The real
    part of ``C(u)`` diverges logarithmically as ``u -> 0``.
    """

    reorganization: float
    gamma: float

    def __post_init__(self):
        if self.reorganization < 0:
            raise ValueError("reorganization energy must be non-negative")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    def __call__(self, w):
        return 2 * self.reorganization * self.gamma / np.pi * w / (w**2 + self.gamma**2)

    def to_dict(self) -> dict:
        return {"kind": "drude", "lambda": self.reorganization, "gamma": self.gamma}


@dataclass(frozen=True)
class DiscreteModes:
    """Finite set of modes, each a ``(g_j, omega_j)`` pair."""

    modes: tuple

    def __post_init__(self):
        modes = tuple((float(g), float(w)) for g, w in self.modes)
        if not modes:
            raise ValueError("at least one mode is required")
        if any(w <= 0 for _, w in modes):
            raise ValueError("mode frequencies must be positive")
        object.__setattr__(self, "modes", modes)

    @property
    def couplings(self) -> np.ndarray:
        return np.array([g for g, _ in self.modes])

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([w for _, w in self.modes])

    def to_dict(self) -> dict:
        return {"kind": "discrete_modes", "modes": [list(m) for m in self.modes]}


SpectralDensity = OhmicExp | Drude | DiscreteModes


def spectral_density_from_dict(obj: dict) -> SpectralDensity:
    kind = obj.get("kind")
    if kind == "ohmic_exp":
        return OhmicExp(float(obj["alpha"]), float(obj["omega_c"]))
    if kind == "drude":
        return Drude(float(obj["lambda"]), float(obj["gamma"]))
    if kind == "discrete_modes":
        return DiscreteModes(tuple(tuple(m) for m in obj["modes"]))
    raise ValueError(f"unknown spectral density kind {kind!r}")


# -- bath specification -------------------------------------------------------

@dataclass(frozen=True)
class CoherentMean:
    """Mean ``<B(t)>`` of discrete modes displaced by coherent amplitudes.

    ``m(t) = sum_j g_j (alpha_j e^{-i w_j t} + c.c.)``.
    """

    modes: DiscreteModes
    displacements: tuple

    def __post_init__(self):
        disp = tuple(complex(a) for a in self.displacements)
        if len(disp) != len(self.modes.modes):
            raise ValueError("one displacement per mode is required")
        object.__setattr__(self, "displacements", disp)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        g = self.modes.couplings
        w = self.modes.frequencies
        a = np.array(self.displacements)
        phase = np.exp(-1j * np.multiply.outer(t, w))
        return 2 * np.real(phase @ (g * a))

    def to_dict(self) -> dict:
        return {"displacements": [[a.real, a.imag] for a in self.displacements]}


@dataclass(frozen=True)
class BathSpec:
    """Spectral density, inverse temperature (``inf`` for vacuum) and optional mean."""

    j: SpectralDensity
    beta: float = math.inf
    mean: Callable[[float], float] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive (use math.inf for zero temperature)")

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta)

    @property
    def has_mean(self) -> bool:
        return self.mean is not None

    def mean_value(self, t) -> np.ndarray:
        if self.mean is None:
            return np.zeros_like(np.asarray(t, dtype=float))
        return np.asarray(self.mean(t), dtype=float)

    def describe(self) -> dict:
        out = {"spectral_density": self.j.to_dict(), "beta": None if self.zero_temperature else self.beta}
        if isinstance(self.mean, CoherentMean):
            out["mean"] = self.mean.to_dict()
        elif self.mean is not None:
            out["mean"] = "callable"
        return out


def bath_from_dict(obj: dict) -> BathSpec:
    j = spectral_density_from_dict(obj["spectral_density"])
    beta = obj.get("beta")
    beta = math.inf if beta is None or beta == "inf" else float(beta)
    mean = None
    if obj.get("mean") is not None:
        if not isinstance(j, DiscreteModes):
            raise ValueError("a displaced mean requires a discrete-mode bath")
        disp = [complex(re, im) for re, im in obj["mean"]["displacements"]]
        mean = CoherentMean(j, tuple(disp))
    return BathSpec(j, beta, mean)


# -- two-point function ----------------------------------------------------------

def _coth_half(beta: float, w: float) -> float:
    if math.isinf(beta):
        return 1.0
    x = beta * w / 2
    if x < 1e-8:
        return 1.0 / x if x > 0 else math.inf
    return 1.0 / math.tanh(x)


def _quad(f, a, b, **kw) -> float:
    # the Fourier-integral routine on [a, inf) only honours an absolute tolerance
    fourier = np.isinf(b) and "weight" in kw
    epsabs = QUAD_ABS_FLOOR if fourier else 0.0
    val, err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=QUAD_RTOL, limit=500, **kw)
    if not np.isfinite(val) or err > max(QUAD_RTOL * abs(val), QUAD_ABS_FLOOR):
        raise QuadratureError(f"quadrature did not converge (value {val}, error estimate {err})")
    return val


def _continuum_correlation(j: SpectralDensity, beta: float, u: float) -> complex:
    if isinstance(j, OhmicExp) and math.isinf(beta):
        return j.alpha * j.omega_c**2 / (1 + 1j * j.omega_c * u) ** 2
    if isinstance(j, Drude):
        if u == 0:
            raise ValueError("the Drude correlation function diverges at u = 0")
        c = _drude_correlation(j, beta, abs(u))
        return c if u > 0 else np.conj(c)

    def noise_density(w):
        # J(w) coth(beta w / 2) is finite at w -> 0
        if w == 0:
            if math.isinf(beta):
                return 0.0
            return float(2.0 / beta * (j(1e-300) / 1e-300))
        return float(j(w) * _coth_half(beta, w))

    upper = j.support_cutoff
    if u == 0:
        return complex(_quad(noise_density, 0.0, upper), 0.0)
    re = _quad(noise_density, 0.0, upper, weight="cos", wvar=abs(u))
    im = _quad(lambda w: float(j(w)), 0.0, upper, weight="sin", wvar=abs(u))
    im = -im if u > 0 else im
    return complex(re, im)


def thermal_correlation(bath: BathSpec, u) -> complex | np.ndarray:
    """Connected two-point function ``C(u) = <dB(u) dB(0)>``.

    Discrete modes and the zero-temperature Ohmic bath use closed forms; the
    remaining continuum cases use adaptive quadrature (relative tolerance
    ``1e-8``). ``u`` may be a scalar or an array.
    """
    if np.ndim(u) > 0:
        u_arr = np.asarray(u, dtype=float)
        return np.array([thermal_correlation(bath, x) for x in u_arr.ravel()]).reshape(u_arr.shape)
    u = float(u)
    j = bath.j
    if isinstance(j, DiscreteModes):
        g2 = j.couplings**2
        w = j.frequencies
        if bath.zero_temperature:
            coth = np.ones_like(w)
        else:
            coth = 1.0 / np.tanh(bath.beta * w / 2)
        return complex(np.sum(g2 * (coth * np.cos(w * u) - 1j * np.sin(w * u))))
    return _continuum_correlation(j, bath.beta, u)


def integrated_noise(bath: BathSpec, t: float) -> float:
    """``int_0^t Re C(u) du = int J(w) coth(beta w / 2) sin(w t) / w dw``."""
    t = float(t)
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return 0.0
    j = bath.j
    if isinstance(j, DiscreteModes):
        w = j.frequencies
        coth = np.ones_like(w) if bath.zero_temperature else 1.0 / np.tanh(bath.beta * w / 2)
        return float(np.sum(j.couplings**2 * coth * np.sin(w * t) / w))
    if isinstance(j, OhmicExp) and bath.zero_temperature:
        wc = j.omega_c
        return float(j.alpha * wc**2 * t / (1 + (wc * t) ** 2))

    if isinstance(j, Drude):
        return _drude_integrated_noise(j, bath.beta, t)

    def f(w):
        # sin(w t) / w written through sinc so the w -> 0 limit is exact
        if w == 0:
            return 0.0 if bath.zero_temperature else float(2.0 / bath.beta * t * j.alpha)
        return float(j(w) * _coth_half(bath.beta, w) * t * np.sinc(w * t / np.pi))

    split_at = min(j.support_cutoff, 2 * np.pi / t)
    head = _quad(f, 0.0, split_at)
    if split_at == j.support_cutoff:
        return head
    return head + _quad(lambda w: float(j(w) * _coth_half(bath.beta, w) / w), split_at, j.support_cutoff,
                        weight="sin", wvar=t)


# -- Drude closed forms (Matsubara expansion; exponential integrals at zero T) -------

MATSUBARA_TERMS = 20_000


def _matsubara(beta: float, n: int = MATSUBARA_TERMS) -> np.ndarray:
    return 2 * np.pi * np.arange(1, n + 1) / beta


def _check_drude_pole(j: Drude, beta: float) -> None:
    a = beta * j.gamma / (2 * np.pi)
    if abs(a - round(a)) < 1e-9 and round(a) > 0:
        raise ValueError("beta * gamma / 2 pi is an integer: Matsubara pole, perturb beta")


def _drude_correlation(j: Drude, beta: float, u: float) -> complex:
    lam, g = j.reorganization, j.gamma
    if math.isinf(beta):
        re = -(lam * g / np.pi) * (np.exp(-g * u) * special.expi(g * u) - np.exp(g * u) * special.exp1(g * u))
        return complex(re, -lam * g * np.exp(-g * u))
    _check_drude_pole(j, beta)
    nu = _matsubara(beta)
    # split nu/(nu^2 - g^2) = 1/nu + g^2/(nu (nu^2 - g^2)); the 1/nu series sums to a logarithm
    fast = np.sum(g**2 / (nu * (nu**2 - g**2)) * np.exp(-nu * u))
    tail = g**2 * (beta / (2 * np.pi)) ** 3 / (2 * len(nu) ** 2) * np.exp(-nu[-1] * u)
    slow = -(beta / (2 * np.pi)) * np.log1p(-np.exp(-2 * np.pi * u / beta))
    re = lam * g / np.tan(beta * g / 2) * np.exp(-g * u) + 4 * lam * g / beta * (fast + tail + slow)
    return complex(re, -lam * g * np.exp(-g * u))


def _drude_integrated_noise(j: Drude, beta: float, t: float) -> float:
    lam, g = j.reorganization, j.gamma
    if math.isinf(beta):
        return float(lam / np.pi * (np.exp(-g * t) * special.expi(g * t) + np.exp(g * t) * special.exp1(g * t)))
    _check_drude_pole(j, beta)
    a = beta * g / (2 * np.pi)
    # sum_k 1/(nu_k^2 - g^2) in closed form
    full = (beta / (2 * np.pi)) ** 2 * (1 / (2 * a * a) - np.pi / np.tan(np.pi * a) / (2 * a))
    n_terms = int(min(1e7, max(100, 40 * beta / (2 * np.pi * t))))
    nu = _matsubara(beta, n_terms)
    decayed = np.sum(np.exp(-nu * t) / (nu**2 - g**2))
    out = lam / np.tan(beta * g / 2) * (1 - np.exp(-g * t)) + 4 * lam * g / beta * (full - decayed)
    return float(out)


def noise_and_response(bath: BathSpec, t: float, s: float) -> tuple[float, float]:
    """Noise kernel ``S(t, s)`` and response function ``chi(t, s)``.

    ``S = 1/2 <{B(t), B(s)}> - <B(t)><B(s)> = Re C(t - s)`` and
    ``chi = i <[B(t), B(s)]> = -2 Im C(t - s)``; the mean drops out of both.
    """
    c = thermal_correlation(bath, t - s)
    return float(np.real(c)), float(-2 * np.imag(c))


# -- Wick moments -----------------------------------------------------------------

@lru_cache(maxsize=None)
def wick_terms(n: int, with_mean: bool) -> tuple:
    """Isserlis terms for a length-``n`` operator string.

    Each term is ``(singles, pairs)``: positions replaced by the mean and
    ordered pairs ``(p, q)`` with ``p < q`` contributing ``C(x_p - x_q)``.
    Without a mean only perfect pairings survive, ``(n - 1)!!`` of them.
    """
    terms = []

    def rec(remaining, singles, pairs):
        if not remaining:
            terms.append((tuple(singles), tuple(pairs)))
            return
        first, rest = remaining[0], remaining[1:]
        if with_mean:
            rec(rest, singles + [first], pairs)
        for i, other in enumerate(rest):
            rec(rest[:i] + rest[i + 1:], singles, pairs + [(first, other)])

    rec(tuple(range(n)), [], [])
    return tuple(terms)


def operator_string(left_times: Sequence[float], right_times: Sequence[float]) -> list[float]:
    """Bath operator string of ``D(left; right) = Tr{B^R(right) B^L(left) rho_E}``.

    Left superoperators compose as ``B(tau_1) ... B(tau_k) rho`` and right
    ones as ``rho B(s_m) ... B(s_1)``; trace cyclicity gives
    ``<B(s_m) ... B(s_1) B(tau_1) ... B(tau_k)>``.
    """
    return list(reversed(list(right_times))) + list(left_times)


def gaussian_string_moment(bath: BathSpec, times: Sequence[float], corr=None) -> complex:
    """``<B(x_1) ... B(x_n)>`` for a Gaussian bath, in the given string order."""
    n = len(times)
    if n > MAX_MOMENT_ORDER:
        raise ValueError(f"moment order {n} exceeds the cap {MAX_MOMENT_ORDER}")
    if n == 0:
        return 1.0 + 0j
    corr = corr or (lambda u: thermal_correlation(bath, u))
    means = bath.mean_value(np.asarray(times, dtype=float)) if bath.has_mean else None
    if means is None and n % 2:
        return 0j
    total = 0j
    for singles, pairs in wick_terms(n, bath.has_mean):
        val = 1.0 + 0j
        for p in singles:
            val *= means[p]
        for p, q in pairs:
            val *= corr(times[p] - times[q])
        total += val
    return total


def _descending(times: Sequence[float]) -> bool:
    return all(a >= b for a, b in zip(times, times[1:]))


def wick_moment(bath: BathSpec, left_times: Sequence[float], right_times: Sequence[float]) -> complex:
    """Bare moment ``D(left; right)`` evaluated with Isserlis' theorem.

    Time ordering within each list is enforced: a list that is not
    descending yields zero.
    """
    if len(left_times) + len(right_times) > MAX_MOMENT_ORDER:
        raise ValueError(f"moment order exceeds the cap {MAX_MOMENT_ORDER}")
    if not (_descending(left_times) and _descending(right_times)):
        return 0j
    return gaussian_string_moment(bath, operator_string(left_times, right_times))


# -- ordered cumulants ---------------------------------------------------------------

@lru_cache(maxsize=None)
def cumulant_chunkings(k: int, m: int) -> tuple:
    """Unrolled ordered-cumulant recursion for ``k`` left and ``m`` right times.

    Returns ``(sign, chunks)`` entries where ``chunks`` is a tuple of
    ``(l_i, r_i)`` segment sizes; the first chunk carries the pinned time.
    The recursion is ``Cum(k, m) = Pinned(k, m) - sum Cum(l, r) * Bare(k-l, m-r)``
    over ``(l, r)`` other than ``(0, 0)`` and ``(k, m)``.
    """
    if k + m == 0:
        return ()
    out = [(1, ((k, m),))]
    for l in range(k + 1):
        for r in range(m + 1):
            if (l, r) in ((0, 0), (k, m)):
                continue
            for sign, chunks in cumulant_chunkings(l, r):
                out.append((-sign, chunks + ((k - l, m - r),)))
    return tuple(out)


def ordered_cumulant(
    bath: BathSpec,
    t: float,
    left_times: Sequence[float],
    right_times: Sequence[float],
    pin: str | None = None,
) -> complex:
    """Ordered cumulant at one time tuple, by direct recursion.

    One outermost time must equal ``t`` (the pinned variable left by the
    time derivative). ``pin`` selects ``"left"`` or ``"right"`` when both
    first times equal ``t``; otherwise it is inferred. The value returned is
    the coefficient of that pin's delta function.
    """
    left = tuple(float(x) for x in left_times)
    right = tuple(float(x) for x in right_times)
    if len(left) + len(right) > MAX_MOMENT_ORDER:
        raise ValueError(f"cumulant order exceeds the cap {MAX_MOMENT_ORDER}")
    if not (_descending(left) and _descending(right)):
        raise ValueError("left and right time lists must each be descending")
    if any(x > t or x < 0 for x in left + right):
        raise ValueError("all times must lie in [0, t]")
    if pin is None:
        if left and left[0] == t:
            pin = "left"
        elif right and right[0] == t:
            pin = "right"
        else:
            raise ValueError("one outermost time must be pinned at t")
    elif pin == "left" and not (left and left[0] == t):
        raise ValueError("left pin requested but left_times[0] != t")
    elif pin == "right" and not (right and right[0] == t):
        raise ValueError("right pin requested but right_times[0] != t")

    corr_cache: dict = {}

    def corr(u):
        if u not in corr_cache:
            corr_cache[u] = thermal_correlation(bath, u)
        return corr_cache[u]

    @lru_cache(maxsize=None)
    def cum(l, r):
        if (pin == "left" and l == 0) or (pin == "right" and r == 0):
            return 0j
        val = gaussian_string_moment(bath, operator_string(left[:l], right[:r]), corr)
        for ll in range(l + 1):
            for rr in range(r + 1):
                if (ll, rr) in ((0, 0), (l, r)):
                    continue
                sub = cum(ll, rr)
                if sub == 0:
                    continue
                # the trailing segment runs to the end of this prefix only
                val -= sub * gaussian_string_moment(
                    bath, operator_string(left[ll:l], right[rr:r]), corr
                )
        return val

    return cum(len(left), len(right))


# -- tabulated correlations -----------------------------------------------------------

@dataclass(frozen=True)
class CorrelationTable:
    """``C(k h)`` for ``k = 0..N`` on the uniform grid ``[0, T]``."""

    h: float
    values: np.ndarray
    mean: np.ndarray | None = None

    @property
    def n_steps(self) -> int:
        return len(self.values) - 1

    @property
    def grid(self) -> np.ndarray:
        return self.h * np.arange(len(self.values))

    @property
    def horizon(self) -> float:
        return self.h * self.n_steps

    def signed(self) -> np.ndarray:
        """``C`` on integer offsets ``-N..N``; index ``k + N`` holds ``C(k h)``."""
        neg = np.conj(self.values[:0:-1])
        return np.concatenate([neg, self.values])

    def interpolate(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        au = np.abs(u)
        re = np.interp(au, self.grid, self.values.real)
        im = np.interp(au, self.grid, self.values.imag)
        out = re + 1j * im
        return np.where(u < 0, np.conj(out), out)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["u", "re_C", "im_C"])
            for u, c in zip(self.grid, self.values):
                w.writerow([f"{u:.17g}", f"{c.real:.17g}", f"{c.imag:.17g}"])


def build_correlation_table(bath: BathSpec, T: float, h: float) -> CorrelationTable:
    if not (h > 0 and T > 0):
        raise ValueError("T and h must be positive")
    n = int(round(T / h))
    if n < 1 or abs(n * h - T) > 1e-9 * max(T, 1.0):
        raise ValueError(f"T = {T} is not an integer multiple of h = {h}")
    grid = h * np.arange(n + 1)
    if isinstance(bath.j, DiscreteModes) or (isinstance(bath.j, OhmicExp) and bath.zero_temperature):
        values = np.array([thermal_correlation(bath, u) for u in grid])
    else:
        values = np.array([_continuum_correlation(bath.j, bath.beta, float(u)) for u in grid])
    mean = bath.mean_value(grid) if bath.has_mean else None
    values.setflags(write=False)
    return CorrelationTable(h=h, values=values, mean=mean)
