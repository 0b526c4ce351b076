"""Perturbative series for the effective Hamiltonian of a driven-dissipative qubit.

The model is ``H = (omega/2) sigma_z + H_E + lambda A (x) B``. In the
interaction picture the ``n``-th order contribution is

    K_n = -(i**n / 2i) sum_k (-1)**k  int [ Dcum(tau; s) X(tau; s) - (-1)**n h.c. ]

with ``X(tau; s) = <A(s)^dag>_{1/d} A(tau)`` and ``Dcum`` the ordered bath
cumulant. The cumulant recursion is applied to whole integrated
superoperators: with ``Chunk(l, r) = int D(tau; s) A^L(tau) A^R(s)`` over
ordered simplices and ``Pinned(l, r)`` its time derivative (one outermost
time at ``t``),

    Cum(k, m) = Pinned(k, m) - sum_{(l, r)} Cum(l, r) o Chunk(k - l, m - r),

which is the pointwise recursion integrated over its chunked domain.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .bath import BathSpec, CorrelationTable, build_correlation_table, cumulant_chunkings, wick_terms
from .quadrature import QuadratureScheme, block_rest_nodes, group_nodes, iter_group_blocks
from .superop import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    as_operator,
    dag,
    is_hermitian,
    traceless_part,
)

MAX_ORDER = 4
MAX_POINTWISE_NODES = 20_000_000
_BLOCK_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class SpinModel:
    """Qubit with ``H_S = (omega/2) sigma_z`` coupled through ``lam * A (x) B``."""

    omega: float
    coupling_op: np.ndarray = field(default_factory=lambda: SIGMA_X.copy())
    lam: float = 1.0

    def __post_init__(self):
        a = as_operator(self.coupling_op, 2)
        if not is_hermitian(a):
            raise ValueError("coupling operator must be Hermitian")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "coupling_op", a)

    @property
    def dim(self) -> int:
        return 2

    @property
    def h_system(self) -> np.ndarray:
        return self.omega / 2 * SIGMA_Z

    @property
    def coupling_kind(self) -> str:
        if np.allclose(self.coupling_op, SIGMA_Z, atol=0, rtol=0):
            return "sigma_z"
        if np.allclose(self.coupling_op, SIGMA_X, atol=0, rtol=0):
            return "sigma_x"
        return "generic"

    def with_lambda(self, lam: float) -> "SpinModel":
        return SpinModel(self.omega, self.coupling_op, lam)


def free_propagator(model: SpinModel, t: float) -> np.ndarray:
    """``exp(-i H_S t)``."""
    phase = np.exp(-0.5j * model.omega * t)
    return np.diag([phase, np.conj(phase)])


def interaction_picture_a(model: SpinModel, t: float, method: str = "auto") -> np.ndarray:
    """``A(t) = e^{i H_S t} A e^{-i H_S t}``.

    ``method="auto"`` uses closed forms for sigma_z and sigma_x couplings;
    ``"expm"`` forces the matrix-exponential path.
    """
    kind = model.coupling_kind if method == "auto" else "generic"
    if kind == "sigma_z":
        return SIGMA_Z.copy()
    if kind == "sigma_x":
        ph = np.exp(1j * model.omega * t)
        return SIGMA_PLUS * ph + SIGMA_MINUS * np.conj(ph)
    u = expm(1j * model.h_system * t)
    return u @ model.coupling_op @ dag(u)


def interaction_picture_table(model: SpinModel, grid: np.ndarray) -> np.ndarray:
    """``A(t)`` on every grid time, shape ``(n, 2, 2)``."""
    grid = np.asarray(grid, dtype=float)
    a = model.coupling_op
    # H_S is diagonal: A(t)_jk = A_jk exp(i (E_j - E_k) t)
    e = np.diag(model.h_system).real
    phase = np.exp(1j * np.multiply.outer(grid, e[:, None] - e[None, :]))
    return phase * a[None, :, :]


def _check_descending(times: Sequence[float]) -> None:
    if any(a < b for a, b in zip(times, times[1:])):
        raise ValueError("times must be in descending order")


def a_product(model: SpinModel, times: Sequence[float]) -> np.ndarray:
    """``A(t_1) A(t_2) ... A(t_k)`` for descending times; identity when empty."""
    _check_descending(times)
    out = np.eye(2, dtype=complex)
    for t in times:
        out = out @ interaction_picture_a(model, t)
    return out


def x_operator(model: SpinModel, left_times: Sequence[float], right_times: Sequence[float]) -> np.ndarray:
    """``<A(s)^dag>_{1/d} A(tau)`` with ``tau`` the left and ``s`` the right times."""
    a_right = a_product(model, right_times)
    a_left = a_product(model, left_times)
    return np.trace(dag(a_right)) / model.dim * a_left


def _assemble(n: int, y: np.ndarray) -> np.ndarray:
    """``-(i**n / 2i) (Y - (-1)**n Y^dag)`` reduced to its traceless part."""
    pref = -(1j**n) / 2j
    k = pref * (y - (-1) ** n * dag(y))
    return traceless_part((k + dag(k)) / 2)


def _x_trace(superop: np.ndarray, d: int) -> np.ndarray:
    """``int D <A(s)^dag>_{1/d} A(tau)`` from ``int D kron(conj A(s), A(tau))``."""
    s4 = superop.reshape(d, d, d, d)
    return np.einsum("cacb->ab", s4) / d


class _TimeSlice:
    """All integrated superoperators at one time ``t = N h`` (cached)."""

    def __init__(self, engine: "Expansion", n_index: int):
        self.e = engine
        self.N = n_index
        self.d = engine.model.dim
        self._chunk: dict = {}
        self._pinned: dict = {}
        self._cum: dict = {}

    def _zero(self) -> np.ndarray:
        return np.zeros((self.d * self.d, self.d * self.d), dtype=complex)

    def _vanishes(self, l: int, r: int) -> bool:
        return not self.e.has_mean and (l + r) % 2 == 1

    def chunk(self, l: int, r: int) -> np.ndarray:
        key = (l, r)
        if key not in self._chunk:
            self._chunk[key] = self._zero() if self._vanishes(l, r) else self.e.group_superop(self.N, l, r, None)
        return self._chunk[key]

    def pinned(self, l: int, r: int) -> np.ndarray:
        key = (l, r)
        if key not in self._pinned:
            out = self._zero()
            if not self._vanishes(l, r):
                if l:
                    out = out + self.e.group_superop(self.N, l, r, "left")
                if r:
                    out = out + self.e.group_superop(self.N, l, r, "right")
            self._pinned[key] = out
        return self._pinned[key]

    def cumulant(self, k: int, m: int) -> np.ndarray:
        key = (k, m)
        if key in self._cum:
            return self._cum[key]
        if k + m == 0 or self._vanishes(k, m):
            out = self._zero()
        else:
            out = self.pinned(k, m).copy()
            for l in range(k + 1):
                for r in range(m + 1):
                    if (l, r) in ((0, 0), (k, m)):
                        continue
                    if self._vanishes(l, r) or self._vanishes(k - l, m - r):
                        continue
                    out -= self.cumulant(l, r) @ self.chunk(k - l, m - r)
        self._cum[key] = out
        return out

    def k_order(self, n: int) -> np.ndarray:
        y = np.zeros((self.d, self.d), dtype=complex)
        for k in range(n + 1):
            y += (-1) ** k * _x_trace(self.cumulant(k, n - k), self.d)
        return _assemble(n, y)


class Expansion:
    """Perturbative effective-Hamiltonian engine on a fixed grid.

    Holds the model, the bath correlation table on ``[0, T]`` and the
    interaction-picture coupling on the same grid. All ``K_n`` returned by
    the ``k_*`` methods are in the interaction frame; :meth:`series`
    converts to the Schrödinger frame on request.
    """

    def __init__(self, model: SpinModel, bath: BathSpec, T: float, quad: QuadratureScheme | float,
                 table: CorrelationTable | None = None):
        self.model = model
        self.bath = bath
        self.quad = quad if isinstance(quad, QuadratureScheme) else QuadratureScheme(float(quad))
        h = self.quad.h
        n_total = self.quad.index(T)
        if table is None:
            table = build_correlation_table(bath, n_total * h, h)
        elif abs(table.h - h) > 1e-12 * h or table.n_steps < n_total:
            raise ValueError("correlation table does not match the quadrature grid")
        self.table = table
        self.n_total = table.n_steps
        self.c_signed = table.signed()
        self.mean = table.mean
        self.a_grid = interaction_picture_table(model, table.grid)
        self._slices: dict = {}

    @property
    def has_mean(self) -> bool:
        return self.mean is not None

    @property
    def h(self) -> float:
        return self.quad.h

    def _slice(self, t: float) -> _TimeSlice:
        n = self.quad.index(t)
        if n > self.n_total:
            raise ValueError(f"time {t} exceeds the tabulated range {self.table.horizon}")
        if n not in self._slices:
            self._slices = {n: _TimeSlice(self, n)}
        return self._slices[n]

    # -- node-level helpers ------------------------------------------------

    def _products(self, idx: np.ndarray) -> np.ndarray:
        out = np.broadcast_to(np.eye(2, dtype=complex), (len(idx), 2, 2)).copy()
        for c in range(idx.shape[1]):
            out = out @ self.a_grid[idx[:, c]]
        return out

    def _reverse_products(self, idx: np.ndarray) -> np.ndarray:
        out = np.broadcast_to(np.eye(2, dtype=complex), (len(idx), 2, 2)).copy()
        for c in reversed(range(idx.shape[1])):
            out = out @ self.a_grid[idx[:, c]]
        return out

    def _moment_matrix(self, n_str: int, pos: list, idx_o: np.ndarray, idx_i: np.ndarray) -> np.ndarray:
        """Gaussian moment of an operator string on an (outer x inner) node grid.

        ``pos[p] = (group, column)`` places string position ``p`` in the
        outer (0) or inner (1) index array.
        """
        off = self.n_total
        cs = self.c_signed
        out = np.zeros((len(idx_o), len(idx_i)), dtype=complex)
        cols = (idx_o, idx_i)
        for singles, pairs in wick_terms(n_str, self.has_mean):
            vo = np.ones(len(idx_o), dtype=complex)
            vi = np.ones(len(idx_i), dtype=complex)
            cross = None
            for p in singles:
                g, c = pos[p]
                if g == 0:
                    vo = vo * self.mean[idx_o[:, c]]
                else:
                    vi = vi * self.mean[idx_i[:, c]]
            for p, q in pairs:
                (gp, cp), (gq, cq) = pos[p], pos[q]
                if gp == gq:
                    vals = cs[cols[gp][:, cp] - cols[gq][:, cq] + off]
                    if gp == 0:
                        vo = vo * vals
                    else:
                        vi = vi * vals
                else:
                    if gp == 0:
                        mat = cs[idx_o[:, cp][:, None] - idx_i[:, cq][None, :] + off]
                    else:
                        mat = cs[idx_i[:, cp][None, :] - idx_o[:, cq][:, None] + off]
                    cross = mat if cross is None else cross * mat
            term = vo[:, None] * vi[None, :]
            out += term if cross is None else term * cross
        return out

    @staticmethod
    def _string_positions(l: int, r: int, tau_group: int, tau_offset: int = 0, s_offset: int = 0) -> list:
        """String ``s_r .. s_1 tau_1 .. tau_l`` mapped to (group, column)."""
        s_group = 1 - tau_group
        pos = [(s_group, s_offset + r - 1 - p) for p in range(r)]
        pos += [(tau_group, tau_offset + p) for p in range(l)]
        return pos

    def group_superop(self, N: int, l: int, r: int, pin: str | None) -> np.ndarray:
        """``int D(tau; s) kron(conj A(s), A(tau))`` over one chunk domain at ``t = N h``."""
        h = self.h
        d = 2
        tau_pinned, s_pinned = pin == "left", pin == "right"
        free_tau = l - int(tau_pinned)
        free_s = r - int(s_pinned)
        g4 = np.zeros((d, d, d, d), dtype=complex)
        if free_tau < 2 and free_s < 2:
            it, wt = group_nodes(l, N, tau_pinned, h)
            is_, ws = group_nodes(r, N, s_pinned, h)
            pos = self._string_positions(l, r, tau_group=0)
            dmat = self._moment_matrix(l + r, pos, it, is_)
            m = (wt[:, None] * ws[None, :]) * dmat
            at = self._products(it).reshape(-1, d * d)
            as_c = np.conj(self._products(is_)).reshape(-1, d * d)
            g4 += (at.T @ m @ as_c).reshape(d, d, d, d)
            return g4.transpose(2, 0, 3, 1).reshape(d * d, d * d)

        outer_is_tau = free_tau >= free_s
        if outer_is_tau:
            size_o, pin_o, size_i, pin_i = l, tau_pinned, r, s_pinned
        else:
            size_o, pin_o, size_i, pin_i = r, s_pinned, l, tau_pinned
        idx_i, w_i = group_nodes(size_i, N, pin_i, h)
        a_i = self._products(idx_i)
        a_i_flat = (np.conj(a_i) if outer_is_tau else a_i).reshape(-1, d * d)
        tau_group = 0 if outer_is_tau else 1
        pos = self._string_positions(l, r, tau_group=tau_group)
        rows_cap = max(1, _BLOCK_ELEMENTS // max(1, len(idx_i)))
        n_rest = size_o - int(pin_o) - 1
        if n_rest:
            rest_all = block_rest_nodes(n_rest, N, h)[0]
        else:
            rest_all = np.zeros((1, 0), dtype=np.int64)
        prod_all = self._products(rest_all)
        for head, bi, bw, take, rest_w in iter_group_blocks(size_o, N, pin_o, h):
            prefix = np.eye(2, dtype=complex)
            for x in head + [bi]:
                prefix = prefix @ self.a_grid[x]
            acc = np.zeros((d * d, d * d), dtype=complex)
            for start in range(0, len(take), rows_cap):
                sel = take[start:start + rows_cap]
                ri = rest_all[sel]
                full = np.column_stack([np.full((len(ri), len(head) + 1), head + [bi], dtype=np.int64), ri])
                dmat = self._moment_matrix(l + r, pos, full, idx_i)
                m = (rest_w[start:start + rows_cap][:, None] * w_i[None, :]) * dmat
                rest_flat = prod_all[sel].reshape(-1, d * d)
                if outer_is_tau:
                    acc += rest_flat.T @ m @ a_i_flat
                else:
                    acc += a_i_flat.T @ m.T @ np.conj(rest_flat)
            acc4 = bw * acc.reshape(d, d, d, d)
            if outer_is_tau:
                g4 += np.einsum("ax,xbce->abce", prefix, acc4)
            else:
                g4 += np.einsum("cx,abxe->abce", np.conj(prefix), acc4)
        return g4.transpose(2, 0, 3, 1).reshape(d * d, d * d)

    # -- public entry points ---------------------------------------------------

    def _check_order(self, n: int) -> None:
        if not 0 <= n <= MAX_ORDER:
            raise ValueError(f"order {n} outside the supported range 0..{MAX_ORDER}")

    def k_order(self, n: int, t: float) -> np.ndarray:
        """``K_n(t)`` in the interaction frame via the lifted cumulant recursion."""
        self._check_order(n)
        if n == 0:
            return traceless_part(self.model.h_system)
        return self._slice(t).k_order(n)

    def cumulant_superop(self, k: int, m: int, t: float) -> np.ndarray:
        """``int Dcum(tau; s) A^L(tau) A^R(s)`` with ``k`` left and ``m`` right times."""
        return self._slice(t).cumulant(k, m)

    def tcl_generator_order(self, n: int, t: float) -> np.ndarray:
        """``n``-th order interaction-picture TCL generator superoperator."""
        self._check_order(n)
        out = np.zeros((4, 4), dtype=complex)
        if n == 0:
            return out
        sl = self._slice(t)
        for k in range(n + 1):
            out += (-1j) ** n * (-1) ** (n - k) * sl.cumulant(k, n - k)
        return out

    def k2_closed_form(self, t: float) -> np.ndarray:
        """Second order from the noise kernel and response function (zero-mean baths)."""
        if self.has_mean:
            raise ValueError("the closed second-order form requires a zero-mean bath")
        n = self.quad.index(t)
        if n > self.n_total:
            raise ValueError(f"time {t} exceeds the tabulated range {self.table.horizon}")
        if n == 0:
            return np.zeros((2, 2), dtype=complex)
        idx = np.arange(n + 1)
        w = np.full(n + 1, self.h)
        w[0] = w[-1] = self.h / 2
        c = self.table.values[n - idx]
        noise = c.real
        response = -2 * c.imag
        at = self.a_grid[n]
        atau = self.a_grid[idx]
        comm = at[None] @ atau - atau @ at[None]
        anti = at[None] @ atau + atau @ at[None]
        anti_tl = anti - (np.trace(anti, axis1=1, axis2=2) / 2)[:, None, None] * np.eye(2)
        integrand = noise[:, None, None] * comm / 2j - response[:, None, None] / 4 * anti_tl
        k2 = np.einsum("i,iab->ab", w, integrand)
        return traceless_part((k2 + dag(k2)) / 2)

    def _chunk_points(self, N: int, l: int, r: int, pin: str | None):
        """Full node set of one chunk: weights*moment, forward and reversed products."""
        h = self.h
        it, wt = group_nodes(l, N, pin == "left", h)
        is_, ws = group_nodes(r, N, pin == "right", h)
        pos = self._string_positions(l, r, tau_group=0)
        dmat = self._moment_matrix(l + r, pos, it, is_)
        nt, ns = len(it), len(is_)
        val = ((wt[:, None] * ws[None, :]) * dmat).reshape(-1)
        sel_t = np.repeat(np.arange(nt), ns)
        sel_s = np.tile(np.arange(ns), nt)
        return (
            val,
            self._products(it)[sel_t],
            self._products(is_)[sel_s],
            self._reverse_products(it)[sel_t],
            self._reverse_products(is_)[sel_s],
        )

    def k_order_symmetry_resolved(self, n: int, t: float) -> np.ndarray:
        """``K_n`` from the real/imaginary cumulant parts and the time-reversal
        symmetric/antisymmetric parts of ``X``, integrated point by point.

        Cost grows like ``N**(n - 1)``; intended for ``n <= 3`` or coarse grids.
        """
        self._check_order(n)
        if n == 0:
            return traceless_part(self.model.h_system)
        N = self.quad.index(t)
        if N > self.n_total:
            raise ValueError(f"time {t} exceeds the tabulated range {self.table.horizon}")
        m = n // 2
        acc = np.zeros((2, 2), dtype=complex)
        for k in range(n + 1):
            if not self.has_mean and n % 2:
                break
            partial = np.zeros((2, 2), dtype=complex)
            for sign, chunks in cumulant_chunkings(k, n - k):
                if not self.has_mean and any((a + b) % 2 for a, b in chunks):
                    continue
                l0, r0 = chunks[0]
                pins = (["left"] if l0 else []) + (["right"] if r0 else [])
                for pin in pins:
                    partial += sign * self._resolved_chunking(N, chunks, pin, n)
            if n % 2 == 0:
                acc += (-1) ** (m + k + 1) * partial
            else:
                acc += (-1) ** (m + k) * partial
        return traceless_part((acc + dag(acc)) / 2)

    def _resolved_chunking(self, N: int, chunks, pin: str, n: int) -> np.ndarray:
        parts = [self._chunk_points(N, *chunks[0], pin)]
        parts += [self._chunk_points(N, l, r, None) for l, r in chunks[1:]]
        total = int(np.prod([len(p[0]) for p in parts]))
        if total > MAX_POINTWISE_NODES:
            raise MemoryError(f"{total} quadrature nodes exceed the pointwise cap; use a coarser grid")
        val, at, as_, at_rev, as_rev = parts[0]
        for v2, at2, as2, atr2, asr2 in parts[1:]:
            n1, n2 = len(val), len(v2)
            i1 = np.repeat(np.arange(n1), n2)
            i2 = np.tile(np.arange(n2), n1)
            val = val[i1] * v2[i2]
            at = at[i1] @ at2[i2]
            as_ = as_[i1] @ as2[i2]
            # reversal of the concatenated tuple reverses the chunk order too
            at_rev = atr2[i2] @ at_rev[i1]
            as_rev = asr2[i2] @ as_rev[i1]
        x = (np.trace(dag(as_), axis1=1, axis2=2) / 2)[:, None, None] * at
        x_rev = (np.trace(dag(as_rev), axis1=1, axis2=2) / 2)[:, None, None] * at_rev
        x_r = (x + x_rev) / 2
        x_i = (x - x_rev) / 2j
        d_r = val.real[:, None, None]
        d_i = val.imag[:, None, None]
        if n % 2 == 0:
            integrand = d_r * x_i + d_i * x_r
        else:
            integrand = d_i * x_i - d_r * x_r
        return integrand.sum(axis=0)

    def series(self, times: Sequence[float], max_order: int, frame: str = "schrodinger") -> "KSeries":
        return k_series_from_engine(self, times, max_order, frame)


# -- module-level API ----------------------------------------------------------

def _engine_for(model: SpinModel, bath: BathSpec, t: float, quad: QuadratureScheme | float) -> Expansion:
    quad = quad if isinstance(quad, QuadratureScheme) else QuadratureScheme(float(quad))
    T = max(quad.index(t), 1) * quad.h
    return Expansion(model, bath, T, quad)


def k_order(model: SpinModel, bath: BathSpec, n: int, t: float, quad) -> np.ndarray:
    return _engine_for(model, bath, t, quad).k_order(n, t)


def k2_closed_form(model: SpinModel, bath: BathSpec, t: float, quad) -> np.ndarray:
    return _engine_for(model, bath, t, quad).k2_closed_form(t)


def k_order_symmetry_resolved(model: SpinModel, bath: BathSpec, n: int, t: float, quad) -> np.ndarray:
    return _engine_for(model, bath, t, quad).k_order_symmetry_resolved(n, t)


@dataclass
class KSeries:
    """Per-order effective-Hamiltonian terms on a time grid.

    ``orders[n]`` has shape ``(n_times, 2, 2)``; ``partial_sums[n]`` is
    ``sum_{j <= n} lam**j K_j`` (with ``K_0`` the traceless system Hamiltonian).
    """

    times: np.ndarray
    orders: dict
    partial_sums: dict
    max_order: int
    h: float
    bath: dict
    lam: float
    frame: str = "schrodinger"

    @property
    def total(self) -> np.ndarray:
        return self.partial_sums[self.max_order]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "n", "re00", "im00", "re01", "im01", "re10", "im10", "re11", "im11"])
            for i, t in enumerate(self.times):
                for n in range(self.max_order + 1):
                    k = self.orders[n][i].reshape(-1)
                    row = [f"{t:.17g}", n]
                    for z in k:
                        row += [f"{z.real:.17g}", f"{z.imag:.17g}"]
                    w.writerow(row)


def k_series_from_engine(engine: Expansion, times: Sequence[float], max_order: int,
                         frame: str = "schrodinger") -> KSeries:
    if not 0 <= max_order <= MAX_ORDER:
        raise ValueError(f"max_order must be within 0..{MAX_ORDER}")
    if frame not in ("schrodinger", "interaction"):
        raise ValueError("frame must be 'schrodinger' or 'interaction'")
    times = np.asarray(times, dtype=float)
    model = engine.model
    orders = {n: np.zeros((len(times), 2, 2), dtype=complex) for n in range(max_order + 1)}
    for i, t in enumerate(times):
        u = free_propagator(model, t)
        for n in range(max_order + 1):
            kn = engine.k_order(n, t)
            if frame == "schrodinger" and n > 0:
                kn = u @ kn @ dag(u)
            orders[n][i] = kn
    partial = {}
    running = np.zeros((len(times), 2, 2), dtype=complex)
    for n in range(max_order + 1):
        running = running + model.lam**n * orders[n]
        partial[n] = running.copy()
    return KSeries(
        times=times,
        orders=orders,
        partial_sums=partial,
        max_order=max_order,
        h=engine.h,
        bath=engine.bath.describe(),
        lam=model.lam,
        frame=frame,
    )


def k_series(model: SpinModel, bath: BathSpec, max_order: int, times: Sequence[float], quad,
             frame: str = "schrodinger") -> KSeries:
    times = np.asarray(times, dtype=float)
    engine = _engine_for(model, bath, float(times.max()), quad)
    return k_series_from_engine(engine, times, max_order, frame)


def bloch_components(k: np.ndarray) -> tuple[float, float, float]:
    """``(Tr K sigma_x, Tr K sigma_y, Tr K sigma_z)``."""
    return tuple(float(np.real(np.trace(k @ s))) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z))


def report_observables(series: KSeries) -> dict:
    """Renormalized frequency, transverse parts and eigenbasis tilt of ``K(t)``.

    The tilt is the polar angle of the Bloch vector of ``K(t)``.
    """
    total = series.total
    if total.shape[1] != 2:
        raise ValueError("observables are defined for qubits only")
    rows = {"t": [], "omega_r": [], "kx": [], "ky": [], "rotation_angle": []}
    for t, k in zip(series.times, total):
        kx, ky, kz = bloch_components(k)
        rows["t"].append(float(t))
        rows["omega_r"].append(kz)
        rows["kx"].append(kx)
        rows["ky"].append(ky)
        rows["rotation_angle"].append(math.atan2(math.hypot(kx, ky), kz))
    return {key: np.array(v) for key, v in rows.items()}


def observables_to_csv(obs: dict, path) -> None:
    keys = ["t", "omega_r", "kx", "ky", "rotation_angle"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(keys)
        for row in zip(*(obs[k] for k in keys)):
            w.writerow([f"{x:.17g}" for x in row])
