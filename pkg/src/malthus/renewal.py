"""First-jump law and spectrally weighted renewal kernels.

For a phase point x the first division happens at a random time T with
density psi(t|x) = beta(phi^t x) * exp(-int_0^t beta(phi^s x) ds); jointly
with the offspring size Z the normalized density is
p_x(t, z) = k(phi^t x, z) * psi(t|x) / C_x, where C_x is the mean offspring
count.  The renewal kernel K_lam(x, z) = int e^{-lam t} k(phi^t x, z)
psi(t|x) dt and its truncation to sizes in [0, R] (with the uniform 1/R
leak correction) drive the eigenvalue machinery.

For the adder the time integral is evaluated in the added-size variable
(da = B-hazard measure, u = y + a the current size), which removes all flow
integration from the inner loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import TailBoundExceeded
from .flow import FlowEngine
from .model import ModelSpec, PhasePoint

#: target cumulative hazard at the quadrature cutoff; exp(-28) < 1e-12
HAZARD_CUTOFF = 28.0
TAIL_TOL = 1e-9


def _panel_nodes(edges, n_per_panel):
    """Gauss-Legendre nodes/weights tiled over consecutive panels."""
    x, w = leggauss(n_per_panel)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        nodes.append(mid + half * x)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _graded_edges(cut, n_panels):
    """Panel edges packed near 0 where the hazard density concentrates."""
    return np.concatenate([[0.0], np.geomspace(min(0.5, cut / 4), cut, n_panels)])


@dataclass(frozen=True)
class RowQuadrature:
    """Cached first-jump quadrature along one orbit, reusable across lam.

    ``t`` are jump times, ``w`` the psi-measure weights (sum ~ 1),
    ``u`` the current sizes at the jump times.
    """

    t: np.ndarray
    w: np.ndarray
    u: np.ndarray


class FirstJumpLaw:
    """Survival, jump-time and joint first-jump densities for one model."""

    def __init__(self, model: ModelSpec, flow: FlowEngine | None = None,
                 n_panels: int = 12, n_per_panel: int = 16):
        self.model = model
        self.flow = flow or FlowEngine(model)
        self.n_panels = n_panels
        self.n_per_panel = n_per_panel
        self._row_cache: dict = {}

    # -- survival -------------------------------------------------------

    def cumulative_rate(self, x: PhasePoint, t) -> float:
        """int_0^t beta(phi^s x) ds."""
        if self.model.is_adder:
            lam = self.model.lambda_growth
            a_t = x.a + x.y * (np.exp(lam * np.asarray(t, dtype=float)) - 1.0)
            H = self.model.hazard.cumulative
            out = H(a_t) - H(x.a)
            return out if np.ndim(out) else float(out)
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(tt)
        for i, ti in enumerate(tt):
            if ti <= 0:
                out[i] = 0.0
                continue
            s, w = _panel_nodes(np.linspace(0.0, ti, 9), 16)
            pts = [self.flow.advance(x, si) for si in s]
            out[i] = float(np.sum(w * [self.model.beta(p.a, p.y) for p in pts]))
        return out if np.ndim(t) else float(out[0])

    def survival(self, x: PhasePoint, t) -> float:
        """P(no division before t from x) = exp(-int beta)."""
        out = np.exp(-np.asarray(self.cumulative_rate(x, t)))
        return out if out.ndim else float(out)

    def jump_time_density(self, x: PhasePoint, t) -> float:
        """psi(t|x) = beta(phi^t x) * survival(x, t)."""
        tt = np.asarray(t, dtype=float)
        if self.model.is_adder:
            lam = self.model.lambda_growth
            e = np.exp(lam * tt)
            a_t, y_t = x.a + x.y * (e - 1.0), x.y * e
            out = self.model.beta(a_t, y_t) * self.survival(x, tt)
            return out if np.ndim(out) else float(out)
        p = self.flow.advance(x, float(t))
        return self.model.beta(p.a, p.y) * self.survival(x, float(t))

    # -- quadrature along the orbit --------------------------------------

    def row_quadrature(self, x: PhasePoint) -> RowQuadrature:
        key = (x.a, x.y)
        cached = self._row_cache.get(key)
        if cached is not None:
            return cached
        if self.model.is_adder:
            row = self._adder_row(x)
        else:
            row = self._generic_row(x)
        self._row_cache[key] = row
        return row

    def _adder_row(self, x: PhasePoint) -> RowQuadrature:
        lam = self.model.lambda_growth
        hz = self.model.hazard
        if x.y <= 0:
            raise ValueError("orbit from zero size never divides")
        a_cut = hz.inverse_cumulative(hz.cumulative(x.a) + HAZARD_CUTOFF) - x.a
        aa, ww = _panel_nodes(_graded_edges(a_cut, self.n_panels), self.n_per_panel)
        # psi(t) dt = B(a0 + a) exp(-(H(a0+a) - H(a0))) da along the orbit
        dens = hz(x.a + aa) * np.exp(-(hz.cumulative(x.a + aa) - hz.cumulative(x.a)))
        u = x.y + aa
        t = np.log(u / x.y) / lam
        return RowQuadrature(t=t, w=ww * dens, u=u)

    def _generic_row(self, x: PhasePoint) -> RowQuadrature:
        # march until survival drops below the cutoff, then lay GL panels in t
        t_hi = 1.0
        while self.cumulative_rate(x, t_hi) < HAZARD_CUTOFF:
            t_hi *= 2.0
            if t_hi > 1e6:
                raise TailBoundExceeded("hazard integral fails to diverge")
        tt, ww = _panel_nodes(_graded_edges(t_hi, self.n_panels), self.n_per_panel)
        dens = np.array([self.jump_time_density(x, ti) for ti in tt])
        u = np.array([self.flow.advance(x, ti).y for ti in tt])
        return RowQuadrature(t=tt, w=ww * dens, u=u)

    # -- first-jump functionals ------------------------------------------

    def offspring_constant(self, x: PhasePoint) -> float:
        """C_x = E[number of offspring at the first division]."""
        q = self.row_quadrature(x)
        if self.model.is_adder:
            return float(np.sum(q.w) * self.model.kernel_mass(x.a, x.y))
        masses = np.array([self.model.kernel_mass(0.0, ui) for ui in q.u])
        return float(np.sum(q.w * masses))

    def first_jump_density(self, x: PhasePoint, t: float, z: float) -> float:
        """p_x(t, z): joint density of (division time, one offspring size)."""
        if t < 0:
            return 0.0
        if self.model.is_adder:
            lam = self.model.lambda_growth
            u = x.y * math.exp(lam * t)
            a_u = x.a + (u - x.y)
            k = self.model.kernel_density(a_u, u, z)
        else:
            p = self.flow.advance(x, t)
            k = self.model.kernel_density(p.a, p.y, z)
        return float(k) * self.jump_time_density(x, t) / self.offspring_constant(x)

    def kernel_K(self, x: PhasePoint, z, lam: float):
        """K_lam(x, z) = int e^{-lam t} k(phi^t x, z) psi(t|x) dt."""
        if lam < 0:
            raise ValueError("spectral shift lam must be nonnegative")
        q = self.row_quadrature(x)
        tail = self.model.K_bar * math.exp(-HAZARD_CUTOFF)
        if tail > TAIL_TOL:
            raise TailBoundExceeded(f"time-quadrature tail estimate {tail:.2e}")
        coef = q.w * np.exp(-lam * q.t)
        zz = np.atleast_1d(np.asarray(z, dtype=float))
        ratio = zz[None, :] / q.u[:, None]
        if self.model.is_adder:
            kvals = (2.0 / q.u)[:, None] * self.model.fragmentation.pdf(ratio)
        else:
            kvals = np.empty_like(ratio)
            for i, ui in enumerate(q.u):
                kvals[i] = self.model.kernel_density(0.0, ui, zz)
        out = coef @ kvals
        return out if np.ndim(z) else float(out[0])


# ---------------------------------------------------------------------------
# Size grid and truncated kernel matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SizeGrid:
    """Quadrature grid on [0, R]; trapezoid weights summing to R."""

    R: float
    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def uniform(cls, R: float, n: int, anchor: float = 1.0) -> "SizeGrid":
        """n uniform nodes on [0, R] with ``anchor`` inserted as an exact node."""
        nodes = np.linspace(0.0, R, n)
        if anchor is not None and 0.0 < anchor < R:
            if not np.any(np.isclose(nodes, anchor, rtol=0, atol=1e-12)):
                nodes = np.sort(np.append(nodes, anchor))
        weights = _trapezoid_weights(nodes)
        return cls(R=float(R), nodes=nodes, weights=weights)

    def __post_init__(self):
        if self.nodes[0] < 0 or abs(self.nodes[-1] - self.R) > 1e-12:
            raise ValueError("grid must span [0, R] with nodes[-1] = R")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        if abs(float(np.sum(self.weights)) - self.R) > 1e-9 * (1 + self.R):
            raise ValueError("quadrature weights must sum to R")

    @property
    def n(self) -> int:
        return self.nodes.size

    def index_of(self, value: float) -> int:
        i = int(np.argmin(np.abs(self.nodes - value)))
        if abs(self.nodes[i] - value) > 1e-9:
            raise ValueError(f"{value} is not a grid node")
        return i

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def _trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    w = np.zeros_like(nodes)
    d = np.diff(nodes)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


@dataclass(frozen=True)
class KernelMatrix:
    """Discretized truncated operator G_lam^R on a SizeGrid.

    ``M[i, j]`` approximates the kernel K_lam^R(0, y_i, z_j), already
    including the uniform 1/R leak correction; ``correction`` records the
    per-row leak mass (1/R) int e^{-lam t} psi * (mass of k above R) dt.
    """

    lam: float
    grid: SizeGrid
    M: np.ndarray
    correction: np.ndarray

    def apply(self, f: np.ndarray) -> np.ndarray:
        """(G_lam^R f)(y_i) = int_0^R f(z) K_lam^R(0, y_i, z) dz."""
        return self.M @ (self.grid.weights * np.asarray(f, dtype=float))

    def adjoint_apply(self, w: np.ndarray) -> np.ndarray:
        """Dual action on grid measures: <w, G f> = <J w, f> exactly."""
        return self.grid.weights * (np.asarray(w, dtype=float) @ self.M)

    def to_csv(self, path):
        idx = np.indices(self.M.shape)
        np.savetxt(
            path,
            np.column_stack([idx[0].ravel(), idx[1].ravel(), self.M.ravel()]),
            delimiter=",",
            header="row,col,value",
            comments="",
            fmt=("%d", "%d", "%.17g"),
        )


class KernelAssembler:
    """Builds KernelMatrix instances, caching per-row orbit quadratures.

    The orbit quadrature (jump times, psi weights, sizes) is independent of
    the spectral shift lam, so repeated assemblies during a root find only
    pay for the kernel-density evaluations.
    """

    def __init__(self, model: ModelSpec, grid: SizeGrid, law: FirstJumpLaw | None = None):
        self.model = model
        self.grid = grid
        self.law = law or FirstJumpLaw(model)
        self._rows = None
        self._cache: dict = {}

    def _row_data(self):
        if self._rows is None:
            rows = []
            for y in self.grid.nodes:
                if y <= 0:
                    rows.append(None)  # zero-size orbit never divides
                else:
                    rows.append(self.law.row_quadrature(PhasePoint(0.0, float(y))))
            self._rows = rows
        return self._rows

    def matrix(self, lam: float) -> KernelMatrix:
        key = round(float(lam), 14)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        grid, model = self.grid, self.model
        n = grid.n
        M = np.zeros((n, n))
        corr = np.zeros(n)
        z = grid.nodes
        for i, q in enumerate(self._row_data()):
            if q is None:
                continue
            coef = q.w * np.exp(-lam * q.t)
            ratio = z[None, :] / q.u[:, None]
            if model.is_adder:
                kvals = (2.0 / q.u)[:, None] * model.fragmentation.pdf(ratio)
                above = np.where(
                    q.u > grid.R,
                    2.0 * (1.0 - model.fragmentation.cdf(np.minimum(grid.R / q.u, 1.0))),
                    0.0,
                )
            else:
                kvals = np.empty_like(ratio)
                above = np.empty_like(q.u)
                for r, ui in enumerate(q.u):
                    kvals[r] = model.kernel_density(0.0, ui, z)
                    above[r] = model.kernel_mass_above(0.0, ui, grid.R)
            corr[i] = float(np.dot(coef, above)) / grid.R
            M[i] = coef @ kvals + corr[i]
        out = KernelMatrix(lam=float(lam), grid=grid, M=M, correction=corr)
        self._cache[key] = out
        return out
