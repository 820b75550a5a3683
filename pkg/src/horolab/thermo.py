"""Subshifts of finite type, transfer operators, pressure, and suspensions.

Functions on the shift are discretized as piecewise-constant functions on
depth-k cylinders (admissible words of length k). On that class the transfer
operator

    (L_w phi)(x) = sum_{shift y = x} e^{w(y)} phi(y)

is exact and finite: preimages of the word x are the words (a, x_0..x_{k-2})
with a -> x_0 admissible. Leading eigendata come from power iteration on the
operator and its adjoint. The pressure function is the root beta of

    log lambda(-beta*roof + <u, jump>) = 0,

convex in u with value 1 at u = 0 once the roof is normalized; its Legendre
dual governs the large-deviation rate of the deck jumps, and the Hessian at
0 is the diffusion covariance of the suspension's Z^d displacement.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product as _iproduct

import numpy as np

__all__ = [
    "ShiftModel",
    "RpfData",
    "PressureCurve",
    "ConvergenceError",
    "BracketError",
    "OutOfDomainError",
    "DegenerateCovarianceError",
    "birkhoff_sum",
    "transfer_apply",
    "rpf_eigendata",
    "pressure",
    "pressure_root",
    "normalize_roof",
    "build_pressure_curve",
    "legendre_dual",
    "covariance_sigma",
    "suspension_sample",
    "suspension_paths",
    "local_stable_length",
    "builtin_model",
    "load_shift_spec",
    "BUILTIN_MODELS",
]


class ConvergenceError(RuntimeError):
    """Power iteration failed to converge; carries the last residual."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class BracketError(RuntimeError):
    """Root bracketing for the pressure function failed."""


class OutOfDomainError(ValueError):
    """Legendre dual queried outside the sampled gradient range."""


class DegenerateCovarianceError(RuntimeError):
    """Deck-jump covariance is not positive definite."""


# ---------------------------------------------------------------------------
# shift models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShiftModel:
    """Topologically mixing SFT with a roof and a Z^d edge jump.

    roof: positive potential; a float (constant) or a dict word -> value on
    depth-k cylinders. jump: dict (s, s') -> Z^d vector on symbol pairs; may
    be None for pure pressure work. depth >= 2 whenever a jump is present so
    that the jump is a cylinder function.
    """

    states: tuple
    transitions: np.ndarray
    depth: int
    roof: object
    jump: dict | None
    d: int = 1
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        A = np.asarray(self.transitions, dtype=np.int8)
        if A.shape != (len(self.states), len(self.states)):
            raise ValueError("transition matrix shape mismatch")
        object.__setattr__(self, "transitions", A)
        if self.depth < 1:
            raise ValueError("cylinder depth must be >= 1")
        if self.jump is not None and self.depth < 2:
            raise ValueError("edge jumps need cylinder depth >= 2")
        if not self._is_mixing():
            raise ValueError("transition matrix must be irreducible and aperiodic")

    def _is_mixing(self) -> bool:
        n = len(self.states)
        P = (self.transitions > 0).astype(np.int64)
        M = P.copy()
        for _ in range(n * n):
            if (M > 0).all():
                return True
            M = np.minimum(M @ P, 1)
        return False

    # -- cached cylinder structure ------------------------------------------

    def _build(self):
        if "words" in self._cache:
            return
        n = len(self.states)
        A = self.transitions
        words = []
        for w in _iproduct(range(n), repeat=self.depth):
            if all(A[w[j], w[j + 1]] for j in range(self.depth - 1)):
                words.append(w)
        index = {w: i for i, w in enumerate(words)}
        esrc, edst = [], []
        for xi, x in enumerate(words):
            for a in range(n):
                if A[a, x[0]]:
                    y = (a,) + x[:-1]
                    esrc.append(index[y])
                    edst.append(xi)
        roof_arr = np.empty(len(words))
        if isinstance(self.roof, dict):
            for w, i in index.items():
                roof_arr[i] = float(self.roof[w])
        else:
            roof_arr[:] = float(self.roof)
        if (roof_arr <= 0).any():
            raise ValueError("roof must be positive")
        jump_arr = None
        if self.jump is not None:
            jump_arr = np.zeros((len(words), self.d), dtype=np.int64)
            for w, i in index.items():
                jump_arr[i] = np.asarray(self.jump[(w[0], w[1])], dtype=np.int64)
        self._cache.update(
            words=tuple(words),
            index=index,
            esrc=np.asarray(esrc),
            edst=np.asarray(edst),
            roof_arr=roof_arr,
            jump_arr=jump_arr,
        )

    @property
    def words(self) -> tuple:
        self._build()
        return self._cache["words"]

    @property
    def word_index(self) -> dict:
        self._build()
        return self._cache["index"]

    @property
    def roof_values(self) -> np.ndarray:
        self._build()
        return self._cache["roof_arr"]

    @property
    def jump_values(self) -> np.ndarray:
        self._build()
        if self._cache["jump_arr"] is None:
            raise ValueError("model has no deck jump")
        return self._cache["jump_arr"]

    @property
    def constant_roof(self) -> float | None:
        r = self.roof_values
        return float(r[0]) if np.allclose(r, r[0], rtol=0, atol=1e-14) else None

    def with_depth(self, depth: int) -> "ShiftModel":
        if isinstance(self.roof, dict) and depth != self.depth:
            raise ValueError("cannot re-depth a model with a cylinder roof table")
        return ShiftModel(
            states=self.states,
            transitions=self.transitions,
            depth=depth,
            roof=self.roof,
            jump=self.jump,
            d=self.d,
        )

    def with_roof_scale(self, factor: float) -> "ShiftModel":
        roof = (
            {w: factor * v for w, v in self.roof.items()}
            if isinstance(self.roof, dict)
            else factor * float(self.roof)
        )
        return ShiftModel(
            states=self.states,
            transitions=self.transitions,
            depth=self.depth,
            roof=roof,
            jump=self.jump,
            d=self.d,
        )

    def as_weight(self, weight) -> np.ndarray:
        """Coerce a cylinder function (array, dict, callable, scalar) to an array."""
        n = len(self.words)
        if np.isscalar(weight):
            return np.full(n, float(weight))
        if isinstance(weight, dict):
            return np.array([float(weight[w]) for w in self.words])
        if callable(weight):
            return np.array([float(weight(w)) for w in self.words])
        arr = np.asarray(weight, dtype=float)
        if arr.shape != (n,):
            raise ValueError(f"cylinder function must have length {n}")
        return arr


# ---------------------------------------------------------------------------
# Birkhoff sums and the transfer operator
# ---------------------------------------------------------------------------


def birkhoff_sum(F, x: tuple, n: int, depth: int = 1):
    """F(x) + F(shift x) + ... + F(shift^{n-1} x) on a finite word.

    F reads windows of length `depth`, so x must have length >= n + depth - 1
    (>= n + depth keeps a safety margin per the calling convention here).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if len(x) < n + depth:
        raise ValueError(f"word of length {len(x)} too short for n={n}, depth={depth}")
    if n == 0:
        probe = F(tuple(x[:depth]))
        return np.zeros_like(np.asarray(probe)) if np.ndim(probe) else 0.0
    vals = [F(tuple(x[j : j + depth])) for j in range(n)]
    return sum(vals[1:], start=vals[0])


def transfer_apply(model: ShiftModel, weight, phi) -> np.ndarray:
    """One application of the transfer operator with the given log-weight."""
    w = model.as_weight(weight)
    p = model.as_weight(phi)
    out = np.zeros(len(model.words))
    np.add.at(out, model._cache["edst"], np.exp(w[model._cache["esrc"]]) * p[model._cache["esrc"]])
    return out


def _transfer_pair(model: ShiftModel, w: np.ndarray):
    """Matrix-free apply/adjoint-apply closures for a fixed weight array."""
    model._build()
    esrc, edst = model._cache["esrc"], model._cache["edst"]
    ew = np.exp(w[esrc])

    def apply(phi):
        out = np.zeros(len(w))
        np.add.at(out, edst, ew * phi[esrc])
        return out

    def apply_adjoint(nu):
        out = np.zeros(len(w))
        np.add.at(out, esrc, ew * nu[edst])
        return out

    return apply, apply_adjoint


@dataclass(frozen=True)
class RpfData:
    """Leading eigendata: eigenvalue, positive eigenfunction, adjoint measure.

    Normalized so the measure weights sum to 1 and the eigenfunction
    integrates to 1 against them.
    """

    eigenvalue: float
    eigenfunction: np.ndarray
    eigenmeasure: np.ndarray

    def invariant_weights(self) -> np.ndarray:
        """Shift-invariant probability weights on cylinders."""
        w = self.eigenfunction * self.eigenmeasure
        return w / w.sum()


def _power_iterate(apply_fn, n: int, tol: float, itmax: int):
    v = np.full(n, 1.0 / math.sqrt(n))
    lam = 1.0
    for _ in range(itmax):
        u = apply_fn(v)
        lam_new = float(np.linalg.norm(u))
        if lam_new == 0:
            raise ConvergenceError("operator annihilated the iterate", residual=None)
        u /= lam_new
        delta = float(np.abs(u - v).max())
        v, lam_prev, lam = u, lam, lam_new
        if delta < tol and abs(lam - lam_prev) < tol * max(1.0, lam):
            return lam, v
    raise ConvergenceError(
        f"power iteration did not converge within {itmax} iterations",
        residual=delta,
    )


def rpf_eigendata(
    model: ShiftModel, weight, tol: float = 1e-12, itmax: int = 100_000
) -> RpfData:
    """Leading eigenvalue/eigenfunction/eigenmeasure by power iteration."""
    w = model.as_weight(weight)
    apply_fn, adjoint_fn = _transfer_pair(model, w)
    n = len(model.words)
    lam, psi = _power_iterate(apply_fn, n, tol, itmax)
    lam2, nu = _power_iterate(adjoint_fn, n, tol, itmax)
    if abs(lam - lam2) > 1e-9 * max(1.0, lam):
        raise ConvergenceError(
            f"operator and adjoint eigenvalues disagree: {lam} vs {lam2}",
            residual=abs(lam - lam2),
        )
    if (psi <= 0).any() or (nu < 0).any():
        raise ConvergenceError("eigendata not positive; model may not be mixing")
    nu = nu / nu.sum()
    psi = psi / float(psi @ nu)
    return RpfData(eigenvalue=lam, eigenfunction=psi, eigenmeasure=nu)


def pressure(model: ShiftModel, weight) -> float:
    """Topological pressure of the weight, log of the leading eigenvalue."""
    return math.log(rpf_eigendata(model, weight).eigenvalue)


def _root_weight(model: ShiftModel, beta: float, u) -> np.ndarray:
    w = -beta * model.roof_values
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u != 0):
        w = w + model.jump_values @ u
    return w


def pressure_root(model: ShiftModel, u=0.0, tol: float = 1e-10) -> float:
    """The root beta of pressure(-beta*roof + <u, jump>) = 0.

    The pressure is strictly decreasing in beta (roof > 0), so the root is
    unique; bracket [0, 4] is expanded geometrically, then bisected.
    """

    def g(beta):
        return pressure(model, _root_weight(model, beta, u))

    lo, hi = 0.0, 4.0
    g_lo = g(lo)
    if g_lo < 0:
        # root below 0: expand downward
        while g(lo) < 0:
            hi = lo
            lo = lo * 2 if lo < 0 else -4.0
            if lo < -1e6:
                raise BracketError(f"no bracket: pressure({lo})={g(lo)}, pressure({hi})={g(hi)}")
    g_hi = g(hi)
    expansions = 0
    while g_hi > 0:
        lo, hi = hi, hi * 2.0
        g_hi = g(hi)
        expansions += 1
        if expansions > 60:
            raise BracketError(f"no bracket: pressure stays positive up to beta={hi}")
    while hi - lo > tol * 0.25:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    # one secant polish inside the bracket
    g_lo, g_hi = g(lo), g(hi)
    if g_lo != g_hi:
        sec = lo - g_lo * (hi - lo) / (g_hi - g_lo)
        if lo <= sec <= hi:
            return float(sec)
    return float(0.5 * (lo + hi))


def normalize_roof(model: ShiftModel) -> tuple[ShiftModel, float]:
    """Rescale the roof so the pressure root at u = 0 is exactly 1."""
    beta0 = pressure_root(model, 0.0)
    if beta0 <= 0:
        raise ValueError(f"roof normalization needs a positive root, got {beta0}")
    return model.with_roof_scale(beta0), float(beta0)


# ---------------------------------------------------------------------------
# pressure curve, covariance, Legendre dual
# ---------------------------------------------------------------------------


@dataclass
class PressureCurve:
    """Sampled pressure function with its Hessian data at 0."""

    grid: np.ndarray  # (G, d)
    values: np.ndarray  # (G,)
    covariance: np.ndarray  # (d, d)
    sigma: float
    model: ShiftModel  # roof-normalized
    raw_root: float  # normalization factor beta0 of the raw roof
    d: int


def _default_grid(d: int) -> np.ndarray:
    if d == 1:
        return np.round(np.arange(-2.0, 2.0001, 0.1), 10).reshape(-1, 1)
    axis = np.round(np.arange(-1.0, 1.0001, 0.2), 10)
    return np.array([(a, b) for a in axis for b in axis])


def _hessian_at_zero(model: ShiftModel, d: int, h: float = 1e-3) -> np.ndarray:
    """Richardson-refined central-difference Hessian of the pressure root."""

    def P(u):
        return pressure_root(model, u)

    def hess(step):
        H = np.empty((d, d))
        p0 = P(np.zeros(d))
        for i in range(d):
            e = np.zeros(d)
            e[i] = step
            H[i, i] = (P(e) - 2.0 * p0 + P(-e)) / step**2
        for i in range(d):
            for j in range(i + 1, d):
                ei, ej = np.zeros(d), np.zeros(d)
                ei[i] = step
                ej[j] = step
                H[i, j] = H[j, i] = (
                    P(ei + ej) - P(ei - ej) - P(-ei + ej) + P(-ei - ej)
                ) / (4.0 * step**2)
        return H

    return (4.0 * hess(h / 2.0) - hess(h)) / 3.0


def build_pressure_curve(
    model: ShiftModel, grid: np.ndarray | None = None, h: float = 1e-3
) -> PressureCurve:
    """Normalize the roof, sample P on the grid, differentiate at 0."""
    d = model.d
    norm_model, beta0 = normalize_roof(model)
    g = _default_grid(d) if grid is None else np.atleast_2d(np.asarray(grid, dtype=float))
    if g.shape[1] != d:
        g = g.reshape(-1, d)
    values = np.array([pressure_root(norm_model, u) for u in g])
    cov = _hessian_at_zero(norm_model, d, h)
    eig = np.linalg.eigvalsh(0.5 * (cov + cov.T))
    if eig.min() <= 1e-8:
        raise DegenerateCovarianceError(
            f"deck-jump covariance not positive definite (eigenvalues {eig})"
        )
    sigma = float(abs(np.linalg.det(cov)) ** (1.0 / d))
    return PressureCurve(
        grid=g,
        values=values,
        covariance=cov,
        sigma=sigma,
        model=norm_model,
        raw_root=beta0,
        d=d,
    )


def covariance_sigma(pc: PressureCurve) -> tuple[np.ndarray, float]:
    eig = np.linalg.eigvalsh(0.5 * (pc.covariance + pc.covariance.T))
    if eig.min() <= 1e-8:
        raise DegenerateCovarianceError(f"covariance not positive definite ({eig})")
    return pc.covariance, pc.sigma


def legendre_dual(pc: PressureCurve, x) -> float:
    """H(x) = inf_u (P(u) - <u, x>), refined by a local quadratic fit.

    Concave with maximum H(0) = 1; raises OutOfDomainError when the argmin
    sits on the sampled boundary (x outside the gradient range of P).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    vals = pc.values - pc.grid @ x
    i = int(np.argmin(vals))
    if pc.d == 1:
        g = pc.grid[:, 0]
        if i == 0 or i == len(g) - 1:
            raise OutOfDomainError(f"x={x} outside the sampled gradient range")
        u3 = g[i - 1 : i + 2]
        v3 = vals[i - 1 : i + 2]
        a, b, c = np.polyfit(u3, v3, 2)
        if a <= 0:
            return float(vals[i])
        umin = -b / (2.0 * a)
        return float(np.polyval([a, b, c], umin))
    # d = 2: least-squares quadratic on the 3x3 grid neighborhood
    u0 = pc.grid[i]
    axis = np.unique(np.round(pc.grid[:, 0], 10))
    step = axis[1] - axis[0]
    i0 = np.searchsorted(axis, round(u0[0], 10))
    j0 = np.searchsorted(axis, round(u0[1], 10))
    if i0 in (0, len(axis) - 1) or j0 in (0, len(axis) - 1):
        raise OutOfDomainError(f"x={x} outside the sampled gradient range")
    pts, vs = [], []
    lookup = {tuple(np.round(u, 10)): k for k, u in enumerate(pc.grid)}
    for a in axis[i0 - 1 : i0 + 2]:
        for b in axis[j0 - 1 : j0 + 2]:
            k = lookup[(round(a, 10), round(b, 10))]
            pts.append((a, b))
            vs.append(vals[k])
    pts = np.array(pts)
    A = np.column_stack(
        [
            np.ones(len(pts)),
            pts[:, 0],
            pts[:, 1],
            pts[:, 0] ** 2,
            pts[:, 1] ** 2,
            pts[:, 0] * pts[:, 1],
        ]
    )
    coef, *_ = np.linalg.lstsq(A, np.array(vs), rcond=None)
    c0, c1, c2, c11, c22, c12 = coef
    H = np.array([[2 * c11, c12], [c12, 2 * c22]])
    if np.linalg.eigvalsh(H).min() <= 0:
        return float(vals[i])
    umin = np.linalg.solve(H, -np.array([c1, c2]))
    if np.abs(umin - u0).max() > 1.5 * step:
        return float(vals[i])
    return float(
        c0
        + c1 * umin[0]
        + c2 * umin[1]
        + c11 * umin[0] ** 2
        + c22 * umin[1] ** 2
        + c12 * umin[0] * umin[1]
    )


def dual_hessian_at_zero(pc: PressureCurve, delta: float = 0.05) -> np.ndarray:
    """Central-difference Hessian of the Legendre dual at 0."""
    d = pc.d
    H = np.empty((d, d))
    h0 = legendre_dual(pc, np.zeros(d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = delta
        H[i, i] = (legendre_dual(pc, e) - 2 * h0 + legendre_dual(pc, -e)) / delta**2
    for i in range(d):
        for j in range(i + 1, d):
            ei, ej = np.zeros(d), np.zeros(d)
            ei[i] = delta
            ej[j] = delta
            H[i, j] = H[j, i] = (
                legendre_dual(pc, ei + ej)
                - legendre_dual(pc, ei - ej)
                - legendre_dual(pc, -ei + ej)
                + legendre_dual(pc, -ei - ej)
            ) / (4 * delta**2)
    return H


# ---------------------------------------------------------------------------
# suspension sampling
# ---------------------------------------------------------------------------


def _chain_tables(model: ShiftModel, rpf: RpfData):
    """Forward Markov chain of the equilibrium state on cylinder words.

    P(src -> dst) = M[dst, src] * nu[dst] / (lambda * nu[src]); its stationary
    law is the invariant weights psi*nu.
    """
    model._build()
    esrc, edst = model._cache["esrc"], model._cache["edst"]
    w = -model.roof_values
    probs = np.exp(w[esrc]) * rpf.eigenmeasure[edst] / (
        rpf.eigenvalue * rpf.eigenmeasure[esrc]
    )
    n = len(model.words)
    order = np.argsort(esrc, kind="stable")
    esrc_s, edst_s, p_s = esrc[order], edst[order], probs[order]
    starts = np.searchsorted(esrc_s, np.arange(n + 1))
    branch = int(np.max(starts[1:] - starts[:-1]))
    table_dst = np.zeros((n, branch), dtype=np.int64)
    table_cum = np.ones((n, branch))
    for s in range(n):
        sl = slice(starts[s], starts[s + 1])
        k = starts[s + 1] - starts[s]
        table_dst[s, :k] = edst_s[sl]
        table_cum[s, :k] = np.cumsum(p_s[sl])
        if abs(table_cum[s, k - 1] - 1.0) > 1e-8:
            raise ConvergenceError(
                f"chain row {s} sums to {table_cum[s, k-1]}, not 1"
            )
        table_cum[s, k - 1 :] = 1.0
    return table_dst, table_cum


def suspension_sample(
    model: ShiftModel, rpf: RpfData, T: float, rng: np.random.Generator
) -> tuple[tuple, np.ndarray, float]:
    """One stationary suspension orbit run for roof time T.

    Shifts while the accumulated roof stays <= T; returns the final cylinder
    word, the accumulated deck jump, and the leftover time T - sum(roof).
    """
    if T < 0:
        raise ValueError("roof time must be nonnegative")
    weights = rpf.invariant_weights()
    word_i = int(rng.choice(len(model.words), p=weights))
    table_dst, table_cum = _chain_tables(model, rpf)
    roof = model.roof_values
    jump = model.jump_values
    t_acc = 0.0
    deck = np.zeros(model.d, dtype=np.int64)
    while t_acc + roof[word_i] <= T:
        t_acc += roof[word_i]
        deck += jump[word_i]
        u = rng.random()
        word_i = int(table_dst[word_i, np.searchsorted(table_cum[word_i], u)])
    return model.words[word_i], deck, T - t_acc


def suspension_paths(
    model: ShiftModel,
    rpf: RpfData,
    n_steps: int,
    n_samples: int,
    rng: np.random.Generator,
):
    """Vectorized stationary chains: word indices, cumulative roofs and jumps.

    Returns (words (N, n_steps+1), roof_cum (N, n_steps+1), jump_cum
    (N, n_steps+1, d)); roof_cum[:, j] is the roof time consumed by the first
    j shifts.
    """
    weights = rpf.invariant_weights()
    table_dst, table_cum = _chain_tables(model, rpf)
    roof = model.roof_values
    jump = model.jump_values
    words = np.zeros((n_samples, n_steps + 1), dtype=np.int64)
    words[:, 0] = rng.choice(len(model.words), size=n_samples, p=weights)
    for j in range(n_steps):
        cur = words[:, j]
        u = rng.random(n_samples)
        pick = (table_cum[cur] < u[:, None]).sum(axis=1)
        words[:, j + 1] = table_dst[cur, pick]
    roof_cum = np.zeros((n_samples, n_steps + 1))
    roof_cum[:, 1:] = np.cumsum(roof[words[:, :-1]], axis=1)
    jump_cum = np.zeros((n_samples, n_steps + 1, model.d), dtype=np.int64)
    jump_cum[:, 1:] = np.cumsum(jump[words[:, :-1]], axis=1)
    return words, roof_cum, jump_cum


def local_stable_length(s: float, psi_val: float) -> float:
    """Length of a local stable leaf s units down the geodesic flow."""
    if psi_val <= 0:
        raise ValueError("eigenfunction value must be positive")
    return math.exp(-s) * psi_val


# ---------------------------------------------------------------------------
# built-in models & JSON specs
# ---------------------------------------------------------------------------


def _full2_cosh(depth: int = 6) -> ShiftModel:
    return ShiftModel(
        states=(0, 1),
        transitions=np.ones((2, 2), dtype=np.int8),
        depth=depth,
        roof=math.log(2.0),
        jump={(0, 0): (-1,), (0, 1): (-1,), (1, 0): (1,), (1, 1): (1,)},
        d=1,
    )


def _golden_mean(depth: int = 6) -> ShiftModel:
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    return ShiftModel(
        states=(0, 1),
        transitions=np.array([[1, 1], [1, 0]], dtype=np.int8),
        depth=depth,
        roof=math.log(phi),
        jump={(0, 0): (1,), (0, 1): (0,), (1, 0): (0,)},
        d=1,
    )


def _product2d(depth: int = 3) -> ShiftModel:
    # two decoupled full 2-shifts; states are pairs, jump is (+-1, +-1)
    states = tuple(_iproduct((0, 1), repeat=2))
    jump = {}
    for i, s in enumerate(states):
        for j, _t in enumerate(states):
            jump[(i, j)] = (2 * s[0] - 1, 2 * s[1] - 1)
    return ShiftModel(
        states=tuple(range(4)),
        transitions=np.ones((4, 4), dtype=np.int8),
        depth=depth,
        roof=math.log(4.0),
        jump=jump,
        d=2,
    )


BUILTIN_MODELS = {
    "full2-cosh": _full2_cosh,
    "golden-mean": _golden_mean,
    "product2d": _product2d,
}


def builtin_model(name: str, depth: int | None = None) -> ShiftModel:
    try:
        factory = BUILTIN_MODELS[name]
    except KeyError:
        raise KeyError(
            f"unknown model {name!r}; built-ins: {sorted(BUILTIN_MODELS)}"
        ) from None
    return factory() if depth is None else factory(depth)


def load_shift_spec(path) -> ShiftModel:
    """JSON shift spec: states, transitions, depth, roof, jump."""
    with open(path) as fh:
        payload = json.load(fh)
    roof = payload["roof"]
    if isinstance(roof, dict):
        if "constant" in roof:
            roof = float(roof["constant"])
        else:
            roof = {
                tuple(int(s) for s in key.split(",")): float(v)
                for key, v in roof["cylinder"].items()
            }
    jump = None
    d = int(payload.get("d", 1))
    if payload.get("jump"):
        jump = {}
        for key, v in payload["jump"].items():
            a, b = (int(s) for s in key.split(","))
            vec = (v,) if np.isscalar(v) else tuple(v)
            jump[(a, b)] = vec
            d = len(vec)
    return ShiftModel(
        states=tuple(range(len(payload["states"]))),
        transitions=np.asarray(payload["transitions"], dtype=np.int8),
        depth=int(payload["depth"]),
        roof=roof,
        jump=jump,
        d=d,
    )
