"""Geodesic and horocycle evolution on the cover, with deck tracking.

Evolution is stepped: after each flow quantum the representative is reduced
back into the Dirichlet domain and the deck coordinate accumulates the
character value of the applied lattice word. Stepping keeps matrix entries
bounded over long trajectories, so deck increments stay exact integers.

`FlowEnsemble` runs many trajectories simultaneously on stacked arrays; the
scalar operations (`evolve`, `deck_after`, `birkhoff_integral`, `return_set`)
are thin wrappers suitable for direct use and testing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .psl2 import GroupElement, batch_mobius_i, make_flow
from .surface import Character, CoverPoint, FuchsianSpec, reduce_batch

__all__ = [
    "Trajectory",
    "ReturnSet",
    "ThickCheck",
    "FlowEnsemble",
    "CompactTarget",
    "DomainBump",
    "evolve",
    "deck_after",
    "birkhoff_integral",
    "return_set",
    "k_thick_check",
    "random_starts",
    "clt_experiment",
    "thick_experiment",
]

GEODESIC_STEP = 0.1
HOROCYCLE_STEP = 0.05

_KIND_FLOW = {"geodesic": "A", "horocycle": "U", "A": "A", "U": "U", "Uplus": "Uplus"}


# ---------------------------------------------------------------------------
# batch engine
# ---------------------------------------------------------------------------


class FlowEnsemble:
    """N simultaneous cover trajectories under one character."""

    def __init__(self, mats: np.ndarray, spec: FuchsianSpec, char: Character):
        self.spec = spec
        self.char = char
        self.deck_values = char.matrix(spec)
        self.mats = np.array(mats, dtype=float)
        self.decks = np.zeros((len(self.mats), char.d), dtype=np.int64)
        reduce_batch(self.mats, self.decks, spec, self.deck_values)

    def __len__(self) -> int:
        return len(self.mats)

    def copy(self) -> "FlowEnsemble":
        out = object.__new__(FlowEnsemble)
        out.spec, out.char, out.deck_values = self.spec, self.char, self.deck_values
        out.mats = self.mats.copy()
        out.decks = self.decks.copy()
        return out

    def step(self, flow_mat: np.ndarray) -> None:
        self.mats = self.mats @ flow_mat
        reduce_batch(self.mats, self.decks, self.spec, self.deck_values)

    def positions(self) -> tuple[np.ndarray, np.ndarray]:
        return batch_mobius_i(self.mats)

    def points(self) -> list[CoverPoint]:
        return [
            CoverPoint(rep=GroupElement(m), deck=d)
            for m, d in zip(self.mats, self.decks)
        ]


def random_starts(
    n: int,
    rng: np.random.Generator,
    spec: FuchsianSpec,
    char: Character,
    box: float = 0.25,
) -> FlowEnsemble:
    """Starts uniform in a fixed box of (x, ln y, frame angle) inside the domain."""
    x = rng.uniform(-box, box, n)
    y = np.exp(rng.uniform(-box, box, n))
    th = rng.uniform(0.0, 2.0 * math.pi, n)
    mats = np.zeros((n, 2, 2))
    sy = np.sqrt(y)
    mats[:, 0, 0] = sy
    mats[:, 0, 1] = x / sy
    mats[:, 1, 1] = 1.0 / sy
    cs, sn = np.cos(th / 2.0), np.sin(th / 2.0)
    rot = np.empty((n, 2, 2))
    rot[:, 0, 0] = cs
    rot[:, 0, 1] = sn
    rot[:, 1, 0] = -sn
    rot[:, 1, 1] = cs
    return FlowEnsemble(np.einsum("nij,njk->nik", mats, rot), spec, char)


def _singleton(p: CoverPoint, spec: FuchsianSpec, char: Character) -> FlowEnsemble:
    ens = FlowEnsemble(p.rep.mat[None, :, :], spec, char)
    ens.decks += np.asarray(p.deck, dtype=np.int64)[None, :]
    return ens


# ---------------------------------------------------------------------------
# scalar operations
# ---------------------------------------------------------------------------


def evolve(
    p: CoverPoint,
    kind: str,
    t: float,
    char: Character,
    spec: FuchsianSpec,
    step: float | None = None,
) -> CoverPoint:
    """Flow p for time t (chunked internally) and reduce."""
    flow = _KIND_FLOW[kind]
    if step is None:
        step = GEODESIC_STEP if flow == "A" else HOROCYCLE_STEP
    ens = _singleton(p, spec, char)
    _run(ens, flow, t, step)
    return ens.points()[0]


def _run(ens: FlowEnsemble, flow: str, t: float, step: float) -> None:
    if t == 0:
        return
    n_full, rem = divmod(abs(t), step)
    quantum = make_flow(flow, math.copysign(step, t)).mat
    for _ in range(int(n_full)):
        ens.step(quantum)
    if rem > 1e-15:
        ens.step(make_flow(flow, math.copysign(rem, t)).mat)


def deck_after(
    p: CoverPoint,
    T: float,
    char: Character,
    spec: FuchsianSpec,
    step: float = GEODESIC_STEP,
) -> np.ndarray:
    """Deck coordinate after geodesic time T (stepped evolution)."""
    if not math.isfinite(T):
        raise ValueError("geodesic time must be finite")
    return evolve(p, "geodesic", T, char, spec, step=step).deck


def birkhoff_integral(
    p: CoverPoint,
    psi,
    T: float,
    dt: float = HOROCYCLE_STEP,
    char: Character | None = None,
    spec: FuchsianSpec | None = None,
) -> float:
    """Composite-midpoint quadrature of psi along the horocycle orbit of p."""
    if spec is None or char is None:
        raise ValueError("birkhoff_integral needs the lattice spec and character")
    n_full = int(abs(T) // dt)
    rem = abs(T) - n_full * dt
    sign = math.copysign(1.0, T)
    ens = _singleton(p, spec, char)
    total = 0.0
    half = make_flow("U", sign * dt / 2.0).mat
    full = make_flow("U", sign * dt).mat
    # midpoint of cell j is at t = (j + 1/2) dt
    ens.step(half)
    for j in range(n_full):
        total += psi(ens.points()[0]) * dt
        if j < n_full - 1:
            ens.step(full)
    if rem > 1e-15:
        if n_full > 0:
            ens.step(make_flow("U", sign * (dt / 2.0 + rem / 2.0)).mat)
        else:
            ens.step(make_flow("U", sign * (rem / 2.0 - dt / 2.0)).mat)
        total += psi(ens.points()[0]) * rem
    return total


@dataclass(frozen=True)
class Trajectory:
    start: CoverPoint
    kind: str
    step: float
    samples: tuple


def sample_trajectory(
    start: CoverPoint,
    kind: str,
    step: float,
    n_samples: int,
    char: Character,
    spec: FuchsianSpec,
) -> Trajectory:
    ens = _singleton(start, spec, char)
    flow = make_flow(_KIND_FLOW[kind], step).mat
    samples = [(0.0, ens.points()[0])]
    for j in range(1, n_samples + 1):
        ens.step(flow)
        samples.append((j * step, ens.points()[0]))
    return Trajectory(start=start, kind=kind, step=step, samples=tuple(samples))


# ---------------------------------------------------------------------------
# targets and fields
# ---------------------------------------------------------------------------


class CompactTarget:
    """Base point within a domain ball and deck within a sup-norm bound."""

    def __init__(self, spec: FuchsianSpec, base_radius: float = 1.0, deck_bound: int = 1):
        self.spec = spec
        self.base_radius = base_radius
        self.deck_bound = deck_bound
        self._cosh_r = math.cosh(base_radius)

    def batch(self, x: np.ndarray, y: np.ndarray, decks: np.ndarray) -> np.ndarray:
        cosh_d = 1.0 + (x * x + (y - 1.0) ** 2) / (2.0 * y)
        near = cosh_d <= self._cosh_r
        small = np.abs(decks).max(axis=1) <= self.deck_bound
        return near & small

    def __call__(self, p: CoverPoint) -> bool:
        x, y = batch_mobius_i(p.rep.mat[None])
        return bool(self.batch(x, y, np.asarray(p.deck)[None])[0])


class DomainBump:
    """Continuous bump over a domain ball on the deck-0 copy.

    psi = max(0, 1 - d(z, i)/radius) on deck 0; compactly supported on the cover.
    """

    def __init__(self, spec: FuchsianSpec, radius: float = 1.2):
        self.spec = spec
        self.radius = radius

    sup = 1.0

    def batch(self, x: np.ndarray, y: np.ndarray, decks: np.ndarray) -> np.ndarray:
        cosh_d = 1.0 + (x * x + (y - 1.0) ** 2) / (2.0 * y)
        d = np.arccosh(np.maximum(cosh_d, 1.0))
        vals = np.maximum(0.0, 1.0 - d / self.radius)
        on_zero = (decks == 0).all(axis=1)
        return vals * on_zero

    def __call__(self, p: CoverPoint) -> float:
        x, y = batch_mobius_i(p.rep.mat[None])
        return float(self.batch(x, y, np.asarray(p.deck)[None])[0])


def _target_batch(target, x, y, decks):
    if hasattr(target, "batch"):
        return np.asarray(target.batch(x, y, decks), dtype=bool)
    raise TypeError("target must provide a .batch(x, y, decks) method")


# ---------------------------------------------------------------------------
# return sets and K-thickness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReturnSet:
    """Sorted disjoint closed intervals of in-target times within the window."""

    window: tuple[float, float]
    intervals: tuple[tuple[float, float], ...]
    resolution: float

    def __post_init__(self):
        prev = -math.inf
        for a, b in self.intervals:
            if a > b or a < prev:
                raise ValueError("intervals must be sorted and disjoint")
            prev = b
            if a < self.window[0] - 1e-9 or b > self.window[1] + 1e-9:
                raise ValueError("interval outside the window")


def _bools_to_intervals(times: np.ndarray, hit: np.ndarray) -> tuple:
    if not hit.any():
        return ()
    padded = np.concatenate(([False], hit, [False]))
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    starts, stops = edges[0::2], edges[1::2] - 1
    return tuple((float(times[a]), float(times[b])) for a, b in zip(starts, stops))


def return_set(
    p: CoverPoint,
    target,
    Tmax: float,
    dt: float,
    char: Character,
    spec: FuchsianSpec,
) -> ReturnSet:
    sets = return_sets_batch(_singleton(p, spec, char), target, Tmax, dt)
    return sets[0]


def return_sets_batch(
    ens: FlowEnsemble, target, Tmax: float, dt: float
) -> list[ReturnSet]:
    """Return sets on [-Tmax, Tmax] for every ensemble member, resolution dt."""
    n_steps = int(round(Tmax / dt))
    times = np.concatenate((-dt * np.arange(n_steps, 0, -1), dt * np.arange(n_steps + 1)))
    n = len(ens)
    hits = np.zeros((n, 2 * n_steps + 1), dtype=bool)

    fwd = ens.copy()
    x, y = fwd.positions()
    hits[:, n_steps] = _target_batch(target, x, y, fwd.decks)
    quantum = make_flow("U", dt).mat
    for j in range(1, n_steps + 1):
        fwd.step(quantum)
        x, y = fwd.positions()
        hits[:, n_steps + j] = _target_batch(target, x, y, fwd.decks)
    bwd = ens.copy()
    quantum = make_flow("U", -dt).mat
    for j in range(1, n_steps + 1):
        bwd.step(quantum)
        x, y = bwd.positions()
        hits[:, n_steps - j] = _target_batch(target, x, y, bwd.decks)

    return [
        ReturnSet(
            window=(-Tmax, Tmax),
            intervals=_bools_to_intervals(times, hits[i]),
            resolution=dt,
        )
        for i in range(n)
    ]


@dataclass(frozen=True)
class ThickCheck:
    passed: bool
    first_fail: float | None
    K: float
    t_range: tuple[float, float]


def k_thick_check(rs: ReturnSet, K: float, t_min: float | None = None) -> ThickCheck:
    """Does the return set meet [-Kt, -t] u [t, Kt] for every scanned t?

    Exact on the interval representation: the windows hitting interval [a, b]
    on the positive side are t in [a/K, b]; the union of those ranges must
    cover [t_min, Tmax/K]. Reports the first uncovered t on failure.
    """
    if K <= 1:
        raise ValueError("K must exceed 1")
    t_lo = rs.resolution if t_min is None else t_min
    t_hi = rs.window[1] / K
    if t_hi <= t_lo:
        raise ValueError("window too short for this K at the given resolution")

    ranges = []
    for a, b in rs.intervals:
        if b > 0:  # positive side
            ranges.append((max(a, 0.0) / K, b))
        if a < 0:  # negative side, reflected
            ranges.append((max(-b, 0.0) / K, -a))
    ranges.sort()
    covered_to = t_lo
    for lo, hi in ranges:
        if lo > covered_to:
            break
        covered_to = max(covered_to, hi)
    if covered_to >= t_hi:
        return ThickCheck(passed=True, first_fail=None, K=K, t_range=(t_lo, t_hi))
    return ThickCheck(passed=False, first_fail=float(covered_to), K=K, t_range=(t_lo, t_hi))


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


@dataclass
class CltReport:
    T_grid: list
    means: np.ndarray  # (len(T_grid), d)
    variances: np.ndarray  # (len(T_grid),) total variance (trace of cov)
    slope: float
    intercept: float
    r_squared: float
    mean_over_T_final: float
    lil_running: np.ndarray = field(default=None)
    decks_final: np.ndarray = field(default=None)


def clt_experiment(
    n_starts: int,
    T_grid,
    seed: int,
    spec: FuchsianSpec,
    char: Character,
    step: float = GEODESIC_STEP,
) -> CltReport:
    """Deck statistics of the geodesic flow over an ensemble of starts.

    Fits Var(total deck displacement) against T and reports the fit quality;
    the law-of-iterated-logarithm running statistic is reported, not asserted.
    """
    rng = np.random.default_rng(seed)
    ens = random_starts(n_starts, rng, spec, char)
    ens.decks[:] = 0
    T_grid = sorted(float(T) for T in T_grid)
    n_steps = int(round(T_grid[-1] / step))
    grid_steps = {int(round(T / step)): T for T in T_grid}
    quantum = make_flow("A", step).mat

    means, variances, lil = [], [], []
    for j in range(1, n_steps + 1):
        ens.step(quantum)
        if j in grid_steps:
            d = ens.decks.astype(float)
            means.append(d.mean(axis=0))
            variances.append(d.var(axis=0).sum())
            t = grid_steps[j]
            if t > math.e:
                lil.append(
                    float(np.abs(d).max() / math.sqrt(t * math.log(math.log(t))))
                )
    T = np.array(T_grid)
    V = np.array(variances)
    A = np.vstack([T, np.ones_like(T)]).T
    (slope, intercept), res, *_ = np.linalg.lstsq(A, V, rcond=None)
    ss_tot = float(((V - V.mean()) ** 2).sum())
    ss_res = float(res[0]) if len(res) else float(((V - A @ [slope, intercept]) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    mean_final = float(np.linalg.norm(np.array(means[-1]))) / T_grid[-1]
    return CltReport(
        T_grid=T_grid,
        means=np.array(means),
        variances=V,
        slope=float(slope),
        intercept=float(intercept),
        r_squared=float(r2),
        mean_over_T_final=mean_final,
        lil_running=np.array(lil),
        decks_final=ens.decks.copy(),
    )


@dataclass
class ThickReport:
    Tmax: float
    dt: float
    K_ladder: list
    smallest_K: list  # per-sample smallest passing K (None if none pass)
    pass_fraction: float
    nonempty_fraction: float


def thick_experiment(
    n_samples: int,
    Tmax: float,
    dt: float,
    seed: int,
    spec: FuchsianSpec,
    char: Character,
    K_ladder=(2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0),
    target=None,
) -> ThickReport:
    """Fraction of sampled return sets that are K-thick for some ladder K."""
    rng = np.random.default_rng(seed)
    ens = random_starts(n_samples, rng, spec, char)
    if target is None:
        target = CompactTarget(spec)
    sets = return_sets_batch(ens, target, Tmax, dt)
    smallest = []
    for rs in sets:
        got = None
        for K in K_ladder:
            if k_thick_check(rs, K).passed:
                got = K
                break
        smallest.append(got)
    n_pass = sum(1 for k in smallest if k is not None)
    nonempty = sum(1 for rs in sets if rs.intervals) / len(sets)
    return ThickReport(
        Tmax=Tmax,
        dt=dt,
        K_ladder=list(K_ladder),
        smallest_K=smallest,
        pass_fraction=n_pass / len(sets),
        nonempty_fraction=nonempty,
    )
