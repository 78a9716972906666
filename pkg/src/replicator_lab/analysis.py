"""Analytic instruments for trajectories and fields.

This layer turns simulations into claims:

- divergence series and growth slopes quantifying how fast a dominated
  strategy's share collapses,
- the closed-form erfc lower bound on extinction probabilities, plus
  its rate-adjusted variant,
- the infinitesimal generator ``L`` applied to scalar test functions,
  with a Monte Carlo consistency probe,
- Lyapunov certificates (``Lf <= -k f`` sampled near an equilibrium)
  for three test-function families,
- adjusted coordinates splitting a profile into closeness-to-vertex and
  a direction on the opposite face,
- Monte Carlo probing of stochastic asymptotic stability, and
- ensemble extinction reports combining all of the above.

Scalar fields evaluate on ambient coordinates (no simplex constraint is
assumed), so finite-difference derivatives and one-step Euler clouds are
well defined; generator values are chart-independent because drift and
diffusion are tangent to the simplex.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import erfc as _erfc

from .games import (
    GameDef,
    MixedProfile,
    EliminationTrace,
    find_dominator,
    is_strict_equilibrium,
    kl_divergence,
    PotentialFn,
)
from .dynamics import (
    CONSTANT,
    DynamicsSpec,
    RATE_ADJUSTED_VARIANTS,
    eval_field,
)
from .engine import (
    SimConfig,
    StatSummary,
    Trajectory,
    simulate_deterministic,
    simulate_simplex,
    _simulate_scores_batch,
)

#: Step for finite-difference derivative fallbacks.
FD_STEP = 1e-5

#: Two-sided 95% normal quantile, used by Wilson intervals.
_Z95 = 1.959963984540054


# -- scalar test functions ----------------------------------------------------

class ScalarField:
    """A twice-differentiable scalar function of a profile.

    ``value`` must accept one ambient vector per player.  ``gradient``
    and ``hessian_block`` may return None, in which case central finite
    differences with step :data:`FD_STEP` are used.  Only within-player
    Hessian blocks are ever needed: players' noise streams are
    independent, so the generator touches no cross-player second
    derivatives.
    """

    name = "custom"

    def params(self) -> dict:
        return {}

    def value(self, points: Sequence[np.ndarray]) -> float:
        raise NotImplementedError

    def batch_value(self, stacked: Sequence[np.ndarray]) -> np.ndarray:
        n = stacked[0].shape[0]
        return np.array([self.value([s[k] for s in stacked]) for k in range(n)])

    def gradient(self, points: Sequence[np.ndarray]) -> tuple[np.ndarray, ...] | None:
        return None

    def hessian_block(self, points: Sequence[np.ndarray], player: int) -> np.ndarray | None:
        return None


def _fd_gradient(field: ScalarField, points: list[np.ndarray], step: float = FD_STEP) -> tuple[np.ndarray, ...]:
    grads = []
    for i, x in enumerate(points):
        g = np.empty(x.size)
        for a in range(x.size):
            hi = [p.copy() for p in points]
            lo = [p.copy() for p in points]
            hi[i][a] += step
            lo[i][a] -= step
            g[a] = (field.value(hi) - field.value(lo)) / (2.0 * step)
        grads.append(g)
    return tuple(grads)


def _fd_hessian_block(field: ScalarField, points: list[np.ndarray], player: int,
                      step: float = FD_STEP) -> np.ndarray:
    x = points[player]
    n = x.size
    h = np.empty((n, n))
    f0 = field.value(points)
    for a in range(n):
        for b in range(a, n):
            pp = [p.copy() for p in points]
            pm = [p.copy() for p in points]
            mp = [p.copy() for p in points]
            mm = [p.copy() for p in points]
            pp[player][a] += step; pp[player][b] += step
            pm[player][a] += step; pm[player][b] -= step
            mp[player][a] -= step; mp[player][b] += step
            mm[player][a] -= step; mm[player][b] -= step
            if a == b:
                hi = [p.copy() for p in points]
                lo = [p.copy() for p in points]
                hi[player][a] += step
                lo[player][a] -= step
                h[a, a] = (field.value(hi) - 2.0 * f0 + field.value(lo)) / step ** 2
            else:
                h[a, b] = h[b, a] = (
                    field.value(pp) - field.value(pm) - field.value(mp) + field.value(mm)
                ) / (4.0 * step ** 2)
    return h


@dataclass(frozen=True)
class CoordinateField(ScalarField):
    """f(x) = x_{player, strategy}."""

    player: int
    strategy: int
    name = "coordinate"

    def params(self) -> dict:
        return {"player": self.player, "strategy": self.strategy}

    def value(self, points):
        return float(points[self.player][self.strategy])

    def batch_value(self, stacked):
        return np.asarray(stacked[self.player][:, self.strategy], dtype=float)

    def gradient(self, points):
        out = []
        for i, x in enumerate(points):
            g = np.zeros(len(x))
            if i == self.player:
                g[self.strategy] = 1.0
            out.append(g)
        return tuple(out)

    def hessian_block(self, points, player):
        n = len(points[player])
        return np.zeros((n, n))


@dataclass(frozen=True, eq=False)
class LinearField(ScalarField):
    """f(x) = sum_i w_i . x_i for fixed weight vectors."""

    weights: tuple[np.ndarray, ...]
    name = "linear"

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(np.asarray(w, dtype=float) for w in self.weights))

    def params(self) -> dict:
        return {"weights": [w.tolist() for w in self.weights]}

    def value(self, points):
        return float(sum(w @ x for w, x in zip(self.weights, points)))

    def batch_value(self, stacked):
        return sum(s @ w for w, s in zip(self.weights, stacked))

    def gradient(self, points):
        return self.weights

    def hessian_block(self, points, player):
        n = len(points[player])
        return np.zeros((n, n))


@dataclass(frozen=True, eq=False)
class LinearCombinationField(ScalarField):
    """a*f + b*g + ...; derivatives combine term-wise when all terms have them."""

    terms: tuple[tuple[float, ScalarField], ...]
    name = "combination"

    def params(self) -> dict:
        return {"terms": [{"coef": c, "function": f.name, "params": f.params()} for c, f in self.terms]}

    def value(self, points):
        return float(sum(c * f.value(points) for c, f in self.terms))

    def batch_value(self, stacked):
        return sum(c * np.asarray(f.batch_value(stacked), dtype=float) for c, f in self.terms)

    def gradient(self, points):
        parts = [f.gradient(points) for _, f in self.terms]
        if any(p is None for p in parts):
            return None
        return tuple(
            sum(c * p[i] for (c, _), p in zip(self.terms, parts))
            for i in range(len(points))
        )

    def hessian_block(self, points, player):
        parts = [f.hessian_block(points, player) for _, f in self.terms]
        if any(p is None for p in parts):
            return None
        return sum(c * p for (c, _), p in zip(self.terms, parts))


def _batch_multilinear(values: np.ndarray, stacked: Sequence[np.ndarray]) -> np.ndarray:
    letters = "abcdefghijklmnop"
    n = values.ndim
    sub = letters[:n] + "," + ",".join(f"n{letters[j]}" for j in range(n)) + "->n"
    return np.einsum(sub, values, *stacked)


@dataclass(frozen=True, eq=False)
class PotentialField(ScalarField):
    """Multilinear extension of a potential, shifted by a constant offset."""

    potential: PotentialFn
    offset: float = 0.0
    name = "potential"

    def params(self) -> dict:
        return {"offset": self.offset}

    def value(self, points):
        return self.potential(tuple(points)) - self.offset

    def batch_value(self, stacked):
        return _batch_multilinear(self.potential.values, stacked) - self.offset

    def gradient(self, points):
        from .games import _contract

        vals = self.potential.values
        pts = [np.asarray(p, dtype=float) for p in points]
        return tuple(_contract(vals, pts, keep=i) for i in range(len(pts)))

    def hessian_block(self, points, player):
        # Multilinear in each player's own vector, so own-blocks vanish.
        n = len(points[player])
        return np.zeros((n, n))


@dataclass(frozen=True, eq=False)
class InverseYField(ScalarField):
    """f(x) = sum_i x_{i,anchor}^{-lam_i} * sum_{mu != anchor} x_{i,mu}^{lam_i}.

    Positive away from the anchor vertex, zero at it (in the simplex),
    and exploding toward any state where the anchor strategy dies out.
    """

    anchors: tuple[int, ...]
    lambdas: tuple[float, ...]
    name = "inverse_y"

    def __post_init__(self):
        lams = tuple(float(l) for l in self.lambdas)
        if any(l <= 0.0 for l in lams):
            raise ValueError("sensitivity parameters must be positive")
        object.__setattr__(self, "lambdas", lams)
        object.__setattr__(self, "anchors", tuple(int(a) for a in self.anchors))

    def params(self) -> dict:
        return {"anchors": list(self.anchors), "lambdas": list(self.lambdas)}

    def value(self, points):
        total = 0.0
        for x, a, lam in zip(points, self.anchors, self.lambdas):
            x = np.asarray(x, dtype=float)
            rest = np.delete(x, a)
            total += float(x[a] ** (-lam) * np.sum(rest ** lam))
        return total

    def batch_value(self, stacked):
        total = 0.0
        for s, a, lam in zip(stacked, self.anchors, self.lambdas):
            rest = np.delete(s, a, axis=1)
            total = total + s[:, a] ** (-lam) * np.sum(rest ** lam, axis=1)
        return total

    def gradient(self, points):
        out = []
        for x, a, lam in zip(points, self.anchors, self.lambdas):
            x = np.asarray(x, dtype=float)
            g = lam * x[a] ** (-lam) * x ** (lam - 1.0)
            rest = np.delete(x, a)
            g[a] = -lam * x[a] ** (-lam - 1.0) * float(np.sum(rest ** lam))
            out.append(g)
        return tuple(out)

    def hessian_block(self, points, player):
        x = np.asarray(points[player], dtype=float)
        a = self.anchors[player]
        lam = self.lambdas[player]
        rest_sum = float(np.sum(np.delete(x, a) ** lam))
        h = np.zeros((x.size, x.size))
        for m in range(x.size):
            if m == a:
                continue
            h[m, m] = lam * (lam - 1.0) * x[a] ** (-lam) * x[m] ** (lam - 2.0)
            cross = -(lam ** 2) * x[a] ** (-lam - 1.0) * x[m] ** (lam - 1.0)
            h[a, m] = h[m, a] = cross
        h[a, a] = lam * (lam + 1.0) * x[a] ** (-lam - 2.0) * rest_sum
        return h


@dataclass(frozen=True, eq=False)
class ExpLogitField(ScalarField):
    """f(x) = sum_i (x_{i,other} / x_{i,anchor})^{w_i} on dyadic profiles.

    In the log-odds chart y_i = log(x_{i,anchor}/x_{i,other}) this is
    sum_i exp(-w_i y_i), the standard family for two-strategy stability
    arguments.
    """

    anchors: tuple[int, ...]
    weights: tuple[float, ...]
    name = "exp_logit"

    def __post_init__(self):
        ws = tuple(float(w) for w in self.weights)
        if any(w <= 0.0 for w in ws):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "anchors", tuple(int(a) for a in self.anchors))

    def params(self) -> dict:
        return {"anchors": list(self.anchors), "weights": list(self.weights)}

    def _split(self, x, i):
        a = self.anchors[i]
        if len(x) != 2:
            raise ValueError("this test-function family needs two strategies per player")
        return x[a], x[1 - a]

    def value(self, points):
        total = 0.0
        for i, x in enumerate(points):
            xa, xo = self._split(np.asarray(x, dtype=float), i)
            total += float((xo / xa) ** self.weights[i])
        return total

    def batch_value(self, stacked):
        total = 0.0
        for i, s in enumerate(stacked):
            a = self.anchors[i]
            total = total + (s[:, 1 - a] / s[:, a]) ** self.weights[i]
        return total

    def gradient(self, points):
        out = []
        for i, x in enumerate(points):
            x = np.asarray(x, dtype=float)
            a = self.anchors[i]
            o = 1 - a
            w = self.weights[i]
            g = np.zeros(2)
            g[a] = -w * x[o] ** w * x[a] ** (-w - 1.0)
            g[o] = w * x[o] ** (w - 1.0) * x[a] ** (-w)
            out.append(g)
        return tuple(out)

    def hessian_block(self, points, player):
        x = np.asarray(points[player], dtype=float)
        a = self.anchors[player]
        o = 1 - a
        w = self.weights[player]
        h = np.zeros((2, 2))
        h[a, a] = w * (w + 1.0) * x[o] ** w * x[a] ** (-w - 2.0)
        h[o, o] = w * (w - 1.0) * x[o] ** (w - 2.0) * x[a] ** (-w)
        h[a, o] = h[o, a] = -(w ** 2) * x[o] ** (w - 1.0) * x[a] ** (-w - 1.0)
        return h


def field_from_json(obj: dict, game: GameDef) -> ScalarField:
    """Build a test function from its JSON description.

    Names: ``coordinate`` (player, strategy), ``linear`` (weights),
    ``inverse_y`` (anchors, lambdas), ``exp_logit`` (anchors, weights),
    ``potential`` (congestion games; optional offset).
    """
    if not isinstance(obj, dict) or "name" not in obj:
        raise ValueError("a test function needs a 'name' field")
    name = obj["name"]
    if name == "coordinate":
        return CoordinateField(int(obj["player"]), int(obj["strategy"]))
    if name == "linear":
        return LinearField(tuple(np.asarray(w, dtype=float) for w in obj["weights"]))
    if name == "inverse_y":
        anchors = tuple(int(a) for a in obj["anchors"])
        lams = _normalize_per_player(obj.get("lambdas", 1.0), game.num_players, "lambdas")
        return InverseYField(anchors=anchors, lambdas=lams)
    if name == "exp_logit":
        anchors = tuple(int(a) for a in obj["anchors"])
        ws = _normalize_per_player(obj.get("weights", 1.0), game.num_players, "weights")
        return ExpLogitField(anchors=anchors, weights=ws)
    if name == "potential":
        from .games import rosenthal_potential

        pot = rosenthal_potential(game)
        return PotentialField(potential=pot, offset=float(obj.get("offset", 0.0)))
    raise ValueError(f"unknown test function {name!r}")


def kl_series_to_csv(times: np.ndarray, values: np.ndarray) -> str:
    """Two-column CSV of a divergence series (header ``t,kl``)."""
    lines = ["t,kl"]
    for t, v in zip(times, values):
        lines.append(f"{float(t)!r},{float(v)!r}")
    return "\n".join(lines) + "\n"


# -- the generator ------------------------------------------------------------

def apply_generator(spec: DynamicsSpec, game: GameDef, field: ScalarField, state: MixedProfile) -> float:
    """L f(x) = sum_i b_i . grad_i f + 1/2 sum_i tr[(sigma_i sigma_i^T) H_i f].

    Uses the field's analytic derivatives when present, central finite
    differences otherwise.
    """
    tangent = eval_field(spec, game, state)
    points = [np.asarray(p, dtype=float) for p in state.points]
    grads = field.gradient(points)
    if grads is None:
        grads = _fd_gradient(field, points)
    total = 0.0
    for i, x in enumerate(points):
        total += float(tangent.drift[i] @ grads[i])
        sigma = tangent.diffusion[i]
        if sigma.any():
            h = field.hessian_block(points, i)
            if h is None:
                h = _fd_hessian_block(field, points, i)
            total += 0.5 * float(np.sum((sigma @ sigma.T) * h))
    return total


@dataclass(frozen=True, eq=False)
class GeneratorProbe:
    """Analytic generator value versus a one-step Monte Carlo drift estimate."""

    point: tuple[np.ndarray, ...]
    fn_name: str
    fn_params: dict
    analytic: float
    empirical: float
    h: float
    n_runs: int
    stderr: float

    @property
    def z_score(self) -> float:
        return (self.empirical - self.analytic) / self.stderr if self.stderr > 0 else float("inf")

    def to_json(self) -> dict:
        return {
            "point": [p.tolist() for p in self.point],
            "function": self.fn_name,
            "params": self.fn_params,
            "analytic": self.analytic,
            "empirical": self.empirical,
            "h": self.h,
            "runs": self.n_runs,
            "stderr": self.stderr,
        }


def generator_consistency_probe(spec: DynamicsSpec, game: GameDef, field: ScalarField,
                                state: MixedProfile, h: float = 1e-3, n_runs: int = 10_000,
                                seed: int = 0) -> GeneratorProbe:
    """Check ``Lf`` against the drift of ``f`` over one Euler step of size h.

    Draws ``n_runs`` unprojected one-step states ``X = x + h b + sqrt(h)
    sigma xi`` and compares ``(mean f(X) - f(x)) / h`` with the analytic
    generator value.  Requires an interior base point and h <= 1e-2 so
    the cloud stays in the fields' domain.
    """
    if not 0.0 < h <= 1e-2:
        raise ValueError("step h must lie in (0, 1e-2]")
    if not state.is_interior():
        raise ValueError("the probe needs an interior base point")
    if n_runs < 2:
        raise ValueError("need at least two samples for a standard error")
    tangent = eval_field(spec, game, state)
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    stacked = []
    for i, x in enumerate(state.points):
        xi = gen.standard_normal((n_runs, x.size))
        stacked.append(x[None, :] + h * tangent.drift[i][None, :] + np.sqrt(h) * xi @ tangent.diffusion[i].T)
    f0 = field.value(list(state.points))
    fx = np.asarray(field.batch_value(stacked), dtype=float)
    if not np.all(np.isfinite(fx)):
        raise ValueError("test function produced non-finite values on the sample cloud")
    empirical = (float(fx.mean()) - f0) / h
    stderr = float(fx.std(ddof=1)) / (h * math.sqrt(n_runs))
    analytic = apply_generator(spec, game, field, state)
    return GeneratorProbe(
        point=tuple(state.points),
        fn_name=field.name,
        fn_params=field.params(),
        analytic=float(analytic),
        empirical=empirical,
        h=float(h),
        n_runs=int(n_runs),
        stderr=stderr,
    )


# -- erfc extinction bound ----------------------------------------------------

@dataclass(frozen=True)
class ErfcBound:
    """Lower bound on P{share < exp(-threshold)} at a fixed time.

    ``valid`` marks whether the queried time lies beyond the threshold
    time where the bound's derivation applies; the numeric value is
    returned either way.
    """

    value: float
    valid: bool
    threshold_time: float

    def to_json(self) -> dict:
        return {"value": self.value, "valid": self.valid, "threshold_time": self.threshold_time}


def erfc_bound(threshold: float, offset: float, margin: float, noise_bound: float,
               num_strategies: int, t: float) -> ErfcBound:
    """The closed-form extinction bound 1/2 erfc((M - h - v t)/(2 eta sqrt(S t))).

    ``threshold`` is M (share compared against e^-M), ``offset`` is the
    initial log-share handicap h, ``margin`` is the dominance payoff gap
    v > 0, ``noise_bound`` a uniform bound eta > 0 on the noise
    intensity, ``num_strategies`` the player's strategy count S.
    """
    return rate_adjusted_erfc_bound(threshold, offset, margin, noise_bound, num_strategies, 1.0, t)


def rate_adjusted_erfc_bound(threshold: float, offset: float, margin: float, noise_bound: float,
                             num_strategies: int, rate: float, t: float) -> ErfcBound:
    """Extinction bound with learning rate: argument (M - h - lam v t)/(2 lam eta sqrt(S t)).

    Reduces to :func:`erfc_bound` at rate 1.  As the rate grows the
    argument tends to -sqrt(t/S) v/(2 eta), independent of M and h.
    """
    if t <= 0.0:
        raise ValueError("the bound is defined for positive times")
    if noise_bound <= 0.0:
        raise ValueError("the bound needs a positive noise intensity; a noiseless run hits the threshold deterministically")
    if num_strategies < 1:
        raise ValueError("num_strategies must be at least 1")
    if margin <= 0.0:
        raise ValueError("the dominance margin must be positive")
    if rate <= 0.0:
        raise ValueError("the learning rate must be positive")
    m, h, v, eta, s, lam = map(float, (threshold, offset, margin, noise_bound, num_strategies, rate))
    threshold_time = max(0.0, (m - h) / (lam * v))
    arg = (m - h - lam * v * t) / (2.0 * lam * eta * math.sqrt(s * t))
    return ErfcBound(value=0.5 * float(_erfc(arg)), valid=t > threshold_time, threshold_time=threshold_time)


def dominance_offset(point: np.ndarray, strategy: int, dominator: np.ndarray) -> float:
    """Initial handicap h = log x_a - sum_b y_b log x_b of the dominated share."""
    x = np.asarray(point, dtype=float)
    y = np.asarray(dominator, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("the offset needs an interior point")
    logs = np.log(x)
    return float(logs[strategy] - y @ logs)


# -- trajectory statistics ----------------------------------------------------

def kl_series(traj: Trajectory, player: int, reference) -> np.ndarray:
    """Divergence of the recorded states of one player from a reference mix.

    Vertex references reduce to -log of the share, computed vectorized;
    +inf entries appear whenever the trajectory leaves the reference's
    support.
    """
    block = traj.states[player]
    q = np.asarray(reference, dtype=float)
    if q.shape != (block.shape[1],):
        raise ValueError("reference length does not match the player's strategy count")
    support = q > 0.0
    if support.sum() == 1:
        a = int(np.argmax(support))
        with np.errstate(divide="ignore"):
            return -np.log(block[:, a])
    return np.array([kl_divergence(q, block[k]) for k in range(block.shape[0])])


def kl_growth_slope(times: np.ndarray, values: np.ndarray,
                    window: tuple[float, float] | None = None) -> tuple[float, float]:
    """Least-squares (slope, intercept) of a divergence series over a window.

    The window defaults to the last half of the horizon; entries that are
    infinite (support escapes) are skipped.  Fewer than two finite points
    in the window is an error.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape:
        raise ValueError("times and values must have equal length")
    if window is None:
        window = (t[-1] / 2.0, t[-1])
    lo, hi = float(window[0]), float(window[1])
    mask = (t >= lo) & (t <= hi) & np.isfinite(y)
    if mask.sum() < 2:
        raise ValueError("need at least two finite points in the fit window")
    slope, intercept = np.polyfit(t[mask], y[mask], 1)
    return float(slope), float(intercept)


def potential_along(traj: Trajectory, potential: PotentialFn) -> np.ndarray:
    """Potential evaluated at every recorded state (multilinear extension)."""
    return _batch_multilinear(potential.values, traj.states)


@dataclass(frozen=True)
class PotentialConditionReport:
    """Noise-versus-depth inequality for every unilateral deviation.

    Entry (i, mu) is True when the potential gap of deviating to mu
    exceeds (rate_i / 2) * (c_{i,mu}^2 + c_{i,q_i}^2).  All-true is the
    sufficient condition for the equilibrium to survive the given noise.
    """

    equilibrium: tuple[int, ...]
    table: tuple[dict[int, bool], ...]
    gaps: tuple[dict[int, float], ...]
    thresholds: tuple[dict[int, float], ...]

    @property
    def holds(self) -> bool:
        return all(all(row.values()) for row in self.table if row)

    def to_json(self) -> dict:
        return {
            "equilibrium": list(self.equilibrium),
            "holds": self.holds,
            "players": [
                {
                    str(mu): {"ok": row[mu], "gap": g[mu], "threshold": th[mu]}
                    for mu in sorted(row)
                }
                for row, g, th in zip(self.table, self.gaps, self.thresholds)
            ],
        }


def check_potential_condition(game: GameDef, potential: PotentialFn, equilibrium: Sequence[int],
                              spec: DynamicsSpec) -> PotentialConditionReport:
    """Evaluate the potential-depth vs noise condition at a strict equilibrium.

    The potential is normalized to vanish at the equilibrium; each
    deviation must then climb by more than (rate/2) times the summed
    squared noise coefficients of the two strategies involved.  Constant
    noise only: the inequality compares against fixed coefficients.
    """
    if spec.noise.kind != CONSTANT:
        raise ValueError("the condition is stated for constant noise intensities")
    q = tuple(int(a) for a in equilibrium)
    if not is_strict_equilibrium(game, q):
        raise ValueError(f"{q} is not a strict equilibrium of the game")
    rates = spec.rates
    v0 = potential.at_pure(q)
    table, gaps, thresholds = [], [], []
    for i in range(game.num_players):
        row_ok: dict[int, bool] = {}
        row_gap: dict[int, float] = {}
        row_thr: dict[int, float] = {}
        c = spec.noise.coefficients[i]
        for mu in range(game.strategy_counts[i]):
            if mu == q[i]:
                continue
            dev = q[:i] + (mu,) + q[i + 1:]
            gap = potential.at_pure(dev) - v0
            thr = 0.5 * rates[i] * float(c[mu] ** 2 + c[q[i]] ** 2)
            row_ok[mu] = bool(gap > thr)
            row_gap[mu] = float(gap)
            row_thr[mu] = thr
        table.append(row_ok)
        gaps.append(row_gap)
        thresholds.append(row_thr)
    return PotentialConditionReport(
        equilibrium=q, table=tuple(table), gaps=tuple(gaps), thresholds=tuple(thresholds)
    )


# -- adjusted coordinates -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class AdjustedCoords:
    """Per player: closeness ratio to the anchor vertex plus a face direction.

    ``anchor_mass[i]`` is x_{i,anchor}^lam / sum_{mu != anchor} x_{i,mu}^lam,
    in (0, inf) and exploding as the anchor takes over.  ``directions[i]``
    is the normalized profile of the non-anchor strategies (length S_i - 1,
    sums to one).
    """

    anchor_mass: tuple[float, ...]
    directions: tuple[np.ndarray, ...]
    anchors: tuple[int, ...]
    rates: tuple[float, ...]

    def __post_init__(self):
        dirs = []
        for i, d in enumerate(self.directions):
            d = np.asarray(d, dtype=float)
            if np.any(d < 0.0) or abs(float(d.sum()) - 1.0) > 1e-12:
                raise ValueError(f"player {i} direction is not on the face simplex")
            dirs.append(d)
        if any(m <= 0.0 or not np.isfinite(m) for m in self.anchor_mass):
            raise ValueError("anchor mass ratios must be positive and finite")
        object.__setattr__(self, "directions", tuple(dirs))


def adjusted_coords(state: MixedProfile, rates: Sequence[float], anchor: Sequence[int]) -> AdjustedCoords:
    """Split an interior profile into anchor-closeness and face direction.

    Per player, all coordinates are raised to the player's sensitivity
    rate; the non-anchor powers are normalized into a face distribution
    and the anchor's power is expressed relative to their sum.
    """
    anchors = tuple(int(a) for a in anchor)
    lams = tuple(float(l) for l in rates)
    if len(anchors) != len(state) or len(lams) != len(state):
        raise ValueError("need one anchor and one rate per player")
    if any(l <= 0.0 for l in lams):
        raise ValueError("sensitivity rates must be positive")
    mass, dirs = [], []
    for x, a, lam in zip(state.points, anchors, lams):
        if x.size < 2:
            raise ValueError("adjusted coordinates need at least two strategies per player")
        if not 0 <= a < x.size:
            raise ValueError(f"anchor strategy {a} out of range")
        if np.any(x <= 0.0):
            raise ValueError("adjusted coordinates are defined on interior profiles only")
        powered = x ** lam
        rest = np.delete(powered, a)
        s = float(rest.sum())
        mass.append(float(powered[a]) / s)
        dirs.append(rest / s)
    return AdjustedCoords(anchor_mass=tuple(mass), directions=tuple(dirs), anchors=anchors, rates=lams)


def inverse_adjusted(coords: AdjustedCoords) -> MixedProfile:
    """Reconstruct the profile: invert the power map and renormalize."""
    points = []
    for m, d, a, lam in zip(coords.anchor_mass, coords.directions, coords.anchors, coords.rates):
        rest = np.asarray(d, dtype=float) ** (1.0 / lam)
        x = np.insert(rest, a, float(m) ** (1.0 / lam))
        points.append(x / x.sum())
    return MixedProfile(tuple(points))


# -- sampling near a vertex ---------------------------------------------------

def sample_near_vertex(gen: np.random.Generator, strategy_counts: Sequence[int],
                       anchor: Sequence[int], radius: float) -> MixedProfile:
    """One interior profile with total variation from the vertex at most radius.

    The l1 distance from the vertex splits across players as twice each
    player's deficit; the budget is spread by a Dirichlet draw over the
    players (those with a single strategy get none) and each deficit is
    spread over the player's other strategies by another Dirichlet draw.
    """
    counts = tuple(int(s) for s in strategy_counts)
    anchors = tuple(int(a) for a in anchor)
    if not 0.0 < radius <= 2.0 * len(counts):
        raise ValueError("radius must be positive (and no larger than the simplex diameter)")
    eligible = [i for i, s in enumerate(counts) if s >= 2]
    if not eligible:
        raise ValueError("every player has a single strategy; there is no neighborhood to sample")
    u = gen.uniform(1e-9, 1.0)
    weights = gen.dirichlet(np.ones(len(eligible)))
    points = []
    for i, s in enumerate(counts):
        if s < 2:
            points.append(np.ones(1))
            continue
        eps = 0.5 * radius * u * weights[eligible.index(i)]
        eps = min(eps, 0.5)  # keep the anchor share at least 1/2
        face = gen.dirichlet(np.ones(s - 1))
        x = np.insert(eps * np.clip(face, 1e-12, None), anchors[i], 1.0 - eps)
        points.append(x / x.sum())
    return MixedProfile(tuple(points))


def l1_vertex_distance(states: Sequence[np.ndarray], anchor: Sequence[int]) -> np.ndarray:
    """l1 distance of each recorded profile from a vertex, over the whole grid."""
    total = 0.0
    for i, block in enumerate(states):
        e = np.zeros(block.shape[1])
        e[int(anchor[i])] = 1.0
        total = total + np.abs(block - e[None, :]).sum(axis=1)
    return total


# -- Lyapunov certificates ----------------------------------------------------

LYAPUNOV_FAMILIES = ("inverse_y", "exp_logit", "potential")


@dataclass(frozen=True, eq=False)
class LyapunovReport:
    """Result of sampling Lf <= -k f near an equilibrium.

    ``decay_rate`` is the largest k that holds across every sample
    (the minimum of -Lf/f); the certificate stands when it is positive
    and no sample had nonpositive f.
    """

    family: str
    equilibrium: tuple[int, ...]
    params: dict
    n_samples: int
    radius: float
    decay_rate: float
    violations: tuple[tuple[tuple[float, ...], ...], ...]

    @property
    def holds(self) -> bool:
        return self.decay_rate > 0.0 and not self.violations

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "equilibrium": list(self.equilibrium),
            "params": self.params,
            "samples": self.n_samples,
            "radius": self.radius,
            "decay_rate": self.decay_rate,
            "holds": self.holds,
            "violations": [[list(p) for p in pt] for pt in self.violations],
        }


def _normalize_per_player(value, n_players: int, what: str) -> tuple[float, ...]:
    if np.isscalar(value):
        return tuple(float(value) for _ in range(n_players))
    vals = tuple(float(v) for v in value)
    if len(vals) != n_players:
        raise ValueError(f"{what} needs one entry per player")
    return vals


def lyapunov_certificate(spec: DynamicsSpec, game: GameDef, equilibrium: Sequence[int],
                         family: str, params: dict | None = None, n_samples: int = 1000,
                         radius: float = 0.1, seed: int = 0) -> LyapunovReport:
    """Sample a candidate Lyapunov function's decay rate near a strict equilibrium.

    Families: ``inverse_y`` (power-ratio candidate, parameter ``lambdas``),
    ``exp_logit`` (dyadic log-odds exponential, parameter ``weights``),
    ``potential`` (potential gap; the game must carry a congestion
    structure unless a ``potential`` is passed).  Reports the largest k
    with Lf <= -k f over ``n_samples`` interior points within l1 radius
    of the equilibrium vertex, along with any violating points (f <= 0
    or Lf >= 0).
    """
    q = tuple(int(a) for a in equilibrium)
    if not is_strict_equilibrium(game, q):
        raise ValueError(f"{q} is not a strict equilibrium of the game")
    if spec.is_single_population:
        raise ValueError("certificates are stated for the multi-population variants")
    params = dict(params or {})
    n_players = game.num_players

    if family == "inverse_y":
        lams = _normalize_per_player(params.pop("lambdas", 1.0), n_players, "lambdas")
        field: ScalarField = InverseYField(anchors=q, lambdas=lams)
        used = {"lambdas": list(lams)}
    elif family == "exp_logit":
        if any(s != 2 for s in game.strategy_counts):
            raise ValueError("the exp_logit family needs two strategies per player")
        ws = _normalize_per_player(params.pop("weights", 1.0), n_players, "weights")
        field = ExpLogitField(anchors=q, weights=ws)
        used = {"weights": list(ws)}
    elif family == "potential":
        potential = params.pop("potential", None)
        if potential is None:
            from .games import rosenthal_potential

            potential = rosenthal_potential(game)
        field = PotentialField(potential=potential, offset=potential.at_pure(q))
        used = {"offset": potential.at_pure(q)}
    else:
        raise ValueError(f"unknown family {family!r}; expected one of {LYAPUNOV_FAMILIES}")
    if params:
        raise ValueError(f"unused parameters for family {family}: {sorted(params)}")
    if n_samples < 1:
        raise ValueError("need at least one sample")

    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    worst = math.inf
    violations: list[tuple[tuple[float, ...], ...]] = []
    for _ in range(n_samples):
        x = sample_near_vertex(gen, game.strategy_counts, q, radius)
        fval = field.value(list(x.points))
        lval = apply_generator(spec, game, field, x)
        if fval <= 0.0 or not np.isfinite(fval):
            ratio = -math.inf
        else:
            ratio = -lval / fval
        if ratio <= 0.0 and len(violations) < 10:
            violations.append(tuple(tuple(float(v) for v in p) for p in x.points))
        worst = min(worst, ratio)
    return LyapunovReport(
        family=family,
        equilibrium=q,
        params=used,
        n_samples=int(n_samples),
        radius=float(radius),
        decay_rate=float(worst),
        violations=tuple(violations),
    )


# -- stability probe ----------------------------------------------------------

def wilson_interval(count: int, n: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n < 1 or not 0 <= count <= n:
        raise ValueError("need 0 <= count <= n with n >= 1")
    phat = count / n
    denom = 1.0 + z ** 2 / n
    center = (phat + z ** 2 / (2 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z ** 2 / (4 * n ** 2)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class StabilityEstimate:
    """Monte Carlo estimate of staying near, and converging to, a vertex."""

    equilibrium: tuple[int, ...]
    start_radius: float
    stay_radius: float
    tol: float
    runs: int
    stay_count: int
    estimate: float
    wilson_low: float
    wilson_high: float

    def to_json(self) -> dict:
        return {
            "equilibrium": list(self.equilibrium),
            "start_radius": self.start_radius,
            "stay_radius": self.stay_radius,
            "tol": self.tol,
            "runs": self.runs,
            "stay_count": self.stay_count,
            "estimate": self.estimate,
            "wilson": [self.wilson_low, self.wilson_high],
        }


def _probe_seed(master_seed: int, key: tuple[int, ...]) -> int:
    seq = np.random.SeedSequence(int(master_seed), spawn_key=key)
    return int(seq.generate_state(1, np.uint64)[0])


def stability_probe(spec: DynamicsSpec, game: GameDef, equilibrium: Sequence[int],
                    start_radius: float, stay_radius: float, tol: float,
                    horizon: float = 100.0, n_runs: int = 200, master_seed: int = 0,
                    dt: float = 1e-2, record_stride: int = 10) -> StabilityEstimate:
    """Estimate the probability of staying within ``stay_radius`` and converging.

    Each run starts from an independent interior sample at l1 distance at
    most ``start_radius`` from the equilibrium vertex; it counts as stable
    when every recorded state stays within ``stay_radius`` (l1) and the
    terminal state is within ``tol``.  Returns the fraction with its
    Wilson 95% interval.

    Start sampling and path noise use separate child streams of the
    master seed, so the same master seed reproduces the estimate exactly.
    """
    q = tuple(int(a) for a in equilibrium)
    if spec.is_single_population:
        raise ValueError("the stability probe is stated for the multi-population variants")
    if not is_strict_equilibrium(game, q):
        raise ValueError(f"{q} is not a strict equilibrium of the game")
    if not 0.0 < start_radius < stay_radius:
        raise ValueError("need 0 < start_radius < stay_radius")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if n_runs < 1:
        raise ValueError("need at least one run")

    start_gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(master_seed), spawn_key=(1,))))
    starts = [sample_near_vertex(start_gen, game.strategy_counts, q, start_radius) for _ in range(n_runs)]
    path_seeds = [_probe_seed(master_seed, (2, k)) for k in range(n_runs)]
    cfg = SimConfig(horizon=horizon, dt=dt, integrator="score_space",
                    record_stride=record_stride, seed=0)

    if spec.variant in ("SRD", "SLRD"):
        trajectories = _simulate_scores_batch(spec, game, starts, cfg, path_seeds)
    elif spec.variant in ("RD", "LRD"):
        det_cfg = dataclasses.replace(cfg, integrator="deterministic_rk4")
        trajectories = [
            simulate_deterministic(spec, game, s, dataclasses.replace(det_cfg, seed=sd))
            for s, sd in zip(starts, path_seeds)
        ]
    elif spec.variant == "ASRD":
        sim_cfg = dataclasses.replace(cfg, integrator="simplex_space")
        trajectories = [
            simulate_simplex(spec, game, s, dataclasses.replace(sim_cfg, seed=sd))
            for s, sd in zip(starts, path_seeds)
        ]
    else:  # pragma: no cover - single-population rejected above
        raise AssertionError(spec.variant)

    stay = 0
    for tr in trajectories:
        dist = l1_vertex_distance(tr.states, q)
        if float(dist.max()) <= stay_radius and float(dist[-1]) <= tol:
            stay += 1
    low, high = wilson_interval(stay, n_runs)
    return StabilityEstimate(
        equilibrium=q,
        start_radius=float(start_radius),
        stay_radius=float(stay_radius),
        tol=float(tol),
        runs=int(n_runs),
        stay_count=int(stay),
        estimate=stay / n_runs,
        wilson_low=low,
        wilson_high=high,
    )


# -- extinction reports -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StrategyExtinction:
    """Extinction evidence for one pure strategy across an ensemble."""

    player: int
    strategy: int
    threshold: float
    guaranteed: bool
    dominator: np.ndarray | None
    margin: float | None
    offset: float | None
    passed_fraction: float
    mean_first_passage: float | None
    terminal_mass: StatSummary
    kl_slope: StatSummary | None
    kl_times: np.ndarray
    kl_values: np.ndarray
    empirical_probability: float
    binomial_stderr: float
    bound: ErfcBound | None
    satisfied: bool | None

    def to_json(self) -> dict:
        return {
            "player": self.player,
            "strategy": self.strategy,
            "threshold": self.threshold,
            "guaranteed": self.guaranteed,
            "dominator": None if self.dominator is None else self.dominator.tolist(),
            "margin": self.margin,
            "offset": self.offset,
            "first_passage": {
                "fraction": self.passed_fraction,
                "mean_time": self.mean_first_passage,
            },
            "terminal_mass": {"mean": self.terminal_mass.mean, "stderr": self.terminal_mass.stderr},
            "kl_slope": None if self.kl_slope is None else
                {"mean": self.kl_slope.mean, "stderr": self.kl_slope.stderr},
            "empirical_probability": self.empirical_probability,
            "binomial_stderr": self.binomial_stderr,
            "bound": None if self.bound is None else self.bound.to_json(),
            "satisfied": self.satisfied,
        }


@dataclass(frozen=True, eq=False)
class ExtinctionReport:
    """Per-strategy extinction statistics for an ensemble of trajectories."""

    threshold_exponent: float
    horizon: float
    runs: int
    entries: tuple[StrategyExtinction, ...]

    @property
    def all_satisfied(self) -> bool:
        checked = [e.satisfied for e in self.entries if e.satisfied is not None]
        return bool(checked) and all(checked)

    def to_json(self) -> dict:
        return {
            "threshold_exponent": self.threshold_exponent,
            "horizon": self.horizon,
            "runs": self.runs,
            "strategies": [e.to_json() for e in self.entries],
        }


def _noiseless_bound(threshold: float, offset: float, margin: float, t: float) -> ErfcBound:
    # eta -> 0 limit: a step at the threshold time.
    threshold_time = max(0.0, (threshold - offset) / margin)
    return ErfcBound(value=1.0 if t > threshold_time else 0.0,
                     valid=t > threshold_time, threshold_time=threshold_time)


def extinction_report(spec: DynamicsSpec, game: GameDef, trajectories: Sequence[Trajectory],
                      dominated, threshold_exponent: float = 3.0) -> ExtinctionReport:
    """Measure extinction of the given pure strategies over an ensemble.

    ``dominated`` is either an :class:`EliminationTrace` (every strategy it
    removed is analyzed, with the supports live at its removal round) or
    an explicit list of ``(player, strategy)`` pairs (full supports).  For
    each strategy the report carries first-passage statistics below
    ``exp(-threshold_exponent)``, terminal masses, divergence slopes, the
    empirical terminal extinction probability, and the erfc lower bound
    built from the strategy's dominator; strategies with no dominator are
    flagged as carrying no theoretical guarantee.  The bound's initial
    offset is taken from the first trajectory's start (ensembles produced
    by this package share their start).
    """
    if not trajectories:
        raise ValueError("need at least one trajectory")
    m = float(threshold_exponent)
    if m <= 0.0:
        raise ValueError("the threshold exponent must be positive")
    if isinstance(dominated, EliminationTrace):
        targets = dominated.removed_with_context()
    else:
        full = tuple(tuple(range(s)) for s in game.strategy_counts)
        targets = [(int(i), int(a), full) for i, a in dominated]
    if not targets:
        raise ValueError("no dominated strategies to analyze")

    horizon = float(trajectories[0].times[-1])
    n = len(trajectories)
    threshold = math.exp(-m)
    rate_adjusted = spec.variant in RATE_ADJUSTED_VARIANTS
    entries = []
    for player, strategy, supports in targets:
        e_a = np.zeros(game.strategy_counts[player])
        e_a[strategy] = 1.0
        dominator = find_dominator(game, player, e_a, supports)
        margin = offset = None
        if dominator is not None:
            margin = _dominance_margin(game, player, strategy, dominator, supports)
            start = trajectories[0].initial().points[player]
            if np.all(start > 0.0):
                offset = dominance_offset(start, strategy, dominator)

        first_times = []
        terminal = []
        slopes = []
        below_at_t = 0
        for tr in trajectories:
            shares = tr.states[player][:, strategy]
            below = shares < threshold
            if below.any():
                first_times.append(float(tr.times[int(np.argmax(below))]))
            terminal.append(float(shares[-1]))
            if shares[-1] < threshold:
                below_at_t += 1
            try:
                slope, _ = kl_growth_slope(tr.times, -_safe_log(shares))
                slopes.append(slope)
            except ValueError:
                pass
        p_hat = below_at_t / n
        stderr = math.sqrt(p_hat * (1.0 - p_hat) / n)

        bound = None
        satisfied = None
        if dominator is not None and offset is not None:
            eta = spec.noise.bounds()[player]
            lam = spec.rates[player] if rate_adjusted else 1.0
            if eta > 0.0:
                bound = rate_adjusted_erfc_bound(m, offset, margin, eta,
                                                 game.strategy_counts[player], lam, horizon)
            else:
                bound = _noiseless_bound(m, offset, lam * margin, horizon)
            if bound.valid:
                satisfied = bool(p_hat >= bound.value - 3.0 * stderr)

        rep = trajectories[0]
        entries.append(
            StrategyExtinction(
                player=player,
                strategy=strategy,
                threshold=threshold,
                guaranteed=dominator is not None,
                dominator=dominator,
                margin=margin,
                offset=offset,
                passed_fraction=len(first_times) / n,
                mean_first_passage=float(np.mean(first_times)) if first_times else None,
                terminal_mass=StatSummary.of(terminal),
                kl_slope=StatSummary.of(slopes) if slopes else None,
                kl_times=rep.times,
                kl_values=-_safe_log(rep.states[player][:, strategy]),
                empirical_probability=p_hat,
                binomial_stderr=stderr,
                bound=bound,
                satisfied=satisfied,
            )
        )
    return ExtinctionReport(threshold_exponent=m, horizon=horizon, runs=n, entries=tuple(entries))


def _safe_log(values: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(values)


def _dominance_margin(game: GameDef, player: int, strategy: int, dominator: np.ndarray,
                      supports) -> float:
    """Exact worst-case payoff gap of the dominator over the strategy.

    Minimum over the surviving pure opponent profiles; multilinearity
    makes this the margin against every mixed opponent behavior as well.
    """
    import itertools as _it

    diff = np.asarray(dominator, dtype=float)
    diff = diff.copy()
    diff[strategy] -= 1.0
    gap = np.tensordot(game.payoffs[player], diff, axes=(player, 0))
    opp = [tuple(supports[j]) for j in range(game.num_players) if j != player]
    best = math.inf
    for prof in _it.product(*opp):
        best = min(best, float(gap[prof]))
    return best
