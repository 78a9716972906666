"""Trajectory integrators and deterministic ensemble execution.

Four integrators cover the variants:

- ``score_space``: Euler-Maruyama on the cumulative score process, with
  strategies read off through the logit map.  This is the native
  discretization of exponential learning and the fastest path for SRD /
  SLRD ensembles; the whole ensemble is advanced as one batched kernel.
- ``simplex_space``: Euler-Maruyama directly on the simplex field of any
  stochastic variant, with a projection step guarding the boundary.
- ``deterministic_rk4``: classical Runge-Kutta for RD / LRD.
- ``discrete_learning``: the underlying discrete-round update with
  per-round payoff shocks (one unit of time per round).

Randomness policy: every run derives its Philox generator from a single
integer seed via ``SeedSequence``; ensemble member ``k`` uses the child
sequence ``spawn_key=(k,)`` of the master seed.  Repeating a call with
the same seed reproduces trajectories bit for bit.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import os
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .games import GameDef, MixedProfile
from .dynamics import (
    CONSTANT,
    DynamicsSpec,
    STOCHASTIC_VARIANTS,
    eval_field,
    logit_map,
)

INTEGRATORS = ("score_space", "simplex_space", "deterministic_rk4", "discrete_learning")

#: Environment variable read by :func:`run_ensemble` for its thread count.
THREADS_ENV = "REPLICATOR_LAB_THREADS"

_NOISE_CHUNK = 4096


class SimulationError(RuntimeError):
    """A trajectory left the representable regime (overflow / NaN)."""


@dataclass(frozen=True)
class SimConfig:
    """Integrator-independent run parameters.

    ``record_stride`` keeps every k-th step (plus the final step);
    ``record_scores`` additionally retains the raw score path on the
    score-space integrator.
    """

    horizon: float = 100.0
    dt: float = 1e-2
    integrator: str = "score_space"
    record_stride: int = 10
    seed: int = 0
    record_scores: bool = False

    def __post_init__(self):
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"unknown integrator {self.integrator!r}; expected one of {INTEGRATORS}")
        if not (np.isfinite(self.horizon) and np.isfinite(self.dt)):
            raise ValueError("horizon and dt must be finite")
        if self.dt <= 0.0 or self.horizon < self.dt:
            raise ValueError("need 0 < dt <= horizon")
        if int(self.record_stride) < 1:
            raise ValueError("record_stride must be at least 1")
        object.__setattr__(self, "record_stride", int(self.record_stride))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


def _record_indices(n_steps: int, stride: int) -> np.ndarray:
    idx = np.arange(0, n_steps + 1, stride)
    if idx[-1] != n_steps:
        idx = np.append(idx, n_steps)
    return idx


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded path of one run.

    ``states[i]`` has shape ``(n_recorded, S_i)``; ``times`` matches its
    first axis.  ``scores`` is populated only when requested from the
    score-space integrator.  ``projection_steps`` counts simplex-space
    steps that needed clamping back onto the simplex.
    """

    times: np.ndarray
    states: tuple[np.ndarray, ...]
    seed: int
    config_hash: str
    steps: int
    scores: tuple[np.ndarray, ...] | None = None
    projection_steps: int = 0

    def profile(self, k: int) -> MixedProfile:
        return MixedProfile(tuple(s[k] for s in self.states))

    def initial(self) -> MixedProfile:
        return self.profile(0)

    def terminal(self) -> MixedProfile:
        return self.profile(len(self.times) - 1)


def run_seed(master_seed: int, index: int) -> int:
    """Seed of ensemble member ``index`` under master ``master_seed``."""
    child = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return int(child.generate_state(1, np.uint64)[0])


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def _config_hash(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, np.ndarray):
            h.update(repr(p.shape).encode())
            h.update(np.ascontiguousarray(p).tobytes())
        elif isinstance(p, (tuple, list)):
            h.update(b"(")
            for q in p:
                h.update(_config_hash(q).encode())
            h.update(b")")
        else:
            h.update(repr(p).encode())
    return h.hexdigest()[:12]


def _spec_hash_parts(spec: DynamicsSpec, game: GameDef, cfg: SimConfig, extra=()) -> str:
    # The seed is deliberately excluded: ensemble members share one hash.
    return _config_hash(
        spec.variant,
        spec.rates,
        spec.noise.kind,
        list(spec.noise.coefficients),
        game.payoffs,
        cfg.horizon,
        cfg.dt,
        cfg.integrator,
        cfg.record_stride,
        *extra,
    )


def _initial_points(spec: DynamicsSpec, game: GameDef, initial: MixedProfile) -> tuple[np.ndarray, ...]:
    if spec.is_single_population:
        if len(initial) != 1:
            raise ValueError("single-population variants take a profile with exactly one point")
    else:
        initial.validate_for(game)
    return initial.points


# -- score-space kernel -------------------------------------------------------

def _score_payoff_closure(game: GameDef, single_population: bool):
    """Batched pure-payoff evaluator: tuple of (R, S_i) states -> same-shaped payoffs."""
    if single_population:
        a = game.payoffs[0]

        def eval_single(xs):
            return (xs[0] @ a.T,)

        return eval_single
    if game.num_players == 2:
        a, b = game.payoffs

        def eval_two(xs):
            return (xs[1] @ a.T, xs[0] @ b)

        return eval_two

    n = game.num_players
    letters = "abcdefghijklmnop"
    subs = []
    for i in range(n):
        others = "".join(letters[j] for j in range(n) if j != i)
        operands = ",".join(f"r{letters[j]}" for j in range(n) if j != i)
        subs.append(f"{letters[:n]},{operands}->r{letters[i]}")

    def eval_many(xs):
        return tuple(
            np.einsum(subs[i], game.payoffs[i], *(xs[j] for j in range(n) if j != i))
            for i in range(n)
        )

    return eval_many


def _simulate_scores_batch(
    spec: DynamicsSpec,
    game: GameDef,
    initial: "MixedProfile | Sequence[MixedProfile]",
    cfg: SimConfig,
    seeds: Sequence[int],
) -> list[Trajectory]:
    """Advance many runs of the score-space discretization in lockstep.

    ``initial`` is either one profile shared by every run or a sequence
    with one profile per run.  Scores are recentered every step, which
    leaves the logit map invariant and keeps exp() in range on long
    horizons.
    """
    if spec.variant not in STOCHASTIC_VARIANTS and not spec.noise.is_zero():
        raise ValueError(f"variant {spec.variant} is deterministic; use zero noise or another integrator")
    if spec.variant in ("ASRD", "ASRD1"):
        raise ValueError("the adjusted variants have no score-space representation; use simplex_space")
    if isinstance(initial, MixedProfile):
        run_points = [_initial_points(spec, game, initial)] * len(seeds)
    else:
        profiles = list(initial)
        if len(profiles) != len(seeds):
            raise ValueError("need exactly one initial profile per run")
        run_points = [_initial_points(spec, game, p) for p in profiles]
    for r, pts in enumerate(run_points):
        for i, x in enumerate(pts):
            if np.any(x <= 0.0):
                raise ValueError(
                    f"score-space integration needs an interior start; run {r} player {i} has a zero share"
                )

    points = run_points[0]
    rates = spec.effective_rates()
    sizes = [p.size for p in points]
    offsets = np.cumsum([0] + sizes)
    s_total = offsets[-1]
    n_runs = len(seeds)
    n_steps = cfg.n_steps
    rec = _record_indices(n_steps, cfg.record_stride)
    rec_set = dict((int(k), j) for j, k in enumerate(rec))
    dt = cfg.dt
    sq_dt = np.sqrt(dt)

    payoff_of = _score_payoff_closure(game, spec.is_single_population)
    coeff_flat = np.concatenate(spec.noise.coefficients)
    constant_noise = spec.noise.kind == CONSTANT
    zero_noise = spec.noise.is_zero()

    # U holds lambda-free scores; strategies use the rate-scaled logit map.
    u_flat = np.empty((n_runs, s_total))
    for r, pts in enumerate(run_points):
        for i, x in enumerate(pts):
            u_flat[r, offsets[i]:offsets[i + 1]] = np.log(x) / rates[i]
    views = [u_flat[:, offsets[i]:offsets[i + 1]] for i in range(len(sizes))]

    gens = [_generator(s) for s in seeds]
    states_out = [np.empty((n_runs, rec.size, s)) for s in sizes]
    scores_out = [np.empty((n_runs, rec.size, s)) for s in sizes] if cfg.record_scores else None

    def strategies():
        out = []
        for i, v in enumerate(views):
            z = v * rates[i]
            z = z - z.max(axis=1, keepdims=True)
            e = np.exp(z)
            out.append(e / e.sum(axis=1, keepdims=True))
        return tuple(out)

    xs = strategies()

    def record(slot: int):
        for i in range(len(sizes)):
            states_out[i][:, slot, :] = xs[i]
            if scores_out is not None:
                scores_out[i][:, slot, :] = views[i]

    record(0)
    noise_block = np.empty((0, n_runs, s_total))
    block_at = 0
    for step in range(n_steps):
        if not zero_noise:
            if block_at >= noise_block.shape[0]:
                length = min(_NOISE_CHUNK, n_steps - step)
                noise_block = np.empty((length, n_runs, s_total))
                for r, gen in enumerate(gens):
                    noise_block[:, r, :] = gen.standard_normal((length, s_total))
                noise_block *= sq_dt
                block_at = 0
            xi = noise_block[block_at]
            block_at += 1

        payoff = payoff_of(xs)
        for i in range(len(sizes)):
            views[i] += dt * payoff[i]
        if not zero_noise:
            if constant_noise:
                u_flat += xi * coeff_flat[None, :]
            else:
                for i in range(len(sizes)):
                    eta = coeff_flat[offsets[i]:offsets[i + 1]][None, :] * (1.0 - xs[i])
                    views[i] += xi[:, offsets[i]:offsets[i + 1]] * eta
        # Recenter per player: the logit map ignores a common shift.
        for v in views:
            v -= v.mean(axis=1, keepdims=True)
        xs = strategies()
        if (step + 1) in rec_set:
            if not all(np.all(np.isfinite(x)) for x in xs):
                raise SimulationError(f"non-finite state at step {step + 1}")
            record(rec_set[step + 1])

    times = rec * dt
    out = []
    for r, seed in enumerate(seeds):
        out.append(
            Trajectory(
                times=times.copy(),
                states=tuple(s[r].copy() for s in states_out),
                seed=int(seed),
                config_hash=_spec_hash_parts(spec, game, cfg, extra=tuple(run_points[r])),
                steps=n_steps,
                scores=tuple(s[r].copy() for s in scores_out) if scores_out is not None else None,
            )
        )
    return out


def simulate_scores(spec: DynamicsSpec, game: GameDef, initial: MixedProfile, cfg: SimConfig) -> Trajectory:
    """One run of the score-space integrator (see the module docstring)."""
    return _simulate_scores_batch(spec, game, initial, cfg, [cfg.seed])[0]


# -- simplex-space integrator -------------------------------------------------

def simulate_simplex(
    spec: DynamicsSpec,
    game: GameDef,
    initial: MixedProfile,
    cfg: SimConfig,
    noise_increments: Sequence[np.ndarray] | None = None,
) -> Trajectory:
    """Euler-Maruyama on the simplex-valued field of any variant.

    ``noise_increments`` optionally supplies the Wiener increments, one
    ``(n_steps, S_i)`` array per player with variance ``dt`` per entry.
    Passing increments makes coupled-refinement studies possible: the
    coarse increments must be the blockwise sums of the fine ones.
    """
    points = _initial_points(spec, game, initial)
    n_steps = cfg.n_steps
    rec = _record_indices(n_steps, cfg.record_stride)
    rec_map = {int(k): j for j, k in enumerate(rec)}
    dt = cfg.dt
    stochastic = spec.variant in STOCHASTIC_VARIANTS

    if noise_increments is not None:
        noise_increments = [np.asarray(w, dtype=float) for w in noise_increments]
        if len(noise_increments) != len(points):
            raise ValueError("need one increment array per player")
        for i, w in enumerate(noise_increments):
            if w.shape != (n_steps, points[i].size):
                raise ValueError(
                    f"player {i} increments must have shape {(n_steps, points[i].size)}, got {w.shape}"
                )
    gen = _generator(cfg.seed) if (stochastic and noise_increments is None) else None

    xs = [p.copy() for p in points]
    states_out = [np.empty((rec.size, p.size)) for p in points]
    projections = 0

    def record(slot: int):
        for i, x in enumerate(xs):
            states_out[i][slot] = x

    record(0)
    for step in range(n_steps):
        field = eval_field(spec, game, MixedProfile(tuple(xs)))
        new = []
        stepped_out = False
        for i, x in enumerate(xs):
            z = x + dt * field.drift[i]
            if stochastic:
                if noise_increments is not None:
                    dw = noise_increments[i][step]
                else:
                    dw = gen.standard_normal(x.size) * np.sqrt(dt)
                z = z + field.diffusion[i] @ dw
            if not np.all(np.isfinite(z)):
                raise SimulationError(f"non-finite state at step {step + 1}")
            if np.any(z < 0.0):
                stepped_out = True
                z = np.clip(z, 0.0, None)
                total = z.sum()
                if total <= 0.0:
                    raise SimulationError(f"state collapsed to zero mass at step {step + 1}")
                z = z / total
            else:
                # Tangent fields keep the sum at 1 up to roundoff; renormalize anyway.
                z = z / z.sum()
            new.append(z)
        if stepped_out:
            projections += 1
        xs = new
        if (step + 1) in rec_map:
            record(rec_map[step + 1])

    return Trajectory(
        times=rec * dt,
        states=tuple(states_out),
        seed=cfg.seed,
        config_hash=_spec_hash_parts(spec, game, cfg, extra=tuple(points)),
        steps=n_steps,
        projection_steps=projections,
    )


# -- deterministic RK4 --------------------------------------------------------

def simulate_deterministic(spec: DynamicsSpec, game: GameDef, initial: MixedProfile, cfg: SimConfig) -> Trajectory:
    """Classical RK4 for the deterministic variants (RD, LRD)."""
    if spec.variant not in ("RD", "LRD"):
        raise ValueError("deterministic integration supports RD and LRD only")
    points = _initial_points(spec, game, initial)
    n_steps = cfg.n_steps
    rec = _record_indices(n_steps, cfg.record_stride)
    rec_map = {int(k): j for j, k in enumerate(rec)}
    dt = cfg.dt

    def rhs(xs):
        field = eval_field(spec, game, MixedProfile(tuple(xs)))
        return field.drift

    xs = [p.copy() for p in points]
    states_out = [np.empty((rec.size, p.size)) for p in points]
    for i, x in enumerate(xs):
        states_out[i][0] = x
    for step in range(n_steps):
        k1 = rhs(xs)
        k2 = rhs([x + 0.5 * dt * k for x, k in zip(xs, k1)])
        k3 = rhs([x + 0.5 * dt * k for x, k in zip(xs, k2)])
        k4 = rhs([x + dt * k for x, k in zip(xs, k3)])
        nxt = []
        for i, x in enumerate(xs):
            z = x + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if not np.all(np.isfinite(z)):
                raise SimulationError(f"non-finite state at step {step + 1}")
            z = np.clip(z, 0.0, None)
            nxt.append(z / z.sum())
        xs = nxt
        if (step + 1) in rec_map:
            for i, x in enumerate(xs):
                states_out[i][rec_map[step + 1]] = x

    return Trajectory(
        times=rec * dt,
        states=tuple(states_out),
        seed=cfg.seed,
        config_hash=_spec_hash_parts(spec, game, cfg, extra=tuple(points)),
        steps=n_steps,
    )


# -- discrete learning rounds -------------------------------------------------

def simulate_discrete(spec: DynamicsSpec, game: GameDef, initial: MixedProfile, cfg: SimConfig) -> Trajectory:
    """Exponential learning in discrete rounds.

    Each round adds the current pure payoffs plus one unscaled shock
    ``eta * xi`` to the scores and reads strategies through the logit
    map.  One round is one unit of time; ``cfg.dt`` is ignored except
    that the number of rounds is ``round(horizon)``.
    """
    if spec.variant in ("ASRD", "ASRD1"):
        raise ValueError("the adjusted variants have no score-space representation")
    points = _initial_points(spec, game, initial)
    for i, x in enumerate(points):
        if np.any(x <= 0.0):
            raise ValueError(f"discrete learning needs an interior start; player {i} has a zero share")
    rounds = int(round(cfg.horizon))
    if rounds < 1:
        raise ValueError("horizon must cover at least one round")
    rates = spec.effective_rates()
    rec = _record_indices(rounds, cfg.record_stride)
    rec_map = {int(k): j for j, k in enumerate(rec)}

    gen = _generator(cfg.seed)
    scores = [np.log(x) / rates[i] for i, x in enumerate(points)]
    sizes = [p.size for p in points]
    single = spec.is_single_population
    states_out = [np.empty((rec.size, s)) for s in sizes]
    scores_rec = [np.empty((rec.size, s)) for s in sizes] if cfg.record_scores else None

    xs = logit_map(scores, rates)

    def record(slot):
        for i in range(len(sizes)):
            states_out[i][slot] = xs[i]
            if scores_rec is not None:
                scores_rec[i][slot] = scores[i]

    record(0)
    for step in range(rounds):
        if single:
            payoff = (game.payoffs[0] @ xs[0],)
        else:
            from .games import payoff_vector

            payoff = tuple(payoff_vector(game, xs, i) for i in range(game.num_players))
        etas = spec.noise.eval_at(xs)
        for i in range(len(sizes)):
            shock = etas[i] * gen.standard_normal(sizes[i]) if not spec.noise.is_zero() else 0.0
            scores[i] = scores[i] + payoff[i] + shock
            scores[i] -= scores[i].mean()
        xs = logit_map(scores, rates)
        if not all(np.all(np.isfinite(x)) for x in xs):
            raise SimulationError(f"non-finite state at round {step + 1}")
        if (step + 1) in rec_map:
            record(rec_map[step + 1])

    chash = _spec_hash_parts(spec, game, cfg, extra=tuple(points))
    return Trajectory(
        times=rec.astype(float),
        states=tuple(states_out),
        seed=cfg.seed,
        config_hash=chash,
        steps=rounds,
        scores=tuple(scores_rec) if scores_rec is not None else None,
    )


# -- jobs and ensembles -------------------------------------------------------

@dataclass(frozen=True)
class ScoreJob:
    spec: DynamicsSpec
    game: GameDef
    initial: MixedProfile
    config: SimConfig

    def run(self, seed: int) -> Trajectory:
        return simulate_scores(self.spec, self.game, self.initial,
                               dataclasses.replace(self.config, seed=seed))


@dataclass(frozen=True)
class SimplexJob:
    spec: DynamicsSpec
    game: GameDef
    initial: MixedProfile
    config: SimConfig

    def run(self, seed: int) -> Trajectory:
        return simulate_simplex(self.spec, self.game, self.initial,
                                dataclasses.replace(self.config, seed=seed))


@dataclass(frozen=True)
class DeterministicJob:
    spec: DynamicsSpec
    game: GameDef
    initial: MixedProfile
    config: SimConfig

    def run(self, seed: int) -> Trajectory:
        return simulate_deterministic(self.spec, self.game, self.initial,
                                      dataclasses.replace(self.config, seed=seed))


@dataclass(frozen=True)
class DiscreteJob:
    spec: DynamicsSpec
    game: GameDef
    initial: MixedProfile
    config: SimConfig

    def run(self, seed: int) -> Trajectory:
        return simulate_discrete(self.spec, self.game, self.initial,
                                 dataclasses.replace(self.config, seed=seed))


Job = ScoreJob | SimplexJob | DeterministicJob | DiscreteJob


def ensemble_trajectories(job, n_runs: int, master_seed: int) -> list[Trajectory]:
    """Run ``n_runs`` independent copies of ``job`` under derived seeds.

    ``job`` is one of the Job dataclasses or any callable ``seed ->
    Trajectory``.  ScoreJobs take the batched kernel; everything else
    runs sequentially, or across threads when ``REPLICATOR_LAB_THREADS``
    is set above 1 (trajectory generation is numpy-bound, so threads
    mostly overlap BLAS time).
    """
    if n_runs < 1:
        raise ValueError("an ensemble needs at least one run")
    seeds = [run_seed(master_seed, k) for k in range(n_runs)]
    if isinstance(job, ScoreJob):
        return _simulate_scores_batch(job.spec, job.game, job.initial, job.config, seeds)

    runner = job.run if isinstance(job, (SimplexJob, DeterministicJob, DiscreteJob)) else job

    def run_one(k_seed):
        k, seed = k_seed
        try:
            return runner(seed)
        except Exception as exc:
            raise SimulationError(f"ensemble member {k} (seed {seed}) failed: {exc}") from exc

    n_threads = int(os.environ.get(THREADS_ENV, "1") or "1")
    if n_threads > 1 and n_runs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            return list(pool.map(run_one, enumerate(seeds)))
    return [run_one(ks) for ks in enumerate(seeds)]


@dataclass(frozen=True)
class StatSummary:
    mean: float
    stderr: float
    count: int
    values: tuple[float, ...]

    @classmethod
    def of(cls, values: Sequence[float]) -> "StatSummary":
        arr = np.asarray(list(values), dtype=float)
        if arr.size == 0:
            raise ValueError("cannot summarize an empty sample")
        mean = float(arr.mean())
        stderr = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
        return cls(mean=mean, stderr=stderr, count=int(arr.size), values=tuple(float(v) for v in arr))


@dataclass(frozen=True)
class EnsembleStats:
    """Named scalar statistics over an ensemble, with their standard errors."""

    runs: int
    master_seed: int
    stats: dict[str, StatSummary]

    def to_json(self) -> dict:
        return {
            "runs": self.runs,
            "seed": self.master_seed,
            "stats": {
                name: {"mean": s.mean, "stderr": s.stderr}
                for name, s in sorted(self.stats.items())
            },
        }


def run_ensemble(job, n_runs: int, master_seed: int,
                 statistics: dict[str, Callable[[Trajectory], float]]) -> EnsembleStats:
    """Ensemble execution plus per-trajectory scalar statistics."""
    trajectories = ensemble_trajectories(job, n_runs, master_seed)
    stats = {
        name: StatSummary.of([fn(tr) for tr in trajectories])
        for name, fn in statistics.items()
    }
    return EnsembleStats(runs=n_runs, master_seed=int(master_seed), stats=stats)


def trajectory_to_csv(traj: Trajectory) -> str:
    """Long-format CSV: one row per (time, player, strategy)."""
    buf = io.StringIO()
    buf.write("t,player,strategy,prob\n")
    for k, t in enumerate(traj.times):
        for i, block in enumerate(traj.states):
            for a in range(block.shape[1]):
                buf.write(f"{float(t)!r},{i},{a},{float(block[k, a])!r}\n")
    return buf.getvalue()
