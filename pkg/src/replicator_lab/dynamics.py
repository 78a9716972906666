"""Drift and diffusion fields of the replicator dynamics family.

Seven variants are exposed through one entry point, :func:`eval_field`:

- ``RD``    deterministic replicator dynamics,
- ``LRD``   rate-adjusted (per-player learning rates multiply the field),
- ``SRD``   stochastic replicator dynamics driven by aggregate payoff
            shocks, written in Ito form (drift carries the second-order
            correction produced by pushing the noisy score process
            through the logit map),
- ``SLRD``  rate-adjusted stochastic dynamics (rates scale the payoff
            drift linearly and the Ito correction quadratically),
- ``ASRD``  the adjusted variant whose correction is tilted so strict
            equilibria keep their deterministic stability character,
- ``SRD1``  / ``ASRD1``  single-population forms of SRD / ASRD on one
            simplex, with fitness ``u(x) = A x`` from a symmetric
            two-player game.

The noise intensity per pure strategy comes from :class:`NoiseModel`,
either constant or shrinking as the strategy's own share approaches 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .games import GameDef, MixedProfile, payoff_vector

CONSTANT = "constant"
OWN_PURE_VANISHING = "own_pure_vanishing"
_NOISE_KINDS = (CONSTANT, OWN_PURE_VANISHING)

VARIANTS = ("RD", "LRD", "SRD", "SLRD", "ASRD", "SRD1", "ASRD1")
STOCHASTIC_VARIANTS = frozenset({"SRD", "SLRD", "ASRD", "SRD1", "ASRD1"})
SINGLE_POPULATION_VARIANTS = frozenset({"SRD1", "ASRD1"})
RATE_ADJUSTED_VARIANTS = frozenset({"LRD", "SLRD"})

_SYMMETRY_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Per-strategy noise intensities ``eta_{i,a}(x)``.

    ``coefficients`` holds one non-negative array per player.  With kind
    ``constant`` the intensity is the coefficient itself; with
    ``own_pure_vanishing`` it is ``c_{i,a} * (1 - x_{i,a})``, so the noise
    on a strategy dies out as that strategy takes over its population.
    """

    kind: str
    coefficients: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.kind not in _NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {_NOISE_KINDS}")
        rows = []
        for i, c in enumerate(self.coefficients):
            arr = np.asarray(c, dtype=float)
            if arr.ndim != 1 or arr.size < 1:
                raise ValueError(f"player {i} noise coefficients must be a non-empty vector")
            if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
                raise ValueError(f"player {i} noise coefficients must be finite and non-negative")
            arr = arr.copy()
            arr.setflags(write=False)
            rows.append(arr)
        object.__setattr__(self, "coefficients", tuple(rows))

    @classmethod
    def uniform(cls, strategy_counts: Sequence[int], value: float, kind: str = CONSTANT) -> "NoiseModel":
        return cls(kind, tuple(np.full(s, float(value)) for s in strategy_counts))

    @classmethod
    def zeros(cls, strategy_counts: Sequence[int]) -> "NoiseModel":
        return cls(CONSTANT, tuple(np.zeros(s) for s in strategy_counts))

    @property
    def strategy_counts(self) -> tuple[int, ...]:
        return tuple(c.size for c in self.coefficients)

    def eval_at(self, points: Sequence[np.ndarray]) -> tuple[np.ndarray, ...]:
        """Intensity arrays at the given state, one per player."""
        if len(points) != len(self.coefficients):
            raise ValueError("state does not match the noise model's player count")
        if self.kind == CONSTANT:
            return self.coefficients
        return tuple(c * (1.0 - np.asarray(x, dtype=float)) for c, x in zip(self.coefficients, points))

    def bounds(self) -> tuple[float, ...]:
        """Per-player uniform upper bound on the intensity over the simplex."""
        return tuple(float(c.max()) for c in self.coefficients)

    def is_zero(self) -> bool:
        return all(float(c.max()) == 0.0 for c in self.coefficients)

    def to_json(self) -> dict:
        return {"kind": self.kind, "coefficients": [c.tolist() for c in self.coefficients]}

    @classmethod
    def from_json(cls, obj: dict) -> "NoiseModel":
        return cls(obj["kind"], tuple(np.asarray(c, dtype=float) for c in obj["coefficients"]))


@dataclass(frozen=True, eq=False)
class DynamicsSpec:
    """A variant name plus its per-player learning rates and noise model."""

    variant: str
    rates: tuple[float, ...]
    noise: NoiseModel

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        rates = tuple(float(r) for r in self.rates)
        if any(not np.isfinite(r) or r <= 0.0 for r in rates):
            raise ValueError("learning rates must be positive and finite")
        if len(rates) != len(self.noise.coefficients):
            raise ValueError("rates and noise model disagree on the number of players")
        object.__setattr__(self, "rates", rates)

    @property
    def is_stochastic(self) -> bool:
        return self.variant in STOCHASTIC_VARIANTS

    @property
    def is_single_population(self) -> bool:
        return self.variant in SINGLE_POPULATION_VARIANTS

    def effective_rates(self) -> tuple[float, ...]:
        """Rates as the field actually uses them.

        Only the rate-adjusted variants (LRD, SLRD) see the configured
        rates; the plain variants run at rate one regardless.
        """
        if self.variant in RATE_ADJUSTED_VARIANTS:
            return self.rates
        return tuple(1.0 for _ in self.rates)

    @classmethod
    def plain(cls, variant: str, game_or_counts, noise: NoiseModel | None = None,
              rates: Sequence[float] | None = None) -> "DynamicsSpec":
        counts = (
            game_or_counts.strategy_counts
            if isinstance(game_or_counts, GameDef)
            else tuple(int(s) for s in game_or_counts)
        )
        if noise is None:
            noise = NoiseModel.zeros(counts)
        if rates is None:
            rates = tuple(1.0 for _ in counts)
        return cls(variant, tuple(rates), noise)


@dataclass(frozen=True)
class TangentField:
    """Ito drift vectors and diffusion loading matrices, one block per player.

    ``diffusion[i]`` has shape ``(S_i, S_i)``: column ``b`` is the loading
    of player ``i``'s state on the independent Wiener coordinate driving
    the payoff shock of pure strategy ``b``.
    """

    drift: tuple[np.ndarray, ...]
    diffusion: tuple[np.ndarray, ...]


def _points_for(spec: DynamicsSpec, game: GameDef, state: MixedProfile) -> tuple[np.ndarray, ...]:
    if spec.is_single_population:
        if len(state) != 1:
            raise ValueError("single-population variants take a profile with exactly one point")
        _require_symmetric(game)
        return state.points
    state.validate_for(game)
    return state.points


def _require_symmetric(game: GameDef) -> None:
    if game.num_players != 2 or game.strategy_counts[0] != game.strategy_counts[1]:
        raise ValueError("single-population variants need a two-player game with equal strategy sets")
    a, b = game.payoffs
    if not np.allclose(b, a.T, rtol=0.0, atol=_SYMMETRY_ATOL):
        raise ValueError("single-population variants need a symmetric game (u2 == u1^T)")


def _simplex_noise_loadings(x: np.ndarray, eta: np.ndarray) -> np.ndarray:
    # sigma[a, b] = x_a (delta_ab - x_b) eta_b: the shock on strategy b moves
    # its own share up and every share down proportionally, staying tangent.
    return x[:, None] * (np.eye(x.size) - x[None, :]) * eta[None, :]


def _ito_correction(x: np.ndarray, eta: np.ndarray) -> np.ndarray:
    # Second-order term from the logit map: for each coordinate,
    # 1/2 eta_a^2 (1 - 2 x_a) - 1/2 sum_b eta_b^2 x_b (1 - 2 x_b).
    quad = eta ** 2 * x * (1.0 - 2.0 * x)
    return 0.5 * eta ** 2 * (1.0 - 2.0 * x) - 0.5 * quad.sum()


def _adjusted_correction(x: np.ndarray, eta: np.ndarray) -> np.ndarray:
    # ASRD tilt: -(eta_a^2 x_a - sum_b eta_b^2 x_b^2).
    return -(eta ** 2 * x - float(np.sum(eta ** 2 * x ** 2)))


def eval_field(spec: DynamicsSpec, game: GameDef, state: MixedProfile) -> TangentField:
    """Drift and diffusion of the requested variant at ``state``.

    Deterministic variants return zero diffusion blocks.  All blocks are
    tangent to their simplex: each drift sums to zero and each diffusion
    column sums to zero.
    """
    points = _points_for(spec, game, state)
    rates = spec.effective_rates()
    etas = spec.noise.eval_at(points)

    drift = []
    diffusion = []
    for i, x in enumerate(points):
        if spec.is_single_population:
            u = game.payoffs[0] @ x
        else:
            u = payoff_vector(game, points, i)
        lam = rates[i]
        eta = etas[i]
        rel = u - float(x @ u)
        base = x * rel

        if spec.variant in ("RD",):
            drift.append(base)
            diffusion.append(np.zeros((x.size, x.size)))
        elif spec.variant == "LRD":
            drift.append(lam * base)
            diffusion.append(np.zeros((x.size, x.size)))
        elif spec.variant in ("SRD", "SRD1"):
            drift.append(base + x * _ito_correction(x, eta))
            diffusion.append(_simplex_noise_loadings(x, eta))
        elif spec.variant == "SLRD":
            drift.append(lam * base + lam ** 2 * x * _ito_correction(x, eta))
            diffusion.append(lam * _simplex_noise_loadings(x, eta))
        elif spec.variant in ("ASRD", "ASRD1"):
            drift.append(x * (rel + _adjusted_correction(x, eta)))
            diffusion.append(_simplex_noise_loadings(x, eta))
        else:  # pragma: no cover - VARIANTS is closed
            raise AssertionError(spec.variant)
    return TangentField(drift=tuple(drift), diffusion=tuple(diffusion))


def score_field(spec: DynamicsSpec, game: GameDef, state: MixedProfile) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
    """Drift (payoff vectors) and per-strategy noise intensities in score space.

    The score process is linear in the shocks, so the diffusion is diagonal;
    only the intensity vector per player is returned.
    """
    points = _points_for(spec, game, state)
    if spec.is_single_population:
        u = (game.payoffs[0] @ points[0],)
    else:
        u = tuple(payoff_vector(game, points, i) for i in range(game.num_players))
    return u, spec.noise.eval_at(points)


def logit_map(scores: Sequence[np.ndarray], rates: Sequence[float] | None = None) -> tuple[np.ndarray, ...]:
    """Per-player softmax of (rate-scaled) scores, max-subtracted for stability."""
    out = []
    for i, s in enumerate(scores):
        z = np.asarray(s, dtype=float)
        if rates is not None:
            z = z * float(rates[i])
        z = z - z.max()
        e = np.exp(z)
        out.append(e / e.sum())
    return tuple(out)


def stratonovich_drift_identity(spec: DynamicsSpec, game: GameDef, state: MixedProfile,
                                fd_step: float = 1e-6) -> tuple[np.ndarray, ...]:
    """Ito drift minus the Ito-Stratonovich correction, per player.

    The correction ``c_a = 1/2 sum_{g,b} (d sigma_{a b} / d x_g) sigma_{g b}``
    is evaluated by central finite differences of the diffusion loadings.
    Only constant-intensity noise is supported: the state-dependent kinds
    would need derivative information for ``eta(x)`` as well.
    """
    if spec.noise.kind != CONSTANT:
        raise ValueError("the Stratonovich form is only provided for constant noise")
    field = eval_field(spec, game, state)
    points = _points_for(spec, game, state)
    rates = spec.effective_rates()
    lam_sigma = tuple(
        (rates[i] if spec.variant == "SLRD" else 1.0) * spec.noise.coefficients[i]
        for i in range(len(points))
    )

    corrected = []
    for i, x in enumerate(points):
        eta = lam_sigma[i]
        n = x.size
        corr = np.zeros(n)
        sigma_here = _simplex_noise_loadings(x, eta)
        for g in range(n):
            bump = np.zeros(n)
            bump[g] = fd_step
            d_sigma = (_simplex_noise_loadings(x + bump, eta)
                       - _simplex_noise_loadings(x - bump, eta)) / (2.0 * fd_step)
            corr += d_sigma @ sigma_here[g]
        corrected.append(field.drift[i] - 0.5 * corr)
    return tuple(corrected)
