"""Finite normal-form games and their rationality structure.

The central object is :class:`GameDef`, a dense payoff tensor over pure
strategy profiles, together with :class:`MixedProfile` points on the
product of per-player probability simplices.  On top of payoff
evaluation the module provides strict-dominance analysis (including
dominance by mixed strategies, decided by a small linear program),
iterated elimination of strictly dominated strategies, enumeration of
strict pure equilibria, constructors for congestion and minority games
with their exact potential, and the entropy / divergence functions used
by the trajectory-analysis layer.

Everything is immutable after construction and free of hidden state;
operations are pure functions and safe to share across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog

#: Hard cap on dense payoff storage, counted as num_players * prod(strategies).
MAX_TENSOR_ENTRIES = 10_000_000

#: Margin used for every strict payoff comparison (dominance, strict equilibria).
PAYOFF_MARGIN = 1e-12

#: Minimum LP gap for a mixed strategy to count as a strict dominator.
DOMINATOR_MIN_GAP = 1e-9

_SIMPLEX_ATOL = 1e-9


class SolverError(RuntimeError):
    """The dominator LP terminated abnormally; carries the solver status."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


def _as_simplex_vector(values, length: int, what: str = "strategy") -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size != length:
        raise ValueError(f"{what} must be a vector of length {length}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what} has non-finite entries")
    if np.any(v < 0.0):
        raise ValueError(f"{what} has negative entries")
    total = float(v.sum())
    if total <= 0.0:
        raise ValueError(f"{what} sums to {total}; a probability vector must have positive mass")
    return v / total


@dataclass(frozen=True, eq=False)
class GameDef:
    """A finite N-player game as a dense payoff tensor.

    ``payoffs[i, a1, ..., aN]`` is player ``i``'s payoff at the pure
    profile ``(a1, ..., aN)``.  ``facility_payoffs`` is present only on
    games built by :func:`congestion_game` (or :func:`minority_game`)
    and retains the per-facility payoff table ``u_f(k)`` for
    ``k = 1..N`` so the exact potential can be reconstructed.
    """

    num_players: int
    strategy_counts: tuple[int, ...]
    payoffs: np.ndarray
    facility_payoffs: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        if self.num_players < 1:
            raise ValueError("a game needs at least one player")
        counts = tuple(int(s) for s in self.strategy_counts)
        if len(counts) != self.num_players or any(s < 1 for s in counts):
            raise ValueError(f"bad strategy counts {self.strategy_counts!r}")
        entries = self.num_players * int(np.prod(counts, dtype=np.int64))
        if entries > MAX_TENSOR_ENTRIES:
            raise ValueError(
                f"payoff tensor would hold {entries} entries, over the cap of {MAX_TENSOR_ENTRIES}"
            )
        tensor = np.asarray(self.payoffs, dtype=float)
        expected = (self.num_players,) + counts
        if tensor.shape != expected:
            raise ValueError(f"payoff tensor shape {tensor.shape} does not match {expected}")
        if not np.all(np.isfinite(tensor)):
            raise ValueError("payoff tensor has non-finite entries")
        tensor = np.ascontiguousarray(tensor)
        tensor.setflags(write=False)
        object.__setattr__(self, "strategy_counts", counts)
        object.__setattr__(self, "payoffs", tensor)
        if self.facility_payoffs is not None:
            table = tuple(tuple(float(v) for v in row) for row in self.facility_payoffs)
            if any(len(row) != self.num_players for row in table):
                raise ValueError("facility payoff rows must have one value per congestion level")
            object.__setattr__(self, "facility_payoffs", table)

    @property
    def num_entries(self) -> int:
        return int(self.payoffs.size)

    def pure_profiles(self):
        """Iterator over all pure strategy profiles."""
        return np.ndindex(*self.strategy_counts)


@dataclass(frozen=True, eq=False)
class MixedProfile:
    """One probability vector per player; renormalized on construction."""

    points: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError("a mixed profile needs at least one player")
        cleaned = []
        for i, raw in enumerate(self.points):
            cleaned.append(_as_simplex_vector(raw, np.asarray(raw).size, what=f"player {i} strategy"))
            cleaned[-1].setflags(write=False)
        object.__setattr__(self, "points", tuple(cleaned))

    @classmethod
    def uniform(cls, strategy_counts: Sequence[int]) -> "MixedProfile":
        return cls(tuple(np.full(s, 1.0 / s) for s in strategy_counts))

    @classmethod
    def vertex(cls, strategy_counts: Sequence[int], profile: Sequence[int]) -> "MixedProfile":
        if len(profile) != len(strategy_counts):
            raise ValueError("profile length does not match the number of players")
        points = []
        for s, a in zip(strategy_counts, profile):
            a = int(a)
            if not 0 <= a < s:
                raise ValueError(f"strategy index {a} out of range for {s} strategies")
            v = np.zeros(s)
            v[a] = 1.0
            points.append(v)
        return cls(tuple(points))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def strategy_counts(self) -> tuple[int, ...]:
        return tuple(p.size for p in self.points)

    def validate_for(self, game: GameDef) -> None:
        if self.strategy_counts != game.strategy_counts:
            raise ValueError(
                f"profile shape {self.strategy_counts} does not match game {game.strategy_counts}"
            )

    def is_interior(self) -> bool:
        return all(np.all(p > 0.0) for p in self.points)


def _contract(tensor: np.ndarray, points: Sequence[np.ndarray], keep: int | None) -> np.ndarray:
    # Contract player axes against the matching vectors, skipping `keep`.
    # Walking the axes from the back keeps earlier axis numbers valid.
    out = tensor
    for j in range(len(points) - 1, -1, -1):
        if j == keep:
            continue
        out = np.tensordot(out, points[j], axes=(j, 0))
    return out


def payoff_vector(game: GameDef, points: Sequence[np.ndarray], player: int) -> np.ndarray:
    """All pure-strategy payoffs ``u_i(p_{-i}; a)`` of one player at once."""
    return _contract(game.payoffs[player], points, keep=player)


def mixed_payoff(game: GameDef, profile: MixedProfile, player: int) -> float:
    """Expected payoff of ``player`` at a mixed profile (multilinear form)."""
    profile.validate_for(game)
    if not 0 <= player < game.num_players:
        raise ValueError(f"player index {player} out of range")
    return float(_contract(game.payoffs[player], profile.points, keep=None))


def pure_strategy_payoff(game: GameDef, profile: MixedProfile, player: int, strategy: int) -> float:
    """Expected payoff of playing the pure ``strategy`` against ``profile``'s opponents."""
    profile.validate_for(game)
    if not 0 <= player < game.num_players:
        raise ValueError(f"player index {player} out of range")
    if not 0 <= strategy < game.strategy_counts[player]:
        raise ValueError(f"strategy index {strategy} out of range")
    return float(payoff_vector(game, profile.points, player)[strategy])


def dominates(game: GameDef, player: int, dominated, dominator) -> bool:
    """True iff ``dominator`` strictly beats ``dominated`` against every pure
    opponent profile.

    Checking the pure opponent profiles suffices: payoffs are multilinear,
    so strict inequality at every simplex vertex extends to all mixed
    opponent strategies.
    """
    if not 0 <= player < game.num_players:
        raise ValueError(f"player index {player} out of range")
    size = game.strategy_counts[player]
    q = _as_simplex_vector(dominated, size, "dominated strategy")
    y = _as_simplex_vector(dominator, size, "dominator strategy")
    diff = np.tensordot(game.payoffs[player], y - q, axes=(player, 0))
    return bool(np.all(diff > PAYOFF_MARGIN))


def _normalized_supports(game: GameDef, restricted) -> list[tuple[int, ...]]:
    if restricted is None:
        return [tuple(range(s)) for s in game.strategy_counts]
    if len(restricted) != game.num_players:
        raise ValueError("one support set per player is required")
    supports = []
    for i, sup in enumerate(restricted):
        sup = tuple(sorted(int(a) for a in set(sup)))
        if not sup:
            raise ValueError(f"player {i} has an empty support")
        if sup[0] < 0 or sup[-1] >= game.strategy_counts[i]:
            raise ValueError(f"player {i} support {sup} out of range")
        supports.append(sup)
    return supports


def find_dominator(game: GameDef, player: int, target, restricted_supports=None) -> np.ndarray | None:
    """Search for a mixed strategy strictly dominating ``target``.

    The search maximizes the worst-case payoff gap over the surviving pure
    opponent profiles, with the candidate mixture confined to the player's
    surviving support.  Returns the dominating mixture as a full-length
    vector, or None when the best achievable gap is not above
    ``DOMINATOR_MIN_GAP``.
    """
    if not 0 <= player < game.num_players:
        raise ValueError(f"player index {player} out of range")
    supports = _normalized_supports(game, restricted_supports)
    own = supports[player]
    size = game.strategy_counts[player]
    q = _as_simplex_vector(target, size, "target strategy")

    opponent_sets = [supports[j] for j in range(game.num_players) if j != player]
    opponent_profiles = list(itertools.product(*opponent_sets))
    m = len(own)
    rows = np.empty((len(opponent_profiles), m))
    goal = np.empty(len(opponent_profiles))
    for r, prof in enumerate(opponent_profiles):
        vec = game.payoffs[player][prof[:player] + (slice(None),) + prof[player:]]
        rows[r] = vec[list(own)]
        goal[r] = float(vec @ q)

    # Variables: mixture weights y over `own`, then the gap epsilon.
    # maximize eps  s.t.  rows @ y - eps >= goal,  sum(y) = 1,  y >= 0
    cost = np.zeros(m + 1)
    cost[-1] = -1.0
    a_ub = np.hstack([-rows, np.ones((rows.shape[0], 1))])
    a_eq = np.zeros((1, m + 1))
    a_eq[0, :m] = 1.0
    bounds = [(0.0, 1.0)] * m + [(None, None)]
    res = linprog(cost, A_ub=a_ub, b_ub=-goal, A_eq=a_eq, b_eq=[1.0], bounds=bounds, method="highs")
    if res.status != 0:
        raise SolverError(f"dominator search failed: {res.message}", status=res.status)
    gap = -float(res.fun)
    if gap <= DOMINATOR_MIN_GAP:
        return None
    y = np.zeros(size)
    y[list(own)] = np.clip(res.x[:m], 0.0, None)
    return y / y.sum()


@dataclass(frozen=True)
class EliminationRound:
    """Per player: strategies removed this round, and the survivors after it."""

    removed: tuple[tuple[int, ...], ...]
    surviving: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class EliminationTrace:
    """Round-by-round record of iterated strict-dominance elimination.

    ``rounds`` lists only rounds that removed something; elimination stops
    at the first round with no removals, so re-running on the survivors is
    a no-op.  ``final`` holds the admissible strategy sets per player.
    """

    rounds: tuple[EliminationRound, ...]
    final: tuple[tuple[int, ...], ...]

    @property
    def is_dominance_solvable(self) -> bool:
        return all(len(s) == 1 for s in self.final)

    def removed_with_context(self) -> list[tuple[int, int, tuple[tuple[int, ...], ...]]]:
        """Each removed pure strategy with the supports live when it fell.

        Returns (player, strategy, supports-at-start-of-its-round) triples,
        which is exactly what the extinction bound needs to rebuild the
        dominator that eliminated the strategy.
        """
        out = []
        for rnd in self.rounds:
            supports = tuple(
                tuple(sorted(rnd.surviving[i] + rnd.removed[i]))
                for i in range(len(rnd.surviving))
            )
            for i, gone in enumerate(rnd.removed):
                for a in gone:
                    out.append((i, a, supports))
        return out


def iterated_elimination(game: GameDef) -> EliminationTrace:
    """Iterated elimination of strictly dominated strategies.

    Each round removes, simultaneously for every player, all pure
    strategies that admit a mixed dominator on the current surviving
    supports.  Simultaneous removal is order-independent for strict
    dominance.
    """
    surviving: list[tuple[int, ...]] = [tuple(range(s)) for s in game.strategy_counts]
    rounds: list[EliminationRound] = []
    while True:
        removed = []
        for i in range(game.num_players):
            gone = []
            for a in surviving[i]:
                q = np.zeros(game.strategy_counts[i])
                q[a] = 1.0
                if find_dominator(game, i, q, surviving) is not None:
                    gone.append(a)
            removed.append(tuple(gone))
        if not any(removed):
            break
        surviving = [
            tuple(a for a in surviving[i] if a not in set(removed[i]))
            for i in range(game.num_players)
        ]
        if any(not s for s in surviving):  # pragma: no cover - impossible for strict dominance
            raise SolverError("elimination emptied a player's strategy set")
        rounds.append(EliminationRound(removed=tuple(removed), surviving=tuple(surviving)))
    return EliminationTrace(rounds=tuple(rounds), final=tuple(surviving))


def elimination_trace_to_json(trace: EliminationTrace) -> dict:
    return {
        "rounds": [
            {
                "removed": [list(r) for r in rnd.removed],
                "surviving": [list(s) for s in rnd.surviving],
            }
            for rnd in trace.rounds
        ],
        "final": [list(s) for s in trace.final],
        "dominance_solvable": trace.is_dominance_solvable,
    }


def is_strict_equilibrium(game: GameDef, profile: Sequence[int]) -> bool:
    """True iff every unilateral deviation strictly lowers the deviator's payoff."""
    profile = tuple(int(a) for a in profile)
    if len(profile) != game.num_players:
        raise ValueError("profile length does not match the number of players")
    for i, a in enumerate(profile):
        if not 0 <= a < game.strategy_counts[i]:
            raise ValueError(f"strategy index {a} out of range for player {i}")
        vec = game.payoffs[i][profile[:i] + (slice(None),) + profile[i + 1:]]
        own = vec[a]
        rest = np.delete(vec, a)
        if rest.size and not np.all(own > rest + PAYOFF_MARGIN):
            return False
    return True


def strict_equilibria(game: GameDef) -> list[tuple[int, ...]]:
    """Enumerate all strict pure Nash equilibria.

    Ties count against strictness: a pure equilibrium with any
    payoff-neutral deviation is reported as non-strict and omitted.
    """
    return [
        tuple(int(a) for a in profile)
        for profile in game.pure_profiles()
        if is_strict_equilibrium(game, profile)
    ]


def congestion_game(num_players: int, facility_payoffs: Sequence) -> GameDef:
    """Build the congestion game in which every player picks one facility.

    ``facility_payoffs`` holds one entry per facility: either a callable
    ``k -> payoff`` or a sequence of payoffs for load ``k = 1..num_players``.
    A player choosing facility ``f`` alongside ``k - 1`` others receives
    ``u_f(k)``.
    """
    if num_players < 1:
        raise ValueError("a congestion game needs at least one player")
    if not facility_payoffs:
        raise ValueError("at least one facility is required")
    table_rows = []
    for f, spec in enumerate(facility_payoffs):
        if callable(spec):
            row = [float(spec(k)) for k in range(1, num_players + 1)]
        else:
            row = [float(v) for v in spec]
            if len(row) != num_players:
                raise ValueError(
                    f"facility {f} needs one payoff per load 1..{num_players}, got {len(row)}"
                )
        if not all(np.isfinite(row)):
            raise ValueError(f"facility {f} has non-finite payoffs")
        table_rows.append(row)
    table = np.asarray(table_rows)
    num_fac = table.shape[0]
    entries = num_players * num_fac ** num_players
    if entries > MAX_TENSOR_ENTRIES:
        raise ValueError(
            f"payoff tensor would hold {entries} entries, over the cap of {MAX_TENSOR_ENTRIES}"
        )
    shape = (num_fac,) * num_players
    payoffs = np.empty((num_players,) + shape)
    for profile in np.ndindex(*shape):
        loads = np.bincount(np.asarray(profile), minlength=num_fac)
        for i in range(num_players):
            payoffs[(i,) + profile] = table[profile[i], loads[profile[i]] - 1]
    return GameDef(
        num_players,
        shape,
        payoffs,
        facility_payoffs=tuple(tuple(row) for row in table_rows),
    )


@dataclass(frozen=True, eq=False)
class PotentialFn:
    """Exact potential of a congestion game, stored densely over profiles.

    Mixed-profile evaluation is the multilinear extension, matching how
    expected payoffs extend.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(v)):
            raise ValueError("potential has non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def at_pure(self, profile: Sequence[int]) -> float:
        return float(self.values[tuple(int(a) for a in profile)])

    def __call__(self, profile) -> float:
        points = profile.points if isinstance(profile, MixedProfile) else tuple(profile)
        if len(points) != self.values.ndim:
            raise ValueError("profile does not match the potential's player count")
        return float(_contract(self.values, [np.asarray(p, dtype=float) for p in points], keep=None))


def rosenthal_potential(game: GameDef) -> PotentialFn:
    """Exact potential ``V(a) = -sum_f sum_{k<=load_f} u_f(k)`` of a congestion game.

    Unilateral payoff changes mirror ``-V`` exactly; that identity is
    re-validated on the full tensor before returning, so a tensor that was
    tampered with after construction is rejected.
    """
    if game.facility_payoffs is None:
        raise ValueError("game does not carry a congestion structure")
    table = np.asarray(game.facility_payoffs)
    num_fac = table.shape[0]
    # prefix[f, k] = sum of u_f(1..k)
    prefix = np.hstack([np.zeros((num_fac, 1)), np.cumsum(table, axis=1)])
    values = np.empty(game.strategy_counts)
    for profile in np.ndindex(*game.strategy_counts):
        loads = np.bincount(np.asarray(profile), minlength=num_fac)
        values[profile] = -float(sum(prefix[f, loads[f]] for f in range(num_fac)))
    # u_i + V must not depend on player i's own strategy (single-deviation identity)
    for i in range(game.num_players):
        if game.strategy_counts[i] < 2:
            continue
        slack = float(np.ptp(game.payoffs[i] + values, axis=i).max())
        if slack > 1e-9:
            raise RuntimeError(
                f"potential validation failed: unilateral deviations drift by {slack:.3e}"
            )
    return PotentialFn(values=values)


def minority_game(num_players: int, win_payoff: float, lose_payoff: float) -> GameDef:
    """Two facilities, odd player count: the strictly smaller side wins.

    A player on the side with strictly fewer players receives
    ``win_payoff``, everyone else ``lose_payoff``.  The single-player game
    degenerates to the lone player always counting as the minority.  Built
    as a congestion game, so :func:`rosenthal_potential` applies.
    """
    if num_players < 1 or num_players % 2 == 0:
        raise ValueError("a minority game needs an odd number of players")
    win = float(win_payoff)
    lose = float(lose_payoff)
    if not win > lose:
        raise ValueError("the winning payoff must exceed the losing payoff")
    level = [
        win if (num_players == 1 or 2 * k < num_players) else lose
        for k in range(1, num_players + 1)
    ]
    return congestion_game(num_players, [level, level])


# -- entropy and divergence -------------------------------------------------

def entropy(dist) -> float:
    """Shannon entropy of a probability vector (natural log)."""
    q = np.asarray(dist, dtype=float)
    _check_distribution(q)
    nz = q > 0.0
    return float(-np.sum(q[nz] * np.log(q[nz])))


def cross_entropy(reference, dist) -> float:
    """Cross entropy ``-sum_a q_a log x_a``; infinite outside ``supp(q) <= supp(x)``."""
    q = np.asarray(reference, dtype=float)
    x = np.asarray(dist, dtype=float)
    _check_distribution(q)
    _check_distribution(x)
    if q.shape != x.shape:
        raise ValueError("distributions must have the same length")
    mask = q > 0.0
    if np.any(x[mask] <= 0.0):
        return float("inf")
    return float(-np.sum(q[mask] * np.log(x[mask])))


def kl_divergence(reference, dist) -> float:
    """Relative entropy of ``dist`` from ``reference``; +inf on support escape."""
    ce = cross_entropy(reference, dist)
    if np.isinf(ce):
        return ce
    return ce - entropy(reference)


def _check_distribution(v: np.ndarray) -> None:
    if v.ndim != 1 or v.size < 1:
        raise ValueError("a distribution must be a non-empty vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("distribution has non-finite entries")
    if np.any(v < 0.0):
        raise ValueError("distribution has negative entries")
    if abs(float(v.sum()) - 1.0) > _SIMPLEX_ATOL:
        raise ValueError(f"distribution sums to {float(v.sum())!r}, not 1")


# -- JSON interchange --------------------------------------------------------

def game_to_json(game: GameDef) -> dict:
    obj = {
        "players": game.num_players,
        "strategies": list(game.strategy_counts),
        "payoffs": game.payoffs.tolist(),
    }
    if game.facility_payoffs is not None:
        obj["kind"] = "congestion"
        obj["facilities"] = [list(row) for row in game.facility_payoffs]
    return obj


def game_from_json(obj: dict) -> GameDef:
    """Parse a game description.

    Three kinds are accepted: explicit ``normal_form`` payoff tensors
    (the default when ``kind`` is omitted), ``congestion`` with a
    per-facility payoff table, and ``minority`` with win/lose payoffs.
    """
    if not isinstance(obj, dict):
        raise ValueError("game description must be a JSON object")
    kind = obj.get("kind", "normal_form")
    if kind == "congestion":
        return congestion_game(int(obj["players"]), obj["facilities"])
    if kind == "minority":
        return minority_game(int(obj["players"]), float(obj["win"]), float(obj["lose"]))
    if kind != "normal_form":
        raise ValueError(f"unknown game kind {kind!r}")
    players = int(obj["players"])
    strategies = tuple(int(s) for s in obj["strategies"])
    payoffs = np.asarray(obj["payoffs"], dtype=float)
    return GameDef(players, strategies, payoffs)
