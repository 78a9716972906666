"""Batch command-line front-end.

Usage: ``replicator-lab <kind> [--config file.json] [--flag value ...]``

Kinds: simulate, ensemble, eliminate, equilibria, extinction, stability,
bound, lyapunov, generator-probe, validate.  Every kind resolves one
experiment configuration (config file merged with flags, flags winning),
dispatches to exactly one library entry point, writes its artifacts as
``<kind>_<confighash>.json`` (plus ``.csv`` for time series) into the
output directory, and prints a one-line JSON summary to stdout.

Exit codes: 0 success, 2 configuration error (unparseable JSON, unknown
fields/kinds, missing required parameters), 3 runtime error (a
simulation or solver failed while executing a well-formed experiment).

Identical configurations produce byte-identical artifacts: outputs carry
no timestamps and all randomness flows from the mandatory seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, dynamics, engine, games

KINDS = (
    "simulate",
    "ensemble",
    "eliminate",
    "equilibria",
    "extinction",
    "stability",
    "bound",
    "lyapunov",
    "generator-probe",
    "validate",
)

#: Kinds whose execution draws randomness and therefore require a seed.
SEED_REQUIRED = frozenset({"simulate", "ensemble", "extinction", "stability", "lyapunov", "generator-probe"})

#: Kinds that need a game definition.
GAME_REQUIRED = frozenset({"simulate", "ensemble", "eliminate", "equilibria", "extinction",
                           "stability", "lyapunov", "generator-probe"})

_DEFAULTS = {
    "horizon": 100.0,
    "dt": 1e-2,
    "integrator": "score_space",
    "record_stride": 10,
    "initial": "uniform",
    "output_dir": ".",
    "M": 3.0,
    "runs": 200,
    "start_radius": 0.05,
    "stay_radius": 0.3,
    "tol": 1e-2,
    "radius": 0.1,
    "samples": 1000,
    "h": 1e-3,
    "probe_runs": 10_000,
    "rate": 1.0,
}


class ConfigError(ValueError):
    """A problem in the experiment description (exit code 2)."""


def _load_json(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"config: {path} must hold a JSON object")
    return obj


def _parse_json_flag(name: str, text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{name}: not valid JSON: {exc}") from exc


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="replicator-lab",
        description="Simulate and analyze stochastic replicator dynamics of exponential learning.",
    )
    p.add_argument("kind", choices=KINDS, help="experiment kind")
    p.add_argument("--config", help="JSON experiment config; flags override its fields")
    p.add_argument("--game", help="path to a game JSON file, or an inline JSON object")
    p.add_argument("--variant", type=lambda s: s.upper(), choices=dynamics.VARIANTS)
    p.add_argument("--rates", help="comma-separated per-player learning rates")
    p.add_argument("--eta", type=float, help="uniform noise intensity for all strategies")
    p.add_argument("--noise-kind", choices=(dynamics.CONSTANT, dynamics.OWN_PURE_VANISHING))
    p.add_argument("--horizon", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--integrator", choices=engine.INTEGRATORS)
    p.add_argument("--stride", type=int, dest="record_stride")
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--initial", help="'uniform' or a JSON list of per-player distributions")
    p.add_argument("--out", dest="output_dir", help="output directory (default '.')")
    p.add_argument("--M", type=float, dest="M", help="extinction threshold exponent")
    p.add_argument("--equilibrium", help="comma-separated pure profile, e.g. '1,0'")
    p.add_argument("--start-radius", type=float, dest="start_radius")
    p.add_argument("--stay-radius", type=float, dest="stay_radius")
    p.add_argument("--tol", type=float)
    p.add_argument("--family", choices=analysis.LYAPUNOV_FAMILIES)
    p.add_argument("--radius", type=float, help="sampling radius for lyapunov")
    p.add_argument("--samples", type=int, help="sample count for lyapunov")
    p.add_argument("--function", help="JSON test function for generator-probe")
    p.add_argument("--point", help="JSON base point for generator-probe")
    p.add_argument("--h", type=float, help="probe step size")
    p.add_argument("--probe-runs", type=int, dest="probe_runs")
    p.add_argument("--offset", type=float, help="bound: initial log-share handicap")
    p.add_argument("--margin", type=float, help="bound: dominance payoff gap")
    p.add_argument("--noise-bound", type=float, dest="noise_bound")
    p.add_argument("--num-strategies", type=int, dest="num_strategies")
    p.add_argument("--time", type=float, help="bound: evaluation time")
    p.add_argument("--rate", type=float, help="bound: learning rate")
    p.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                   help="override any config field, e.g. --set params='{\"lambdas\":0.1}'")
    return p


_FLAG_KEYS = (
    "game", "variant", "rates", "eta", "noise_kind", "horizon", "dt", "integrator",
    "record_stride", "seed", "runs", "initial", "output_dir", "M", "equilibrium",
    "start_radius", "stay_radius", "tol", "family", "radius", "samples", "function",
    "point", "h", "probe_runs", "offset", "margin", "noise_bound", "num_strategies",
    "time", "rate",
)

_JSON_FLAGS = {"function", "point"}
_COMMA_FLAGS = {"rates", "equilibrium"}


def _resolve_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config:
        cfg.update(_load_json(args.config))
    for key in _FLAG_KEYS:
        val = getattr(args, key, None)
        if val is None:
            continue
        if key in _JSON_FLAGS:
            val = _parse_json_flag(key, val)
        elif key in _COMMA_FLAGS:
            val = [float(v) if key == "rates" else int(v) for v in str(val).split(",")]
        elif key == "initial" and val != "uniform":
            val = _parse_json_flag("initial", val)
        elif key == "game":
            text = str(val)
            val = _parse_json_flag("game", text) if text.lstrip().startswith("{") else {"file": text}
        cfg[key] = val
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set needs KEY=JSONVALUE, got {item!r}")
        key, _, raw = item.partition("=")
        try:
            cfg[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            cfg[key.strip()] = raw
    if args.kind == "validate":
        cfg["kind"] = cfg.get("kind", args.kind)
    else:
        stated = cfg.get("kind")
        if stated is not None and stated != args.kind:
            raise ConfigError(f"kind: config says {stated!r} but subcommand is {args.kind!r}")
        cfg["kind"] = args.kind
    return cfg


def _config_digest(cfg: dict) -> str:
    # output_dir is where artifacts land, not what they are; keep it out
    # of the identity so relocating outputs does not rename them.
    trimmed = {k: v for k, v in cfg.items() if k != "output_dir"}
    canon = json.dumps(trimmed, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:10]


def _resolve_game(cfg: dict) -> games.GameDef:
    obj = cfg.get("game")
    if obj is None:
        raise ConfigError("game: required for this kind")
    if isinstance(obj, dict) and "file" in obj:
        obj = _load_json(str(obj["file"]))
    if not isinstance(obj, dict):
        raise ConfigError("game: must be an object or {'file': path}")
    try:
        return games.game_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"game: {exc}") from exc


def _resolve_noise(cfg: dict, counts: tuple[int, ...]) -> dynamics.NoiseModel:
    obj = cfg.get("noise")
    kind = cfg.get("noise_kind", dynamics.CONSTANT)
    if obj is None:
        eta = float(cfg.get("eta", 0.0))
        return dynamics.NoiseModel.uniform(counts, eta, kind=kind)
    if not isinstance(obj, dict):
        raise ConfigError("noise: must be an object")
    if "value" in obj:
        return dynamics.NoiseModel.uniform(counts, float(obj["value"]), kind=obj.get("kind", kind))
    try:
        model = dynamics.NoiseModel.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"noise: {exc}") from exc
    if model.strategy_counts != counts:
        raise ConfigError(f"noise: coefficient shape {model.strategy_counts} does not match game {counts}")
    return model


def _resolve_dynamics(cfg: dict, game: games.GameDef) -> dynamics.DynamicsSpec:
    variant = cfg.get("variant")
    dyn = cfg.get("dynamics")
    if isinstance(dyn, dict):
        variant = cfg.get("variant", dyn.get("variant"))
        rates = cfg.get("rates", dyn.get("rates"))
        noise_obj = dyn.get("noise")
        sub = dict(cfg)
        if noise_obj is not None and "noise" not in cfg:
            sub["noise"] = noise_obj
        cfg = sub
    else:
        rates = cfg.get("rates")
    if variant is None:
        raise ConfigError("variant: required for this kind")
    variant = str(variant).upper()
    if variant not in dynamics.VARIANTS:
        raise ConfigError(f"variant: unknown {variant!r}")
    single = variant in dynamics.SINGLE_POPULATION_VARIANTS
    counts = (game.strategy_counts[0],) if single else game.strategy_counts
    noise = _resolve_noise(cfg, counts)
    if rates is None:
        rates = [1.0] * len(counts)
    try:
        return dynamics.DynamicsSpec(variant, tuple(float(r) for r in rates), noise)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"dynamics: {exc}") from exc


def _resolve_sim(cfg: dict, kind: str) -> engine.SimConfig:
    sim = cfg.get("sim") if isinstance(cfg.get("sim"), dict) else {}

    def pick(key, fallback):
        return cfg.get(key, sim.get(key, fallback))

    try:
        return engine.SimConfig(
            horizon=float(pick("horizon", _DEFAULTS["horizon"])),
            dt=float(pick("dt", _DEFAULTS["dt"])),
            integrator=str(pick("integrator", _DEFAULTS["integrator"])),
            record_stride=int(pick("record_stride", _DEFAULTS["record_stride"])),
            seed=int(cfg.get("seed", 0)),
            record_scores=bool(pick("record_scores", False)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sim: {exc}") from exc


def _resolve_initial(cfg: dict, spec: dynamics.DynamicsSpec, game: games.GameDef) -> games.MixedProfile:
    raw = cfg.get("initial", _DEFAULTS["initial"])
    single = spec.is_single_population
    counts = (game.strategy_counts[0],) if single else game.strategy_counts
    if raw == "uniform":
        return games.MixedProfile.uniform(counts)
    if not isinstance(raw, (list, tuple)):
        raise ConfigError("initial: must be 'uniform' or a list of per-player distributions")
    try:
        return games.MixedProfile(tuple(np.asarray(row, dtype=float) for row in raw))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"initial: {exc}") from exc


def _require_seed(cfg: dict, kind: str) -> int:
    if "seed" not in cfg:
        raise ConfigError(f"seed: required for kind {kind}")
    return int(cfg["seed"])


def _require(cfg: dict, key: str, kind: str):
    if key not in cfg:
        raise ConfigError(f"{key}: required for kind {kind}")
    return cfg[key]


def _simulate_dispatch(spec, game, initial, sim_cfg):
    integ = sim_cfg.integrator
    if integ == "score_space":
        return engine.simulate_scores(spec, game, initial, sim_cfg)
    if integ == "simplex_space":
        return engine.simulate_simplex(spec, game, initial, sim_cfg)
    if integ == "deterministic_rk4":
        return engine.simulate_deterministic(spec, game, initial, sim_cfg)
    return engine.simulate_discrete(spec, game, initial, sim_cfg)


def _job_for(spec, game, initial, sim_cfg):
    integ = sim_cfg.integrator
    if integ == "score_space":
        return engine.ScoreJob(spec, game, initial, sim_cfg)
    if integ == "simplex_space":
        return engine.SimplexJob(spec, game, initial, sim_cfg)
    if integ == "deterministic_rk4":
        return engine.DeterministicJob(spec, game, initial, sim_cfg)
    return engine.DiscreteJob(spec, game, initial, sim_cfg)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n")


def _terminal_stats(counts) -> dict:
    stats = {}
    for i, s in enumerate(counts):
        for a in range(s):
            def fn(tr, i=i, a=a):
                return float(tr.states[i][-1, a])
            stats[f"terminal_p{i}_s{a}"] = fn
    return stats


def _run_experiment(cfg: dict) -> dict:
    kind = cfg["kind"]
    out_dir = Path(str(cfg.get("output_dir", _DEFAULTS["output_dir"])))
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = _config_digest(cfg)
    stem = f"{kind}_{digest}"
    outputs: list[str] = []
    summary: dict = {"kind": kind, "config_digest": digest}

    game = _resolve_game(cfg) if kind in GAME_REQUIRED else None

    if kind == "eliminate":
        trace = games.iterated_elimination(game)
        payload = games.elimination_trace_to_json(trace)
        path = out_dir / f"{stem}.json"
        _write_json(path, payload)
        outputs.append(str(path))
        summary["dominance_solvable"] = trace.is_dominance_solvable
        summary["final"] = [list(s) for s in trace.final]

    elif kind == "equilibria":
        eqs = games.strict_equilibria(game)
        path = out_dir / f"{stem}.json"
        _write_json(path, {"strict_equilibria": [list(e) for e in eqs]})
        outputs.append(str(path))
        summary["strict_equilibria"] = [list(e) for e in eqs]

    elif kind == "bound":
        m = float(_require(cfg, "M", kind))
        offset = float(_require(cfg, "offset", kind))
        margin = float(_require(cfg, "margin", kind))
        eta = float(_require(cfg, "noise_bound", kind))
        s = int(_require(cfg, "num_strategies", kind))
        t = float(_require(cfg, "time", kind))
        rate = float(cfg.get("rate", _DEFAULTS["rate"]))
        try:
            bound = analysis.rate_adjusted_erfc_bound(m, offset, margin, eta, s, rate, t)
        except ValueError as exc:
            raise ConfigError(f"bound: {exc}") from exc
        payload = {"inputs": {"M": m, "offset": offset, "margin": margin, "noise_bound": eta,
                              "num_strategies": s, "rate": rate, "time": t},
                   "bound": bound.to_json()}
        path = out_dir / f"{stem}.json"
        _write_json(path, payload)
        outputs.append(str(path))
        summary["bound"] = bound.value
        summary["valid"] = bound.valid

    elif kind == "simulate":
        spec = _resolve_dynamics(cfg, game)
        if spec.is_stochastic:
            _require_seed(cfg, kind)
        sim_cfg = _resolve_sim(cfg, kind)
        initial = _resolve_initial(cfg, spec, game)
        traj = _simulate_dispatch(spec, game, initial, sim_cfg)
        csv_path = out_dir / f"{stem}.csv"
        csv_path.write_text(engine.trajectory_to_csv(traj))
        payload = {
            "seed": traj.seed,
            "steps": traj.steps,
            "config_hash": traj.config_hash,
            "projection_steps": traj.projection_steps,
            "terminal": [s[-1].tolist() for s in traj.states],
        }
        json_path = out_dir / f"{stem}.json"
        _write_json(json_path, payload)
        outputs += [str(csv_path), str(json_path)]
        summary["terminal"] = payload["terminal"]

    elif kind == "ensemble":
        spec = _resolve_dynamics(cfg, game)
        seed = _require_seed(cfg, kind)
        sim_cfg = _resolve_sim(cfg, kind)
        initial = _resolve_initial(cfg, spec, game)
        n_runs = int(cfg.get("runs", _DEFAULTS["runs"]))
        job = _job_for(spec, game, initial, sim_cfg)
        counts = tuple(p.size for p in initial.points)
        stats = engine.run_ensemble(job, n_runs, seed, _terminal_stats(counts))
        path = out_dir / f"{stem}.json"
        _write_json(path, stats.to_json())
        outputs.append(str(path))
        summary["runs"] = n_runs

    elif kind == "extinction":
        spec = _resolve_dynamics(cfg, game)
        seed = _require_seed(cfg, kind)
        sim_cfg = _resolve_sim(cfg, kind)
        initial = _resolve_initial(cfg, spec, game)
        n_runs = int(cfg.get("runs", _DEFAULTS["runs"]))
        m = float(cfg.get("M", _DEFAULTS["M"]))
        trace = games.iterated_elimination(game)
        if not trace.rounds:
            raise ConfigError("game: no strategy is strictly dominated; nothing to measure")
        job = _job_for(spec, game, initial, sim_cfg)
        trajectories = engine.ensemble_trajectories(job, n_runs, seed)
        report = analysis.extinction_report(spec, game, trajectories, trace, m)
        json_path = out_dir / f"{stem}.json"
        _write_json(json_path, report.to_json())
        lines = ["t,player,strategy,kl"]
        for e in report.entries:
            for t, v in zip(e.kl_times, e.kl_values):
                lines.append(f"{float(t)!r},{e.player},{e.strategy},{float(v)!r}")
        csv_path = out_dir / f"{stem}.csv"
        csv_path.write_text("\n".join(lines) + "\n")
        outputs += [str(json_path), str(csv_path)]
        summary["strategies"] = len(report.entries)
        summary["all_satisfied"] = report.all_satisfied

    elif kind == "stability":
        spec = _resolve_dynamics(cfg, game)
        seed = _require_seed(cfg, kind)
        equilibrium = tuple(int(a) for a in _require(cfg, "equilibrium", kind))
        sim = cfg.get("sim") if isinstance(cfg.get("sim"), dict) else {}
        try:
            est = analysis.stability_probe(
                spec, game, equilibrium,
                start_radius=float(cfg.get("start_radius", _DEFAULTS["start_radius"])),
                stay_radius=float(cfg.get("stay_radius", _DEFAULTS["stay_radius"])),
                tol=float(cfg.get("tol", _DEFAULTS["tol"])),
                horizon=float(cfg.get("horizon", sim.get("horizon", _DEFAULTS["horizon"]))),
                n_runs=int(cfg.get("runs", _DEFAULTS["runs"])),
                master_seed=seed,
                dt=float(cfg.get("dt", sim.get("dt", _DEFAULTS["dt"]))),
                record_stride=int(cfg.get("record_stride", sim.get("record_stride", _DEFAULTS["record_stride"]))),
            )
        except ValueError as exc:
            raise ConfigError(f"stability: {exc}") from exc
        path = out_dir / f"{stem}.json"
        _write_json(path, est.to_json())
        outputs.append(str(path))
        summary["estimate"] = est.estimate

    elif kind == "lyapunov":
        spec = _resolve_dynamics(cfg, game)
        seed = _require_seed(cfg, kind)
        equilibrium = tuple(int(a) for a in _require(cfg, "equilibrium", kind))
        family = str(_require(cfg, "family", kind))
        try:
            report = analysis.lyapunov_certificate(
                spec, game, equilibrium, family,
                params=cfg.get("params"),
                n_samples=int(cfg.get("samples", _DEFAULTS["samples"])),
                radius=float(cfg.get("radius", _DEFAULTS["radius"])),
                seed=seed,
            )
        except ValueError as exc:
            raise ConfigError(f"lyapunov: {exc}") from exc
        path = out_dir / f"{stem}.json"
        _write_json(path, report.to_json())
        outputs.append(str(path))
        summary["decay_rate"] = report.decay_rate
        summary["holds"] = report.holds

    elif kind == "generator-probe":
        spec = _resolve_dynamics(cfg, game)
        seed = _require_seed(cfg, kind)
        fn_obj = _require(cfg, "function", kind)
        try:
            field = analysis.field_from_json(fn_obj, game)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"function: {exc}") from exc
        point_raw = cfg.get("point")
        if point_raw is None:
            counts = (game.strategy_counts[0],) if spec.is_single_population else game.strategy_counts
            point = games.MixedProfile.uniform(counts)
        else:
            try:
                point = games.MixedProfile(tuple(np.asarray(r, dtype=float) for r in point_raw))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"point: {exc}") from exc
        try:
            probe = analysis.generator_consistency_probe(
                spec, game, field, point,
                h=float(cfg.get("h", _DEFAULTS["h"])),
                n_runs=int(cfg.get("probe_runs", _DEFAULTS["probe_runs"])),
                seed=seed,
            )
        except ValueError as exc:
            raise ConfigError(f"generator-probe: {exc}") from exc
        path = out_dir / f"{stem}.json"
        _write_json(path, probe.to_json())
        outputs.append(str(path))
        summary["analytic"] = probe.analytic
        summary["empirical"] = probe.empirical

    else:  # pragma: no cover - argparse restricts kinds
        raise ConfigError(f"kind: unknown {kind!r}")

    summary["outputs"] = outputs
    return summary


def validate_config(cfg: dict) -> list[str]:
    """Schema and invariant diagnostics for a config, without executing it."""
    diags: list[str] = []
    kind = cfg.get("kind")
    if kind not in KINDS or kind == "validate":
        diags.append(f"kind: must be one of {[k for k in KINDS if k != 'validate']}, got {kind!r}")
        return diags
    game = None
    if kind in GAME_REQUIRED:
        try:
            game = _resolve_game(cfg)
        except ConfigError as exc:
            diags.append(str(exc))
    needs_dynamics = kind in {"simulate", "ensemble", "extinction", "stability", "lyapunov", "generator-probe"}
    spec = None
    if needs_dynamics and game is not None:
        try:
            spec = _resolve_dynamics(cfg, game)
        except ConfigError as exc:
            diags.append(str(exc))
        if spec is not None:
            try:
                _resolve_initial(cfg, spec, game)
            except ConfigError as exc:
                diags.append(str(exc))
    seed_needed = kind in SEED_REQUIRED
    if kind == "simulate" and spec is not None and not spec.is_stochastic:
        seed_needed = False
    if seed_needed and "seed" not in cfg:
        diags.append(f"seed: required for kind {kind}")
    if kind in {"simulate", "ensemble", "extinction"}:
        try:
            sim = _resolve_sim(cfg, kind)
        except ConfigError as exc:
            diags.append(str(exc))
            sim = None
        if sim is not None and spec is not None:
            adjusted = spec.variant in {"ASRD", "ASRD1"}
            if adjusted and sim.integrator == "score_space":
                diags.append("integrator: the adjusted variants have no score-space representation; use simplex_space")
            if spec.is_stochastic and sim.integrator == "deterministic_rk4":
                diags.append(f"integrator: deterministic_rk4 supports RD and LRD only, got {spec.variant}")
    if kind in {"stability", "lyapunov"}:
        if "equilibrium" not in cfg:
            diags.append(f"equilibrium: required for kind {kind}")
        elif game is not None:
            eq = tuple(int(a) for a in cfg["equilibrium"])
            if len(eq) != game.num_players or any(
                not 0 <= a < s for a, s in zip(eq, game.strategy_counts)
            ):
                diags.append(f"equilibrium: {list(eq)} is not a pure profile of the game")
    if kind == "lyapunov" and "family" not in cfg:
        diags.append("family: required for kind lyapunov")
    if kind == "generator-probe" and "function" not in cfg:
        diags.append("function: required for kind generator-probe")
    if kind == "bound":
        for key in ("M", "offset", "margin", "noise_bound", "num_strategies", "time"):
            if key not in cfg:
                diags.append(f"{key}: required for kind bound")
    if kind == "stability":
        sr = float(cfg.get("start_radius", _DEFAULTS["start_radius"]))
        st = float(cfg.get("stay_radius", _DEFAULTS["stay_radius"]))
        if not 0.0 < sr < st:
            diags.append(f"start_radius: need 0 < start_radius ({sr}) < stay_radius ({st})")
    return diags


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, which matches the config-error code
        return int(exc.code or 0)
    try:
        cfg = _resolve_config(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2

    if args.kind == "validate":
        diags = validate_config(cfg)
        print(json.dumps({"diagnostics": diags, "ok": not diags}, sort_keys=True))
        return 0

    try:
        summary = _run_experiment(cfg)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (engine.SimulationError, games.SolverError, ValueError, FloatingPointError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(summary, sort_keys=True, default=_json_default))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
