"""Command-line interface: solve, analyze, learn, repro-appendix.

Exit codes: 0 success, 1 failed repro checks, 2 parse/validation errors,
3 fixed-point non-convergence, 4 combinatorial guard exceeded.
"""

from __future__ import annotations

import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from statistics import median
from typing import Optional

import click
import numpy as np

from .actions import Action
from .analysis import (
    MechanismTemplate,
    StrategyGrid,
    commitment_equilibria,
    core_membership,
    evaluate_outcome,
    is_individually_rational,
    pareto_front,
    welfare,
)
from .ccf import Aggregator, StepCCF
from .errors import (
    EnumerationGuardError,
    NonConvergenceError,
    ScenarioFormatError,
    ScenarioValidationError,
)
from .games import PublicGoodsGame, PublicGoodsParams, pg_closed_form_payoffs, pg_nash, pg_social_optimum
from .learning import (
    AltruismSchedule,
    DynamicsConfig,
    TrainConfig,
    Trajectory,
    better_response_dynamics,
    derive_seeds,
    policy_gradient_train,
)
from .mechanism import VARIANTS, Scenario, solve as solve_mechanism
from .scenario_io import load_scenario, scenario_hash, write_csv

EXIT_INVALID = 2
EXIT_NONCONVERGENCE = 3
EXIT_GUARD = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(path: str) -> tuple[Scenario, dict]:
    try:
        return load_scenario(path)
    except (ScenarioFormatError, ScenarioValidationError, FileNotFoundError, OSError) as exc:
        _fail(EXIT_INVALID, str(exc))


def _parse_floats(text: str, name: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        _fail(EXIT_INVALID, f"{name}: expected comma-separated numbers, got {text!r}")


def _step_levels(step: float) -> list[float]:
    count = round(1.0 / step)
    if abs(count - 1.0 / step) > 1e-9:
        _fail(EXIT_INVALID, f"--grid {step} does not divide [0, 1] evenly")
    return [step * i for i in range(int(count))] + [1.0]


@click.group()
def main():
    """Conditional commitment mechanism toolkit."""


@main.command("solve")
@click.argument("scenario_path", type=click.Path())
@click.option("--variant", type=click.Choice(VARIANTS), default=None,
              help="Override the scenario's mechanism variant.")
@click.option("--out", type=click.Path(), default=None,
              help="Liabilities CSV path (default: liabilities.csv).")
def cli_solve(scenario_path: str, variant: Optional[str], out: Optional[str]):
    """Compute liabilities for a scenario file."""
    scenario, raw = _load(scenario_path)
    if variant is not None and variant != scenario.variant:
        scenario = Scenario(
            players=scenario.players,
            space=scenario.space,
            submissions=scenario.submissions,
            agg=scenario.agg,
            variant=variant,
            eps_fix=scenario.eps_fix,
            max_iter=scenario.max_iter,
            k_max=scenario.k_max,
        )
    try:
        result = solve_mechanism(scenario)
    except NonConvergenceError as exc:
        _fail(EXIT_NONCONVERGENCE, str(exc))
    except EnumerationGuardError as exc:
        _fail(EXIT_GUARD, str(exc))
    except ScenarioValidationError as exc:
        _fail(EXIT_INVALID, str(exc))

    dim_names = [d.name for d in scenario.space.dims]
    header = ["player"] + [f"liability_{n}" for n in dim_names] + ["binding_point"]
    rows = []
    for i, player in enumerate(scenario.players):
        liability = result.profile.actions[i]
        binding = result.binding[i]
        rows.append(
            [player]
            + [c for c in liability.components]
            + ["" if binding is None else binding]
        )
    out_path = Path(out) if out else Path("liabilities.csv")
    write_csv(
        out_path,
        header,
        rows,
        {"seed": "-", "scenarioHash": scenario_hash(raw),
         "variant": scenario.variant, "iterations": result.iterations},
    )
    click.echo(f"variant={scenario.variant} iterations={result.iterations}")
    for row in rows:
        parts = ", ".join(f"{n}={v}" for n, v in zip(dim_names, row[1:-1]))
        bound = "none" if row[-1] == "" else f"point {row[-1]}"
        click.echo(f"  {row[0]}: {parts} (binding: {bound})")
    click.echo(f"wrote {out_path}")


def _game_from_options(n: int, beta: float, gamma: float) -> PublicGoodsGame:
    try:
        return PublicGoodsGame(PublicGoodsParams(n=n, beta=beta, gamma=gamma))
    except ValueError as exc:
        _fail(EXIT_INVALID, str(exc))


@main.command("analyze")
@click.argument("scenario_path", type=click.Path(), required=False)
@click.option("--mode", type=click.Choice(["pareto", "core", "equilibria"]),
              required=True)
@click.option("--grid", "step", type=float, default=0.05, show_default=True,
              help="Grid step for pareto/core modes.")
@click.option("--levels", default=None,
              help="Comma-separated strategy levels for equilibria mode "
                   "(default: derived from --grid).")
@click.option("--k", type=int, default=1, show_default=True,
              help="Points per CCF in equilibria mode.")
@click.option("--profile", default=None,
              help="Comma-separated action profile for core mode.")
@click.option("--variant", type=click.Choice(VARIANTS), default="basic",
              show_default=True, help="Mechanism variant for equilibria mode.")
@click.option("--n", type=int, default=2, show_default=True)
@click.option("--beta", type=float, default=0.09, show_default=True)
@click.option("--gamma", type=float, default=0.3, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="Report CSV path.")
@click.option("--plot", is_flag=True, help="Render a figure next to the CSV.")
def cli_analyze(scenario_path, mode, step, levels, k, profile, variant,
                n, beta, gamma, out, plot):
    """Brute-force analysis reports for the public goods base game."""
    game = _game_from_options(n, beta, gamma)
    if scenario_path is not None:
        scenario, _ = _load(scenario_path)
        variant = scenario.variant
        agg = scenario.agg
    else:
        agg = Aggregator()
    out_path = Path(out) if out else Path(f"analysis_{mode}.csv")
    meta = {"seed": "-", "scenarioHash": scenario_hash(
        {"mode": mode, "n": n, "beta": beta, "gamma": gamma})}

    try:
        if mode == "pareto":
            front = pareto_front(game, step)
            header = [f"mu_{i}" for i in range(n)] + [f"payoff_{i}" for i in range(n)] + ["welfare"]
            rows = []
            for prof in front:
                payoffs = game.payoffs(prof)
                rows.append(list(prof) + list(payoffs) + [welfare(payoffs)])
            write_csv(out_path, header, rows, meta)
            if plot and n == 2:
                from . import plots
                import itertools
                levels_list = _step_levels(step)
                all_payoffs = [game.payoffs(p) for p in
                               itertools.product(levels_list, repeat=n)]
                plots.pareto_figure(all_payoffs, rows and [r[n:2 * n] for r in rows],
                                    out_path.with_suffix(".png"))
            click.echo(f"{len(front)} frontier profiles -> {out_path}")
        elif mode == "core":
            if profile is None:
                _fail(EXIT_INVALID, "--profile is required for core mode")
            prof = _parse_floats(profile, "--profile")
            if len(prof) != n:
                _fail(EXIT_INVALID, f"--profile needs {n} entries, got {len(prof)}")
            member, witness = core_membership(game, prof, step)
            rational = is_individually_rational(game, prof)
            header = ([f"mu_{i}" for i in range(n)] + ["in_core", "individually_rational",
                      "witness_coalition", "witness_deviation"])
            rows = [list(prof) + [
                member,
                all(rational),
                "" if witness is None else ";".join(str(i) for i in witness[0]),
                "" if witness is None else ";".join(str(v) for v in witness[1]),
            ]]
            write_csv(out_path, header, rows, meta)
            verdict = "in core" if member else f"blocked by coalition {witness[0]}"
            click.echo(f"profile {prof}: {verdict} -> {out_path}")
        else:
            level_values = (_parse_floats(levels, "--levels") if levels
                            else _step_levels(step))
            grid = StrategyGrid(action_levels=tuple(level_values),
                                threshold_levels=tuple(level_values), k=k)
            template = MechanismTemplate(agg=agg, variant=variant)
            report = commitment_equilibria(game, grid, template)
            strong_set = {r.strategy_profile for r in report.strong}
            header = (["profile"] + [f"strategy_{i}" for i in range(n)]
                      + [f"liability_{i}" for i in range(n)]
                      + [f"payoff_{i}" for i in range(n)]
                      + ["welfare", "strong"])
            rows = []
            for record in report.nash:
                descr = [
                    "|".join(f"{a}@{t}" for a, t in
                             ((p.offer.components[0], p.threshold[0])
                              for p in report.strategies[s].points))
                    for s in record.strategy_profile
                ]
                rows.append(
                    [";".join(str(s) for s in record.strategy_profile)]
                    + descr
                    + list(record.liabilities)
                    + list(record.payoffs)
                    + [welfare(record.payoffs), record.strategy_profile in strong_set]
                )
            write_csv(out_path, header, rows, meta)
            click.echo(
                f"{len(report.nash)} Nash / {len(report.strong)} strong profiles "
                f"-> {out_path}"
            )
    except EnumerationGuardError as exc:
        _fail(EXIT_GUARD, str(exc))
    except ValueError as exc:
        _fail(EXIT_INVALID, str(exc))


def _run_one(args) -> Trajectory:
    algo, params, config = args
    game = PublicGoodsGame(params)
    if algo == "br":
        return better_response_dynamics(game, config)
    return policy_gradient_train(game, config)


@main.command("learn")
@click.option("--algo", type=click.Choice(["br", "pg"]), required=True)
@click.option("--seed", type=int, default=0, show_default=True,
              help="Master seed; per-run seeds are split from it.")
@click.option("--runs", type=int, default=1, show_default=True)
@click.option("--seeds", default=None,
              help="Comma-separated explicit seeds (overrides --seed/--runs).")
@click.option("--parallel", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(), default="learn_out", show_default=True)
@click.option("--n", type=int, default=2, show_default=True)
@click.option("--beta", type=float, default=0.09, show_default=True)
@click.option("--gamma", type=float, default=0.3, show_default=True)
@click.option("--step", type=float, default=0.05, show_default=True,
              help="Strategy grid step.")
@click.option("--k", type=int, default=1, show_default=True)
@click.option("--rounds", type=int, default=60, show_default=True,
              help="Max sweeps (br).")
@click.option("--candidates", type=int, default=48, show_default=True,
              help="Random candidates per revision (br).")
@click.option("--episodes", type=int, default=3000, show_default=True,
              help="Training episodes (pg).")
@click.option("--alpha0", type=float, default=0.0, show_default=True,
              help="Initial altruism weight (pg).")
@click.option("--schedule", type=click.Choice(["constantThenZero", "linearDecayThenZero"]),
              default="linearDecayThenZero", show_default=True)
@click.option("--lr", type=float, default=12.0, show_default=True,
              help="Policy gradient learning rate (pg).")
@click.option("--plot", is_flag=True, help="Render welfare curves next to the CSVs.")
def cli_learn(algo, seed, runs, seeds, parallel, out, n, beta, gamma, step, k,
              rounds, candidates, episodes, alpha0, schedule, lr, plot):
    """Run seeded learning experiments; one CSV per run plus a summary."""
    game = _game_from_options(n, beta, gamma)
    if seeds is not None:
        seed_list = [int(s) for s in seeds.split(",") if s.strip() != ""]
    else:
        seed_list = derive_seeds(seed, runs)
    if not seed_list:
        _fail(EXIT_INVALID, "no seeds to run")
    if parallel < 1:
        _fail(EXIT_INVALID, f"--parallel must be >= 1, got {parallel}")

    try:
        level_values = tuple(_step_levels(step))
        grid = StrategyGrid(action_levels=level_values,
                            threshold_levels=level_values, k=k)
        if algo == "br":
            configs = [
                DynamicsConfig(grid=grid, max_rounds=rounds,
                               candidate_samples=candidates, seed=s)
                for s in seed_list
            ]
        else:
            configs = [
                TrainConfig(
                    grid=grid,
                    schedule=AltruismSchedule(kind=schedule, alpha0=alpha0,
                                              total_episodes=episodes),
                    learning_rate=lr,
                    seed=s,
                )
                for s in seed_list
            ]
    except ValueError as exc:
        _fail(EXIT_INVALID, str(exc))

    jobs = [(algo, game.params, c) for c in configs]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            trajectories = list(pool.map(_run_one, jobs))
    else:
        trajectories = [_run_one(job) for job in jobs]

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    player_cols = [f"liability_p{i}" for i in range(n)] + [f"payoff_p{i}" for i in range(n)]
    for traj in trajectories:
        rows = [
            [r.index, r.welfare] + list(r.liabilities) + list(r.payoffs) + [r.alpha]
            for r in traj.records
        ]
        write_csv(
            out_dir / f"run_{traj.seed}.csv",
            ["episode", "welfare"] + player_cols + ["alpha"],
            rows,
            {"seed": traj.seed, "scenarioHash": traj.config_hash},
        )

    optimum = welfare(game.payoffs(game.social_optimum_actions()))
    within = [
        abs(t.terminal_welfare - optimum) <= 0.01 * abs(optimum)
        for t in trajectories
    ]
    summary_rows = [
        ["run", traj.seed, traj.terminal_welfare, traj.converged, hit]
        for traj, hit in zip(trajectories, within)
    ]
    summary_rows.append(
        ["median", "", median(t.terminal_welfare for t in trajectories), "", ""]
    )
    summary_rows.append(
        ["fraction_within_1pct", "", sum(within) / len(within), "", ""]
    )
    write_csv(
        out_dir / "summary.csv",
        ["record", "seed", "terminal_welfare", "converged", "within_1pct"],
        summary_rows,
        {"seed": seed if seeds is None else "-",
         "scenarioHash": trajectories[0].config_hash,
         "optimum": optimum},
    )
    if plot:
        from . import plots
        disagreement = welfare(game.payoffs(game.disagreement_actions()))
        plots.welfare_figure(trajectories, out_dir / "welfare.png",
                             optimum=optimum, disagreement=disagreement)
    click.echo(
        f"{len(trajectories)} runs -> {out_dir} "
        f"(median terminal welfare "
        f"{median(t.terminal_welfare for t in trajectories):.6f})"
    )


@main.command("repro-appendix")
@click.option("--n", type=int, default=2, show_default=True)
@click.option("--beta", type=float, default=0.09, show_default=True)
@click.option("--gamma", type=float, default=0.3, show_default=True)
def cli_repro_appendix(n, beta, gamma):
    """Recompute the worked public-goods numbers and check them."""
    game = _game_from_options(n, beta, gamma)
    params = game.params
    reference = (n, beta, gamma) == (2, 0.09, 0.3)
    tol = 1e-9

    mu_ne = pg_nash(params)
    mu_opt = pg_social_optimum(params)
    checks = []
    if reference:
        checks.append(("mu_NE", mu_ne, 0.3))
        checks.append(("mu_opt", mu_opt, 0.6))
    else:
        checks.append(("mu_NE", mu_ne, min(max(beta / gamma, 0.0), 1.0)))
        checks.append(("mu_opt", mu_opt, min(max(n * beta / gamma, 0.0), 1.0)))

    try:
        pi_ne, pi_opt = pg_closed_form_payoffs(params)
        direct_ne = game.payoffs([mu_ne] * n)[0]
        direct_opt = game.payoffs([mu_opt] * n)[0]
        if reference:
            checks.append(("N*Pi_NE", n * pi_ne, 1.442))
            checks.append(("N*Pi_opt", n * pi_opt, 1.496))
        else:
            checks.append(("N*Pi_NE", n * pi_ne, n * direct_ne))
            checks.append(("N*Pi_opt", n * pi_opt, n * direct_opt))
    except Exception:
        pi_opt = None
        click.echo("closed forms skipped (clipped regime)")

    grid = StrategyGrid(action_levels=(mu_opt,), threshold_levels=(mu_opt,), k=1)
    ccf = grid.strategies()[0]
    outcome = evaluate_outcome(game, [ccf] * n, MechanismTemplate())
    expected_outcome = tuple([mu_opt] * n)
    checks.append(("mechanism_outcome", outcome.liabilities, expected_outcome))
    if pi_opt is not None:
        expected_welfare = 2 * pi_opt if reference else n * pi_opt
        checks.append(("mechanism_welfare", welfare(outcome.payoffs), expected_welfare))

    failed = 0
    for name, got, want in checks:
        if isinstance(got, tuple):
            ok = len(got) == len(want) and all(abs(g - w) <= tol for g, w in zip(got, want))
        else:
            ok = abs(got - want) <= tol
        status = "PASS" if ok else "FAIL"
        failed += not ok
        click.echo(f"{status}  {name:<18} got={got} expected={want}")
    if failed:
        _fail(1, f"{failed} check(s) failed")


if __name__ == "__main__":
    main()
