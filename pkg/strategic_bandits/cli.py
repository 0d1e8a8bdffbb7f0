"""
Command-line driver: simulate, sweep, bound, verify, plot, presets.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error,
3 verification failed.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from strategic_bandits.config import get_settings
from strategic_bandits.controllers.bound_controller import BoundController
from strategic_bandits.controllers.plot_controller import PlotController
from strategic_bandits.controllers.preset_controller import PresetController
from strategic_bandits.controllers.simulation_controller import SimulationController, with_replicas
from strategic_bandits.controllers.verification_controller import EXPECTED, VerificationController
from strategic_bandits.errors import ConfigError, StrategicBanditError, TooLarge, VerificationFailed
from strategic_bandits.models.policies import PolicyKind
from strategic_bandits.models.presets import get_preset
from strategic_bandits.schemas.scenario import ScenarioConfig, load_scenario
from strategic_bandits.storage.results_store import ResultsStore

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_VERIFY = 3

POLICY_CHOICES = [kind.value for kind in PolicyKind]


def _list_of(cast: Callable) -> Callable[[str], List]:
    def parse(text: str) -> List:
        try:
            return [cast(item.strip()) for item in text.split(",") if item.strip()]
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e)) from e

    return parse


def _add_scenario_args(parser: argparse.ArgumentParser, default_preset: Optional[str] = None) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--preset", default=default_preset, help="built-in scenario tag")
    source.add_argument("--scenario", type=Path, help="TOML scenario file")
    parser.add_argument("--policy", choices=POLICY_CHOICES, help="selection policy")
    parser.add_argument("--T", type=int, help="horizon")
    parser.add_argument("--reps", type=int, help="repetitions")
    parser.add_argument("--seed", type=int, help="base seed")
    parser.add_argument("--L", type=float, help="RH-UCB subsample factor")
    parser.add_argument("--l", type=float, help="S-UCB subsample ratio")
    parser.add_argument("--coupled", action=argparse.BooleanOptionalAction, default=None,
                        help="share reward streams across policies")
    parser.add_argument("--tie-break", choices=["uniform", "first"], help="tie-breaking rule")
    parser.add_argument("--fair-clock", choices=["local", "global"], help="clock of Fair(UCB1)'s inner index")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="output directory (default: SB_OUT)")
    common.add_argument("--log-level", help="logging level (default: SB_LOG_LEVEL)")

    parser = argparse.ArgumentParser(prog="strategic-bandits", description="Replication-proof bandit experiments")
    verbs = parser.add_subparsers(dest="verb", required=True)

    simulate = verbs.add_parser("simulate", parents=[common], help="run R episodes and persist the aggregate")
    _add_scenario_args(simulate)
    simulate.add_argument("--replicas", type=int, help="replicate --agent's arms this many times")
    simulate.add_argument("--agent", type=int, default=1, help="agent whose arms --replicas scales")
    simulate.add_argument("--threads", type=int, help="worker processes (default: SB_THREADS)")

    sweep_cmd = verbs.add_parser("sweep", parents=[common], help="sweep replica counts or policies")
    _add_scenario_args(sweep_cmd)
    sweep_cmd.add_argument("--replicas", type=_list_of(int), help="comma-separated replica counts")
    sweep_cmd.add_argument("--agent", type=int, default=1, help="agent whose arms are replicated")
    sweep_cmd.add_argument("--policies", type=_list_of(PolicyKind), help="comma-separated policies")
    sweep_cmd.add_argument("--threads", type=int, help="worker processes (default: SB_THREADS)")

    bound = verbs.add_parser("bound", parents=[common], help="evaluate closed-form regret bounds")
    _add_scenario_args(bound)

    verify = verbs.add_parser("verify", parents=[common], help="exact replication certificates on a toy instance")
    _add_scenario_args(verify, default_preset="toy")
    verify.add_argument("--tmax", type=int, default=4, help="enumeration horizon (at most 6)")

    plot = verbs.add_parser("plot", parents=[common], help="render persisted results as SVG plus tidy CSV")
    plot.add_argument("inputs", nargs="*", type=Path, help="result files (CSV, JSON or stem)")
    plot.add_argument("--name", help="output file stem")
    plot.add_argument("--title", default="", help="figure title")

    verbs.add_parser("presets", parents=[common], help="list built-in scenarios")
    return parser


def resolve_config(args: argparse.Namespace) -> ScenarioConfig:
    if args.scenario is not None:
        config = load_scenario(args.scenario)
    elif args.preset is not None:
        config = get_preset(args.preset)
    else:
        raise ConfigError("one of --preset or --scenario is required")
    return config.with_overrides(
        horizon=args.T,
        repetitions=args.reps,
        base_seed=args.seed,
        coupled=args.coupled,
        kind=args.policy,
        L=args.L,
        l=args.l,
        tie_break=args.tie_break,
        fair_clock=args.fair_clock,
    )


def cmd_simulate(args: argparse.Namespace, store: ResultsStore) -> int:
    config = resolve_config(args)
    if args.replicas is not None:
        config = with_replicas(config, args.agent, args.replicas)
    result = SimulationController(store, args.threads).run_experiment(config)
    print(f"{result.name}__{result.policy}: final regret {result.final_regret_mean:.6g} ± {result.final_regret_std:.6g}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, store: ResultsStore) -> int:
    config = resolve_config(args)
    policies = args.policies if args.policies is not None else [config.policy.kind]
    controller = SimulationController(store, args.threads)
    if args.replicas is not None:
        results = []
        for kind in policies:
            results += controller.sweep(config.with_overrides(kind=kind.value), args.replicas, agent_id=args.agent)
    else:
        results = controller.sweep(config, policies)
    for r in results:
        revenue = ", ".join(f"{a.agent_id}:{a.final_revenue_mean:.6g}" for a in r.agents)
        print(f"{r.name}__{r.policy}: regret {r.final_regret_mean:.6g} ± {r.final_regret_std:.6g}; revenue {revenue}")
    return EXIT_OK


def cmd_bound(args: argparse.Namespace, store: ResultsStore) -> int:
    config = resolve_config(args)
    report = BoundController().evaluate(config)
    for message in report.warnings:
        logger.warning(message)
    print(f"scenario {report.scenario}: T={report.horizon}, L={report.L:g}, mu*={report.mu_star:g}, c={report.best_fraction:.6g}")
    print("agent  gap       internal gaps")
    for idx, gap in enumerate(report.agent_gaps, start=1):
        internal = ", ".join(f"{g:g}" for g in report.internal_gaps[idx - 1])
        print(f"{idx:<6} {gap:<9.6g} [{internal}]")
    print(f"hucb_bound  {report.hucb_bound:.6f}")
    print(f"rhucb_bound {report.rhucb_leading:.6f} + {report.rhucb_remainder}")
    for term in report.skipped_terms:
        print(f"skipped: {term}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, store: ResultsStore) -> int:
    config = resolve_config(args)
    controller = VerificationController()
    policies = list(EXPECTED) + [PolicyKind.SUCB]
    reports = controller.certify(config, args.tmax, policies, tie_break=config.policy.tie_break,
                                 path_limit=get_settings().path_limit)
    controller.write(reports, store.out_dir)
    for report in reports:
        expected = EXPECTED.get(PolicyKind(report.policy))
        note = f"expected {expected.value}" if expected is not None else "informational"
        print(f"{report.policy:<7} {report.verdict.value:<10} ({note})")
    controller.check(reports)
    return EXIT_OK


def cmd_plot(args: argparse.Namespace, store: ResultsStore) -> int:
    controller = PlotController(store)
    results = controller.load(args.inputs)
    stem = store.out_dir / (args.name or f"{results[0].name}_regret")
    svg_path, csv_path = controller.render(results, stem, title=args.title)
    print(f"{svg_path}\n{csv_path}")
    return EXIT_OK


def cmd_presets(args: argparse.Namespace, store: ResultsStore) -> int:
    for p in PresetController().list_presets():
        print(f"{p.name:<10} agents={p.agents} arms={p.arms} originals={p.originals} "
              f"T={p.horizon} R={p.repetitions} L={p.L:g}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "bound": cmd_bound,
    "verify": cmd_verify,
    "plot": cmd_plot,
    "presets": cmd_presets,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    settings = get_settings()
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    store = ResultsStore(args.out)
    try:
        return COMMANDS[args.verb](args, store)
    except VerificationFailed as e:
        logger.error(f"Verification failed: {str(e)}")
        return EXIT_VERIFY
    except (ConfigError, TooLarge, FileNotFoundError, ValueError) as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except (StrategicBanditError, OSError) as e:
        logger.error(f"Runtime failure: {str(e)}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
