"""
Desk-scale reproduction of the replication experiments.
Runs the regret and revenue comparisons on the built-in presets, logs every
check and exits non-zero when an ordering does not hold.
"""
import logging
import math
import os
import sys

import numpy as np

from strategic_bandits.controllers.simulation_controller import SimulationController
from strategic_bandits.models.instance import build_instance, summarize_gaps
from strategic_bandits.models.metrics import hucb_bound
from strategic_bandits.models.presets import fig1_preset, make_preset
from strategic_bandits.storage.results_store import ResultsStore

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)

HORIZON = int(os.getenv("SB_FIG_HORIZON", str(10**5)))
REPETITIONS = int(os.getenv("SB_FIG_REPS", "100"))
REPLICAS = [1, 10, 100, 1000]
SIGMAS = 3.0


def _se(std: float, reps: int) -> float:
    return std / math.sqrt(reps)


def _below(a, b) -> bool:
    """a's final regret is below b's by more than SIGMAS joint standard errors."""
    gap = b.final_regret_mean - a.final_regret_mean
    return gap > SIGMAS * math.hypot(a.final_regret_stderr, b.final_regret_stderr)


def _slope(rounds, values) -> float:
    return float(np.polyfit(np.log(rounds), np.log(values), 1)[0])


def check_hucb_bound(store: ResultsStore) -> bool:
    logger.info("Checking H-UCB regret against its closed-form bound on fig1...")
    short = fig1_preset(1, horizon=10**4, repetitions=REPETITIONS, policy="hucb")
    bound = hucb_bound(summarize_gaps(build_instance(short.profiles())), 10**4)
    at_short = SimulationController(store).run_experiment(short)
    at_long = SimulationController(store).run_experiment(fig1_preset(1, horizon=10**5, repetitions=REPETITIONS, policy="hucb"))
    ok = at_short.final_regret_mean <= bound and at_long.final_regret_mean <= 3 * at_short.final_regret_mean
    logger.info(
        f"regret(T=1e4)={at_short.final_regret_mean:.2f} bound={bound:.2f}; "
        f"regret(T=1e5)={at_long.final_regret_mean:.2f}: {'ok' if ok else 'FAILED'}"
    )
    return ok


def check_replication_revenue(store: ResultsStore) -> bool:
    logger.info("Checking the 0.5-agent's revenue as it replicates...")
    ok = True
    for policy in ("ucb1", "hucb", "rhucb"):
        config = fig1_preset(1, horizon=HORIZON, repetitions=REPETITIONS, policy=policy)
        results = SimulationController(store).sweep(config, REPLICAS, agent_id=1)
        means = [r.agents[0].final_revenue_mean for r in results]
        errors = [_se(r.agents[0].final_revenue_std, r.repetitions) for r in results]
        if policy == "ucb1":
            passed = all(b > a for a, b in zip(means, means[1:])) and (
                means[-1] - means[0] > SIGMAS * math.hypot(errors[0], errors[-1])
            )
        else:
            passed = all(
                abs(means[j] - means[k]) <= SIGMAS * math.hypot(errors[j], errors[k])
                for j in range(len(means))
                for k in range(j + 1, len(means))
            )
        logger.info(f"{policy}: revenue by replicas {dict(zip(REPLICAS, np.round(means, 2)))}: {'ok' if passed else 'FAILED'}")
        ok &= passed
    return ok


def _compare(tag: str, policies, store: ResultsStore):
    config = make_preset(tag, horizon=HORIZON, repetitions=REPETITIONS)
    return {r.policy: r for r in SimulationController(store).sweep(config, list(policies))}


def check_fig2a(store: ResultsStore) -> bool:
    logger.info("Checking the regret ordering with one heavy replicator...")
    r = _compare("fig2a", ("hucb", "rhucb", "sucb", "ucb1"), store)
    ok = _below(r["hucb"], r["rhucb"]) and _below(r["rhucb"], r["sucb"]) and _below(r["sucb"], r["ucb1"])
    finals = {k: round(v.final_regret_mean, 1) for k, v in r.items()}
    logger.info(f"final regret {finals}: {'ok' if ok else 'FAILED'}")
    return ok


def check_fig2c(store: ResultsStore) -> bool:
    logger.info("Checking the regret ordering with replicators and partial replicators...")
    r = _compare("fig2c", ("hucb", "rhucb", "sucb"), store)
    hucb = r["hucb"]
    rounds = np.asarray(hucb.checkpoints)
    tail = rounds >= hucb.horizon / 10
    slope = _slope(rounds[tail], np.asarray(hucb.mean_regret)[tail])
    ok = _below(r["rhucb"], r["hucb"]) and _below(r["rhucb"], r["sucb"]) and slope >= 0.9
    logger.info(f"final decade H-UCB slope {slope:.3f}: {'ok' if ok else 'FAILED'}")
    return ok


def check_rhucb_slope(store: ResultsStore) -> bool:
    logger.info("Checking RH-UCB's growth rate with replicators...")
    horizons = [10**3, 10**4, 10**5]
    finals = []
    for T in horizons:
        config = make_preset("fig2b", horizon=T, repetitions=REPETITIONS, policy="rhucb", name=f"fig2b_T{T}")
        finals.append(SimulationController(store).run_experiment(config).final_regret_mean)
    slope = _slope(horizons, finals)
    ok = slope <= 0.75
    logger.info(f"log-log slope {slope:.3f}: {'ok' if ok else 'FAILED'}")
    return ok


def main():
    """Run every check and exit 1 if any fails."""
    store = ResultsStore()
    logger.info(f"Reproducing figures at T={HORIZON}, R={REPETITIONS} into {store.out_dir}")
    checks = [check_hucb_bound, check_replication_revenue, check_fig2a, check_fig2c, check_rhucb_slope]
    failed = [check.__name__ for check in checks if not check(store)]
    if failed:
        logger.error(f"Failed checks: {', '.join(failed)}")
        sys.exit(1)
    logger.info("All figure checks passed.")


if __name__ == "__main__":
    main()
