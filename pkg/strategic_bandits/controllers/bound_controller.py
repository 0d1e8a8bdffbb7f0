import logging
from typing import Optional

from strategic_bandits.models.instance import build_instance, summarize_gaps
from strategic_bandits.models.metrics import hucb_bound, rhucb_bound
from strategic_bandits.schemas.results import BoundReport
from strategic_bandits.schemas.scenario import ScenarioConfig

logger = logging.getLogger(__name__)


class BoundController:
    """
    Controller for evaluating closed-form regret bounds on a scenario
    """

    def evaluate(self, config: ScenarioConfig, horizon: Optional[int] = None, L: Optional[float] = None) -> BoundReport:
        """
        Evaluate the hierarchical and robust hierarchical bounds

        Args:
            config: Scenario whose agents define the instance
            horizon: Horizon T (defaults to the scenario's)
            L: Subsample factor (defaults to the scenario's policy L)

        Returns:
            Bound report with the gap table and any precondition warnings
        """
        T = horizon or config.horizon
        L = L if L is not None else config.policy.L
        if T < 2:
            raise ValueError("bounds need T >= 2")
        gaps = summarize_gaps(build_instance(config.profiles()))
        robust = rhucb_bound(gaps, T, L)
        warnings = []
        if not robust.precondition_met:
            warnings.append(f"L={L} < 1/c={1.0 / gaps.best_fraction:.4f}: robust bound precondition violated")
        return BoundReport(
            scenario=config.name,
            horizon=T,
            L=L,
            mu_star=gaps.mu_star,
            best_fraction=gaps.best_fraction,
            agent_gaps=list(gaps.per_agent_gap),
            internal_gaps=[list(g) for g in gaps.internal_gap],
            hucb_bound=hucb_bound(gaps, T),
            rhucb_leading=robust.leading,
            rhucb_per_agent=list(robust.per_agent),
            rhucb_remainder=robust.remainder,
            skipped_terms=list(robust.skipped),
            precondition_met=robust.precondition_met,
            warnings=warnings,
        )
