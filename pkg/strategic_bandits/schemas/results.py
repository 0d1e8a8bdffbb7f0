from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class AgentSummary(BaseModel):
    agent_id: int = Field(..., description="Agent id (1-based)")
    revenue_mean: List[float] = Field(..., description="Mean discounted revenue at each checkpoint")
    revenue_std: List[float] = Field(..., description="Standard deviation of revenue at each checkpoint")
    final_revenue_mean: float = Field(..., description="Mean final revenue v_i")
    final_revenue_std: float = Field(..., description="Standard deviation of final revenue")
    final_count_mean: float = Field(..., description="Mean final selection count N_{S_i,T}")
    utility_mean: float = Field(..., description="Sample mean of U(v_i)")
    utility_lower: float = Field(..., description="Lower end of the 95% normal interval for E[U(v_i)]")
    utility_upper: float = Field(..., description="Upper end of the 95% normal interval for E[U(v_i)]")


class AggregateResult(BaseModel):
    name: str = Field(..., description="Scenario name")
    policy: str = Field(..., description="Policy kind")
    horizon: int = Field(..., description="Horizon T")
    repetitions: int = Field(..., description="Number of repetitions")
    checkpoints: List[int] = Field(..., description="Rounds at which trajectories are stored")
    mean_regret: List[float] = Field(..., description="Mean cumulative pseudo-regret per checkpoint")
    std_regret: List[float] = Field(..., description="Standard deviation of regret per checkpoint")
    final_regret_mean: float = Field(..., description="Mean final regret (exact)")
    final_regret_std: float = Field(..., description="Standard deviation of final regret")
    agents: List[AgentSummary] = Field(..., description="Per-agent revenue summaries")
    seeds: List[int] = Field(..., description="Episode seeds in rep_index order")
    wall_clock: float = Field(..., description="Wall-clock seconds for the whole experiment")
    metadata: Dict[str, Any] = Field(default_factory=dict, description="Policy hyperparameters and instance facts")

    @property
    def final_regret_stderr(self) -> float:
        return self.final_regret_std / self.repetitions**0.5


class ResultSidecar(BaseModel):
    """JSON written next to each results CSV."""

    config: Dict[str, Any] = Field(..., description="Full scenario configuration echo")
    build: str = Field(..., description="git describe of the build, or 'unknown'")
    result: AggregateResult


class ResultListing(BaseModel):
    name: str
    policy: str
    horizon: int
    repetitions: int
    final_regret_mean: float


class BoundReport(BaseModel):
    scenario: str
    horizon: int
    L: float
    mu_star: float
    best_fraction: float
    agent_gaps: List[float]
    internal_gaps: List[List[float]]
    hucb_bound: float
    rhucb_leading: float
    rhucb_per_agent: List[float]
    rhucb_remainder: str
    skipped_terms: List[str]
    precondition_met: bool
    warnings: List[str] = Field(default_factory=list)


class PresetSummary(BaseModel):
    name: str
    agents: int
    arms: int
    originals: int
    horizon: int
    repetitions: int
    L: float
    l: Optional[float]
