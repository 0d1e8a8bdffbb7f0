"""
Scenario configuration: pydantic models plus the TOML scenario-file loader.
"""
from __future__ import annotations

import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from strategic_bandits.errors import ConfigError
from strategic_bandits.models.instance import AgentProfile
from strategic_bandits.models.metrics import DiscountSequence, UtilityFunction
from strategic_bandits.models.policies import PolicyKind


class PolicySpec(BaseModel):
    kind: PolicyKind = Field(PolicyKind.HUCB, description="Selection policy")
    L: float = Field(1.0, gt=0, description="RH-UCB subsample factor (|B_i| = ceil(L ln T))")
    l: Optional[float] = Field(None, gt=0, description="S-UCB ratio; defaults to the number of originals")
    fair_clock: Literal["local", "global"] = Field("local", description="Clock of Fair(UCB1)'s inner index")
    tie_break: Literal["uniform", "first"] = Field("uniform", description="Tie-breaking rule")


class AgentSpec(BaseModel):
    means: List[float] = Field(..., min_length=1, description="Bernoulli means of the agent's originals")
    copies: List[int] = Field(..., min_length=1, description="Copy count per original")

    @model_validator(mode="after")
    def _check(self) -> "AgentSpec":
        if len(self.means) != len(self.copies):
            raise ValueError(f"{len(self.means)} means but {len(self.copies)} copy counts")
        if any(not 0.0 <= m <= 1.0 for m in self.means):
            raise ValueError("means must lie in [0, 1]")
        if any(c < 0 for c in self.copies):
            raise ValueError("copy counts must be non-negative")
        if sum(self.copies) < 1:
            raise ValueError("an agent must register at least one arm")
        return self


class DiscountSpec(BaseModel):
    kind: Literal["ones", "harmonic", "geometric", "explicit"] = "ones"
    rho: float = Field(1.0, gt=0, le=1)
    gammas: Optional[List[float]] = None

    def build(self, horizon: int) -> DiscountSequence:
        if self.kind == "ones":
            return DiscountSequence.ones(horizon)
        if self.kind == "harmonic":
            return DiscountSequence.harmonic(horizon)
        if self.kind == "geometric":
            return DiscountSequence.geometric(horizon, self.rho)
        if not self.gammas or len(self.gammas) < horizon:
            raise ConfigError(f"explicit discount needs at least {horizon} weights")
        return DiscountSequence(self.gammas[:horizon])


class UtilitySpec(BaseModel):
    shape: Literal["identity", "concave", "convex", "table"] = "identity"
    p: float = 1.0
    table: List[Tuple[float, float]] = Field(default_factory=list)

    def build(self) -> UtilityFunction:
        return UtilityFunction(shape=self.shape, p=self.p, table=tuple(self.table))


class ScenarioConfig(BaseModel):
    name: str = Field(..., min_length=1, description="Scenario name; used for result file names")
    horizon: int = Field(..., ge=1, description="Horizon T")
    repetitions: int = Field(100, ge=1, description="Repetitions R")
    base_seed: int = Field(0, ge=0)
    coupled: bool = Field(True, description="Share reward streams across policies")
    checkpoints: int = Field(200, ge=2, description="Geometric trajectory checkpoints")
    policy: PolicySpec = Field(default_factory=PolicySpec)
    preset: Optional[str] = Field(None, description="Preset tag supplying agents when none are listed")
    agents: List[AgentSpec] = Field(default_factory=list)
    discount: DiscountSpec = Field(default_factory=DiscountSpec)
    utility: UtilitySpec = Field(default_factory=UtilitySpec)

    @field_validator("name")
    @classmethod
    def _safe_name(cls, value: str) -> str:
        if not re.fullmatch(r"[A-Za-z0-9_-]+", value):
            raise ValueError("name may only contain letters, digits, '_' and '-'")
        return value

    @model_validator(mode="after")
    def _expand(self) -> "ScenarioConfig":
        if not self.agents:
            if self.preset is None:
                raise ValueError("either agents or a preset tag is required")
            from strategic_bandits.models.presets import preset_agents

            self.agents = preset_agents(self.preset)
        if self.horizon < len(self.agents):
            raise ValueError(f"horizon {self.horizon} is smaller than the number of agents {len(self.agents)}")
        self.discount.build(self.horizon).check_proper(len(self.agents))
        return self

    def profiles(self) -> List[AgentProfile]:
        return [AgentProfile.from_means(i, a.means, a.copies) for i, a in enumerate(self.agents, start=1)]

    @property
    def original_count(self) -> int:
        return sum(len(a.means) for a in self.agents)

    @property
    def subsample_ratio(self) -> float:
        return self.policy.l if self.policy.l is not None else float(self.original_count)

    def with_overrides(self, **overrides: Any) -> "ScenarioConfig":
        """Apply CLI-style overrides (None values are ignored) and re-validate."""
        data = self.model_dump()
        for key, value in overrides.items():
            if value is None:
                continue
            if key in ("kind", "L", "l", "fair_clock", "tie_break"):
                data["policy"][key] = value
            else:
                data[key] = value
        try:
            return ScenarioConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigError(_first_error(e)) from e


_SECTION = re.compile(r"^\s*\[\[?\s*([A-Za-z_]+)\s*\]\]?\s*(#.*)?$")
_TOML_LINE = re.compile(r"at line (\d+)")
_SCENARIO_KEYS = {"name", "horizon", "repetitions", "seed", "base_seed", "coupled", "checkpoints"}


def _first_error(error: ValidationError) -> str:
    first = error.errors()[0]
    where = ".".join(str(part) for part in first["loc"])
    return f"{where}: {first['msg']}" if where else first["msg"]


def _section_lines(text: str) -> Dict[str, List[int]]:
    lines: Dict[str, List[int]] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        match = _SECTION.match(line)
        if match:
            lines.setdefault(match.group(1), []).append(number)
    return lines


def _line_for(loc: Tuple[Any, ...], sections: Dict[str, List[int]]) -> Optional[int]:
    if not loc:
        return sections.get("scenario", [None])[0]
    head = loc[0]
    if head == "agents" and len(loc) > 1 and isinstance(loc[1], int):
        blocks = sections.get("agent", [])
        return blocks[loc[1]] if loc[1] < len(blocks) else None
    if head in ("policy", "discount", "utility"):
        return sections.get(head, [None])[0]
    if head == "preset":
        return sections.get("agents", [None])[0]
    return sections.get("scenario", [None])[0]


def parse_scenario(text: str) -> ScenarioConfig:
    """Parse a scenario document; errors carry the offending section's line."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        match = _TOML_LINE.search(str(e))
        raise ConfigError(str(e), line=int(match.group(1)) if match else None) from e

    sections = _section_lines(text)
    scenario = dict(doc.get("scenario", {}))
    unknown = set(scenario) - _SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown [scenario] keys: {sorted(unknown)}", line=sections.get("scenario", [None])[0])
    if "seed" in scenario:
        scenario["base_seed"] = scenario.pop("seed")
    data: Dict[str, Any] = dict(scenario)
    for key in ("policy", "discount", "utility"):
        if key in doc:
            data[key] = doc[key]
    if "preset" in doc.get("agents", {}):
        data["preset"] = doc["agents"]["preset"]
    if "agent" in doc:
        data["agents"] = doc["agent"]

    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(_first_error(e), line=_line_for(tuple(first["loc"]), sections)) from e


def load_scenario(path: Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read scenario file {path}: {e}") from e
    return parse_scenario(text)
