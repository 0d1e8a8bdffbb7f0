"""
Result persistence for the experiment harness.
Each AggregateResult is written as `<name>__<policy>.csv` plus a JSON sidecar.
"""
import logging
import subprocess
from pathlib import Path
from typing import List, Optional, Union

import pandas as pd

from strategic_bandits.config import get_settings
from strategic_bandits.schemas.results import AggregateResult, ResultListing, ResultSidecar
from strategic_bandits.schemas.scenario import ScenarioConfig

logger = logging.getLogger(__name__)


def git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=Path(__file__).resolve().parent,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


def aggregate_frame(result: AggregateResult) -> pd.DataFrame:
    columns = {
        "round": result.checkpoints,
        "mean_regret": result.mean_regret,
        "std_regret": result.std_regret,
    }
    for agent in result.agents:
        columns[f"revenue_{agent.agent_id}_mean"] = agent.revenue_mean
        columns[f"revenue_{agent.agent_id}_std"] = agent.revenue_std
    return pd.DataFrame(columns)


class ResultsStore:
    """File-backed store rooted at an output directory (SB_OUT by default)."""

    def __init__(self, out_dir: Optional[Union[str, Path]] = None):
        self.out_dir = Path(out_dir) if out_dir is not None else get_settings().out_dir

    def stem(self, result: AggregateResult) -> str:
        return f"{result.name}__{result.policy}"

    def save(self, result: AggregateResult, config: ScenarioConfig) -> Path:
        """Write CSV and JSON sidecar; returns the CSV path."""
        csv_path = self.out_dir / f"{self.stem(result)}.csv"
        json_path = csv_path.with_suffix(".json")
        sidecar = ResultSidecar(config=config.model_dump(mode="json"), build=git_describe(), result=result)
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            aggregate_frame(result).to_csv(csv_path, index=False, float_format="%.17g")
            json_path.write_text(sidecar.model_dump_json(indent=2), encoding="utf-8")
        except OSError as e:
            logger.error(f"Failed to write results to {csv_path}: {str(e)}")
            raise OSError(f"cannot write results to {csv_path}: {e}") from e
        logger.info(f"Wrote {csv_path} and {json_path.name}")
        return csv_path

    def load(self, path: Union[str, Path]) -> ResultSidecar:
        """Load a sidecar given its CSV, JSON or bare stem path."""
        path = Path(path)
        if path.suffix != ".json":
            path = path.with_suffix(".json") if path.suffix else path.parent / f"{path.name}.json"
        if not path.is_absolute() and not path.exists():
            path = self.out_dir / path
        try:
            return ResultSidecar.model_validate_json(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise FileNotFoundError(f"cannot read results {path}: {e}") from e

    def load_frame(self, path: Union[str, Path]) -> pd.DataFrame:
        return pd.read_csv(Path(path), float_precision="round_trip")

    def list(self) -> List[ResultListing]:
        if not self.out_dir.exists():
            return []
        listings = []
        for json_path in sorted(self.out_dir.glob("*__*.json")):
            try:
                result = self.load(json_path).result
            except (ValueError, OSError) as e:
                logger.warning(f"Skipping unreadable result {json_path}: {str(e)}")
                continue
            listings.append(
                ResultListing(
                    name=self.stem(result),
                    policy=result.policy,
                    horizon=result.horizon,
                    repetitions=result.repetitions,
                    final_regret_mean=result.final_regret_mean,
                )
            )
        return listings
