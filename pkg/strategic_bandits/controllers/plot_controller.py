"""
Static figures: mean cumulative regret with a one-sigma band per policy.
"""
import logging
from pathlib import Path
from typing import List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from strategic_bandits.schemas.results import AggregateResult  # noqa: E402
from strategic_bandits.storage.results_store import ResultsStore  # noqa: E402

logger = logging.getLogger(__name__)

POLICY_LABELS = {
    "ucb1": "UCB1",
    "fair": "Fair(UCB1)",
    "sucb": "S-UCB",
    "hucb": "H-UCB",
    "rhucb": "RH-UCB",
    "prhucb": "PRH-UCB",
}


def tidy_frame(results: Sequence[AggregateResult]) -> pd.DataFrame:
    """Long format: one row per (policy, checkpoint)."""
    frames = [
        pd.DataFrame(
            {
                "scenario": r.name,
                "policy": r.policy,
                "round": r.checkpoints,
                "mean_regret": r.mean_regret,
                "std_regret": r.std_regret,
            }
        )
        for r in results
    ]
    return pd.concat(frames, ignore_index=True)


class PlotController:
    """
    Controller for rendering persisted results
    """

    def __init__(self, store: ResultsStore):
        self.store = store

    def load(self, paths: Sequence[Path]) -> List[AggregateResult]:
        """
        Raises:
            FileNotFoundError: If an input result is missing
        """
        if not paths:
            raise FileNotFoundError("no result files given")
        return [self.store.load(p).result for p in paths]

    def render(self, results: Sequence[AggregateResult], out_stem: Path, title: str = "") -> Tuple[Path, Path]:
        """
        Write `<out_stem>.svg` and the tidy `<out_stem>.csv`

        Returns:
            (svg path, csv path)
        """
        out_stem = Path(out_stem)
        svg_path = out_stem.with_suffix(".svg")
        csv_path = out_stem.with_suffix(".csv")
        out_stem.parent.mkdir(parents=True, exist_ok=True)

        fig, ax = plt.subplots(figsize=(6, 4))
        for r in results:
            rounds = np.asarray(r.checkpoints)
            mean = np.asarray(r.mean_regret)
            std = np.asarray(r.std_regret)
            line = ax.plot(rounds, mean, label=POLICY_LABELS.get(r.policy, r.policy))[0]
            ax.fill_between(rounds, mean - std, mean + std, color=line.get_color(), alpha=0.2)
        ax.set_xlabel("round t")
        ax.set_ylabel("cumulative regret")
        ax.set_title(title or results[0].name)
        ax.legend(loc="upper left", numpoints=1)
        try:
            with plt.rc_context({"svg.fonttype": "none"}):
                fig.savefig(svg_path, format="svg", bbox_inches="tight")
            tidy_frame(results).to_csv(csv_path, index=False, float_format="%.17g")
        except OSError as e:
            logger.error(f"Failed to write figure {svg_path}: {str(e)}")
            raise OSError(f"cannot write figure to {svg_path}: {e}") from e
        finally:
            plt.close(fig)
        logger.info(f"Wrote {svg_path} with {len(results)} series")
        return svg_path, csv_path
