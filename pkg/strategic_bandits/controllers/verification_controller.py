import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from strategic_bandits.errors import VerificationFailed
from strategic_bandits.models.oracle import PronenessReport, Verdict, proneness_certificate
from strategic_bandits.models.policies import PolicyKind
from strategic_bandits.schemas.scenario import ScenarioConfig

logger = logging.getLogger(__name__)

# Expected certificate verdicts; S-UCB is reported without an expectation.
EXPECTED: Dict[PolicyKind, Verdict] = {
    PolicyKind.UCB1: Verdict.PRONE,
    PolicyKind.FairUCB1: Verdict.INVARIANT,
    PolicyKind.HUCB: Verdict.INVARIANT,
    PolicyKind.RHUCB: Verdict.INVARIANT,
    PolicyKind.PRHUCB: Verdict.INVARIANT,
}


class VerificationController:
    """
    Controller for exact replication-proneness / proofness certificates
    """

    def certify(
        self,
        config: ScenarioConfig,
        t_max: int,
        policies: Sequence[PolicyKind] = tuple(EXPECTED),
        tie_break: str = "uniform",
        path_limit: Optional[int] = None,
    ) -> List[PronenessReport]:
        """
        Build one certificate per policy

        Raises:
            TooLarge: If exact enumeration exceeds the path guard
        """
        kwargs = {
            "L": config.policy.L,
            "l": config.subsample_ratio,
            "tie_break": tie_break,
            "fair_clock": config.policy.fair_clock,
        }
        if path_limit is not None:
            kwargs["path_limit"] = path_limit
        reports = []
        for kind in policies:
            report = proneness_certificate(config.profiles(), kind, t_max, **kwargs)
            logger.info(f"Certificate for {report.policy}: {report.verdict.value}")
            reports.append(report)
        return reports

    def check(self, reports: Sequence[PronenessReport]) -> None:
        """
        Raises:
            VerificationFailed: If any certificate misses its expected verdict
        """
        failures = []
        for report in reports:
            expected = EXPECTED.get(PolicyKind(report.policy))
            if expected is not None and report.verdict is not expected:
                failures.append(f"{report.policy}: expected {expected.value}, got {report.verdict.value}")
        if failures:
            raise VerificationFailed("; ".join(failures))

    def write(self, reports: Sequence[PronenessReport], out_dir: Path) -> Path:
        out_dir = Path(out_dir)
        path = out_dir / "certificate.json"
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps([r.to_dict() for r in reports], indent=2), encoding="utf-8")
        except OSError as e:
            raise OSError(f"cannot write certificate to {path}: {e}") from e
        logger.info(f"Wrote {path}")
        return path
