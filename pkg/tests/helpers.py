from strategic_bandits.models.instance import AgentProfile

FIG1_MEANS = (0.5, 0.6, 0.7, 0.8, 0.9)


class FixedStream:
    """Uniform stream stand-in that always answers `value` (clamped to the range)."""

    def __init__(self, value: int = 0):
        self.value = value
        self.calls = []

    def integers(self, high: int) -> int:
        self.calls.append(high)
        return min(self.value, high - 1)


def single_arm_profiles(means, copies=None):
    copies = copies or [1] * len(means)
    return [AgentProfile.from_means(i, [mu], [c]) for i, (mu, c) in enumerate(zip(means, copies), start=1)]
