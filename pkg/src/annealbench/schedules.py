"""Fugacity schedules for the add/remove dynamics.

A schedule assigns every step ``t`` a fugacity ``lambda_t`` in ``[1, inf]``;
removal proposals are accepted with probability ``1/lambda_t``.  The kinds:

* ``fixed``     constant fugacity (classic fixed-temperature search);
* ``infinite``  no removals ever, equivalent to randomized greedy;
* ``sequence``  explicit per-step values, held at the last entry afterwards;
* ``geometric`` stepwise-increasing annealing ladder with a cap;
* ``adaptive``  a named deterministic rule of the run history.

Adaptive rules see only a digest of the run (current step, size, running
maximum and its step, occupancy) and return a value plus a hold length, so
runs remain replayable from the seed alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import InvalidFugacity

INF = math.inf


@dataclass
class HistoryDigest:
    """What an adaptive rule is allowed to observe."""

    t: int = 0
    size: int = 0
    max_size: int = 0
    step_of_max: int = 0
    occupied: bytearray | None = None


AdaptiveRule = Callable[[int, HistoryDigest], tuple[float, int]]

ADAPTIVE_RULES: dict[str, AdaptiveRule] = {}


def adaptive_rule(name: str) -> Callable[[AdaptiveRule], AdaptiveRule]:
    def register(fn: AdaptiveRule) -> AdaptiveRule:
        ADAPTIVE_RULES[name] = fn
        return fn

    return register


@adaptive_rule("plateau")
def _plateau(t: int, digest: HistoryDigest) -> tuple[float, int]:
    """Cool while the maximum improves, reheat fully on a long stall."""
    stalled = (t - digest.step_of_max) > 4096
    return (1.0 if stalled else 256.0), 1024


@adaptive_rule("milestone")
def _milestone(t: int, digest: HistoryDigest) -> tuple[float, int]:
    """Fugacity grows with the best size found so far."""
    return min(4.0 ** (1 + digest.max_size // 8), 1e9), 512


def _check_lambda(lam: float) -> float:
    if math.isnan(lam) or lam < 1.0:
        raise InvalidFugacity(f"fugacity {lam} outside [1, inf]")
    return float(lam)


@dataclass(frozen=True)
class FugacitySchedule:
    kind: str
    lam: float = 1.0
    values: tuple[float, ...] = ()
    start: float = 1.0
    factor: float = 2.0
    block: int = 1
    cap: float = INF
    rule: str = ""

    @staticmethod
    def fixed(lam: float) -> "FugacitySchedule":
        return FugacitySchedule(kind="fixed", lam=_check_lambda(lam))

    @staticmethod
    def infinite() -> "FugacitySchedule":
        return FugacitySchedule(kind="infinite", lam=INF)

    @staticmethod
    def greedy() -> "FugacitySchedule":
        return FugacitySchedule.infinite()

    @staticmethod
    def sequence(values) -> "FugacitySchedule":
        vals = tuple(_check_lambda(v) for v in values)
        if not vals:
            raise InvalidFugacity("sequence schedule needs at least one value")
        return FugacitySchedule(kind="sequence", values=vals)

    @staticmethod
    def geometric(start: float, factor: float, block: int, cap: float = INF) -> "FugacitySchedule":
        if factor < 1.0 or block < 1:
            raise InvalidFugacity("geometric schedule needs factor >= 1, block >= 1")
        return FugacitySchedule(
            kind="geometric",
            start=_check_lambda(start),
            factor=float(factor),
            block=int(block),
            cap=float(cap),
        )

    @staticmethod
    def adaptive(rule: str) -> "FugacitySchedule":
        if rule not in ADAPTIVE_RULES:
            raise InvalidFugacity(f"unknown adaptive rule {rule!r}")
        return FugacitySchedule(kind="adaptive", rule=rule)

    @property
    def is_adaptive(self) -> bool:
        return self.kind == "adaptive"

    def segment(self, t: int, digest: HistoryDigest | None = None) -> tuple[float, int]:
        """Fugacity at 0-based step ``t`` and how many steps it holds.

        The hold length is a guarantee used by the simulation loops to avoid
        re-evaluating the schedule every step; it is always at least 1.
        """
        if self.kind == "fixed" or self.kind == "infinite":
            return self.lam, 1 << 62
        if self.kind == "sequence":
            if t >= len(self.values):
                return self.values[-1], 1 << 62
            lam = self.values[t]
            hold = 1
            limit = min(len(self.values), t + 4096)
            while t + hold < limit and self.values[t + hold] == lam:
                hold += 1
            if t + hold == len(self.values) and self.values[-1] == lam:
                hold = 1 << 62
            return lam, hold
        if self.kind == "geometric":
            level = t // self.block
            lam = self.start * self.factor**level
            if lam >= self.cap:
                return min(lam, self.cap), 1 << 62
            return lam, self.block - (t % self.block)
        if self.kind == "adaptive":
            if digest is None:
                digest = HistoryDigest(t=t)
            lam, hold = ADAPTIVE_RULES[self.rule](t, digest)
            return _check_lambda(lam), max(1, int(hold))
        raise InvalidFugacity(f"unknown schedule kind {self.kind!r}")

    def describe(self) -> str:
        if self.kind == "fixed":
            return f"fixed:{self.lam:g}"
        if self.kind == "infinite":
            return "greedy"
        if self.kind == "sequence":
            return f"seq[{len(self.values)}]"
        if self.kind == "geometric":
            cap = "" if math.isinf(self.cap) else f":{self.cap:g}"
            return f"geometric:{self.start:g}:{self.factor:g}:{self.block}{cap}"
        return f"adaptive:{self.rule}"


def parse_schedule(text: str) -> FugacitySchedule:
    """Parse a CLI schedule spec.

    Accepted forms: ``fixed:L``, ``greedy``, ``seq:FILE``,
    ``geometric:START:FACTOR:BLOCK[:CAP]``, ``adaptive:NAME``.
    """
    text = text.strip()
    if text == "greedy":
        return FugacitySchedule.infinite()
    head, _, rest = text.partition(":")
    if head == "fixed":
        return FugacitySchedule.fixed(float(rest))
    if head == "seq":
        with open(rest) as fh:
            vals = [float(line) for line in fh if line.strip()]
        return FugacitySchedule.sequence(vals)
    if head == "geometric":
        parts = rest.split(":")
        cap = float(parts[3]) if len(parts) > 3 else INF
        return FugacitySchedule.geometric(
            float(parts[0]), float(parts[1]), int(parts[2]), cap
        )
    if head == "adaptive":
        return FugacitySchedule.adaptive(rest)
    raise InvalidFugacity(f"cannot parse schedule spec {text!r}")
