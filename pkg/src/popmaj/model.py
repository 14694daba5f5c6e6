"""Domain types shared by every layer of the protocol.

Agent states are immutable values. Fields that carry no meaning for the
agent's current role are held at a canonical zero so that two states compare
equal exactly when they behave identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from typing import NamedTuple, Optional, Sequence


class Input(IntEnum):
    A = 0
    B = 1


class Opinion(str, Enum):
    A = "A"
    B = "B"
    T = "T"


class Answer(IntEnum):
    PHI = 0
    T = 1
    A = 2
    B = 3


class Role(IntEnum):
    RESETTING = 0
    SETTLED = 1
    UNSETTLED = 2


class Leader(IntEnum):
    F = 0
    L = 1


LEFT = 1
RIGHT = 2

ANSWER_OF_INPUT = {Input.A: Answer.A, Input.B: Answer.B}


def input_answer(x: Input) -> Answer:
    return ANSWER_OF_INPUT[x]


@dataclass(frozen=True)
class Params:
    """Protocol constants for a population of ``n`` agents.

    ``r_max``, ``w_max`` and ``timer_max`` default to ``ceil(60 ln n)``,
    ``r_max + 4n`` and ``7 (t_rank + 4)``. Overriding them yields a distinct finite
    protocol (used by the exhaustive verifier with tiny caps).
    """

    n: int
    t_rank: int = 16
    r_max: Optional[int] = None
    w_max: Optional[int] = None
    timer_max: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need n >= 2 agents, got {self.n}")
        if self.t_rank < 1:
            raise ValueError("t_rank must be positive")
        r_max = self.r_max if self.r_max is not None else math.ceil(60 * math.log(self.n))
        w_max = self.w_max if self.w_max is not None else r_max + 4 * self.n
        timer_max = self.timer_max if self.timer_max is not None else 7 * (self.t_rank + 4)
        for name, v in (("r_max", r_max), ("w_max", w_max), ("timer_max", timer_max)):
            if v < 1:
                raise ValueError(f"{name} must be >= 1, got {v}")
        object.__setattr__(self, "r_max", r_max)
        object.__setattr__(self, "w_max", w_max)
        object.__setattr__(self, "timer_max", timer_max)
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def dormant(self) -> int:
        """Resetting agents with resetcount at or below this only count down."""
        return self.r_max // 2

    @property
    def mid(self) -> int:
        """Rank of the deciding agent, ceil(n/2)."""
        return (self.n + 1) // 2

    @classmethod
    def capped(cls, n: int, r_max: int, w_max: int, timer_max: int, t_rank: int = 16) -> "Params":
        return cls(n=n, t_rank=t_rank, r_max=r_max, w_max=w_max, timer_max=timer_max)


@dataclass(frozen=True)
class AgentState:
    role: Role
    leader: Leader = Leader.F
    resetcount: int = 0
    waitcount: int = 0
    rank: int = 1
    childmask: int = 0
    answer: Answer = Answer.PHI
    timer: int = 0

    @classmethod
    def resetting(cls, leader: Leader, resetcount: int, answer: Answer = Answer.PHI) -> "AgentState":
        return cls(Role.RESETTING, leader=leader, resetcount=resetcount, answer=answer)

    @classmethod
    def settled(cls, rank: int, childmask: int = 0, answer: Answer = Answer.PHI, timer: int = 0) -> "AgentState":
        return cls(Role.SETTLED, rank=rank, childmask=childmask, answer=answer, timer=timer)

    @classmethod
    def unsettled(cls, waitcount: int, answer: Answer = Answer.PHI) -> "AgentState":
        return cls(Role.UNSETTLED, waitcount=waitcount, answer=answer)

    def with_(self, **changes) -> "AgentState":
        return replace(self, **changes)


def canonical(s: AgentState, params: Params) -> AgentState:
    """Zero every field the role does not use.

    The timer is only ever read on the Settled agent holding rank ceil(n/2),
    and it is re-armed whenever an agent settles at that rank, so it is
    cleared everywhere else.
    """
    if s.role is Role.RESETTING:
        return AgentState(Role.RESETTING, leader=s.leader, resetcount=s.resetcount, answer=s.answer)
    if s.role is Role.UNSETTLED:
        return AgentState(Role.UNSETTLED, waitcount=s.waitcount, answer=s.answer)
    timer = s.timer if s.rank == params.mid else 0
    return AgentState(Role.SETTLED, rank=s.rank, childmask=s.childmask, answer=s.answer, timer=timer)


def check_state(s: AgentState, params: Params) -> None:
    """Raise ``ValueError`` if ``s`` is out of range or not canonical."""
    if not isinstance(s.role, Role) or not isinstance(s.leader, Leader) or not isinstance(s.answer, Answer):
        raise ValueError(f"bad enum field in {s}")
    if not 0 <= s.resetcount <= params.r_max:
        raise ValueError(f"resetcount {s.resetcount} outside [0, {params.r_max}]")
    if not 0 <= s.waitcount <= params.w_max:
        raise ValueError(f"waitcount {s.waitcount} outside [0, {params.w_max}]")
    if not 1 <= s.rank <= params.n:
        raise ValueError(f"rank {s.rank} outside [1, {params.n}]")
    if not 0 <= s.childmask <= 3:
        raise ValueError(f"childmask {s.childmask} is not a 2-bit set")
    if not 0 <= s.timer <= params.timer_max:
        raise ValueError(f"timer {s.timer} outside [0, {params.timer_max}]")
    if canonical(s, params) != s:
        raise ValueError(f"state is not canonical for its role: {s}")


class InteractionPair(NamedTuple):
    initiator: int
    responder: int


@dataclass(frozen=True)
class Configuration:
    inputs: tuple[Input, ...]
    states: tuple[AgentState, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(Input(x) for x in self.inputs))
        object.__setattr__(self, "states", tuple(self.states))
        if len(self.inputs) != len(self.states):
            raise ValueError("inputs and states must have the same length")

    @property
    def n(self) -> int:
        return len(self.inputs)

    def pairs(self):
        return zip(self.states, self.inputs)

    def replace_states(self, updates: dict[int, AgentState]) -> "Configuration":
        states = list(self.states)
        for i, s in updates.items():
            states[i] = s
        return Configuration(self.inputs, tuple(states))


def parse_inputs(text: str | Sequence) -> tuple[Input, ...]:
    """``"AAB"`` or ``["A", "A", "B"]`` -> tuple of :class:`Input`."""
    return tuple(x if isinstance(x, Input) else Input[str(x).strip().upper()] for x in text)
