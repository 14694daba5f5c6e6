"""Silent self-stabilizing exact majority for population protocols."""

from .engine import (
    RunResult,
    ScriptedScheduler,
    UniformScheduler,
    delta,
    is_silent,
    load_config,
    majority_oracle,
    output,
    run,
    save_config,
    step,
)
from .model import AgentState, Answer, Configuration, Input, Leader, Opinion, Params, Role

__all__ = [
    "AgentState",
    "Answer",
    "Configuration",
    "Input",
    "Leader",
    "Opinion",
    "Params",
    "Role",
    "RunResult",
    "ScriptedScheduler",
    "UniformScheduler",
    "delta",
    "is_silent",
    "load_config",
    "majority_oracle",
    "output",
    "run",
    "save_config",
    "step",
]

__version__ = "0.1.0"
