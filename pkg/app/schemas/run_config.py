"""Command line run configuration."""

from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

# command -> fields that must be present
REQUIRED: Dict[str, Tuple[str, ...]] = {
    "validate": ("machine",),
    "oracle": ("machine", "input_word", "budget"),
    "check": ("machine", "input_word", "T"),
    "canonicalize": ("machine", "T", "space_bound"),
    "compile": ("machine", "input_word", "T"),
    "lower": ("machine", "input_word", "T"),
    "simulate": ("machine", "input_word", "T"),
    "quantum-run": ("machine", "input_word", "T"),
    "amplify": ("machine", "input_word", "T", "p"),
    "decide": ("machine", "input_word", "T"),
    "verify-bounds": (),
    "coeq": ("machine", "input_word", "T"),
    "construct": ("construction", "machine"),
    "dump": ("target", "machine", "input_word", "space_bound"),
}

CONSTRUCTIONS = ("unbounded", "restart", "combine", "to-ntm")


class RunConfig(BaseModel):
    """Validated arguments of one command invocation."""
    command: str
    machine: Optional[str] = None
    machine2: Optional[str] = None
    input_word: Optional[str] = None
    budget: Optional[int] = Field(None, ge=0)
    T: Optional[int] = Field(None, ge=1)
    space_bound: Optional[int] = Field(None, ge=1)
    p: Optional[int] = Field(None, ge=0)
    strategy: str = "propagate"
    probes: Optional[List[str]] = None
    corpus: List[str] = Field(default_factory=list)
    output: Optional[str] = None
    dump_state: bool = False
    unlowered: bool = False
    sample: Optional[int] = Field(None, ge=1)
    seed: Optional[int] = None
    max_T: int = Field(6, ge=1, le=12)
    construction: Optional[str] = None
    target: Optional[str] = None
    compile: bool = False

    @model_validator(mode="after")
    def check_command(self):
        if self.command not in REQUIRED:
            raise ValueError(f"unknown command {self.command!r}")
        missing = [name for name in REQUIRED[self.command] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.command} needs {', '.join(missing)}")
        if self.strategy not in ("propagate", "dfs"):
            raise ValueError("strategy must be propagate or dfs")
        if self.command == "amplify" and self.p >= self.T:
            raise ValueError(f"p must lie in 0..{self.T - 1}")
        if self.command == "construct":
            if self.construction not in CONSTRUCTIONS:
                raise ValueError(f"construction must be one of {', '.join(CONSTRUCTIONS)}")
            if self.construction == "combine" and self.machine2 is None:
                raise ValueError("combine needs a second machine")
            if self.construction == "restart" and self.input_word is None:
                raise ValueError("restart needs --input")
        if self.command == "dump" and self.target not in ("matrix", "configs"):
            raise ValueError("dump target must be matrix or configs")
        return self


class CommandResult(BaseModel):
    """Report text and exit status of a handler."""
    report: str
    exit_code: int = 0
