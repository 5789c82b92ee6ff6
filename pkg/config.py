"""Run configuration for the benchmark harness."""
from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from errors import InvalidFlag
from runtime import Algo

DEFAULT_LOG_LEVEL = "WARNING"


def _split(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    if isinstance(value, int):
        return [value]
    return value


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    models: list[str] = Field(min_length=1)
    algos: list[Algo] = Field(default=[Algo.SSI], min_length=1)
    particles: list[int] = Field(default=[1], min_length=1)
    steps: int = Field(default=500, ge=0)
    seed: int = Field(default=0, ge=0)
    seeds: int = Field(default=1, ge=1)
    data_seed: int = Field(default=0, ge=0)
    out: Optional[Path] = None
    trace: bool = False
    dot: Optional[Path] = None
    timing: bool = False

    @field_validator("models", "algos", "particles", mode="before")
    @classmethod
    def split_lists(cls, value):
        return _split(value)

    @field_validator("particles")
    @classmethod
    def positive_particles(cls, value):
        if any(n < 1 for n in value):
            raise ValueError("particle counts must be positive")
        return value

    @classmethod
    def from_flags(cls, **flags) -> "RunConfig":
        """Build from parsed flags; validation problems become InvalidFlag."""
        flags = {k: v for k, v in flags.items() if v is not None}
        try:
            return cls(**flags)
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
            )
            raise InvalidFlag(problems) from None


def log_level() -> int:
    """Root log level from SSI_LOG_LEVEL, WARNING when unset or unknown."""
    name = os.environ.get("SSI_LOG_LEVEL", DEFAULT_LOG_LEVEL).strip().upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.WARNING
