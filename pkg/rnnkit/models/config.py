"""Shared helpers for pydantic configuration records."""
from typing import Type, TypeVar

from pydantic import BaseModel, ConfigDict, ValidationError

from rnnkit.exceptions import ArgumentError

ConfigT = TypeVar("ConfigT", bound="Settings")


class Settings(BaseModel):
    """Base for validated, immutable configuration records."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    @classmethod
    def build(cls: Type[ConfigT], **values) -> ConfigT:
        """Construct and translate validation failures into ArgumentError."""
        try:
            return cls(**values)
        except ValidationError as exc:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
            )
            raise ArgumentError(f"invalid {cls.__name__}: {problems}") from exc
