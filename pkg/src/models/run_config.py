"""Command configuration model."""

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

Command = Literal[
    "ball", "verify", "limitset", "flagcurve", "qcurve", "entropy", "intersection", "conical", "hdim", "theoremB"
]

# Commands whose --window is the counting window as fractions of t_max.
EXPONENT_COMMANDS = ("qcurve", "entropy", "theoremB")

_FILE_SUFFIXES = (".txt", ".rep", ".yaml", ".yml", ".pres", ".csv")


def _looks_like_path(ref: str) -> bool:
    return "/" in ref or ref.endswith(_FILE_SUFFIXES)


class RunConfig(BaseModel):
    """One CLI invocation.

    Validation Rules:
    - depth >= 4
    - beta in (0, 1]
    - referenced files exist
    """

    model_config = ConfigDict(frozen=True)

    command: Command
    presentation: str | None = Field(default=None, description="Presentation name, file or inline document")
    rep: str | None = Field(default=None, description="Catalog name or representation file for rho")
    repbar: str | None = Field(default=None, description="Catalog name, file, or 'dual'")
    depth: int = Field(default=8, ge=4, description="Enumeration depth N")
    samples: int = Field(default=256, gt=0, description="Boundary sample count")
    beta: float = Field(default=1.0, gt=0.0, le=1.0)
    R: float | None = Field(default=None, gt=0.0, description="Conical gap bound (default from coarse stability)")
    window: tuple[float, float] | None = Field(
        default=None,
        description="Counting window [t0, t1] as fractions of t_max for exponent commands, else a depth window",
    )
    method: Literal["slope-fit", "poincare-root"] | None = None
    phi: str = Field(default="tau1", description="Functional: tau1, tau2, hilbert, or 's,u' on (tau, taubar)")
    angles: int | None = Field(default=None, gt=2, description="Q-curve directions")
    t: float | None = Field(default=None, gt=0.0, description="Period cutoff for the intersection")
    cloud: Path | None = Field(default=None, description="Point-cloud CSV for hdim")
    seed: int = 0
    output_dir: Path = Path("output")

    @model_validator(mode="after")
    def validate_window(self) -> "RunConfig":
        """Exponent commands take 0 < t0 < t1 <= 1, the others 1 <= start <= stop in whole depths."""
        if self.window is None:
            return self
        start, stop = self.window
        if self.command in EXPONENT_COMMANDS:
            if not 0.0 < start < stop <= 1.0:
                raise ValueError(f"counting window must satisfy 0 < t0 < t1 <= 1, got {self.window}")
        elif not (float(start).is_integer() and float(stop).is_integer() and 1 <= start <= stop):
            raise ValueError(f"depth window must satisfy 1 <= start <= stop in whole depths, got {self.window}")
        return self

    @property
    def depth_window(self) -> tuple[int, int] | None:
        """--window as a depth range for cones and conical points."""
        if self.window is None or self.command in EXPONENT_COMMANDS:
            return None
        return int(self.window[0]), int(self.window[1])

    @model_validator(mode="after")
    def validate_references(self) -> "RunConfig":
        """Every file reference must exist."""
        for ref in (self.presentation, self.rep, self.repbar):
            if ref is not None and ref != "dual" and _looks_like_path(ref) and not Path(ref).is_file():
                raise ValueError(f"referenced file does not exist: {ref}")
        if self.cloud is not None and not self.cloud.is_file():
            raise ValueError(f"cloud file does not exist: {self.cloud}")
        if self.command == "hdim" and self.cloud is None and self.rep is None:
            raise ValueError("hdim needs --cloud or --rep")
        if self.command == "ball" and self.rep is None and self.presentation is None:
            raise ValueError("ball needs --presentation or --rep")
        if self.command not in ("hdim", "ball") and self.rep is None:
            raise ValueError(f"{self.command} needs --rep")
        return self
