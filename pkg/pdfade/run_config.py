"""
Run configuration: a flat ``key = value`` document validated into RunConfig.

    command = optimize
    m = 50
    m_hat = 50
    k = 20
    l_f = 10
    T = 3300
    P_dB = 5
    method = Approx4

Lists are comma separated (``t_values = 2000, 4000, 8000``), ``#`` starts a
comment. Unknown keys are rejected.
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from pdfade.config import (
    EPSILON,
    MC_SEED,
    MC_TRIALS,
    MC_WORKERS,
    POWER_DB_VALUES,
    QUAD_ABS_TOL,
    QUAD_MAX_SUBDIVISIONS,
    QUAD_REL_TOL,
    SWEEP_POINTS,
    SWEEP_RATE_MIN,
)
from pdfade.errors import ConfigError
from pdfade.fading_model import SystemParams
from pdfade.optimizer import MonteCarloSettings
from pdfade.outage import ApproxMethod
from pdfade.special_fns import QuadratureSettings

COMMANDS = ("point", "optimize", "sweep-rate", "sweep-power", "trajectory", "validate-mc")
LIST_KEYS = ("t_values", "P_dB_values")

# Keys each command cannot run without, beyond the system parameters
REQUIRED_BY_COMMAND = {
    "point": ("T", "rc"),
    "optimize": ("T",),
    "validate-mc": ("T",),
    "trajectory": ("re_fixed",),
}


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: Literal["point", "optimize", "sweep-rate", "sweep-power", "trajectory", "validate-mc"]

    # System
    m: int
    m_hat: int
    k: float
    l_f: float
    T: Optional[float] = None
    P_dB: float
    epsilon: float = EPSILON

    method: str = ApproxMethod.APPROX4.value
    rc: Optional[float] = None

    # Sweeps / trajectories
    t_values: Optional[List[float]] = None
    rate_max: Optional[float] = None
    rate_min: float = SWEEP_RATE_MIN
    rate_points: int = SWEEP_POINTS
    P_dB_values: List[float] = POWER_DB_VALUES
    re_fixed: Optional[float] = None
    rc_limit: Optional[float] = None

    # Monte Carlo
    trials: int = MC_TRIALS
    seed: int = MC_SEED
    workers: int = MC_WORKERS
    allow_monte_carlo: bool = False

    output: Optional[str] = None

    # Quadrature overrides
    quad_abs_tol: float = QUAD_ABS_TOL
    quad_rel_tol: float = QUAD_REL_TOL
    quad_max_subdivisions: int = QUAD_MAX_SUBDIVISIONS

    @field_validator("method")
    @classmethod
    def _known_method(cls, value):
        return ApproxMethod.parse(value).value

    @field_validator("trials", "rate_points", "workers", "quad_max_subdivisions")
    @classmethod
    def _positive(cls, value):
        if value < 1:
            raise ValueError("must be >= 1")
        return value

    @field_validator("seed")
    @classmethod
    def _non_negative(cls, value):
        if value < 0:
            raise ValueError("must be a non-negative integer")
        return value

    @model_validator(mode="after")
    def _command_keys(self):
        missing = [key for key in REQUIRED_BY_COMMAND.get(self.command, ()) if getattr(self, key) is None]
        if missing:
            raise ValueError(f"command '{self.command}' needs: {', '.join(missing)}")
        return self

    # ------------------------------------------------------------------
    # Derived objects
    # ------------------------------------------------------------------

    @property
    def approx_method(self):
        return ApproxMethod.parse(self.method)

    def system_params(self):
        """
        SystemParams for this run. Sweeps without T use the m_hat * l_f
        boundary as their template.
        """
        T = self.T if self.T is not None else self.m_hat * self.l_f
        return SystemParams.from_db(
            m=self.m, m_hat=self.m_hat, k=self.k, l_f=self.l_f, T=T,
            P_dB=self.P_dB, epsilon=self.epsilon,
        )

    def quadrature(self):
        return QuadratureSettings(self.quad_abs_tol, self.quad_rel_tol, self.quad_max_subdivisions)

    def monte_carlo(self):
        return MonteCarloSettings(
            trials=self.trials, seed=self.seed, workers=self.workers,
            allow_in_optimizer=self.allow_monte_carlo,
        )


def parse_document(text):
    """Flat key = value text -> dict of raw strings / string lists"""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{raw.strip()}'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: missing key before '='")
        if key in values:
            raise ConfigError(f"line {lineno}: key '{key}' given twice")
        if key in LIST_KEYS:
            value = [v.strip() for v in value.split(",") if v.strip()]
        values[key] = value
    return values


def _describe(error):
    lines = []
    for item in error.errors():
        key = ".".join(str(part) for part in item["loc"]) or "config"
        lines.append(f"{key}: {item['msg']}")
    return "; ".join(lines)


def parse_config(text, overrides=None):
    """
    Validate a config document into a RunConfig.

    Args:
        text: flat key = value document
        overrides: dict of keys that replace (or add to) the document's,
                   e.g. from command-line flags; None values are ignored

    Returns:
        RunConfig

    Raises:
        ConfigError naming the offending key; ConstraintError / DomainError
        when the system parameters themselves are inconsistent
    """
    values = parse_document(text)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    try:
        config = RunConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"invalid run config: {_describe(e)}") from e

    config.system_params()
    config.quadrature()
    config.monte_carlo()
    return config
