"""
Pydantic models for OrliczLab configuration validation

Two layers:
    LabSettings  numerical defaults from config/*.json (tolerances, caps, seeds policy)
    RunConfig    one run: command, Orlicz function, per-command params, output

Each command has its own params model with ``extra="forbid"``; defaults not
given by the run are filled from LabSettings before validation, so the
validated config (and its hash) always holds every effective parameter.
"""

import hashlib
import json
from typing import Any, ClassVar, Dict, List, Literal, Optional, Tuple, Type

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .constants import (
    DEFAULT_TOL,
    DELTA2_FAIL_THRESHOLD,
    GRID_RATIO,
    MAX_DENOMINATOR,
    MC_CHUNK_SIZE,
    MC_MAX_DIMENSION,
    MC_MIN_SAMPLES,
    MC_MIXTURE,
    MIN_TAIL_SHARE,
    PREMISE_EPS,
    SEARCH_MAX_STEPS,
    SEARCH_RATIO,
    SEARCH_START,
    SLOPE_MARGIN,
    SLOPE_PROBE_T,
    STAB_TOL,
    WEAK_NULL_EPS,
)

FAMILIES = ("power", "power-log", "exp-minus-linear", "linear", "piecewise-linear")
SEEDED_SEQUENCE_KINDS = ("seeded-disjoint", "seeded-steps")


class LabSettings(BaseModel):
    """Numerical defaults used when a run does not set a parameter."""

    tol: float = Field(default=DEFAULT_TOL, gt=0, lt=1, description="Absolute tolerance for norms, conjugates and checks")
    grid_ratio: float = Field(default=GRID_RATIO, gt=1, le=10, description="Ratio of consecutive KR probe grid points")
    t_cap: float = Field(default=SLOPE_PROBE_T, gt=0, description="Large-t probe point and default KR cap")
    slope_margin: float = Field(default=SLOPE_MARGIN, ge=0, description="Relative margin above the asymptotic slope before phi* is infinite")
    delta2_fail_threshold: float = Field(default=DELTA2_FAIL_THRESHOLD, gt=1, description="Ratio phi(2t)/phi(t) that counts as a Delta2 failure")
    search_ratio: float = Field(default=SEARCH_RATIO, gt=1, le=10, description="Geometric step of the a_n search")
    search_max_steps: int = Field(default=SEARCH_MAX_STEPS, ge=1, le=100_000, description="Grid steps per a_n before the search is exhausted")
    stab_tol: float = Field(default=STAB_TOL, gt=0, description="Stabilization tolerance for b-table row limits")
    weak_null_eps: float = Field(default=WEAK_NULL_EPS, gt=0, description="Threshold of the weak-null criterion")
    mc_chunk_size: int = Field(default=MC_CHUNK_SIZE, ge=1, description="Samples per Monte Carlo chunk")
    mc_mixture: float = Field(default=MC_MIXTURE, ge=0, lt=1, description="Uniform share of the importance-sampling proposal")
    max_denominator: int = Field(default=MAX_DENOMINATOR, ge=1, description="Largest denominator for rounded realization measures")
    min_tail_share: float = Field(default=MIN_TAIL_SHARE, gt=0, lt=1, description="Least share of S_n the truncated tail must keep")
    premise_eps: float = Field(default=PREMISE_EPS, gt=0, lt=1, description="Allowed shortfall of the modular bound for the norm bound")
    sweep_workers: int = Field(default=4, ge=1, le=64, description="Worker threads for sweeps")
    output_dir: str = Field(default="reports", min_length=1, description="Directory for report files")
    log_level: str = Field(default="WARNING", pattern=r"^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$", description="Logging level")

    model_config = ConfigDict(extra="ignore", str_strip_whitespace=True, allow_inf_nan=False)


def validate_settings_dict(settings_dict: Dict[str, Any]) -> Tuple[LabSettings, List[str]]:
    """Validate a settings dictionary against the schema.

    Returns:
        Tuple of (validated_settings, warnings_list)

    Raises:
        ValueError: If settings are invalid with detailed error messages
    """
    warnings = [
        f"Unknown setting '{key}' ignored"
        for key in settings_dict
        if key not in LabSettings.model_fields and not key.startswith("_")
    ]
    try:
        return LabSettings(**settings_dict), warnings
    except Exception as e:
        raise ValueError(f"Configuration validation failed: {str(e)}")


# ----------------------------------------------------------------------
# Shared pieces
# ----------------------------------------------------------------------
class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)


class PhiSpec(_Strict):
    """``{family, params, knots}`` description of an Orlicz function."""

    family: Literal["power", "power-log", "exp-minus-linear", "linear", "piecewise-linear"]
    params: List[float] = Field(default_factory=list)
    knots: Optional[List[Tuple[float, float]]] = None

    @model_validator(mode="after")
    def check_buildable(self) -> "PhiSpec":
        self.build()
        return self

    def build(self):
        from .core.orlicz import OrliczFunction

        return OrliczFunction.from_spec(self.model_dump())


class OutputSpec(_Strict):
    format: Literal["json", "csv"] = "json"
    path: Optional[str] = None


def _check_triples(value: List[List[Any]]) -> List[List[Any]]:
    from .core.simplefn import SimpleFunction

    try:
        SimpleFunction.from_triples(value)
    except TypeError as e:
        raise ValueError(f"malformed function triples: {e}")
    return value


class SequenceSpec(_Strict):
    """How a FunctionSequence is generated."""

    kind: Literal[
        "dyadic-blocks", "seeded-disjoint", "seeded-steps", "geometric", "explicit", "counterexample", "zero"
    ]
    seed: Optional[int] = Field(default=None, ge=0)
    height: float = Field(default=1.0, gt=0)
    normalize: bool = Field(default=False, description="Divide dyadic blocks by their phi-norm")
    ratio: float = Field(default=0.5, gt=0, description="Ratio of the geometric sequence")
    base: Optional[List[List[Any]]] = Field(default=None, description="Base function of the geometric sequence")
    functions: Optional[List[List[List[Any]]]] = Field(default=None, description="Terms of an explicit sequence")
    disjoint: bool = Field(default=False, description="Declare an explicit sequence disjoint")
    n_max: int = Field(default=200, ge=2, description="Depth of a counterexample-derived sequence")

    @field_validator("base")
    @classmethod
    def validate_base(cls, v: Optional[List[List[Any]]]) -> Optional[List[List[Any]]]:
        return None if v is None else _check_triples(v)

    @field_validator("functions")
    @classmethod
    def validate_functions(cls, v: Optional[List[List[List[Any]]]]) -> Optional[List[List[List[Any]]]]:
        if v is None:
            return None
        for triples in v:
            _check_triples(triples)
        return v

    @model_validator(mode="after")
    def check_kind_requirements(self) -> "SequenceSpec":
        if self.kind in SEEDED_SEQUENCE_KINDS and self.seed is None:
            raise ValueError(f"sequence kind '{self.kind}' needs a seed")
        if self.kind == "explicit" and not self.functions:
            raise ValueError("an explicit sequence needs 'functions'")
        if self.kind == "geometric" and self.base is None:
            raise ValueError("a geometric sequence needs 'base'")
        return self


class BlocksSpec(_Strict):
    """An eligible sequence: a builtin generator or explicit block records."""

    builtin: Optional[Literal["singleton-powers", "geometric-blocks", "seeded"]] = None
    records: Optional[List[Dict[str, Any]]] = None
    seed: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def check_source(self) -> "BlocksSpec":
        if (self.builtin is None) == (self.records is None):
            raise ValueError("give exactly one of 'builtin' or 'records'")
        if self.builtin == "seeded" and self.seed is None:
            raise ValueError("the seeded eligible sequence needs a seed")
        if self.records is not None:
            from .core.dhtest import EligibleSequence

            try:
                EligibleSequence.from_records(self.records)
            except TypeError as e:
                raise ValueError(f"malformed block records: {e}")
        return self


# ----------------------------------------------------------------------
# Per-command params
# ----------------------------------------------------------------------
class CommandParams(_Strict):
    # param name -> LabSettings field supplying its default
    SETTINGS_KEYS: ClassVar[Dict[str, str]] = {}
    NEEDS_PHI: ClassVar[bool] = True


class ConjugateParams(CommandParams):
    SETTINGS_KEYS = {"tol": "tol", "t_cap": "t_cap", "slope_margin": "slope_margin"}

    s: List[float] = Field(default_factory=lambda: [1.0], min_length=1, description="Dual points s >= 0")
    tol: float = Field(default=DEFAULT_TOL, gt=0)
    t_cap: float = Field(default=SLOPE_PROBE_T, gt=0)
    slope_margin: float = Field(default=SLOPE_MARGIN, ge=0)

    @field_validator("s")
    @classmethod
    def validate_s(cls, v: List[float]) -> List[float]:
        for s in v:
            if s < 0:
                raise ValueError(f"dual point must be >= 0, got {s}")
        return v


class ValidateParams(CommandParams):
    SETTINGS_KEYS = {"tol": "tol"}

    grid_size: int = Field(default=100, ge=3)
    t_max: float = Field(default=10.0, gt=0)
    tol: float = Field(default=DEFAULT_TOL, gt=0)


class Delta2Params(CommandParams):
    SETTINGS_KEYS = {"fail_threshold": "delta2_fail_threshold"}

    t0: float = Field(default=1.0, ge=0)
    t_max: float = Field(default=1e6, gt=0)
    grid_size: int = Field(default=200, ge=2)
    fail_threshold: float = Field(default=DELTA2_FAIL_THRESHOLD, gt=1)

    @model_validator(mode="after")
    def check_range(self) -> "Delta2Params":
        if not self.t0 < self.t_max:
            raise ValueError(f"t0 ({self.t0}) must be below t_max ({self.t_max})")
        return self


class KRProbeParams(CommandParams):
    SETTINGS_KEYS = {"t_cap": "t_cap", "ratio": "grid_ratio"}

    L: List[float] = Field(default_factory=lambda: [3.0], min_length=1)
    t_floor: float = Field(default=0.0, ge=0)
    t_cap: float = Field(default=SLOPE_PROBE_T, gt=0)
    ratio: float = Field(default=GRID_RATIO, gt=1)
    escalate: bool = Field(default=False, description="Run the builtin escalating (L, t_floor) ladder")

    @field_validator("L")
    @classmethod
    def validate_L(cls, v: List[float]) -> List[float]:
        for L in v:
            if not L > 1:
                raise ValueError(f"L must exceed 1, got {L}")
        return v

    @model_validator(mode="after")
    def check_range(self) -> "KRProbeParams":
        if not self.t_floor < self.t_cap:
            raise ValueError(f"t_floor ({self.t_floor}) must be below t_cap ({self.t_cap})")
        return self


class FunctionParams(CommandParams):
    SETTINGS_KEYS = {"tol": "tol"}

    function: List[List[Any]] = Field(description="[[numerator, denominator, value], ...]")
    tol: float = Field(default=DEFAULT_TOL, gt=0)

    @field_validator("function")
    @classmethod
    def validate_function(cls, v: List[List[Any]]) -> List[List[Any]]:
        return _check_triples(v)


class RearrangeParams(FunctionParams):
    NEEDS_PHI = False


class DiagnoseParams(CommandParams):
    SETTINGS_KEYS = {"tol": "tol"}

    sequence: SequenceSpec
    N: int = Field(default=32, ge=2)
    tol: float = Field(default=DEFAULT_TOL, gt=0)


class SupIneqParams(CommandParams):
    NEEDS_PHI = False

    sequence: SequenceSpec
    K: int = Field(default=16, ge=1)
    N: int = Field(default=4, ge=1)
    trials: int = Field(default=1, ge=1, le=100_000, description="Seeded trials with seeds seed, seed+1, ...")

    @model_validator(mode="after")
    def check_sizes(self) -> "SupIneqParams":
        if self.N > self.K:
            raise ValueError(f"N ({self.N}) must not exceed K ({self.K})")
        if self.trials > 1 and self.sequence.kind not in SEEDED_SEQUENCE_KINDS:
            raise ValueError("several trials need a seeded sequence kind")
        return self


class PConvexParams(CommandParams):
    SETTINGS_KEYS = {"tol": "tol"}
    NEEDS_PHI = False

    p: float = Field(default=2.0, gt=1)
    sequence: SequenceSpec
    n: int = Field(default=2, ge=1)
    m: int = Field(default=5, ge=2)
    tol: float = Field(default=DEFAULT_TOL, gt=0)

    @model_validator(mode="after")
    def check_order(self) -> "PConvexParams":
        if not self.n < self.m:
            raise ValueError(f"need n < m, got n={self.n}, m={self.m}")
        return self


class ClosedBoundParams(CommandParams):
    SETTINGS_KEYS = {"tol": "tol"}

    sequence: SequenceSpec
    K: int = Field(default=32, ge=1)
    N: int = Field(default=4, ge=1)
    tol: float = Field(default=DEFAULT_TOL, gt=0)

    @model_validator(mode="after")
    def check_sizes(self) -> "ClosedBoundParams":
        if self.N > self.K:
            raise ValueError(f"N ({self.N}) must not exceed K ({self.K})")
        return self


class BuildParams(CommandParams):
    SETTINGS_KEYS = {"ratio": "search_ratio", "max_steps": "search_max_steps"}

    n_max: int = Field(default=50, ge=2, le=5000)
    ratio: float = Field(default=SEARCH_RATIO, gt=1)
    max_steps: int = Field(default=SEARCH_MAX_STEPS, ge=1)
    start: float = Field(default=SEARCH_START, gt=0)


class VerifyParams(CommandParams):
    NEEDS_PHI = False

    certificate: str = Field(min_length=1, description="Path of a serialized certificate")


class BoundsParams(BuildParams):
    SETTINGS_KEYS = {
        "ratio": "search_ratio",
        "max_steps": "search_max_steps",
        "premise_eps": "premise_eps",
        "min_share": "min_tail_share",
    }

    ns: List[int] = Field(default_factory=lambda: [1, 2, 5, 10], min_length=1)
    premise_eps: float = Field(default=PREMISE_EPS, gt=0, lt=1)
    min_share: float = Field(default=MIN_TAIL_SHARE, gt=0, lt=1)

    @field_validator("ns")
    @classmethod
    def validate_ns(cls, v: List[int]) -> List[int]:
        for n in v:
            if n < 1:
                raise ValueError(f"depths must be >= 1, got {n}")
        return v


class MCParams(BuildParams):
    SETTINGS_KEYS = {
        "ratio": "search_ratio",
        "max_steps": "search_max_steps",
        "chunk_size": "mc_chunk_size",
        "mixture": "mc_mixture",
    }

    n: int = Field(default=2, ge=1, le=MC_MAX_DIMENSION)
    samples: int = Field(default=100_000, ge=MC_MIN_SAMPLES)
    seed: int = Field(ge=0, description="Mandatory seed of the Monte Carlo streams")
    chunk_size: int = Field(default=MC_CHUNK_SIZE, ge=1)
    mixture: float = Field(default=MC_MIXTURE, ge=0, lt=1)


class DHTableParams(CommandParams):
    SETTINGS_KEYS = {"stab_tol": "stab_tol", "weak_null_eps": "weak_null_eps"}

    blocks: BlocksSpec
    N: int = Field(default=16, ge=1)
    M: int = Field(default=64, ge=1)
    stab_tol: float = Field(default=STAB_TOL, gt=0)
    weak_null_eps: float = Field(default=WEAK_NULL_EPS, gt=0)


class DHTestParams(CommandParams):
    SETTINGS_KEYS = {"stab_tol": "stab_tol"}

    blocks: BlocksSpec
    N: int = Field(default=16, ge=2)
    M: int = Field(default=1000, ge=1)
    stab_tol: float = Field(default=STAB_TOL, gt=0)


class DHRealizeParams(CommandParams):
    SETTINGS_KEYS = {"max_denominator": "max_denominator", "tol": "tol"}

    blocks: BlocksSpec
    K: int = Field(default=8, ge=0)
    max_denominator: int = Field(default=MAX_DENOMINATOR, ge=1)
    tol: float = Field(default=DEFAULT_TOL, gt=0)


class DHCrossCheckParams(CommandParams):
    SETTINGS_KEYS = {"max_denominator": "max_denominator"}

    blocks: BlocksSpec
    K: int = Field(default=8, ge=0)
    scale: int = Field(default=1, ge=1, description="Integer C in the sum of f_n / (C n)")
    max_denominator: int = Field(default=MAX_DENOMINATOR, ge=1)
    tol: float = Field(default=1e-9, gt=0)


PARAMS_MODELS: Dict[str, Type[CommandParams]] = {
    "orlicz.conjugate": ConjugateParams,
    "orlicz.validate": ValidateParams,
    "orlicz.delta2": Delta2Params,
    "orlicz.kr-probe": KRProbeParams,
    "fn.rearrange": RearrangeParams,
    "fn.norm": FunctionParams,
    "fn.modular": FunctionParams,
    "cesaro.diagnose": DiagnoseParams,
    "cesaro.supineq": SupIneqParams,
    "cesaro.pconvex": PConvexParams,
    "cesaro.closedbound": ClosedBoundParams,
    "counterexample.build": BuildParams,
    "counterexample.verify": VerifyParams,
    "counterexample.bounds": BoundsParams,
    "counterexample.mc": MCParams,
    "dh.table": DHTableParams,
    "dh.test": DHTestParams,
    "dh.realize": DHRealizeParams,
    "dh.crosscheck": DHCrossCheckParams,
}
COMMANDS = tuple(PARAMS_MODELS)


def apply_settings_defaults(command: str, params: Dict[str, Any], settings: LabSettings) -> Dict[str, Any]:
    """Fill params the run leaves unset from LabSettings."""
    model = PARAMS_MODELS.get(command)
    if model is None:
        return dict(params)
    merged = dict(params)
    for param, setting in model.SETTINGS_KEYS.items():
        if param not in merged:
            merged[param] = getattr(settings, setting)
    return merged


class RunConfig(_Strict):
    """One run of one command.

    Example:
        >>> RunConfig(command="orlicz.delta2",
        ...           phi={"family": "power", "params": [3]},
        ...           params={"t0": 1, "t_max": 1e6})
    """

    command: str
    phi: Optional[PhiSpec] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    output: OutputSpec = Field(default_factory=OutputSpec)

    @field_validator("command")
    @classmethod
    def validate_command(cls, v: str) -> str:
        if v not in PARAMS_MODELS:
            raise ValueError(f"unknown command '{v}'; expected one of {', '.join(COMMANDS)}")
        return v

    @model_validator(mode="after")
    def validate_params(self) -> "RunConfig":
        model = PARAMS_MODELS[self.command]
        self.params = model.model_validate(self.params).model_dump(mode="json")
        if model.NEEDS_PHI and self.phi is None:
            raise ValueError(f"command '{self.command}' needs 'phi'")
        return self

    def typed_params(self) -> CommandParams:
        return PARAMS_MODELS[self.command].model_validate(self.params)

    def canonical(self) -> Dict[str, Any]:
        """The hashed part of the config: everything except the output target."""
        return self.model_dump(mode="json", exclude={"output"})


def config_hash(config: RunConfig) -> str:
    payload = json.dumps(config.canonical(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class SweepConfig(_Strict):
    """A list of runs of one command, aggregated into one table."""

    configs: List[RunConfig] = Field(default_factory=list)
    output: OutputSpec = Field(default_factory=lambda: OutputSpec(format="csv"))

    @model_validator(mode="after")
    def check_homogeneous(self) -> "SweepConfig":
        commands = {c.command for c in self.configs}
        if len(commands) > 1:
            raise ValueError(f"a sweep runs one command, got {sorted(commands)}")
        return self

    @property
    def command(self) -> Optional[str]:
        return self.configs[0].command if self.configs else None


def sweep_hash(sweep: SweepConfig) -> str:
    payload = json.dumps([c.canonical() for c in sweep.configs], sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
