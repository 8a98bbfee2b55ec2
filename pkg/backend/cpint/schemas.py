import math
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, PlainSerializer, model_validator


Verdict = Literal["holds", "fails", "inconclusive"]


def _encode_extended(value: float) -> Union[float, str]:
    if math.isfinite(value):
        return value
    return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")


# JSON has no infinities; they travel as "inf" and "-inf"
ExtendedFloat = Annotated[float, PlainSerializer(_encode_extended, when_used="json")]


class FixtureSpec(BaseModel):
    """One named block of the fixture file."""

    name: str
    kind: Literal["primitive", "bv", "sequence"]
    description: Optional[str] = None
    # primitive: an expression primitive or an integrand for panel quadrature
    expression: Optional[str] = None
    integrand: Optional[str] = None
    support: Optional[Tuple[float, float]] = None
    limit_neg: Optional[float] = None
    limit_pos: Optional[float] = None
    # bv: either a compact spec ("indicator:[0,1]") or explicit pieces
    bv: Optional[str] = None
    breaks: List[float] = Field(default_factory=list)
    pieces: List[str] = Field(default_factory=list)
    point_values: List[float] = Field(default_factory=list)
    value_neg_inf: Optional[float] = None
    value_pos_inf: Optional[float] = None
    # sequence: a named family with its parameters
    family: Optional[str] = None
    params: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_payload(self) -> "FixtureSpec":
        if self.kind == "primitive" and not (self.expression or self.integrand):
            raise ValueError(f"primitive fixture {self.name!r} needs an expression or an integrand")
        if self.kind == "bv" and not (self.bv or self.pieces):
            raise ValueError(f"bv fixture {self.name!r} needs a bv spec or pieces")
        if self.kind == "bv" and self.pieces and len(self.pieces) != len(self.breaks) + 1:
            raise ValueError(f"bv fixture {self.name!r}: {len(self.breaks)} breaks need {len(self.breaks) + 1} pieces")
        if self.kind == "sequence" and not self.family:
            raise ValueError(f"sequence fixture {self.name!r} needs a family")
        return self


class EvidenceRow(BaseModel):
    mode: str
    element: str
    n: int
    value: ExtendedFloat
    x: Optional[ExtendedFloat] = None
    note: Optional[str] = None


class ModeVerdict(BaseModel):
    mode: str
    verdict: Verdict
    n_range: Tuple[int, int]
    lower_bound: Optional[ExtendedFloat] = None
    notes: List[str] = Field(default_factory=list)
    evidence: List[EvidenceRow] = Field(default_factory=list)

    @model_validator(mode="after")
    def _needs_evidence(self) -> "ModeVerdict":
        if not self.evidence:
            raise ValueError(f"verdict for {self.mode!r} carries no evidence")
        return self


class ConvergenceReport(BaseModel):
    sequence: str
    candidate: str
    n_max: int
    verdicts: List[ModeVerdict] = Field(default_factory=list)

    @model_validator(mode="after")
    def _needs_verdicts(self) -> "ConvergenceReport":
        if not self.verdicts:
            raise ValueError("report has no verdicts")
        return self

    def verdict(self, mode: str) -> ModeVerdict:
        for item in self.verdicts:
            if item.mode == mode:
                return item
        raise KeyError(mode)


class GrowthProbe(BaseModel):
    alpha: float
    radii: List[float]
    maxima: List[float]
    trend: Literal["decreasing", "not_decreasing", "inconclusive"]


# HTTP bodies. Extended reals travel as strings ("inf", "-inf", "0.5").


class IntegrateRequest(BaseModel):
    primitive: Optional[str] = None
    primitive_of: Optional[str] = None
    fixture: Optional[str] = None
    a: str = "-inf"
    b: str = "inf"
    hake: bool = False
    tol: Optional[float] = None


class NormRequest(BaseModel):
    primitive: Optional[str] = None
    fixture: Optional[str] = None
    support: Optional[Tuple[float, float]] = None
    kind: Literal["alexiewicz", "interval_sup", "dual_bv_lower", "abs"] = "alexiewicz"
    tol: Optional[float] = None


class ValueResponse(BaseModel):
    value: ExtendedFloat
    divergent: bool = False
    lower_bound: Optional[ExtendedFloat] = None


class PoissonRequest(BaseModel):
    primitive: Optional[str] = None
    fixture: Optional[str] = None
    points: List[Tuple[float, float]]
    tol: Optional[float] = None


class PoissonResponse(BaseModel):
    values: List[float] = Field(default_factory=list)


class LaplaceRequest(BaseModel):
    primitive: Optional[str] = None
    fixture: Optional[str] = None
    points: List[Tuple[float, float]]
    derivative: int = 0
    tol: Optional[float] = None


class LaplaceResponse(BaseModel):
    values: List[Tuple[float, float]] = Field(default_factory=list)


class WeightedRequest(BaseModel):
    primitive: str
    r: float
    points: List[Tuple[float, float]] = Field(default_factory=list)
    tol: Optional[float] = None


class WeightedResponse(BaseModel):
    value: Optional[ExtendedFloat] = None
    values: List[Tuple[float, float]] = Field(default_factory=list)


class ConvergeRequest(BaseModel):
    fixture: str
    params: Dict[str, float] = Field(default_factory=dict)
    modes: List[str] = Field(default_factory=lambda: ["strong", "weakD", "weakBV", "integral"])
    n_max: Optional[int] = None


class FixtureInfo(BaseModel):
    name: str
    kind: str
    description: Optional[str] = None


class FixtureListResponse(BaseModel):
    fixtures: List[FixtureInfo] = Field(default_factory=list)
