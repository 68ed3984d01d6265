"""Declarative config schema and converters to the core types.

One JSON document describes a run: the model block (factors plus fiber data,
either explicit coefficient vectors or a fiber complex structure), the
initial fiber matrix, and run parameters.  Complex numbers are always
two-element ``[re, im]`` arrays.  The same schema validates service request
bodies and CLI config files, so errors carry field-labeled locations either
way.
"""

from __future__ import annotations

import json
from typing import Annotated

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .cspace import (
    ComplexStructureInput,
    CSpaceModel,
    FactorKind,
    FactorSpec,
    FiberSpec,
    InvariantMetric,
    build_cspace,
    fiber_coeffs_from_complex_structure,
    initial_metric,
)
from .errors import UnknownType

ComplexPair = Annotated[list[float], Field(min_length=2, max_length=2)]


def to_complex(pair) -> complex:
    return complex(float(pair[0]), float(pair[1]))


def to_pair(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def matrix_to_pairs(M) -> list[list[list[float]]]:
    return [[to_pair(z) for z in row] for row in np.asarray(M, dtype=complex)]


def pairs_to_matrix(rows) -> np.ndarray:
    return np.array([[to_complex(z) for z in row] for row in rows], dtype=complex)


class FactorConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: str
    A: float = Field(gt=0)
    p: int | None = None
    q: int | None = None
    n: int | None = None


class ComplexStructureConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    Zf_coords: list[list[float]]
    IF: list[list[float]]


class FiberConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k: int = Field(ge=1)
    c: list[list[ComplexPair]] | None = None
    complex_structure: ComplexStructureConfig | None = None

    @model_validator(mode="after")
    def _exactly_one_source(self):
        if (self.c is None) == (self.complex_structure is None):
            raise ValueError("give exactly one of 'c' or 'complex_structure'")
        return self


class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    factors: list[FactorConfig] = Field(min_length=1)
    fiber: FiberConfig
    ce_blocks: list[tuple[int, int]] | None = None


class InitialConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    H0: list[list[ComplexPair]] | None = None   # identity when omitted


class MetricConfig(BaseModel):
    """A free-standing metric (for fixed-point checks and verifier inputs)."""

    model_config = ConfigDict(extra="forbid")

    h: list[float] = Field(min_length=1)
    H: list[list[ComplexPair]]


class RunSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    t_end: float | None = None
    steps: int = Field(default=1000, ge=1)
    V: float = Field(default=1.0, gt=0)
    tie_tol: float = Field(default=1e-12, ge=0)
    cross_check: bool = False
    samples: int = Field(default=20, ge=1)
    output: str | None = None


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: ModelConfig
    initial: InitialConfig = InitialConfig()
    run: RunSettings = RunSettings()


# -- converters ---------------------------------------------------------------

def build_factor(cfg: FactorConfig) -> FactorSpec:
    try:
        kind = FactorKind(cfg.kind.lower())
    except ValueError:
        raise UnknownType(f"unknown factor kind {cfg.kind!r}") from None
    return FactorSpec(kind, A=cfg.A, p=cfg.p, q=cfg.q, n=cfg.n)


def build_model(cfg: ModelConfig) -> CSpaceModel:
    factors = tuple(build_factor(f) for f in cfg.factors)
    if cfg.fiber.c is not None:
        c = tuple(np.array([to_complex(z) for z in vec]) for vec in cfg.fiber.c)
        fiber = FiberSpec(k=cfg.fiber.k, c=c)
    else:
        cs = cfg.fiber.complex_structure
        fiber = fiber_coeffs_from_complex_structure(
            ComplexStructureInput(
                Zf_coords=tuple(np.array(z, dtype=float) for z in cs.Zf_coords),
                IF=np.array(cs.IF, dtype=float)),
            factors)
        if fiber.k != cfg.fiber.k:
            raise UnknownType(
                f"fiber.k={cfg.fiber.k} inconsistent with the complex structure "
                f"(implies k={fiber.k})")
    return build_cspace(factors, fiber,
                        ce_blocks=cfg.ce_blocks, warn_unrealizable=False)


def build_initial(model: CSpaceModel, cfg: InitialConfig) -> InvariantMetric:
    H0 = pairs_to_matrix(cfg.H0) if cfg.H0 is not None else None
    return initial_metric(model, H0=H0)


def build_metric(cfg: MetricConfig) -> InvariantMetric:
    return InvariantMetric(h_base=tuple(cfg.h), H_fiber=pairs_to_matrix(cfg.H))


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return RunConfig.model_validate(json.load(fh))


def dump_config(cfg: RunConfig) -> str:
    """Normalized JSON text; parsing it back yields an identical config."""
    return json.dumps(cfg.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"
