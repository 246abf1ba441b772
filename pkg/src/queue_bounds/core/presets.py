# -*- coding: utf-8 -*-
"""
Catalogue de modèles nommés, référencés par `model.preset` dans les
documents de configuration.

Chaque preset fournit une file (QueueSpec), une fonction de coût et, selon
l'usage, un second taux (bras haut d'un couplage à deux taux variables),
une fenêtre et une échelle de salles.
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from .errors import ConfigError
from .model import (
    CostFunction, Discipline, Init, JointLaw, Marginal, QueueSpec, RateFunction,
)


class ModelSection(BaseModel):
    """Section `model` résolue : tout ce qu'il faut pour simuler."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    spec: QueueSpec
    g: CostFunction = CostFunction.one()
    rate_hi: Optional[RateFunction] = None
    window: Optional[float] = None
    ladder: list[Optional[int]] = Field(default_factory=lambda: [0, None])
    label: str = "verified"
    description: str = ""


_SINUSOID = RateFunction.sinusoid(base=0.4, amplitude=0.2, lambda_h=0.6, kappa=1.0)
_EXP_EXP = JointLaw.product_exp(1.0, 1.0)


def _catalogue() -> dict[str, ModelSection]:
    return {
        "deterministic-drain": ModelSection(
            spec=QueueSpec(rate=RateFunction.constant(0.0, 0.0),
                           joint=JointLaw.infinite_patience(Marginal.exponential(1.0)),
                           init=Init.at(3.0)),
            g=CostFunction.identity(),
            description="λ ≡ 0, x = 3 : τ = 3 et A = 4.5 pour g(w) = w",
        ),
        "sinusoid-product": ModelSection(
            spec=QueueSpec(rate=_SINUSOID, joint=_EXP_EXP, init=Init.at(1.0)),
            description="λ(t) = 0.4 + 0.2 sin 2πt, λ_h = 0.6, Exp(1)/Exp(1)",
        ),
        "sinusoid-lcfs": ModelSection(
            spec=QueueSpec(rate=_SINUSOID, joint=_EXP_EXP, discipline=Discipline.lcfs(None),
                           init=Init.at(1.0)),
            ladder=[0, 1, 2, 5, None],
            description="même file en LCFS-PR, échelle k ∈ {0, 1, 2, 5, ∞}",
        ),
        "room-ladder": ModelSection(
            spec=QueueSpec(rate=_SINUSOID, joint=_EXP_EXP, discipline=Discipline.lcfs(None),
                           init=Init.at(1.0)),
            ladder=list(range(65)) + [None],
            window=50.0,
            description="échelle k ∈ {0, …, 64, ∞} sur la fenêtre u = 50",
        ),
        "periodic-stable": ModelSection(
            spec=QueueSpec(rate=_SINUSOID, joint=_EXP_EXP, init=Init()),
            description="cycles régénératifs depuis une file vide (ρ_h = 0.6)",
        ),
        "mg1": ModelSection(
            spec=QueueSpec(rate=RateFunction.constant(0.5, kappa=1.0),
                           joint=JointLaw.infinite_patience(Marginal.exponential(1.0)),
                           init=Init.at(1.0)),
            description="M/M/1 de référence, λ = 0.5, tous les clients rejoignent",
        ),
        "pathwise": ModelSection(
            spec=QueueSpec(rate=RateFunction.constant(0.5, lambda_h=1.0),
                           joint=JointLaw.infinite_patience(Marginal.exponential(1.0))),
            window=100.0,
            description="λ = λ_h/2, λ_h = 1, patience infinie, fenêtre [0, 100]",
        ),
        "pathwise-finite": ModelSection(
            spec=QueueSpec(rate=RateFunction.constant(1.0, lambda_h=2.0),
                           joint=JointLaw(kind="product", service=Marginal.exponential(0.5),
                                          patience=Marginal.exponential(1.0))),
            window=100.0,
            description="λ = λ_h/2, λ_h = 2, service Exp(0.5), patience Exp(1)",
        ),
        "unstable": ModelSection(
            spec=QueueSpec(rate=RateFunction.constant(2.0, kappa=1.0),
                           joint=JointLaw.infinite_patience(Marginal.exponential(1.0))),
            description="ρ_eff = 2 : charge de travail croissante",
        ),
        "pareto-tail": ModelSection(
            spec=QueueSpec(rate=RateFunction.sinusoid(base=0.3, amplitude=0.1, lambda_h=0.4, kappa=1.0),
                           joint=JointLaw(kind="product", service=Marginal.pareto(1.5, 2.0 / 3.0),
                                          patience=Marginal.exponential(1.0, atom_at_infinity=0.5))),
            description="service Pareto(1.5), ρ_h = 0.8, κ = 1",
        ),
        "drift": ModelSection(
            spec=QueueSpec(rate=RateFunction.constant(0.5), joint=_EXP_EXP, init=Init.at(2.0)),
            description="λ_h = 0.5 constant, Exp(1)/Exp(1)",
        ),
        "conjecture": ModelSection(
            spec=QueueSpec(rate=RateFunction.sinusoid(base=0.3, amplitude=0.1, lambda_h=0.6, kappa=1.0),
                           joint=_EXP_EXP, init=Init.at(1.0)),
            rate_hi=_SINUSOID,
            label="conjecture evidence",
            description="deux taux variables λ₁ ≤ λ₂ ≤ λ_h tirés du même flux",
        ),
        "steady-state": ModelSection(
            spec=QueueSpec(rate=_SINUSOID, joint=_EXP_EXP, init=Init()),
            g=CostFunction.identity(),
            description="g(w) = w, λ ≥ 0.2 > 0 : ratio régénératif et borne stationnaire",
        ),
    }


PRESETS = _catalogue()


def get_preset(name: str) -> ModelSection:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"preset inconnu : '{name}' (disponibles : {', '.join(sorted(PRESETS))})",
                          "unknown-preset") from None


def list_presets() -> list[dict]:
    return [{"name": k, "description": v.description} for k, v in sorted(PRESETS.items())]
