# -*- coding: utf-8 -*-
"""
Exceptions typées de Queue Bounds.

Chaque exception porte un `code` stable (ex: "rate-exceeds-bound",
"empty-arm") repris tel quel dans les dicts de résultat du service
d'expériences et dans le JSON du CLI.

Les modules core lèvent ; core/experiments.py attrape et convertit en
{"status": "error", "code": ..., "message": ...}.
"""

from typing import Optional


class QueueBoundsError(Exception):
    """Racine de toutes les erreurs métier."""

    code = "error"

    def __init__(self, message: str, code: Optional[str] = None):
        super().__init__(message)
        if code:
            self.code = code

    def to_dict(self) -> dict:
        return {"status": "error", "code": self.code, "message": str(self)}


class SpecViolation:
    """Une violation d'invariant détectée par model.check_spec()."""

    __slots__ = ("code", "field", "message")

    def __init__(self, code: str, field: str, message: str):
        self.code = code
        self.field = field
        self.message = message

    def to_dict(self) -> dict:
        return {"code": self.code, "field": self.field, "message": self.message}

    def __repr__(self) -> str:
        return f"SpecViolation({self.code!r}, {self.field!r})"


class SpecError(QueueBoundsError):
    """Spécification de file invalide (liste structurée de violations)."""

    code = "invalid-spec"

    def __init__(self, violations: list[SpecViolation]):
        self.violations = list(violations)
        summary = "; ".join(f"{v.code} ({v.field}): {v.message}" for v in self.violations)
        # Le code de l'exception reprend la première violation
        first = self.violations[0].code if self.violations else None
        super().__init__(summary or "spécification invalide", first)

    @property
    def codes(self) -> list[str]:
        return [v.code for v in self.violations]

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["violations"] = [v.to_dict() for v in self.violations]
        return d


class ModelError(QueueBoundsError):
    """Évaluation hors domaine (ex: temps négatif)."""


class StreamError(QueueBoundsError):
    """Adresse de flux ou fenêtre de tirage invalide."""


class SimulationError(QueueBoundsError):
    """Erreur du moteur (bornes inversées, réplication en échec...)."""


class StatsError(QueueBoundsError):
    """Échantillon vide, dénominateur de moyenne nul..."""


class BoundsError(QueueBoundsError):
    """Entrée hors hypothèses pour une borne ou un oracle."""


class ConfigError(QueueBoundsError):
    """Document de configuration illisible ou incohérent."""

    code = "config-error"


class ReplicationError(QueueBoundsError):
    """Erreur d'une réplication précise, avec son identifiant."""

    def __init__(self, replication_id: int, cause: Exception):
        self.replication_id = replication_id
        self.cause = cause
        code = getattr(cause, "code", "replication-failed")
        super().__init__(f"réplication {replication_id}: {cause}", code)


class CapExceeded(SimulationError):
    """Plafond d'événements ou de temps simulé atteint avant la fin naturelle."""

    code = "cap-exceeded"
