# -*- coding: utf-8 -*-
"""
Pool de réplications.

Chaque réplication possède ses flux (adressés par son identifiant) et ne
partage aucun état mutable : l'ordre d'exécution n'influe pas sur les
résultats. Les résultats sont remis en ordre d'identifiant après la
barrière de jointure ; les erreurs sont collectées, jamais avalées.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .errors import ReplicationError

logger = logging.getLogger("queue_bounds.pool")


@dataclass
class PoolResult:
    """Résultats triés par identifiant de réplication + erreurs par identifiant."""
    results: dict[int, Any] = field(default_factory=dict)
    errors: dict[int, ReplicationError] = field(default_factory=dict)

    def ordered(self) -> list[Any]:
        return [self.results[k] for k in sorted(self.results)]

    @property
    def errored_ids(self) -> list[int]:
        return sorted(self.errors)


def run_replications(task: Callable[[int], Any], replication_ids: Iterable[int],
                     threads: int = 1) -> PoolResult:
    """Exécute task(rep_id) pour chaque identifiant ; threads ≤ 1 ⇒ séquentiel."""
    ids = list(replication_ids)
    out = PoolResult()

    def guarded(rep: int):
        try:
            return rep, task(rep), None
        except Exception as exc:  # noqa: BLE001  # rapportée avec l'identifiant
            return rep, None, ReplicationError(rep, exc)

    if threads <= 1:
        outcomes = map(guarded, ids)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(guarded, ids))

    for rep, value, err in outcomes:
        if err is not None:
            out.errors[rep] = err
        else:
            out.results[rep] = value
    if out.errors:
        logger.warning("%d réplication(s) en erreur : %s", len(out.errors), out.errored_ids[:10])
    logger.debug("pool : %d réplications, %d threads", len(ids), threads)
    return out
