# -*- coding: utf-8 -*-
"""
Configuration de Queue Bounds via pydantic-settings.

Toutes les variables sont chargées depuis :
1. Variables d'environnement (priorité haute)
2. Fichier .env (priorité basse)

Les valeurs servent de défauts : le document de configuration JSON
d'une expérience et les options du CLI passent devant.

Usage :
    from .config import get_settings
    settings = get_settings()
    print(settings.sim_max_events)
"""

from functools import lru_cache
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Configuration chargée depuis les variables d'env / .env."""

    # ─── Simulation (plafonds par réplication) ────────────────
    # Dépasser un plafond est un résultat signalé, jamais une troncature muette.
    sim_max_events: int = 10_000_000
    sim_max_time: float = 1e7

    # ─── Exécution ────────────────────────────────────────────
    run_seed: int = 20240601
    run_reps: int = 1000
    run_threads: int = 1
    run_output_dir: str = "runs/latest"

    # ─── Statistiques ─────────────────────────────────────────
    stats_alpha: float = 0.01
    stats_bootstrap_resamples: int = 1000
    stats_permutation_below: int = 500      # Repli permutation si n, m < seuil (sur option)

    # ─── Bornes (décomposition géométrique) ───────────────────
    bound_tolerance: float = 1e-3
    bound_max_cells: int = 1 << 22         # Taille max du réseau de convolution

    # ─── Logs ─────────────────────────────────────────────────
    log_level: str = "INFO"

    model_config = {
        "env_prefix": "QB_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "extra": "ignore",
    }


@lru_cache()
def get_settings() -> Settings:
    """Singleton Settings (cached)."""
    return Settings()
