# -*- coding: utf-8 -*-
"""
CLI de Queue Bounds (`qb`).

Variables d'environnement (préfixe QB_, ou fichier .env) :
    QB_RUN_SEED, QB_RUN_REPS, QB_RUN_THREADS, QB_RUN_OUTPUT_DIR
    QB_STATS_ALPHA, QB_BOUND_TOLERANCE, QB_LOG_LEVEL

Priorité des paramètres :
    1. Options de la ligne de commande
    2. Document --config (JSON)
    3. Settings (environnement, .env, défauts)
"""

# Codes de sortie par statut de résultat
EXIT_CODES = {
    "ok": 0,
    "error": 2,
    "rejected": 3,
    "caps_exceeded": 4,
}
