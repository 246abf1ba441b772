#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Point d'entrée CLI de Queue Bounds.

Usage :
    python scripts/qb_cli.py --help
    python scripts/qb_cli.py presets
    python scripts/qb_cli.py simulate --preset deterministic-drain --reps 1
    python scripts/qb_cli.py validate --reps 2000

Variables d'environnement :
    QB_RUN_SEED       — graine maîtresse (défaut: 20240601)
    QB_RUN_OUTPUT_DIR — répertoire de sortie (défaut: runs/latest)
    QB_LOG_LEVEL      — niveau des journaux (défaut: INFO)
"""

import sys
from pathlib import Path

# Rendre le paquet src/queue_bounds importable sans installation
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from queue_bounds.cli.commands import main

if __name__ == "__main__":
    main()
