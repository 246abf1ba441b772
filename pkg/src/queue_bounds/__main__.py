# -*- coding: utf-8 -*-
"""
Point d'entrée pour python -m queue_bounds.

Permet de lancer le CLI avec :
    cd src && python -m queue_bounds --help
    cd src && python -m queue_bounds simulate --config run.json
"""

from .cli.commands import main

if __name__ == "__main__":
    main()
