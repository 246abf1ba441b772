# -*- coding: utf-8 -*-
"""Queue Bounds — simulation de files M_t/G(Ψ)/1+H(Ψ) et vérification numérique de bornes."""

__version__ = "1.0.0"
