# -*- coding: utf-8 -*-
"""
CLI Click — sous-commandes scriptables de Queue Bounds.

Chaque commande fusionne ses options avec le document --config, appelle
ExperimentService puis affiche via display.py (ou JSON brut avec --json).

Usage :
    python scripts/qb_cli.py simulate --preset deterministic-drain --reps 1
    python scripts/qb_cli.py dominance --suite rates --reps 10000 --strict
    python scripts/qb_cli.py bound --config runs/bound.json --tol 1e-3
    python scripts/qb_cli.py stability --preset unstable --json
    python scripts/qb_cli.py replay runs/latest/manifest.json

Codes de sortie : 0 succès, 2 erreur de configuration, 3 dominance
rejetée (avec --strict), 4 plafond atteint.
"""

import logging
import sys

import click
from pydantic import ValidationError

from . import EXIT_CODES
from .display import (
    show_error, show_json, show_warning,
    show_simulate_result, show_dominance_result, show_bound_result, show_tail_result,
    show_stability_result, show_steady_state_result, show_moments_result,
    show_validate_result, show_replay_result, show_presets,
)
from .. import __version__
from ..config import get_settings
from ..core.errors import QueueBoundsError
from ..core.experiments import ModelConfig, get_experiment_service, load_config
from ..core.model import CostFunction
from ..core.presets import list_presets

LOG_FORMAT = "%(asctime)s %(levelname)-5s [%(name)s] %(message)s"

COSTS = {
    "one": CostFunction.one,
    "identity": CostFunction.identity,
    "exp-decay": CostFunction.exp_decay,
}


# ─────────────────────────────────────────────────────────────
# Helpers
# ─────────────────────────────────────────────────────────────

def common_options(fn):
    """Options partagées par toutes les sous-commandes d'expérience."""
    options = [
        click.option("--config", "-c", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="Document de configuration JSON"),
        click.option("--preset", "-p", default=None, help="Preset de modèle (remplace la section model)"),
        click.option("--out-dir", "-o", default=None, help="Répertoire de sortie"),
        click.option("--seed", type=click.IntRange(min=0), default=None, help="Graine maîtresse"),
        click.option("--reps", "-n", type=click.IntRange(min=1), default=None, help="Nombre de réplications"),
        click.option("--threads", type=click.IntRange(min=1), default=None, help="Threads de réplication"),
        click.option("--trace", is_flag=True, help="Écrire les journaux d'événements"),
        click.option("--strict", is_flag=True, help="Code 3 si une dominance est rejetée"),
        click.option("--alpha", type=float, default=None, help="Niveau des tests de dominance"),
        click.option("--tol", type=float, default=None, help="Tolérance de la décomposition"),
        click.option("--json", "-j", "jflag", is_flag=True, help="JSON brut"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _run_experiment(subcommand: str, opts: dict, run_extra: dict, on_success):
    """Helper commun : fusionne la configuration, exécute, affiche, sort."""
    try:
        cfg = load_config(opts["config_path"])
    except QueueBoundsError as e:
        _exit(e.to_dict(), opts["jflag"], opts["strict"], on_success)
    if opts["preset"]:
        cfg = cfg.model_copy(update={"model": ModelConfig(preset=opts["preset"])})
    run = {"seed": opts["seed"], "reps": opts["reps"], "threads": opts["threads"],
           "alpha": opts["alpha"], "tol": opts["tol"], **run_extra}
    output = {"directory": opts["out_dir"], "trace": opts["trace"] or None}
    try:
        cfg = cfg.with_overrides(run=run, output=output)
    except ValidationError as e:
        _exit({"status": "error", "code": "config-error", "message": str(e)},
              opts["jflag"], opts["strict"], on_success)
    result = get_experiment_service().run(subcommand, cfg)
    _exit(result, opts["jflag"], opts["strict"], on_success)


def _exit(result: dict, jflag: bool, strict: bool, on_success):
    """Affiche le résultat puis quitte avec le code associé au statut."""
    status = result.get("status", "error")
    if jflag:
        show_json(result)
    elif status == "error":
        show_error(result.get("message", f"Erreur: {result.get('code', '?')}"))
    else:
        on_success(result)
    code = EXIT_CODES.get(status, 2)
    if status == "rejected" and not strict:
        if not jflag:
            show_warning("rejet signalé (code 0 sans --strict)")
        code = 0
    sys.exit(code)


# ─────────────────────────────────────────────────────────────
# Groupe racine
# ─────────────────────────────────────────────────────────────

@click.group()
@click.option("--log-level", "-l", default=None,
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              help="Niveau des journaux (stderr)")
@click.version_option(version=__version__, prog_name="qb")
def main(log_level):
    """📈 Queue Bounds — simulation de files M_t/G/1+H et vérification de bornes."""
    level = (log_level or get_settings().log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT,
                        datefmt="%H:%M:%S", stream=sys.stderr)


# ─────────────────────────────────────────────────────────────
# Simulation
# ─────────────────────────────────────────────────────────────

@main.command("simulate")
@common_options
@click.option("--mode", "-m", type=click.Choice(["busy-period", "cycle", "horizon"]), default=None,
              help="Période d'activité, cycle régénératif ou horizon fixe")
@click.option("--horizon", type=float, default=None, help="Horizon (mode horizon)")
def simulate_cmd(mode, horizon, **opts):
    """🎲 Réplications → samples.csv + summary.json."""
    _run_experiment("simulate", opts, {"mode": mode, "horizon": horizon}, show_simulate_result)


@main.command("dominance")
@common_options
@click.option("--suite", "-s", type=click.Choice(["rates", "rooms", "monotonicity", "conjecture", "pathwise"]),
              default=None, help="Suite de dominance")
@click.option("--coupled/--independent", default=None, help="Bras couplés (défaut) ou indépendants")
@click.option("--cost", "costs", multiple=True, type=click.Choice(sorted(COSTS)),
              help="Fonction de coût g (répétable)")
@click.option("--arms-csv", type=click.Path(exists=True, dir_okay=False),
              help="Bras lus depuis un CSV (arm, value)")
@click.option("--permutation", is_flag=True, help="Test par permutation")
def dominance_cmd(suite, coupled, costs, arms_csv, permutation, **opts):
    """⚖️  Tests de dominance stochastique d'ordre 1."""
    extra = {"suite": suite, "coupled": coupled, "arms_csv": arms_csv, "permutation": permutation or None}
    if costs:
        extra["costs"] = [COSTS[c]() for c in costs]
    _run_experiment("dominance", opts, extra, show_dominance_result)


# ─────────────────────────────────────────────────────────────
# Bornes
# ─────────────────────────────────────────────────────────────

@main.command("bound")
@common_options
@click.option("--grid-points", type=click.IntRange(min=2), default=None, help="Points de la grille u")
@click.option("--bound-samples", type=click.IntRange(min=1), default=None,
              help="Périodes d'activité pour F̂")
def bound_cmd(grid_points, bound_samples, **opts):
    """📐 Décomposition géométrique J, J* et bornes Monte Carlo → bound.csv."""
    _run_experiment("bound", opts, {"grid_points": grid_points, "bound_samples": bound_samples},
                    show_bound_result)


@main.command("tail")
@common_options
@click.option("--quantile", "-q", "quantiles", multiple=True, type=float,
              help="Quantile empirique (répétable)")
def tail_cmd(quantiles, **opts):
    """📉 Rapports de queue aux quantiles (tendance) → tail.csv."""
    _run_experiment("tail", opts, {"quantiles": list(quantiles) or None}, show_tail_result)


@main.command("stability")
@common_options
def stability_cmd(**opts):
    """🧮 Verdict de stabilité ρ_eff = λ_h·E[S]·p_∞."""
    _run_experiment("stability", opts, {}, show_stability_result)


@main.command("steady-state")
@common_options
@click.option("--horizon", type=float, default=None,
              help="Horizon de la moyenne temporelle (défaut : dérivé de ρ_eff, ≥ 1e4)")
@click.option("--horizon-reps", type=click.IntRange(min=2), default=None,
              help="Chemins pour la moyenne temporelle (défaut : 30)")
def steady_state_cmd(horizon, horizon_reps, **opts):
    """♾️  Ratio régénératif face à la moyenne temporelle, borne stationnaire."""
    _run_experiment("steady-state", opts, {"horizon": horizon, "horizon_reps": horizon_reps},
                    show_steady_state_result)


@main.command("moments")
@common_options
@click.option("--order", "orders", multiple=True, type=click.IntRange(min=1),
              help="Ordre m (répétable)")
def moments_cmd(orders, **opts):
    """📊 Moments E(η*)^m avec erreur type bootstrap."""
    _run_experiment("moments", opts, {"orders": list(orders) or None}, show_moments_result)


@main.command("validate")
@common_options
@click.option("--check", "checks", multiple=True, help="Restreindre à un contrôle (répétable)")
def validate_cmd(checks, **opts):
    """🧪 Suite d'oracles (drainage, amincissement, M/G/1, dérive, couplage…)."""
    _run_experiment("validate", opts, {"checks": list(checks) or None}, show_validate_result)


# ─────────────────────────────────────────────────────────────
# Rejeu et catalogue
# ─────────────────────────────────────────────────────────────

@main.command("replay")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", "-o", default=None, help="Répertoire du rejeu (défaut: <run>/replay)")
@click.option("--json", "-j", "jflag", is_flag=True, help="JSON brut")
def replay_cmd(manifest, out_dir, jflag):
    """🔁 Rejoue un manifeste et compare les CSV octet à octet."""
    result = get_experiment_service().replay(manifest, out_dir)
    _exit(result, jflag, True, show_replay_result)


@main.command("presets")
@click.option("--json", "-j", "jflag", is_flag=True, help="JSON brut")
def presets_cmd(jflag):
    """📚 Presets de modèle disponibles."""
    presets = list_presets()
    if jflag:
        show_json({"status": "ok", "presets": presets})
    else:
        show_presets(presets)

