# -*- coding: utf-8 -*-
"""
Fonctions d'affichage Rich pour le CLI.

Chaque sous-commande a sa fonction show_xxx_result() ; les journaux vont
sur stderr, l'affichage sur stdout.
"""

import json

import click
from rich.console import Console
from rich.table import Table
from rich.panel import Panel
from rich.syntax import Syntax

console = Console()

STATUS_ICONS = {"ok": "✅", "rejected": "❌", "caps_exceeded": "⚠️", "error": "❌"}
VERDICT_ICONS = {"consistent": "✅", "rejected": "❌",
                 "stable": "✅", "boundary": "⚠️", "unstable": "❌"}


# =============================================================================
# Utilitaires communs
# =============================================================================

def show_error(msg: str):
    """Affiche un message d'erreur."""
    console.print(f"[red]❌ {msg}[/red]")


def show_success(msg: str):
    """Affiche un message de succès."""
    console.print(f"[green]✅ {msg}[/green]")


def show_warning(msg: str):
    """Affiche un avertissement."""
    console.print(f"[yellow]⚠️  {msg}[/yellow]")


def show_json(data: dict):
    """Affiche un dict en JSON : coloré sur un terminal, brut sinon (pipe, fichier)."""
    text = json.dumps(data, indent=2, ensure_ascii=False, default=str)
    if console.is_terminal:
        console.print(Syntax(text, "json"))
    else:
        click.echo(text)


def _fmt(value, digits: int = 6) -> str:
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    if value is None:
        return "—"
    return str(value)


def _status_line(result: dict) -> str:
    status = result.get("status", "?")
    return f"{STATUS_ICONS.get(status, '?')} {status}"


def show_outputs(result: dict):
    """Pied commun : répertoire, fichiers écrits, incidents."""
    outputs = result.get("outputs", [])
    console.print(f"[dim]📁 {result.get('output_dir', '?')} — {len(outputs)} fichier(s) + manifest.json[/dim]")
    caps = result.get("cap_incidents") or []
    if caps:
        show_warning(f"{len(caps)} réplication(s) plafonnée(s) : {caps[:10]}")
    errored = result.get("errored_replications") or []
    if errored:
        show_warning(f"{len(errored)} réplication(s) en erreur : {errored[:10]}")


def _describe_table(title: str, rows: dict) -> Table:
    table = Table(title=title, show_header=True)
    table.add_column("Fonctionnelle", style="cyan bold")
    for col in ("n", "moyenne", "SE", "min", "max"):
        table.add_column(col, justify="right")
    for name, d in rows.items():
        table.add_row(name, _fmt(d.get("n")), _fmt(d.get("mean")), _fmt(d.get("standard_error")),
                      _fmt(d.get("min")), _fmt(d.get("max")))
    return table


def _verdict_table(title: str, verdicts: list[dict]) -> Table:
    table = Table(title=title, show_header=True)
    table.add_column("Test", style="cyan")
    table.add_column("D⁺", justify="right")
    table.add_column("Critique", justify="right")
    table.add_column("p", justify="right")
    table.add_column("n / m", justify="right")
    table.add_column("Verdict")
    for v in verdicts:
        table.add_row(
            v.get("label", ""), _fmt(v.get("statistic"), 4), _fmt(v.get("critical_value"), 4),
            _fmt(v.get("p_value"), 3), f"{v.get('n_lower')} / {v.get('n_upper')}",
            f"{VERDICT_ICONS.get(v.get('verdict'), '?')} {v.get('verdict')}",
        )
    return table


# =============================================================================
# simulate
# =============================================================================

def show_simulate_result(result: dict):
    """Affiche le résultat de `qb simulate`."""
    rows = {k: result.get(k, {}) for k in ("duration", "A", "A_star", "eta_star")}
    console.print(_describe_table(f"{_status_line(result)} simulate — {result.get('mode', '?')}", rows))
    balks = result.get("balks", {})
    console.print(f"  Refus patience : [bold]{balks.get('patience', 0)}[/bold]   "
                  f"Refus salle : [bold]{balks.get('room', 0)}[/bold]")
    show_outputs(result)


# =============================================================================
# dominance
# =============================================================================

def show_dominance_result(result: dict):
    """Affiche le résultat de `qb dominance`."""
    suite = result.get("suite", "?")
    coupled = "couplés" if result.get("coupled", True) else "indépendants"
    verdicts = result.get("verdicts", [])
    if verdicts:
        console.print(_verdict_table(f"{_status_line(result)} dominance — {suite} ({coupled})", verdicts))
        if any(v.get("evidence") == "conjecture evidence" for v in verdicts):
            show_warning("conjecture evidence : indice empirique, pas un résultat démontré")
    if suite == "pathwise":
        lines = [f"[bold]Fenêtre  :[/bold] [0, {_fmt(result.get('window'))}]",
                 f"[bold]Chemins  :[/bold] {result.get('paths')}",
                 f"[bold]Marques  :[/bold] {'✅ partagées' if result.get('shared_marks_ok') else '❌ divergentes'}"]
        if result.get("patience_infinite"):
            lines.append(f"[bold]Violations :[/bold] {result.get('pathwise_violations')} "
                         f"({result.get('paths_with_violation')} chemin(s))")
        else:
            lines.append(f"[bold]Croisements W_lo > W_hi :[/bold] {result.get('paths_with_crossing')} chemin(s)")
        console.print(Panel.fit("\n".join(lines), title=f"{_status_line(result)} dominance trajectorielle",
                                border_style="cyan"))
    if "K_of_u" in result:
        k = result["K_of_u"]
        ok = result.get("ladder_convergence_ok")
        console.print(f"  K(u) : moyenne {_fmt(k.get('mean'))}, max {_fmt(k.get('max'))} — "
                      f"convergence {'✅' if ok else '❌'}")
    show_outputs(result)


# =============================================================================
# bound
# =============================================================================

def show_bound_result(result: dict):
    """Affiche le résultat de `qb bound`."""
    pathwise = result.get("pathwise_A_le_A_bar", {})
    console.print(Panel.fit(
        f"[bold]p = e^(−κλ_h) :[/bold] {_fmt(result.get('p'))}\n"
        f"[bold]Décalage      :[/bold] {_fmt(result.get('shift'))}\n"
        f"[bold]n_max         :[/bold] {result.get('n_max')}   "
        f"[bold]résidu :[/bold] {_fmt(result.get('residual'), 3)}\n"
        f"[bold]Pas du réseau :[/bold] {_fmt(result.get('lattice_width'), 3)} "
        f"(arrondi {result.get('rounding', '?')})\n"
        f"[bold]Cycles        :[/bold] {result.get('cycles')}   "
        f"[bold]A ≤ Ā :[/bold] {pathwise.get('holds')}/{pathwise.get('paths')}",
        title=f"{_status_line(result)} bound", border_style="cyan",
    ))
    keys = ("cycle_A", "A_bar", "index_bound", "index_bound_star", "tail_variant")
    rows = {k: result.get(k, {}) for k in keys}
    console.print(_describe_table("Échantillons", rows))
    console.print(_verdict_table("Chaîne de dominance", result.get("verdicts", [])))
    show_outputs(result)


# =============================================================================
# tail
# =============================================================================

def show_tail_result(result: dict):
    """Affiche le résultat de `qb tail` (tendance, pas une limite)."""
    table = Table(title=f"{_status_line(result)} tail — {result.get('label', 'trend check')}",
                  show_header=True)
    table.add_column("Cible", style="cyan bold")
    table.add_column("q", justify="right")
    table.add_column("u", justify="right")
    table.add_column("P̂{X > u}", justify="right")
    table.add_column("Référence", justify="right")
    table.add_column("Rapport", justify="right")
    table.add_column("Constante", justify="right")
    for rep in result.get("reports", []):
        for q, u, s, r, ratio in zip(rep["quantiles"], rep["u"], rep["survival"],
                                     rep["reference"], rep["ratio"]):
            table.add_row(rep["target"], _fmt(q), _fmt(u, 4), _fmt(s, 3), _fmt(r, 3),
                          _fmt(ratio, 4), _fmt(rep["bound"], 4))
    console.print(table)
    if not result.get("within_twice_bound", True):
        show_warning("au moins un rapport dépasse 2× la constante")
    show_outputs(result)


# =============================================================================
# stability / steady-state / moments
# =============================================================================

def show_stability_result(result: dict):
    """Affiche le résultat de `qb stability`."""
    r = result.get("report", {})
    verdict = r.get("verdict", "?")
    console.print(Panel.fit(
        f"[bold]λ_h     :[/bold] {_fmt(r.get('lambda_h'))}\n"
        f"[bold]E[S]    :[/bold] {_fmt(r.get('mean_service'))}\n"
        f"[bold]ρ_h     :[/bold] {_fmt(r.get('rho_h'))}\n"
        f"[bold]p_∞     :[/bold] {_fmt(r.get('p_inf'))}\n"
        f"[bold]ρ_eff   :[/bold] [cyan bold]{_fmt(r.get('rho_eff'))}[/cyan bold]\n"
        f"[bold]Verdict :[/bold] {VERDICT_ICONS.get(verdict, '?')} {verdict}"
        + (f"\n\n[dim italic]{r['note']}[/dim italic]" if r.get("note") else ""),
        title="⚖️  Stabilité", border_style="cyan",
    ))
    show_outputs(result)


def show_steady_state_result(result: dict):
    """Affiche le résultat de `qb steady-state`."""
    ratio = result.get("ratio", {})
    avg = result.get("time_average", {})
    ok = result.get("agreement_3se")
    lines = [
        f"[bold]E𝒜/Eξ          :[/bold] {_fmt(ratio.get('estimate'))} ± {_fmt(ratio.get('standard_error'), 3)} "
        f"[dim]({ratio.get('method', '?')})[/dim]",
        f"[bold]Moyenne [0, T]  :[/bold] {_fmt(avg.get('estimate'))} ± {_fmt(avg.get('standard_error'), 3)} "
        f"[dim](T = {_fmt(avg.get('horizon'))}, {avg.get('reps')} chemins)[/dim]",
        f"[bold]Accord 3 SE     :[/bold] {'✅' if ok else '❌'}",
    ]
    bound = result.get("steady_state_bound", {})
    if "bound" in bound:
        lines.append(f"[bold]Borne           :[/bold] {_fmt(bound['bound'])} "
                     f"[dim](facteur {_fmt(bound['factor'], 4)} × E g[W_λh(∞)] = {_fmt(bound['reference'], 4)})[/dim]")
    elif bound:
        lines.append(f"[dim]Borne stationnaire non applicable : {bound.get('message', '')}[/dim]")
    console.print(Panel.fit("\n".join(lines), title=f"{_status_line(result)} steady-state",
                            border_style="cyan"))
    show_outputs(result)


def show_moments_result(result: dict):
    """Affiche le résultat de `qb moments`."""
    table = Table(title=f"{_status_line(result)} moments de η*", show_header=True)
    table.add_column("m", justify="right", style="cyan bold")
    table.add_column("E(η*)^m", justify="right")
    table.add_column("SE", justify="right")
    table.add_column("IC", justify="right")
    table.add_column("Δ relatif", justify="right")
    table.add_column("Note", style="dim")
    for e in result.get("eta_star", []):
        table.add_row(str(e["order"]), _fmt(e["estimate"]), _fmt(e["standard_error"], 3),
                      f"[{_fmt(e.get('ci_low'), 4)}, {_fmt(e.get('ci_high'), 4)}]",
                      _fmt(e.get("relative_change"), 3), e.get("note", ""))
    console.print(table)
    cyc = result.get("cycle_length", {})
    console.print(f"  Eξ = {_fmt(cyc.get('estimate'))} ± {_fmt(cyc.get('standard_error'), 3)}")
    show_outputs(result)


# =============================================================================
# validate / replay / presets
# =============================================================================

def show_validate_result(result: dict):
    """Affiche le résultat de `qb validate`."""
    table = Table(title=f"{_status_line(result)} validate", show_header=True)
    table.add_column("Contrôle", style="cyan bold")
    table.add_column("Valeur", justify="right")
    table.add_column("Attendu", justify="right")
    table.add_column("Statut")
    table.add_column("Détails", style="dim")
    for c in result.get("checks", []):
        table.add_row(c["name"], _fmt(c["value"]), _fmt(c["expected"]),
                      "✅" if c["ok"] else "❌", c.get("detail", ""))
    console.print(table)
    failed = result.get("failed", [])
    if failed:
        show_error(f"{len(failed)} contrôle(s) en échec : {', '.join(failed)}")
    else:
        show_success("tous les contrôles passent")
    show_outputs(result)


def show_replay_result(result: dict):
    """Affiche la comparaison d'un rejeu."""
    compared = result.get("compared", [])
    mismatched = result.get("mismatched", [])
    if result.get("identical"):
        show_success(f"rejeu identique : {len(compared)} CSV comparé(s) octet à octet")
    else:
        show_error(f"rejeu divergent : {', '.join(mismatched)}")
    show_outputs(result)


def show_presets(presets: list[dict]):
    """Liste des presets de modèle."""
    table = Table(title="📚 Presets", show_header=True)
    table.add_column("Nom", style="cyan bold")
    table.add_column("Description")
    for p in presets:
        table.add_row(p["name"], p["description"])
    console.print(table)
