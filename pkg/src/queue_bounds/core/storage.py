# -*- coding: utf-8 -*-
"""
Stockage des résultats d'une exécution dans un répertoire local.

Toutes les écritures passent par ResultStore, qui indexe chaque fichier
(chemin relatif, sha256, taille) pour le manifeste : aucun fichier de
sortie n'échappe à l'index.

Usage :
    store = ResultStore("runs/latest")
    store.put_csv("samples.csv", SAMPLE_COLUMNS, rows)
    store.put_json("summary.json", summary)
    manifest.outputs = store.index()
"""

import csv
import hashlib
import io
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from .errors import ConfigError
from .models import OutputEntry

logger = logging.getLogger("queue_bounds.storage")


def render_cell(value: Any) -> str:
    """Flottants au format repr (aller-retour exact), le reste en str."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


class ResultStore:
    """
    Répertoire de sortie d'une exécution.

    Attributes:
        root: racine du répertoire (créée à la première écriture)
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._index: dict[str, OutputEntry] = {}

    def _path(self, key: str) -> Path:
        path = (self.root / key).resolve()
        if self.root.resolve() not in path.parents and path != self.root.resolve():
            raise ConfigError(f"clé hors du répertoire de sortie : {key}")
        return path

    # ─────────────────────────────────────────────────────────────
    # PUT: Écriture
    # ─────────────────────────────────────────────────────────────

    def put(self, key: str, content: str) -> OutputEntry:
        """
        Écrit un fichier texte UTF-8 et l'indexe.

        Args:
            key: chemin relatif (ex: "trace/rep_0000.csv")
            content: contenu texte
        """
        data = content.encode("utf-8")
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        entry = OutputEntry(path=key, sha256=hashlib.sha256(data).hexdigest(), bytes=len(data))
        self._index[key] = entry
        logger.debug("écrit %s (%d octets)", key, len(data))
        return entry

    def put_json(self, key: str, data: dict) -> OutputEntry:
        return self.put(key, json.dumps(data, indent=2, ensure_ascii=False, sort_keys=True) + "\n")

    def put_csv(self, key: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> OutputEntry:
        """CSV RFC 4180, séparateur décimal '.', flottants en repr."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([render_cell(v) for v in row])
        return self.put(key, buf.getvalue())

    # ─────────────────────────────────────────────────────────────
    # GET: Lecture
    # ─────────────────────────────────────────────────────────────

    def get(self, key: str) -> Optional[str]:
        path = self._path(key)
        if not path.is_file():
            return None
        return path.read_text(encoding="utf-8")

    def get_json(self, key: str) -> Optional[dict]:
        content = self.get(key)
        if content is None:
            return None
        try:
            return json.loads(content)
        except json.JSONDecodeError as e:
            logger.warning("JSON illisible %s : %s", key, e)
            return None

    def exists(self, key: str) -> bool:
        return self._path(key).is_file()

    def list_objects(self, prefix: str = "") -> list[dict]:
        """Fichiers présents sous prefix : [{"Key", "Size"}], triés par clé."""
        if not self.root.is_dir():
            return []
        out = []
        for path in sorted(self.root.rglob("*")):
            if path.is_file():
                key = path.relative_to(self.root).as_posix()
                if key.startswith(prefix):
                    out.append({"Key": key, "Size": path.stat().st_size})
        return out

    # ─────────────────────────────────────────────────────────────
    # Index
    # ─────────────────────────────────────────────────────────────

    def index(self) -> list[OutputEntry]:
        """Entrées triées par chemin."""
        return [self._index[k] for k in sorted(self._index)]
