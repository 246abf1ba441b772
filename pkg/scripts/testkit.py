# -*- coding: utf-8 -*-
"""
Mini-lanceur partagé par les scripts de test.

Les fichiers test_*.py définissent des fonctions test_xxx() à base
d'assert : pytest les collecte telles quelles, et chaque script peut
aussi s'exécuter seul (python scripts/test_model.py) avec les compteurs
✅/❌ habituels.
"""

import os
import sys
import traceback

SRC = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "src")
if SRC not in sys.path:
    sys.path.insert(0, SRC)


def run_tests(namespace: dict, title: str) -> None:
    """Exécute les test_* du module appelant, affiche le bilan, quitte."""
    tests = [(name, fn) for name, fn in namespace.items()
             if name.startswith("test_") and callable(fn) and getattr(fn, "__test__", True)
             and getattr(fn, "__module__", None) == namespace.get("__name__")]
    passed = failed = 0
    print("=" * 60)
    print(title)
    print("=" * 60)
    for name, fn in tests:
        try:
            fn()
            print(f"  ✅ {name}")
            passed += 1
        except Exception as e:  # noqa: BLE001  # rapporté tel quel
            print(f"  ❌ {name} — {type(e).__name__}: {e}")
            if os.environ.get("QB_TEST_VERBOSE"):
                traceback.print_exc()
            failed += 1
    print("\n" + "=" * 60)
    total = passed + failed
    if failed == 0:
        print(f"🎉 {passed}/{total} tests PASS")
        sys.exit(0)
    print(f"💥 {passed}/{total} tests PASS, {failed} FAILED")
    sys.exit(1)
