#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
path_setup.py - Met la racine du dépôt sur sys.path
À importer avant les imports absolus entre dossiers (CORE, FEEDBACK, SIMULATION, ...)
"""

import sys
from pathlib import Path


def setup_paths() -> Path:
    """Ajoute la racine dubins-escape (le dossier de ce fichier) au Python path."""
    repo_root = Path(__file__).resolve().parent
    if str(repo_root) not in sys.path:
        sys.path.insert(0, str(repo_root))
    return repo_root


# Auto-configuration quand le module est importé
REPO_ROOT = setup_paths()
