# -*- coding: utf-8 -*-
"""
Exceptions du projet dubins-escape.

Chaque exception dérive aussi du builtin qu'on aurait levé sans elle
(ValueError / RuntimeError) : un `except ValueError` existant continue
de fonctionner.
"""

from typing import Optional


class EscapeError(Exception):
    """Racine de toutes les erreurs du projet."""


class DomainError(EscapeError, ValueError):
    """Entrée hors domaine (angle non fini, etc.)."""


class ContractViolation(EscapeError, ValueError):
    """Contrat d'appel violé (|u| > 1, dt < 0, paramètres non positifs…)."""


class DegenerateInputError(EscapeError, ValueError):
    """Azimut indéfini : le robot est (quasiment) au centre."""


class PreconditionError(EscapeError, ValueError):
    """Précondition d'une opération non satisfaite (départ hors région…)."""


class InvalidExitError(EscapeError, ValueError):
    """Sortie avec cos(θ(T) − φ(T)) ≤ 0 : viole ṙ(T) ≥ 0."""


class NoTangentError(EscapeError, ValueError):
    """Le point est dans le cercle de braquage : aucune tangente."""


class DivergenceError(EscapeError, RuntimeError):
    """La simulation a dépassé max_time sans sortir (bug)."""


class ScenarioParseError(EscapeError, ValueError):
    """Ligne de fichier scénario mal formée."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"ligne {line_no}: {message}")


class ScenarioValidationError(EscapeError, ValueError):
    """Scénario syntaxiquement correct mais invalide (champ nommé)."""

    def __init__(self, field: str, message: str, scenario: Optional[str] = None):
        self.field = field
        self.scenario = scenario
        where = f"[{scenario}] " if scenario else ""
        super().__init__(f"{where}champ '{field}': {message}")
