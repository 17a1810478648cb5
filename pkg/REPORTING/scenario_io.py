# -*- coding: utf-8 -*-
"""
scenario_io.py - Lecture / écriture des fichiers de scénarios (.scn).

Format (UTF-8, orienté ligne) :

    # commentaire
    [scenario demi_tour_omega_pi]
    group = essais
    v = 1, omega = pi, rho = 1
    x0 = 0.25, y0 = 0.25, theta0 = pi

- une section par scénario, nom unique
- paires `clé = valeur` séparées par des virgules
- valeurs numériques : flottant, ou multiple littéral de pi ("pi/6", "100*pi", "-pi/2")
- clés inconnues / dupliquées ou ligne mal formée → ScenarioParseError (numéro de ligne)
- invariant violé (ρ ≤ 0, départ hors région…) → ScenarioValidationError (champ nommé)
"""

from __future__ import annotations

import math
import re
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from CORE.dubins_core import EscapeRegion, Pose, RobotParams
from UTILS.errors import ScenarioParseError, ScenarioValidationError

# ==== Constantes ====
CORPUS_DIR = Path(__file__).resolve().parent.parent / "CONFIG" / "corpus"
CORPUS_SUFFIX = ".scn"
# noms historiques des grilles ω, acceptés par load_corpus
CORPUS_ALIASES = {
    "paper_fig3": "west_from_diagonal",
    "paper_fig4": "toward_center",
}

NUMERIC_KEYS = ("v", "omega", "rho", "x0", "y0", "theta0")
TEXT_KEYS = ("group",)
DEFAULTS = {"v": 1.0, "rho": 1.0}

_HEADER_RE = re.compile(r"^\[\s*scenario\s+([A-Za-z0-9_.\-]+)\s*\]$")
_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_PI_RE = re.compile(rf"^(?P<sign>[+-]?)\s*(?:(?P<coef>{_NUM})\s*\*\s*)?pi\s*(?:/\s*(?P<div>{_NUM}))?$")


class Scenario(BaseModel):
    """Entrée du runner : paramètres du robot, rayon de la région, pose initiale."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(..., min_length=1, description="Nom unique du scénario")
    group: Optional[str] = Field(None, description="Groupe de figure (superposition SVG)")
    v: float = Field(1.0, gt=0, allow_inf_nan=False, description="Vitesse (m/s)")
    omega: float = Field(..., gt=0, allow_inf_nan=False, description="Taux de virage maximal (rad/s)")
    rho: float = Field(1.0, gt=0, allow_inf_nan=False, description="Rayon de la région (m)")
    x0: float = Field(..., allow_inf_nan=False, description="Position initiale x (m)")
    y0: float = Field(..., allow_inf_nan=False, description="Position initiale y (m)")
    theta0: float = Field(..., allow_inf_nan=False, description="Cap initial (rad)")

    @model_validator(mode="after")
    def _start_inside(self):
        if self.x0 * self.x0 + self.y0 * self.y0 >= self.rho * self.rho:
            raise ValueError("x0 : le départ doit être strictement dans la région (x0² + y0² < ρ²)")
        return self

    @property
    def figure_group(self) -> str:
        return self.group or self.name

    def params(self) -> RobotParams:
        return RobotParams(speed=self.v, max_turn_rate=self.omega)

    def region(self) -> EscapeRegion:
        return EscapeRegion(radius=self.rho)

    def pose(self) -> Pose:
        return Pose(self.x0, self.y0, self.theta0)


# ------------------------ Valeurs ------------------------

def parse_value(text: str) -> float:
    """Flottant ou multiple de pi. ValueError si illisible."""
    s = text.strip()
    m = _PI_RE.match(s)
    if m:
        coef = float(m.group("coef")) if m.group("coef") else 1.0
        div = float(m.group("div")) if m.group("div") else 1.0
        if div == 0.0:
            raise ValueError(f"division par zéro : {text!r}")
        val = coef * math.pi / div
        return -val if m.group("sign") == "-" else val
    return float(s)


def build_scenario(name: str, fields: Dict[str, object]) -> Scenario:
    """Construit et valide un scénario ; ValidationError → ScenarioValidationError (champ nommé)."""
    data = {"name": name, **DEFAULTS, **fields}
    try:
        return Scenario(**data)
    except ValidationError as e:
        err = e.errors()[0]
        loc = err.get("loc") or ()
        # erreur de modèle (sans loc) : seul le contrôle de position initiale en lève
        field = str(loc[0]) if loc else "x0"
        raise ScenarioValidationError(field, err.get("msg", str(e)), scenario=name) from e


# ------------------------ Parsing ------------------------

def parse_scenario_file(text: str) -> List[Scenario]:
    scenarios: List[Scenario] = []
    seen_names: Dict[str, int] = {}
    current: Optional[str] = None
    fields: Dict[str, object] = {}

    def flush():
        if current is not None:
            scenarios.append(build_scenario(current, fields))

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        if line.startswith("["):
            m = _HEADER_RE.match(line)
            if not m:
                raise ScenarioParseError(line_no, f"en-tête invalide : {line!r}")
            flush()
            current = m.group(1)
            if current in seen_names:
                raise ScenarioParseError(line_no, f"scénario '{current}' déjà défini ligne {seen_names[current]}")
            seen_names[current] = line_no
            fields = {}
            continue

        if current is None:
            raise ScenarioParseError(line_no, "paire clé = valeur hors d'une section [scenario …]")

        for pair in line.split(","):
            if "=" not in pair:
                raise ScenarioParseError(line_no, f"paire sans '=' : {pair.strip()!r}")
            key, value = (part.strip() for part in pair.split("=", 1))
            if key not in NUMERIC_KEYS and key not in TEXT_KEYS:
                raise ScenarioParseError(line_no, f"clé inconnue : {key!r}")
            if key in fields:
                raise ScenarioParseError(line_no, f"clé dupliquée : {key!r}")
            if not value:
                raise ScenarioParseError(line_no, f"valeur manquante pour {key!r}")
            if key in TEXT_KEYS:
                fields[key] = value
                continue
            try:
                fields[key] = parse_value(value)
            except ValueError:
                raise ScenarioParseError(line_no, f"valeur numérique illisible pour {key!r} : {value!r}") from None

    flush()
    return scenarios


def read_scenario_file(path: Path) -> List[Scenario]:
    return parse_scenario_file(Path(path).read_text(encoding="utf-8"))


# ------------------------ Écriture ------------------------

def format_scenarios(scenarios: List[Scenario]) -> str:
    """Inverse exact de parse_scenario_file (flottants écrits avec repr)."""
    blocks = []
    for s in scenarios:
        lines = [f"[scenario {s.name}]"]
        if s.group is not None:
            lines.append(f"group = {s.group}")
        lines.append(f"v = {s.v!r}, omega = {s.omega!r}, rho = {s.rho!r}")
        lines.append(f"x0 = {s.x0!r}, y0 = {s.y0!r}, theta0 = {s.theta0!r}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


# ------------------------ Corpus ------------------------

def list_corpora() -> List[str]:
    return sorted(p.stem for p in CORPUS_DIR.glob(f"*{CORPUS_SUFFIX}"))


def load_corpus(name: str) -> List[Scenario]:
    path = CORPUS_DIR / f"{CORPUS_ALIASES.get(name, name)}{CORPUS_SUFFIX}"
    if not path.exists():
        raise FileNotFoundError(f"corpus inconnu : {name!r} (disponibles : {', '.join(list_corpora())})")
    return read_scenario_file(path)


def random_scenarios(n: int, seed: int = 0, rho: float = 1.0, v: float = 1.0) -> List[Scenario]:
    """Campagne aléatoire : ω log-uniforme sur [1e-2, 1e3], départ uniforme dans le disque, cap uniforme."""
    rng = np.random.default_rng(seed)
    omega = 10.0 ** rng.uniform(-2.0, 3.0, size=n)
    r = rho * np.sqrt(rng.uniform(0.0, 1.0, size=n)) * (1.0 - 1e-9)
    phi = rng.uniform(-math.pi, math.pi, size=n)
    theta = rng.uniform(-math.pi, math.pi, size=n)
    width = max(len(str(n - 1)), 4)
    return [
        Scenario(
            name=f"random_{i:0{width}d}",
            group="random",
            v=v,
            omega=float(omega[i]),
            rho=rho,
            x0=float(r[i] * math.cos(phi[i])),
            y0=float(r[i] * math.sin(phi[i])),
            theta0=float(theta[i]),
        )
        for i in range(n)
    ]
