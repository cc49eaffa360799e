"""
Чтение файла сценария.

Формат - грамматика .env: по одной паре `key = value` в строке, `#` начинает
комментарий, пустые строки пропускаются, регистр ключей не важен.
Относительные пути к файлам считаются от каталога сценария.
"""
import hashlib
import json
import logging
import re
from pathlib import Path
from typing import Any, Optional

from dotenv import dotenv_values
from pydantic import ValidationError

from exceptions import ScenarioError
from schemas import Scenario
from scripts.presets import PRESETS, preset_values

logger = logging.getLogger("scenario")

FILE_FIELDS = ("target", "circuit", "pattern")

_KEY_RE = re.compile(r"^\s*(?:export\s+)?([A-Za-z_][A-Za-z0-9_\-]*)\s*=")


def _key_lines(text: str) -> dict[str, int]:
    """Номер строки, на которой ключ задан последним (как и в dotenv)."""
    lines = {}
    for number, line in enumerate(text.splitlines(), start=1):
        match = _KEY_RE.match(line)
        if match:
            lines[match.group(1).lower()] = number
    return lines


def _bare_keys(text: str) -> dict[str, int]:
    """Строки без '=': dotenv отдаёт для них None."""
    bare = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith("#") and "=" not in stripped:
            bare[stripped.split()[0].lower()] = number
    return bare


def read_scenario_values(path: Path) -> tuple[dict[str, Any], dict[str, int]]:
    if not path.is_file():
        raise ScenarioError(f"scenario file {path} does not exist")
    text = path.read_text(encoding="utf-8")
    lines = _key_lines(text)
    bare = _bare_keys(text)
    if bare:
        key, number = min(bare.items(), key=lambda item: item[1])
        raise ScenarioError("expected 'key = value'", line=number, field=key)

    values: dict[str, Any] = {}
    for key, value in dotenv_values(path, interpolate=False).items():
        key = key.lower()
        if value is None or value == "":
            raise ScenarioError("empty value", line=lines.get(key), field=key)
        values[key] = value
    return values, lines


def build_scenario(
    values: dict[str, Any],
    lines: Optional[dict[str, int]] = None,
    base_dir: Optional[Path] = None,
    overrides: Optional[dict[str, Any]] = None,
) -> Scenario:
    """
    Собирает Scenario: значения пресета, затем ключи файла, затем
    переопределения из командной строки.
    """
    lines = lines or {}
    merged: dict[str, Any] = {}

    preset = values.get("preset")
    if preset is not None:
        if preset.lower() not in PRESETS:
            raise ScenarioError(
                f"unknown preset '{preset}', expected one of {sorted(PRESETS)}",
                line=lines.get("preset"),
                field="preset",
            )
        merged.update(preset_values(preset))

    merged.update(values)
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})

    if base_dir is not None:
        for key in FILE_FIELDS:
            if key in merged and not Path(merged[key]).is_absolute():
                merged[key] = str(base_dir / merged[key])

    try:
        return Scenario(**merged)
    except ValidationError as e:
        error = e.errors()[0]
        field = str(error["loc"][0]) if error["loc"] else None
        raise ScenarioError(error["msg"], line=lines.get(field), field=field) from None


def load_scenario(path: Path | str, overrides: Optional[dict[str, Any]] = None) -> Scenario:
    path = Path(path)
    values, lines = read_scenario_values(path)
    scenario = build_scenario(values, lines, base_dir=path.parent, overrides=overrides)
    logger.info("scenario %s loaded: experiment=%s seed=%d trials=%d",
                path.name, scenario.experiment.value, scenario.seed, scenario.trials)
    return scenario


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def scenario_digest(scenario: Scenario) -> str:
    """
    sha256 канонического JSON сценария. Вместо путей к файлам берётся
    хэш их содержимого, так что перенос каталога не меняет дайджест.
    """
    data = scenario.model_dump(mode="json")
    for key in FILE_FIELDS:
        value = getattr(scenario, key)
        if value is not None:
            data[key] = _file_digest(value)
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
