from engine.budget import QD_ROUNDING_NOTE

# ==========================================
# АППАРАТНЫЕ ПРЕСЕТЫ
# ==========================================
# Значения подставляются в сценарий до его собственных ключей,
# поэтому явный ключ в файле сценария всегда побеждает пресет.

PRESETS = {
    # NV-центр: 200 нс на попытку, eta = 0.01, ядерный спин-клиент живёт ~1 с
    "nv": {
        "attempt_time": 200e-9,
        "eta": 0.01,
        "scheme": "two_photon",
        "client_t2": 1.0,
    },
    # Квантовая точка: 1 нс на попытку, eta = 0.5, T2 электрона порядка 1 мкс
    "qd": {
        "attempt_time": 1e-9,
        "eta": 0.5,
        "scheme": "two_photon",
        "client_t2": 1e-6,
    },
}

PRESET_NOTES = {
    "qd": QD_ROUNDING_NOTE,
}


def preset_values(name: str) -> dict:
    """Копия значений пресета; неизвестное имя - KeyError."""
    return dict(PRESETS[name.lower()])


def preset_note(name: str | None) -> str | None:
    if name is None:
        return None
    return PRESET_NOTES.get(name.lower())
