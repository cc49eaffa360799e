import numpy as np
import pytest

import models  # noqa: F401  регистрирует таблицы в Base.metadata
from db import Database


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def memory_db():
    """SQLite в памяти: таблицы создаются заново для каждого теста."""
    database = Database("sqlite://")
    database.create_all()
    return database


@pytest.fixture
def session(memory_db):
    with memory_db.get_session() as db:
        yield db
