from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker, DeclarativeBase
from contextlib import contextmanager
import os
from dotenv import load_dotenv

# Базовый класс для всех ORM-моделей (стиль SQLAlchemy 2.0)
class Base(DeclarativeBase):
    """
    Базовый класс для всех таблиц хранилища запусков.
    """
    pass

# Загружаем переменные окружения из файла .env
load_dotenv()

# По умолчанию записи запусков лежат в локальном файле SQLite
DATABASE_URL = os.getenv("DATABASE_URL", "sqlite:///runs.db")
if not DATABASE_URL:
    # Пустая строка в .env - ошибка конфигурации, падаем рано
    raise ValueError("DATABASE_URL is set but empty")

SQL_ECHO = os.getenv("SQL_ECHO", "false").lower() in ("1", "true", "yes")


class Database:
    """
    Менеджер подключения к базе данных.
    Содержит engine, фабрику сессий и контекстный менеджер для сессий.
    """

    def __init__(self, db_url: str, echo: bool = SQL_ECHO):
        self.db_url = db_url
        self.echo = echo
        self.engine = self._create_engine()
        self.session_factory = self._create_session_factory()

    def _create_engine(self):
        """
        Создаёт движок SQLAlchemy.
        У SQLite нет пула соединений по размеру, поэтому pool_size
        передаётся только серверным СУБД.
        """
        options = {"echo": self.echo, "future": True}
        if self.db_url.startswith("sqlite"):
            # сессии открываются из рабочих потоков пула испытаний
            options["connect_args"] = {"check_same_thread": False}
        else:
            options["pool_size"] = 10
        return create_engine(self.db_url, **options)

    def _create_session_factory(self):
        return sessionmaker(
            bind=self.engine,
            expire_on_commit=False,   # Объекты остаются доступными после commit
            autoflush=False,
        )

    def create_all(self):
        """Создаёт таблицы без миграций (тесты, первый запуск)."""
        Base.metadata.create_all(self.engine)

    @contextmanager
    def get_session(self):
        """
        Контекстный менеджер для сессий базы данных.
        Использование:
            with database.get_session() as session:
                crud.run_record.get_multi(session)
        """
        session = self.session_factory()
        try:
            yield session
        except Exception:
            # При любой ошибке откатываем транзакцию и пробрасываем исключение дальше
            session.rollback()
            raise
        finally:
            session.close()


database = Database(DATABASE_URL)
