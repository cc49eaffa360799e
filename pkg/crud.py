from typing import Any, Generic, List, Optional, Type, TypeVar

from pydantic import BaseModel
from sqlalchemy.orm import Session, selectinload

from db import Base
from models.run_record import RunRecord
from models.trial_result import TrialResult
from schemas import RunRecordCreate

# === БАЗОВЫЕ ТИПЫ ДЛЯ ГЕНЕРИКОВ ===
ModelType = TypeVar("ModelType", bound=Base)
CreateSchemaType = TypeVar("CreateSchemaType", bound=BaseModel)

# ==========================================
# БАЗОВЫЙ КЛАСС CRUD
# ==========================================
class CRUDBase(Generic[ModelType, CreateSchemaType]):
    def __init__(self, model: Type[ModelType]):
        self.model = model

    def get(self, db: Session, id: Any) -> Optional[ModelType]:
        return db.query(self.model).filter(self.model.id == id).first()

    def get_multi(self, db: Session, skip: int = 0, limit: int = 100) -> List[ModelType]:
        return db.query(self.model).offset(skip).limit(limit).all()

    def remove(self, db: Session, id: int) -> Optional[ModelType]:
        obj = db.get(self.model, id)
        if obj:
            db.delete(obj)
            db.commit()
        return obj

# ==========================================
# РЕПОЗИТОРИЙ ЗАПУСКОВ
# ==========================================
class CRUDRunRecord(CRUDBase[RunRecord, RunRecordCreate]):
    def create_with_trials(self, db: Session, obj_in: RunRecordCreate) -> RunRecord:
        """Запись запуска вместе со всеми испытаниями одной транзакцией."""
        data = obj_in.model_dump(mode="json", exclude={"trial_results", "passed"})
        db_obj = RunRecord(**data)
        db_obj.trial_results = [
            TrialResult(trial_index=t.trial_index, payload=t.payload) for t in obj_in.trial_results
        ]
        db.add(db_obj)
        db.commit()
        db.refresh(db_obj)
        return db_obj

    def get_multi(self, db: Session, skip: int = 0, limit: int = 100,
                  experiment: Optional[str] = None) -> List[RunRecord]:
        query = db.query(self.model)
        if experiment:
            query = query.filter(RunRecord.experiment == experiment)
        # Новые запуски сверху
        return query.order_by(RunRecord.id.desc()).offset(skip).limit(limit).all()

    def get_with_trials(self, db: Session, id: int) -> Optional[RunRecord]:
        return (
            db.query(self.model)
            .options(selectinload(RunRecord.trial_results))
            .filter(RunRecord.id == id)
            .first()
        )

    def get_by_digest(self, db: Session, digest: str, seed: Optional[int] = None) -> List[RunRecord]:
        query = db.query(self.model).filter(RunRecord.scenario_digest == digest)
        if seed is not None:
            query = query.filter(RunRecord.seed == seed)
        return query.order_by(RunRecord.id.asc()).all()


run_record = CRUDRunRecord(RunRecord)
