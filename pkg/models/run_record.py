from sqlalchemy import Column, Integer, String, Float, DateTime, JSON, BigInteger, CheckConstraint, Index
from sqlalchemy.sql import func
from sqlalchemy.orm import relationship
from db import Base


class RunRecord(Base):
    __tablename__ = "run_records"

    id = Column(Integer, primary_key=True, index=True)
    experiment = Column(String(32), nullable=False)
    # sha256 канонического JSON сценария
    scenario_digest = Column(String(64), nullable=False)
    seed = Column(BigInteger, nullable=False)
    trials = Column(Integer, nullable=False)
    model_time_s = Column(Float, default=0.0)
    wall_clock_s = Column(Float, default=0.0)
    aggregate = Column(JSON, nullable=False, default=dict)
    created_at = Column(DateTime(timezone=True), server_default=func.now())

    # --- СВЯЗИ ---
    trial_results = relationship(
        "TrialResult", back_populates="run", cascade="all, delete-orphan", order_by="TrialResult.trial_index"
    )

    __table_args__ = (
        CheckConstraint("trials >= 1", name="check_trials_positive"),
        Index("idx_run_records_digest", "scenario_digest"),
        Index("idx_run_records_experiment", "experiment"),
    )
