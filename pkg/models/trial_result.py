from sqlalchemy import Column, Integer, ForeignKey, JSON, UniqueConstraint, Index
from sqlalchemy.orm import relationship
from db import Base


class TrialResult(Base):
    __tablename__ = "trial_results"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("run_records.id", ondelete="CASCADE"), nullable=False)
    trial_index = Column(Integer, nullable=False)
    payload = Column(JSON, nullable=False, default=dict)

    run = relationship("RunRecord", back_populates="trial_results")

    __table_args__ = (
        UniqueConstraint("run_id", "trial_index", name="unique_run_trial"),
        Index("idx_trial_results_run_id", "run_id"),
    )
