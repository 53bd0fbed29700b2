"""
Experiment run model.

One row per stored sweep: its identifying parameters, the full
ExperimentConfig as canonical JSON and how long the sweep took.
"""

from datetime import datetime
from typing import List, Optional
from sqlalchemy import Integer, String, Text, Float, DateTime, Index
from sqlalchemy.orm import Mapped, mapped_column, relationship
from app.database import Base


class ExperimentRun(Base):
    """
    ExperimentRun model representing one stored Monte Carlo sweep.

    Attributes:
        id: Primary key, auto-incrementing integer
        name: Optional label of the run
        sweep: Sweep kind (rician_nmse, rician_snr, rate_vs_m, rate_vs_power, custom)
        n_trials: Trials per sweep value
        master_seed: Seed all trial streams derive from, as decimal text
        config_json: The ExperimentConfig as JSON
        created_at: Timestamp when the run was stored
        duration_seconds: Wall-clock time of the sweep
        rows: Relationship to the aggregated result rows
    """
    __tablename__ = "experiment_runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, index=True)
    name: Mapped[Optional[str]] = mapped_column(String(100), nullable=True)
    sweep: Mapped[str] = mapped_column(String(32), nullable=False)
    n_trials: Mapped[int] = mapped_column(Integer, nullable=False)
    # Decimal text: u64 seeds overflow a signed 64-bit INTEGER
    master_seed: Mapped[str] = mapped_column(String(20), nullable=False)
    config_json: Mapped[str] = mapped_column(Text, nullable=False)
    created_at: Mapped[datetime] = mapped_column(
        DateTime,
        default=datetime.utcnow,
        nullable=False
    )
    duration_seconds: Mapped[float] = mapped_column(Float, nullable=False, default=0.0)

    rows: Mapped[List["SweepRowRecord"]] = relationship(
        "SweepRowRecord",
        back_populates="run",
        cascade="all, delete-orphan"
    )

    def __repr__(self) -> str:
        return f"<ExperimentRun(id={self.id}, sweep='{self.sweep}', n_trials={self.n_trials})>"


Index('idx_experiment_runs_created', ExperimentRun.created_at)
