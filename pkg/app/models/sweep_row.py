"""
Sweep row model: one aggregated (sweep value, scheme, metric) cell of a run.
"""

from typing import Optional
from sqlalchemy import Integer, String, Float, ForeignKey, Index
from sqlalchemy.orm import Mapped, mapped_column, relationship
from app.database import Base


class SweepRowRecord(Base):
    """
    Stored result row; NaN statistics are stored as NULL.

    Attributes:
        id: Primary key, auto-incrementing integer
        run_id: Foreign key reference to the owning experiment run
        sweep_value: Value of the swept parameter (user units)
        scheme: S1, S2, single or perfect
        metric: Metric name (nmse_mc, snr_db, rate_T150, ...)
        mean: Cell mean
        stderr: Standard error of the mean
        n_valid: Trials that entered the statistics
        n_degenerate: Trials excluded as degenerate
    """
    __tablename__ = "sweep_rows"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, index=True)
    run_id: Mapped[int] = mapped_column(
        Integer,
        ForeignKey("experiment_runs.id", ondelete="CASCADE"),
        nullable=False,
        index=True
    )
    sweep_value: Mapped[float] = mapped_column(Float, nullable=False)
    scheme: Mapped[str] = mapped_column(String(16), nullable=False)
    metric: Mapped[str] = mapped_column(String(32), nullable=False)
    mean: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    stderr: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    n_valid: Mapped[int] = mapped_column(Integer, nullable=False)
    n_degenerate: Mapped[int] = mapped_column(Integer, nullable=False, default=0)

    run: Mapped["ExperimentRun"] = relationship("ExperimentRun", back_populates="rows")

    def __repr__(self) -> str:
        return f"<SweepRowRecord(run_id={self.run_id}, {self.sweep_value}, {self.scheme}, {self.metric}={self.mean})>"


Index('idx_sweep_rows_run_order', SweepRowRecord.run_id, SweepRowRecord.sweep_value, SweepRowRecord.scheme, SweepRowRecord.metric)
