"""
Models package for the experiment store.

Imports every SQLAlchemy model so that it is registered with the Base
metadata before table creation.
"""

from app.models.experiment_run import ExperimentRun
from app.models.sweep_row import SweepRowRecord

__all__ = ["ExperimentRun", "SweepRowRecord"]
