from .run_record import RunRecord
from .trial_result import TrialResult
