"""trustcal: simulate, model, and fit human trust in miscalibrated AI confidence."""

from .agent import (
    AgentParams,
    AgentState,
    ResponsePolicy,
    perceive,
    respond,
    sample_agent_params,
    simulate_cohort,
    simulate_participant,
    trajectory,
    update,
)
from .conditions import (
    CONDITIONS,
    ConditionSpec,
    StimulusPool,
    TrialStimulus,
    build_pool,
    condition_spec,
    ideal_observer_accuracy,
    optimal_criterion,
    sample_trial,
)
from .datastore import (
    SessionConfig,
    TrialRecord,
    TrialValidationError,
    read_trials,
    validate_session,
    write_trials,
)
from .probability import clamp_confidence, logistic, logit

__version__ = "0.1.0"
