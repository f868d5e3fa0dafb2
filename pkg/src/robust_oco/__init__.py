"""Outlier-robust online convex optimization.

A redescending log-exp transform of strongly convex per-round losses, the
projected-gradient learner built on it, exponential-weights expert
aggregation for unbounded domains, corruption-adversary experiment harness,
and a numerical verification suite for the underlying inequalities.
"""

from .losses import (
    HINGE_SVM,
    RIDGE,
    LearnParams,
    ProblemConstants,
    RoundLoss,
    SideInfo,
    derive_constants,
    eta,
    eval_f,
    eval_g,
    eval_reference_losses,
    grad_f,
    grad_g,
    minimizer_f,
)
from .learners import (
    LearnerState,
    learn_step,
    ogd_step,
    project_ball,
    theoretical_stepsize,
    topk_filter_step,
)
from .experts import ExpertGrid, ExpertPool, aggregate_action, beta_default, build_grid, init_pool, pool_step
from .stream import (
    CleanGenerator,
    CorruptionPlan,
    corrupt,
    gen_clean_block,
    gen_clean_round,
    k_grid,
    ridge_generator,
    sample_outlier_rounds,
    stream_rngs,
    svm_generator,
)
from .harness import (
    EpisodeTrace,
    RegretCurve,
    RoundRecord,
    RunConfig,
    aggregate_runs,
    check_regret_bound,
    clean_dynamic_regret,
    delta_S,
    path_length,
    preset_config,
    run_cell,
    run_episode,
    run_episode_with_runner,
    run_theorem_check,
)
from .oracle import CheckReport, default_suite

__version__ = "0.1.0"
