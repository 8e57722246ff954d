"""Two-time-scale radio resource-block allocation.

A seedable simulator and learning library: a bandit controller partitions the
RB pool across cells on the slow time scale, per-cell double-DQN agents
schedule RBs to eMBB/URLLC users (borrowing idle spectrum across cells) on
the fast one. Ships an exact enumeration oracle and a greedy baseline for
verification.
"""

from .allocation import (
    Allocation,
    ControllerAssignment,
    FeasibilityReport,
    alloc_from_text,
    alloc_to_text,
    check_borrowing,
    check_fairness,
    check_ofdma,
    check_qos,
    is_feasible,
    objective,
)
from .baselines import UserQueue, greedy_single_stage
from .exp3 import (
    ControllerActionSpace,
    Exp3State,
    action_probabilities,
    enumerate_controller_actions,
    scale_reward,
    select_action,
    update,
)
from .harness import (
    HyperConfig,
    LoopConfig,
    MetricsRecord,
    RunConfig,
    TwoScaleEnv,
    allocation_metrics,
    apply_param,
    derive_rng,
    emit_metrics,
    evaluate,
    even_split_assignment,
    load_config,
    parse_metrics,
    stream_seed,
    sweep,
    train,
)
from .netmodel import (
    ChannelState,
    EndUser,
    Gnb,
    NetworkInstance,
    PhysConfig,
    QosConfig,
    ScenarioConfig,
    SliceKind,
    UnstableQueue,
    dbm_to_watts,
    generate_topology,
    link_rate,
    packet_delay,
    rate_matrix,
    redraw_positions,
    sample_channel,
    user_total_rate,
)
from .neural import (
    AdamState,
    AgentActionSpace,
    DdqnAgent,
    Experience,
    Mlp,
    ReplayBuffer,
    act_greedy,
    adam_step,
    agent_reward,
    compute_targets,
    encode_state,
    enumerate_agent_actions,
    epsilon_greedy,
    forward,
    gradients,
    legal_action_mask,
    load_mlp,
    save_mlp,
    train_step,
)
from .oracle import (
    KnapsackInstance,
    OracleSolution,
    SearchSpaceError,
    exhaustive_solve,
    exhaustive_solve_joint,
    knapsack_solve,
)

__version__ = "0.1.0"
