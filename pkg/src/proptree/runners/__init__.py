from .basic import (
    falsifies,
    gen_and_run,
    generate_prefix,
    print_env,
    printed_size,
    run_loop,
    run_on,
    shrink,
    shrink_candidates,
    shrink_loop,
)
from .combinatorial import combinatorial_loop, constructor_pairs, featurize
from .errors import CampaignError, ConfigurationError, ShrinkError
from .feedback import (
    ConstantProbe,
    CoverageProbe,
    EnvProbe,
    PredicateCountProbe,
    Probe,
    fuzz_loop,
    instrumented_run,
    mutate_env,
    target_loop,
    trace,
)
from .parallel import SharedCampaignState, parallel_run_loop
from .pools import (
    ENERGY_LEVELS,
    GENERATE,
    POOL_VARIANTS,
    BeatsBest,
    Mutate,
    Seed,
    SeedPool,
    Threshold,
    Utility,
    NeverUseful,
    make_pool,
    make_utility,
    pool_configurations,
)
