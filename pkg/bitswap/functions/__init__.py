from bitswap.functions.linearizability import seq_swap_oracle, brute_force_linearizable
from bitswap.functions.linearizability import explicit_linearize, verify_explicit
from bitswap.functions.properties import check_step_bound, check_round_bound
from bitswap.functions.properties import check_real_time_rounds, check_max_register_history
