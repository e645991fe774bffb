"""First-price auctions with bidding clubs: bids, protocol, verification."""

from bidclubs._kernel import kernel_backend
from bidclubs.bid_engine import (BidFunction, equilibrium_bid_fixed,
                                 equilibrium_bid_mixture,
                                 verify_dominance_monotonicity)
from bidclubs.club_protocol import (DECLINE, ClubCoordinator, Settlement,
                                    false_name_deviation_scenario)
from bidclubs.distributions import (ClubSizeDistribution, CountDistribution,
                                    ValuationDistribution,
                                    compose_count_distribution, convolve,
                                    custom_valuations, dominates,
                                    power_valuations, shift, tail_mass,
                                    uniform_valuations)
from bidclubs.environment import (AgentType, AuctionInstance, EnvironmentConfig,
                                  baseline_stochastic_instance,
                                  belief_distribution, sample_instance)
from bidclubs.mechanisms import (ABSTAIN, AuctionOutcome, Bid,
                                 EquilibriumPayment, FirstPricePayment,
                                 GridEquilibriumPayment, MixturePayment,
                                 PaymentRule, best_response_value,
                                 run_composed_mechanism, run_first_price,
                                 run_participation_revelation)

__version__ = "0.1.0"

__all__ = [
    "ABSTAIN", "AgentType", "AuctionInstance", "AuctionOutcome", "Bid",
    "BidFunction", "ClubCoordinator", "ClubSizeDistribution",
    "CountDistribution", "DECLINE", "EnvironmentConfig", "EquilibriumPayment",
    "FirstPricePayment", "GridEquilibriumPayment", "MixturePayment",
    "PaymentRule", "Settlement", "ValuationDistribution",
    "baseline_stochastic_instance", "belief_distribution",
    "best_response_value", "compose_count_distribution", "convolve",
    "custom_valuations", "dominates", "equilibrium_bid_fixed",
    "equilibrium_bid_mixture", "false_name_deviation_scenario",
    "kernel_backend", "power_valuations", "run_composed_mechanism",
    "run_first_price", "run_participation_revelation", "sample_instance",
    "shift", "tail_mass", "uniform_valuations",
    "verify_dominance_monotonicity",
]
