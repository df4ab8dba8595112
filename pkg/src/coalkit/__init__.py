"""Exact solution-concept checks for compactly represented coalitional games."""

from .concepts import (BSVerdict, CoreResult, CoreVerdict, EmptinessCertificate, KernelVerdict,
                       Objection, bargaining_set_check, core_check, core_nonempty,
                       justified_objection_exists, kernel_check, verify_justified)
from .game import (ExcessTable, Game, PlayerSet, excess, is_imputation, make_payoff,
                   max_excess, parse_rational, payoff_sum, surplus)
from .representations import (ExplicitGame, GraphGame, MCNet, dump_game, gg_to_mcn, load_game,
                              to_explicit)

__all__ = [
    "BSVerdict",
    "CoreResult",
    "CoreVerdict",
    "EmptinessCertificate",
    "ExcessTable",
    "ExplicitGame",
    "Game",
    "GraphGame",
    "KernelVerdict",
    "MCNet",
    "Objection",
    "PlayerSet",
    "bargaining_set_check",
    "core_check",
    "core_nonempty",
    "dump_game",
    "excess",
    "gg_to_mcn",
    "is_imputation",
    "justified_objection_exists",
    "kernel_check",
    "load_game",
    "make_payoff",
    "max_excess",
    "parse_rational",
    "payoff_sum",
    "surplus",
    "to_explicit",
    "verify_justified",
]

__version__ = "0.1.0"
