"""Cash sub-additive risk measures under ambiguous discounting."""

from ._core import (
    CapacityError,
    NumericError,
    ParseError,
    RiskMeasure,
    SubcashError,
    ValidationError,
    ambiguous_discount_reserve,
    forward_from_spot,
    put_premium,
    run_cli,
    solve_bsde,
    spot_from_forward,
    transfer,
)

__all__ = [
    "CapacityError",
    "NumericError",
    "ParseError",
    "RiskMeasure",
    "SubcashError",
    "ValidationError",
    "ambiguous_discount_reserve",
    "forward_from_spot",
    "put_premium",
    "run_cli",
    "solve_bsde",
    "spot_from_forward",
    "transfer",
]
