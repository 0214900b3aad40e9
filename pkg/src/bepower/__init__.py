"""Power analysis for two-group equivalence tests with unequal variances.

Welch-based TOST power is estimated by mapping randomized Sobol' points
to trial summary statistics (`empirical_power`), whole power curves and
sample-size recommendations come from per-point root-finding on the
mapped statistics (`power_curve`), and a naive data-level simulator
(`naive_power`) serves as the validation reference.  2x2 crossover
designs reduce to the same machinery (`crossover_sample_size`), and the
`diagnostics` module measures how often the root-finding assumptions
are stressed.
"""

from .crossover import (CrossoverSpec, chow_sample_size,
                        crossover_sample_size, to_two_group)
from .curve import (CENSORED, CurvePoint, PowerCurve, lambda_of_n,
                    power_curve, se_of_n, smallest_crossing)
from .diagnostics import (SCENARIOS, IntersectionReport, SePeakReport,
                          scan_intersections, scan_se_peak, scenario_design,
                          scenario_summary)
from .oracle import naive_power
from .qrng import SobolStream, digital_shift, sobol_raw, sobol_stream
from .special import inv_chisq, inv_norm, t_quantile
from .tost import (DesignSpec, SummaryStats, empirical_power, rejects,
                   stats_from_point, welch_df)

__version__ = "0.1.0"

__all__ = [
    "CENSORED",
    "CrossoverSpec",
    "CurvePoint",
    "DesignSpec",
    "IntersectionReport",
    "PowerCurve",
    "SCENARIOS",
    "SePeakReport",
    "SobolStream",
    "SummaryStats",
    "chow_sample_size",
    "crossover_sample_size",
    "digital_shift",
    "empirical_power",
    "inv_chisq",
    "inv_norm",
    "lambda_of_n",
    "naive_power",
    "power_curve",
    "rejects",
    "scan_intersections",
    "scan_se_peak",
    "scenario_design",
    "scenario_summary",
    "se_of_n",
    "smallest_crossing",
    "sobol_raw",
    "sobol_stream",
    "stats_from_point",
    "t_quantile",
    "to_two_group",
    "welch_df",
]
