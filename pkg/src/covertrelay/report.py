"""Machine-readable discrepancy report for the verbatim published forms.

Two formula families are known-suspect and are therefore evaluated
verbatim and compared against the in-repo reference paths instead of
being silently trusted or silently repaired:

  * the per-slot DEP branch for thresholds above the upper noise bound
    (its large-threshold limit is not 1, which the defining
    probabilities require), and
  * the combinatorial TAS/MRC outage expansion (an index factor yields
    a negative incomplete-gamma argument, the gamma order degenerates
    for single receive antennas, and one log factor is ambiguous).

Every comparison becomes one CSV row; domain violations are recorded as
text in place of a numeric value.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .detection import dep_slot_paper, dep_slot_reference
from .model import RateParams, SystemParams, dbm_to_watts
from .throughput import outage_hop_multi_paper, outage_hop_multi_reference

__all__ = ["DiscrepancyRecord", "build_discrepancy_report", "write_discrepancy_csv"]

CSV_COLUMNS = ("formula_id", "params", "paper_value_or_violation", "reference_value", "abs_diff")


@dataclass(frozen=True)
class DiscrepancyRecord:
    """One verbatim-vs-reference comparison."""

    formula_id: str
    params: str
    paper_value_or_violation: str
    reference_value: float
    abs_diff: float | None  # None when the verbatim form could not be evaluated

    def row(self) -> tuple:
        diff = "" if self.abs_diff is None else f"{self.abs_diff:.17g}"
        return (
            self.formula_id,
            self.params,
            self.paper_value_or_violation,
            f"{self.reference_value:.17g}",
            diff,
        )


def _record(formula_id, params_desc, paper_value, reference_value) -> DiscrepancyRecord:
    if isinstance(paper_value, str):
        return DiscrepancyRecord(formula_id, params_desc, paper_value, reference_value, None)
    return DiscrepancyRecord(
        formula_id,
        params_desc,
        f"{paper_value:.17g}",
        reference_value,
        abs(paper_value - reference_value),
    )


def build_discrepancy_report(
    rho: float = 1.5,
    sigma_n2_dbm_grid: tuple = (-10.0, -5.0, 3.0),
    power_grid: tuple = (1.0, 3.0, 5.0),
    antenna_grid: tuple = ((1, 1), (2, 2), (2, 8), (4, 4)),
    t: float = 1.5,
) -> list[DiscrepancyRecord]:
    """Evaluate both suspect formula families across the validation grid."""
    records: list[DiscrepancyRecord] = []

    # Above-threshold DEP branch: tau > mu2 on a per-parameter tau grid.
    for sigma_dbm in sigma_n2_dbm_grid:
        sigma_n2 = dbm_to_watts(sigma_dbm)
        for p in power_grid:
            params = SystemParams(p, p, sigma_n2, rho)
            for tau in np.geomspace(params.mu2 * 1.001, params.mu2 + 20.0 * p, 10):
                tau = float(tau)
                ref = dep_slot_reference(p, tau, params)
                paper = dep_slot_paper(p, tau, params)
                records.append(
                    _record(
                        "dep_slot_above_upper_bound",
                        f"p={p};sigma_n2_dbm={sigma_dbm};rho={rho};tau={tau:.6g}",
                        paper,
                        ref,
                    )
                )

    # Combinatorial TAS/MRC outage, both readings of the ambiguous log factor.
    rate = RateParams(t)
    for sigma_dbm in sigma_n2_dbm_grid:
        sigma_n2 = dbm_to_watts(sigma_dbm)
        for p in power_grid:
            params = SystemParams(p, p, sigma_n2, rho)
            for n_t, n_r in antenna_grid:
                ref = outage_hop_multi_reference(p, rate, params, n_t, n_r)
                for interp in ("ln_rho_sq_arg", "ln_rho_sq_whole"):
                    value = outage_hop_multi_paper(p, rate, params, n_t, n_r, interp)
                    records.append(
                        _record(
                            f"outage_multi_combinatorial[{interp}]",
                            f"p={p};sigma_n2_dbm={sigma_dbm};rho={rho};T={t};"
                            f"n_t={n_t};n_r={n_r}",
                            value.value if value.ok else value.violation,
                            ref,
                        )
                    )
    return records


def write_discrepancy_csv(records, path: str) -> None:
    """Write records to `path` in the fixed five-column schema."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(rec.row())
