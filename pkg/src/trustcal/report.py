"""Assemble the full statistics document for a trial dataset.

One JSON document per dataset: per-condition block summaries, calibration
(overall plus early/late phases), pooled learning slopes, learner fractions,
and model-fit statistics when the records carry model predictions. Posterior
state trajectories are included when draws are supplied. Companion CSVs carry
the numbers behind the standard figures for external plotting.
"""

from __future__ import annotations

import csv
import dataclasses
from collections import defaultdict

import numpy as np

from .datastore import TrialRecord, group_by_participant
from .metrics import (
    block_accuracy,
    classify_learner,
    cohort_learning_slope,
    ece,
    model_fit_stats,
)

EARLY_RANGE = (1, 10)
LATE_RANGE = (41, 50)


def _phase_records(records, lo, hi):
    return [r for r in records if lo <= r.trial_index <= hi]


def _calibration_dict(records) -> dict:
    rep = ece(records)
    return {
        "ece": rep.ece,
        "bins": [dataclasses.asdict(b) for b in rep.bins],
    }


def _condition_section(records: list[TrialRecord]) -> dict:
    groups = group_by_participant(records)
    section: dict = {
        "n_participants": len(groups),
        "blocks": [dataclasses.asdict(b) for b in block_accuracy(records)],
        "calibration": {"overall": _calibration_dict(records)},
    }
    early = _phase_records(records, *EARLY_RANGE)
    late = _phase_records(records, *LATE_RANGE)
    if early:
        section["calibration"]["early"] = _calibration_dict(early)
    if late:
        section["calibration"]["late"] = _calibration_dict(late)

    try:
        section["learning_slope"] = cohort_learning_slope(records)
    except ValueError:
        section["learning_slope"] = None

    labels = []
    for recs in groups.values():
        try:
            labels.append(classify_learner(recs))
        except ValueError:
            pass
    section["learner_fraction"] = (
        float(np.mean([lab == "learner" for lab in labels])) if labels else None
    )

    if all(r.v is not None for r in records):
        v = np.array([r.v for r in records])
        section["model_fit"] = model_fit_stats(v, records)
    else:
        section["model_fit"] = None
    return section


def build_report(records: list[TrialRecord], draws=None) -> dict:
    """The metrics document; includes a trajectory section only when draws are given."""
    by_condition: dict[str, list[TrialRecord]] = defaultdict(list)
    for rec in records:
        by_condition[rec.condition].append(rec)
    doc: dict = {
        "n_participants": len({r.participant_id for r in records}),
        "n_trials": len(records),
        "conditions": {
            cond: _condition_section(recs) for cond, recs in sorted(by_condition.items())
        },
    }
    if draws is not None:
        from .inference.trajectories import posterior_trajectories

        bands = posterior_trajectories(draws, records)
        doc["trajectories"] = {
            cond: {key: np.asarray(val).tolist() for key, val in band.items()}
            for cond, band in bands.items()
        }
    return doc


def write_figure_csvs(doc: dict, outdir) -> list[str]:
    """fig3 (accuracy), fig4 (HR/FAR/d'), and fig6 (trajectories, when present)."""
    import os

    written = []

    path = os.path.join(outdir, "fig3_accuracy.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["condition", "block_start", "block_end", "accuracy", "n_trials"])
        for cond, section in doc["conditions"].items():
            for blk in section["blocks"]:
                writer.writerow(
                    [cond, blk["block_start"], blk["block_end"],
                     f"{blk['accuracy']:.6f}", blk["n_trials"]]
                )
    written.append(path)

    path = os.path.join(outdir, "fig4_hrfar.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["condition", "block_start", "block_end",
             "hit_rate", "false_alarm_rate", "d_prime", "n_trials"]
        )
        for cond, section in doc["conditions"].items():
            for blk in section["blocks"]:
                writer.writerow(
                    [cond, blk["block_start"], blk["block_end"],
                     _fmt_opt(blk["hit_rate"]), _fmt_opt(blk["false_alarm_rate"]),
                     _fmt_opt(blk["d_prime"]), blk["n_trials"]]
                )
    written.append(path)

    if "trajectories" in doc:
        path = os.path.join(outdir, "fig6_trajectories.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["condition", "trial", "b_mean", "b_lo", "b_hi", "w_mean", "w_lo", "w_hi"]
            )
            for cond, band in doc["trajectories"].items():
                for i, t in enumerate(band["trial"]):
                    writer.writerow(
                        [cond, int(t)]
                        + [f"{band[k][i]:.6f}" for k in
                           ("b_mean", "b_lo", "b_hi", "w_mean", "w_lo", "w_hi")]
                    )
        written.append(path)
    return written


def _fmt_opt(x) -> str:
    return "" if x is None else f"{x:.6f}"
