"""Command-line entry point: simulate, fit, recover, report, serve."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .agent import AgentParams, ResponsePolicy, cohort_to_records, sample_agent_params, simulate_cohort
from .conditions import CONDITIONS, condition_spec
from .datastore import (
    SessionConfig,
    TrialValidationError,
    group_by_participant,
    read_trials,
    write_trials,
)
from .streams import substream


def _load_records(path, parser):
    try:
        return read_trials(path)
    except FileNotFoundError:
        parser.exit(1, f"error: input file not found: {path}\n")
    except TrialValidationError as exc:
        parser.exit(1, f"error: invalid trial file {path}: {exc}\n")


def _params_from_json(path, n_agents, parser):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.exit(1, f"error: cannot read params JSON {path}: {exc}\n")
    entries = data if isinstance(data, list) else [data] * n_agents
    if len(entries) != n_agents:
        parser.exit(1, f"error: params JSON lists {len(entries)} agents, expected {n_agents}\n")
    try:
        return [AgentParams(**e) for e in entries]
    except (TypeError, ValueError) as exc:
        parser.exit(1, f"error: bad agent params: {exc}\n")


def cmd_simulate(args, parser):
    spec = condition_spec(args.condition)
    rng = substream(args.seed, "simulate", args.condition)
    if args.params:
        params = _params_from_json(args.params, args.agents, parser)
    else:
        params = [sample_agent_params(rng) for _ in range(args.agents)]
    policy = ResponsePolicy(kind=args.policy)
    result = simulate_cohort(params, spec, args.agents, args.trials, policy=policy, rng=rng)
    records = cohort_to_records(result, id_prefix=f"{args.condition[:3]}")
    write_trials(records, args.out)
    print(f"wrote {len(records)} trials for {args.agents} agents to {args.out}")


def cmd_fit(args, parser):
    records = _load_records(args.input, parser)
    groups = group_by_participant(records)
    if args.method == "map":
        from .inference import MapEstimator

        out = {}
        for pid, recs in sorted(groups.items()):
            est = MapEstimator(seed=args.seed).fit(recs)
            res = est.fit_result()
            out[pid] = {
                "params": {
                    "b0": res.params.b0,
                    "w0": res.params.w0,
                    "alpha_b_correct": res.params.alpha_b_correct,
                    "alpha_b_wrong": res.params.alpha_b_wrong,
                    "alpha_w_correct": res.params.alpha_w_correct,
                    "alpha_w_wrong": res.params.alpha_w_wrong,
                },
                "log_posterior_at_mode": res.log_posterior_at_mode,
                "converged": res.converged,
                "n_evaluations": res.n_evaluations,
            }
        with open(args.out_summary, "w") as fh:
            json.dump(out, fh, indent=2)
        print(f"MAP fits for {len(out)} participants written to {args.out_summary}")
    else:
        from .inference import HierarchicalSampler

        sampler = HierarchicalSampler(
            n_chains=args.chains,
            n_iterations=args.samples,
            n_warmup=args.warmup,
            seed=args.seed,
        ).fit(records)
        if args.out_draws:
            sampler.draws_.to_csv(args.out_draws)
        summary = {
            "parameters": sampler.summary_,
            "diagnostics": {
                "max_rhat": sampler.max_rhat_,
                "min_ess": sampler.min_ess_,
                "ok": sampler.diagnostics_ok_,
            },
        }
        with open(args.out_summary, "w") as fh:
            json.dump(summary, fh, indent=2)
        flag = "ok" if sampler.diagnostics_ok_ else "FAILED (inspect summary)"
        print(
            f"mcmc finished: max rhat {sampler.max_rhat_:.4f}, "
            f"min ess {sampler.min_ess_:.0f} -> diagnostics {flag}"
        )


def cmd_recover(args, parser):
    from .inference import MapEstimator, draw_participant_params

    trials_grid = sorted({int(t) for t in args.trials.split(",")})
    spec = condition_spec(args.condition)
    rng = substream(args.seed, "recover")
    # self-consistent design: agents come from the same prior the fitter uses
    truth = [draw_participant_params(rng, condition=args.condition) for _ in range(args.agents)]
    report: dict = {"condition": args.condition, "agents": args.agents, "runs": {}}
    from .probability import logit as _logit

    families = [
        ("b0", lambda p: p.b0),
        ("w0", lambda p: p.w0),
        ("alpha_b_correct", lambda p: _logit(p.alpha_b_correct)),
        ("alpha_b_wrong", lambda p: _logit(p.alpha_b_wrong)),
        ("alpha_w_correct", lambda p: _logit(p.alpha_w_correct)),
        ("alpha_w_wrong", lambda p: _logit(p.alpha_w_wrong)),
    ]
    for n_trials in trials_grid:
        result = simulate_cohort(truth, spec, args.agents, n_trials,
                                 rng=substream(args.seed, "recover", n_trials))
        records = cohort_to_records(result, id_prefix="rec")
        groups = group_by_participant(records)
        fitted = []
        for pid in sorted(groups):
            est = MapEstimator(seed=args.seed).fit(groups[pid])
            fitted.append(est.params_)
        corr = {}
        for name, getter in families:
            t = np.array([getter(p) for p in truth])
            f = np.array([getter(p) for p in fitted])
            corr[name] = float(np.corrcoef(t, f)[0, 1])
        report["runs"][str(n_trials)] = {"correlations": corr}
        print(f"{n_trials} trials/agent: " + ", ".join(f"{k}={v:.3f}" for k, v in corr.items()))
    with open(args.out, "w") as fh:
        json.dump(report, fh, indent=2)
    print(f"recovery report written to {args.out}")


def cmd_report(args, parser):
    from .report import build_report, write_figure_csvs

    records = _load_records(args.input, parser)
    draws = None
    if args.draws:
        from .inference import PosteriorDraws

        try:
            draws = PosteriorDraws.from_csv(args.draws)
        except (OSError, ValueError) as exc:
            parser.exit(1, f"error: cannot read draws CSV {args.draws}: {exc}\n")
    doc = build_report(records, draws=draws)
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=2)
    print(f"report written to {args.out}")
    if args.figures_dir:
        import os

        os.makedirs(args.figures_dir, exist_ok=True)
        for path in write_figure_csvs(doc, args.figures_dir):
            print(f"wrote {path}")


def cmd_serve(args, parser):
    from .service import serve

    config = SessionConfig()
    if args.config:
        try:
            with open(args.config) as fh:
                config = SessionConfig.from_json(fh.read())
        except (OSError, ValueError) as exc:
            parser.exit(1, f"error: bad session config {args.config}: {exc}\n")
    if args.seed is not None:
        import dataclasses

        config = dataclasses.replace(config, seed=args.seed)
    print(f"serving on http://{args.host}:{args.port} (condition={config.condition})")
    serve(port=args.port, host=args.host, config=config, ui_dir=args.ui)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trustcal")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate synthetic participants")
    p.add_argument("--condition", required=True, choices=CONDITIONS)
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--params", help="JSON file with agent parameters (object or list)")
    p.add_argument("--policy", choices=["probability_match", "threshold"],
                   default="probability_match")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit the model to a trial CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=["map", "mcmc"], default="map")
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--warmup", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-draws", help="draws CSV (mcmc only)")
    p.add_argument("--out-summary", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("recover", help="simulate-from-population then refit")
    p.add_argument("--agents", type=int, default=200)
    p.add_argument("--trials", default="50", help="comma-separated trials-per-agent grid")
    p.add_argument("--condition", choices=CONDITIONS, default="standard")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="recovery.json")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("report", help="behavioral/model statistics for a trial CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--draws", help="posterior draws CSV for trajectory bands")
    p.add_argument("--out", required=True)
    p.add_argument("--figures-dir")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the live session HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--config", help="session config JSON file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--ui", help="directory with the built web client")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.agents < 1:
        parser.error("--agents must be >= 1")
    if args.command == "simulate" and args.trials < 1:
        parser.error("--trials must be >= 1")
    args.func(args, parser)
    return 0


if __name__ == "__main__":
    sys.exit(main())
