"""Command-line entry points: fit, simulate, validate, report.

All commands are deterministic for fixed inputs and seed; randomized
outputs embed the seed and replication count in their metadata headers,
so reruns produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from cupsim import dataio, matchmodels, presets, reports, sankey, tournament
from cupsim.errors import CupsimError, DataError
from cupsim.matchmodels import MODEL_FAMILIES

EXIT_BAD_INPUT = 2
EXIT_FAILURE = 1


def _add_data_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", required=True, choices=presets.PRESET_YEARS,
                        help="tournament preset (groups, bracket, Elo, window)")
    parser.add_argument("--data", type=Path, default=None,
                        help="match CSV (default: bundled reconstructed history)")
    parser.add_argument("--elo", type=Path, default=None,
                        help="Elo snapshot CSV (default: bundled preset snapshot)")


def _add_simulation_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, default=100_000,
                        help="Monte Carlo replications (default 100000)")
    parser.add_argument("--seed", type=int, required=True,
                        help="random seed (required: published outputs must be replayable)")
    parser.add_argument("--k-factor", type=float, default=60.0,
                        help="Elo K factor for in-tournament updates (default 60)")
    parser.add_argument("--workers", type=int, default=max(1, min(8, os.cpu_count() or 1)),
                        help="parallel replication workers (results are worker-count invariant)")
    parser.add_argument("--no-elo-update", action="store_true",
                        help="freeze ratings during the tournament (sensitivity mode)")


def _load_inputs(args):
    if args.data is not None:
        if not args.data.exists():
            raise FileNotFoundError(args.data)
        matches = dataio.load_matches(args.data)
    else:
        matches = dataio.load_matches(presets.bundled_matches_path())
    if args.elo is not None:
        if not args.elo.exists():
            raise FileNotFoundError(args.elo)
        snapshot = dataio.load_elo_snapshot(args.elo)
    else:
        snapshot = presets.load_snapshot(args.preset)
    fmt = presets.load_format(args.preset)
    data_filter = presets.default_filter(args.preset)
    return matches, fmt, snapshot, data_filter


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_fit(args) -> int:
    matches, fmt, snapshot, data_filter = _load_inputs(args)
    families = MODEL_FAMILIES if args.model == "all" else (args.model,)
    coefficients = matchmodels.fit_all_models(matches, fmt.teams, data_filter,
                                              snapshot, families=families)
    out = _out_dir(args)
    coeff_path = out / f"coefficients_{args.preset}.json"
    coeff_path.write_text(matchmodels.coefficients_to_json(coefficients),
                          encoding="utf-8")
    records = []
    for team in fmt.teams:
        observations = dataio.oriented_observations(matches, team, data_filter, snapshot)
        records.append(reports.diagnostics_record(team, observations,
                                                  coefficients[team]))
    diag_path = out / f"diagnostics_{args.preset}.json"
    reports.write_diagnostics_json(diag_path, records)
    print(f"wrote {coeff_path}")
    print(f"wrote {diag_path}")
    return 0


def _simulation_outputs(out: Path, dist, metadata: dict, tag: str) -> None:
    stage_path = out / f"stage_probabilities_{tag}.csv"
    outcome_path = out / f"outcome_probabilities_{tag}.csv"
    reports.write_stage_probability_csv(stage_path, dist, metadata)
    reports.write_outcome_probability_csv(outcome_path, dist, metadata)
    flow = sankey.build_flow(reports.probabilities_map(dist), metadata)
    json_path = out / f"sankey_{tag}.json"
    svg_path = out / f"sankey_{tag}.svg"
    json_path.write_text(sankey.flow_to_json(flow), encoding="utf-8")
    svg_path.write_text(sankey.render_svg(flow), encoding="utf-8")
    for path in (stage_path, outcome_path, json_path, svg_path):
        print(f"wrote {path}")


def cmd_simulate(args) -> int:
    matches, fmt, snapshot, data_filter = _load_inputs(args)
    if args.coefficients is not None:
        if not args.coefficients.exists():
            raise FileNotFoundError(args.coefficients)
        coefficients = matchmodels.coefficients_from_json(
            args.coefficients.read_text(encoding="utf-8"))
    else:
        coefficients = matchmodels.fit_all_models(matches, fmt.teams, data_filter,
                                                  snapshot, families=(args.model,))
    dist = tournament.monte_carlo(
        fmt, coefficients, args.model, snapshot, n=args.n, seed=args.seed,
        k_factor=args.k_factor, update_elo=not args.no_elo_update,
        workers=args.workers)
    metadata = {"preset": args.preset, "model": args.model, "n": args.n,
                "seed": args.seed, "k_factor": args.k_factor,
                "elo_update": not args.no_elo_update}
    _simulation_outputs(_out_dir(args), dist, metadata, f"{args.preset}_{args.model}")
    return 0


def cmd_validate(args) -> int:
    matches, fmt, snapshot, data_filter = _load_inputs(args)
    realized = presets.load_realized(args.preset)
    coefficients = matchmodels.fit_all_models(matches, fmt.teams, data_filter, snapshot)
    from cupsim import scoring
    score_reports = {}
    for family in MODEL_FAMILIES:
        dist = tournament.monte_carlo(
            fmt, coefficients, family, snapshot, n=args.n, seed=args.seed,
            k_factor=args.k_factor, update_elo=not args.no_elo_update,
            workers=args.workers)
        score_reports[family] = scoring.score_report(dist, realized,
                                                     literal_rps=args.rps_literal)
    out = _out_dir(args)
    metadata = {"preset": args.preset, "n": args.n, "seed": args.seed,
                "k_factor": args.k_factor, "elo_update": not args.no_elo_update,
                "rps": "literal" if args.rps_literal else "cumulative"}
    scores_path = out / f"scores_{args.preset}.csv"
    reports.write_score_csv(scores_path, score_reports, metadata)
    print(f"wrote {scores_path}")
    return 0


def cmd_report(args) -> int:
    if not args.outcomes.exists():
        raise FileNotFoundError(args.outcomes)
    probs, metadata = reports.read_outcome_probability_csv(args.outcomes)
    if not probs:
        raise DataError(f"{args.outcomes}: no probability rows")
    tag = "_".join(filter(None, (metadata.get("preset"), metadata.get("model")))) or "report"
    _simulation_outputs(_out_dir(args), probs, metadata, tag)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cupsim",
        description="Elo-driven Poisson match models and Monte Carlo cup forecasts")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit per-team models, dump coefficients and diagnostics")
    _add_data_arguments(fit)
    fit.add_argument("--model", default="all", choices=("all",) + MODEL_FAMILIES)
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=cmd_fit)

    sim = sub.add_parser("simulate", help="Monte Carlo forecast with stage tables and Sankey")
    _add_data_arguments(sim)
    sim.add_argument("--model", required=True, choices=MODEL_FAMILIES)
    sim.add_argument("--coefficients", type=Path, default=None,
                     help="reuse a coefficients JSON instead of refitting")
    _add_simulation_arguments(sim)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    val = sub.add_parser("validate", help="score all four model families on a past cup")
    _add_data_arguments(val)
    _add_simulation_arguments(val)
    val.add_argument("--rps-literal", action="store_true",
                     help="use the non-cumulated outcome indicator inside the RPS sum")
    val.add_argument("--out", required=True)
    val.set_defaults(func=cmd_validate)

    rep = sub.add_parser("report", help="rebuild tables and Sankey from a saved outcome CSV")
    rep.add_argument("--outcomes", type=Path, required=True,
                     help="outcome_probabilities CSV from a simulate run")
    rep.add_argument("--out", required=True)
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except DataError as exc:
        print(f"error: bad input data: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except CupsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
