"""
Command-line front end: construct, bound, points, integrate, experiment, report.

JSON documents and reports go to stdout; logging and status lines go to stderr.
"""
from typing import Optional, Sequence
import argparse
import json
import logging
import sys

from cbc import RandomSource, construct_lattice, construct_poly_lattice, rule_from_json, rule_to_json
from config import Config
from experiment import (
    INTEGRANDS, INTEGRAND_SPACES, METHODS, MIN_FIT_POINTS, ExperimentConfig, fit_rates, parse_sizes,
    run_experiment, summarize, summary_csv, write_artifacts,
)
from korobov import (
    LatticeRule, SpaceParams, d_star, default_lambda_grid, wce_bound_dimension_free, weight_sum,
)
from pointset import INFINITE, digital_shift, dump_points, integrate, lattice_points, poly_lattice_points, random_shift, tent
from results_store import init_db, list_runs, load_records, load_rule, save_rule, save_run
from storage_service import create_storage_service
from walsh import walsh_d_star

logger = logging.getLogger(__name__)

EXIT_USAGE = 2
RULE_FROM_DB = 'db:'
RULE_FROM_STORAGE = 'store:'


def status(message: str, ok: bool = True):
    print(f"{'✓' if ok else '⚠️ '} {message}", file=sys.stderr)


def _parse_grid(text: Optional[str], alpha: float):
    if not text:
        return default_lambda_grid(alpha)
    return tuple(float(t) for t in text.split(',') if t.strip())


def _space_args(parser: argparse.ArgumentParser):
    parser.add_argument('--kind', choices=('lattice', 'polylattice'), default='lattice')
    parser.add_argument('--M', type=int, help='upper end of the prime pool (lattice)')
    parser.add_argument('--b', type=int, default=2, help='field size (polylattice)')
    parser.add_argument('--m', type=int, help='modulus degree (polylattice)')
    parser.add_argument('--s', type=int, help='dimension')
    parser.add_argument('--alpha', type=float, default=2.0)
    parser.add_argument('--weights', default='poly:2', help='poly:p, list:g1,g2,... or const:c')
    parser.add_argument('--tau', type=float, default=0.5)


def _rule_args(parser: argparse.ArgumentParser):
    _space_args(parser)
    parser.add_argument('--rule', help="rule JSON file, 'db:<id>' or 'store:<name>'; construction flags are ignored when given")
    parser.add_argument('--shift', action='store_true', help='apply one uniform random shift')
    parser.add_argument('--tent', action='store_true', help='apply the tent transformation (after the shift)')
    parser.add_argument('--digital-shift', action='store_true', help='apply a random digital shift (polylattice)')
    parser.add_argument('--digits', type=int, help='polylattice precision d (default: infinite)')


def _params(args) -> SpaceParams:
    if args.s is None:
        raise ValueError("--s is required")
    base = args.b if args.kind == 'polylattice' else None
    return SpaceParams.from_weight_spec(args.alpha, args.weights, args.s, base=base)


def _construct(args, rng: RandomSource):
    params = _params(args)
    if args.kind == 'lattice':
        if args.M is None:
            raise ValueError("--M is required for lattice rules")
        rule, trace = construct_lattice(params, args.M, args.tau, rng)
    else:
        if args.m is None:
            raise ValueError("--m is required for polynomial lattice rules")
        rule, trace = construct_poly_lattice(params, args.b, args.m, args.tau, rng)
    return rule, params, trace


def _storage(cfg: Config, args, prefix: str = 'rqmc'):
    return create_storage_service(use_s3=cfg.use_s3, prefix=prefix, base_path=args.out_dir or cfg.output_dir,
                                  bucket_name=cfg.s3_bucket, region=cfg.s3_region)


def _database_url(cfg: Config, args) -> str:
    return args.db or cfg.database_url


def _load_rule(ref: str, args, cfg: Config):
    """Rule document from a file path, the results store (db:<id>) or artifact storage (store:<name>)."""
    if ref.startswith(RULE_FROM_DB):
        rule_id = int(ref[len(RULE_FROM_DB):])
        Session = init_db(_database_url(cfg, args))
        with Session() as session:
            doc = load_rule(session, rule_id)
        if doc is None:
            raise ValueError(f"no stored rule {rule_id} in {_database_url(cfg, args)}")
    elif ref.startswith(RULE_FROM_STORAGE):
        name = ref[len(RULE_FROM_STORAGE):]
        storage = _storage(cfg, args)
        if not storage.file_exists(name):
            raise ValueError(f"no stored artifact {name!r}")
        data = storage.read_bytes(name)
        if data is None:
            raise OSError(f"could not read stored artifact {name!r}")
        doc = json.loads(data)
    else:
        with open(ref, 'r', encoding='utf-8') as f:
            doc = json.load(f)
    return rule_from_json(doc), doc


def _rule_for(args, cfg: Config, rng: RandomSource):
    if args.rule:
        rule, _ = _load_rule(args.rule, args, cfg)
        return rule
    rule, _, _ = _construct(args, rng)
    return rule


def _point_set(args, rule, rng: RandomSource):
    if isinstance(rule, LatticeRule):
        if args.digital_shift:
            raise ValueError("--digital-shift applies to polynomial lattice rules only")
        ps = lattice_points(rule)
        if args.shift:
            ps = random_shift(ps, rng)
    else:
        if args.shift:
            raise ValueError("--shift applies to lattice rules; use --digital-shift")
        ps = poly_lattice_points(rule, d=args.digits if args.digits else INFINITE)
        if args.digital_shift:
            ps = digital_shift(ps, rng, d_shift=args.digits)
    if args.tent:
        ps = tent(ps)
    return ps


def _store(cfg: Config, args, data: bytes, filename: str, content_type: str) -> bool:
    result = _storage(cfg, args).save_bytes(data, filename, content_type)
    if not result['success']:
        status(f"Could not store {filename}: {result['error']}", ok=False)
        return False
    status(f"Stored {result['filename']} at {result['url']}")
    return True


def cmd_construct(args, cfg: Config) -> int:
    rng = RandomSource(args.seed)
    rule, params, trace = _construct(args, rng)
    doc = rule_to_json(rule, params=params, seed=args.seed, tau=args.tau, trace=trace)
    text = json.dumps(doc, indent=2, sort_keys=True) + '\n'
    sys.stdout.write(text)
    status(f"Constructed {doc['kind']} rule with {rule.s} components")
    if args.db is not None:
        Session = init_db(_database_url(cfg, args))
        with Session() as session:
            rule_id = save_rule(session, doc)
        status(f"Saved rule {rule_id} to {_database_url(cfg, args)} (use --rule db:{rule_id})")
    if args.out and not _store(cfg, args, text.encode(), args.out, 'application/json'):
        return 1
    return 0


def cmd_bound(args, cfg: Config) -> int:
    params = _params(args)
    grid = _parse_grid(args.lambda_grid, params.alpha)
    if args.kind == 'lattice':
        if args.M is None:
            raise ValueError("--M is required for lattice rules")
        report = d_star(params, args.M, args.tau, grid)
        size_label = f"M={args.M}"
    else:
        if args.m is None:
            raise ValueError("--m is required for polynomial lattice rules")
        report = walsh_d_star(params, args.b, args.m, args.tau, grid)
        size_label = f"b^m-1={args.b ** args.m - 1}"
    out = sys.stdout
    out.write("lambda bound\n")
    for lam, value in report.values:
        out.write(f"{lam:.17g} {value:.17g}\n")
    out.write(f"minimum {report.value:.17g} at lambda {report.best_lambda:.17g}\n")
    out.write(f"assumption {'holds' if report.assumption_holds else 'violated'} ({size_label})\n")
    if args.kind == 'lattice':
        free = wce_bound_dimension_free(params, args.M, args.tau, report.best_lambda)
        out.write(f"dimension_free {free:.17g}\n")
    out.write(f"weight_sum {weight_sum(params, report.best_lambda):.17g}\n")
    if not report.assumption_holds:
        status("Bound exceeds 1; the pool is too small for a meaningful certificate", ok=False)
    return 0


def cmd_points(args, cfg: Config) -> int:
    rng = RandomSource(args.seed)
    rule = _rule_for(args, cfg, rng)
    ps = _point_set(args, rule, rng)
    text = dump_points(ps, exact=args.exact)
    if args.out:
        return 0 if _store(cfg, args, text.encode(), args.out, 'text/plain') else 1
    sys.stdout.write(text)
    return 0


def cmd_integrate(args, cfg: Config) -> int:
    rng = RandomSource(args.seed)
    rule = _rule_for(args, cfg, rng)
    ps = _point_set(args, rule, rng)
    value = integrate(INTEGRANDS[args.f], ps)
    sys.stdout.write(f"{value:.17g}\n")
    return 0


def cmd_experiment(args, cfg: Config) -> int:
    sizes = parse_sizes(args.sizes)
    if len(sizes) < MIN_FIT_POINTS:
        raise ValueError(f"size schedule {sizes} is too short for a slope fit (need {MIN_FIT_POINTS})")
    alpha, spec = INTEGRAND_SPACES[args.f]
    config = ExperimentConfig(method=args.method, integrand=args.f, s=args.s, sizes=sizes,
                              replications=args.R, seed=args.seed,
                              alpha=args.alpha if args.alpha is not None else alpha,
                              weight_spec=args.weights or spec, tau=args.tau, base=args.b)
    threads = args.threads or cfg.threads
    records = run_experiment(config, threads=threads)
    summary = summarize(records)
    rates = fit_rates(summary)
    slope = rates.get(config.method)
    status(f"{config.method} on {config.integrand}: {len(records)} estimates, slope {slope:.3f}")

    storage = _storage(cfg, args, prefix=f"rqmc/{config.method}-{config.seed}")
    results = write_artifacts(records, summary, storage, rates)
    failed = [name for name, result in results.items() if not result['success']]
    for name in failed:
        status(f"Could not store {name}", ok=False)

    if args.db is not None:
        Session = init_db(_database_url(cfg, args))
        with Session() as session:
            run_id = save_run(session, config, records, slope)
        status(f"Saved run {run_id} to {_database_url(cfg, args)}")

    sys.stdout.write(summary_csv(summary))
    sys.stdout.write(f"# slope {slope:.17g}\n")
    return 1 if failed else 0


def cmd_report(args, cfg: Config) -> int:
    Session = init_db(_database_url(cfg, args))
    with Session() as session:
        if args.run is None:
            for run in list_runs(session):
                slope = f"{run.slope:.6f}" if run.slope is not None else '-'
                sys.stdout.write(f"{run.id} {run.method} {run.integrand} s={run.s} R={run.replications} "
                                 f"seed={run.seed} slope={slope}\n")
            return 0
        records = load_records(session, args.run)
    if not records:
        raise ValueError(f"no stored run {args.run} in {_database_url(cfg, args)}")
    summary = summarize(records)
    rates = fit_rates(summary)
    slope = rates[records[0].method]
    sys.stdout.write(summary_csv(summary))
    sys.stdout.write(f"# slope {slope:.17g}\n")
    if args.artifacts:
        results = write_artifacts(records, summary, _storage(cfg, args, prefix=f"rqmc/run-{args.run}"), rates)
        failed = [name for name, result in results.items() if not result['success']]
        for name in failed:
            status(f"Could not store {name}", ok=False)
        if failed:
            return 1
        status(f"Rewrote artifacts of run {args.run}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=0, help='master seed (64-bit)')
    common.add_argument('--threads', type=int, help='worker threads (default: RQMC_THREADS or all cores)')
    common.add_argument('--db', nargs='?', const='',
                        help='results store URL (default RQMC_DATABASE_URL); construct and experiment save to it')
    common.add_argument('--out-dir', help='local artifact directory')

    parser = argparse.ArgumentParser(prog='rqmc', description='Randomized lattice rule construction and experiments')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('construct', parents=[common], help='randomized CBC construction, rule JSON on stdout')
    _space_args(p)
    p.add_argument('--out', help='also store the rule document under this name')
    p.set_defaults(handler=cmd_construct)

    p = sub.add_parser('bound', parents=[common], help='worst-case-error bound over a lambda grid')
    _space_args(p)
    p.add_argument('--lambda-grid', help='comma-separated lambdas in [1/2, alpha)')
    p.set_defaults(handler=cmd_bound)

    p = sub.add_parser('points', parents=[common], help='dump (randomized) points')
    _rule_args(p)
    p.add_argument('--exact', action='store_true', help='base-b digit strings instead of doubles')
    p.add_argument('--out', help='store the dump under this name instead of printing it')
    p.set_defaults(handler=cmd_points)

    p = sub.add_parser('integrate', parents=[common], help='one equal-weight estimate of a test integrand')
    _rule_args(p)
    p.add_argument('--f', choices=sorted(INTEGRANDS), default='const1')
    p.set_defaults(handler=cmd_integrate)

    p = sub.add_parser('experiment', parents=[common], help='variance decay over a size schedule')
    p.add_argument('--method', choices=METHODS, required=True)
    p.add_argument('--f', choices=sorted(INTEGRANDS), default='f1')
    p.add_argument('--s', type=int, required=True)
    p.add_argument('--sizes', required=True, help='e.g. 256..16384x2 or 257,509,1021,2039')
    p.add_argument('--R', type=int, default=100, help='replications per size')
    p.add_argument('--alpha', type=float, help='override the integrand default')
    p.add_argument('--weights', help='override the integrand default')
    p.add_argument('--tau', type=float, default=0.5)
    p.add_argument('--b', type=int, default=2)
    p.set_defaults(handler=cmd_experiment)

    p = sub.add_parser('report', parents=[common], help='list stored runs, or re-summarize one from the results store')
    p.add_argument('--run', type=int, help='run id (omit to list runs)')
    p.add_argument('--artifacts', action='store_true', help='rewrite records.csv, summary.csv and rates.dat')
    p.set_defaults(handler=cmd_report)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = Config.from_env()
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=getattr(logging, cfg.log_level, logging.INFO), stream=sys.stderr,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        return args.handler(args, cfg)
    except (ValueError, OSError) as e:
        # json.JSONDecodeError is a ValueError
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
