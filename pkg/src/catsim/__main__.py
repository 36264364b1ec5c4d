from .schema_definitions import LogicalQubit, RunConfig
from .states import normalize, encode
from .protocols import make_channel, make_chi, teleport, teleport_trace
from .error_analysis import SWEEP_COLUMNS, sweep
from .exceptions import TruncationError
from .oracle import run_checks
from . import reports
from pydantic import ValidationError
import argparse
import contextlib
import os
import sys
import yaml
import logging
import warnings
from dotenv import load_dotenv

load_dotenv()


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


common = argparse.ArgumentParser(add_help=False)
common.add_argument('-c', '--config', help="YAML configuration file(s)", action='append', default=[])
common.add_argument('--alpha', type=float, help="Coherent amplitude of the logical basis")
common.add_argument('--efficiency', type=float, help="Detector efficiency d")
common.add_argument('--threshold', type=int, help="Counts <= threshold read as no click")
common.add_argument('--truncation', type=int, help="Fock truncation N")
common.add_argument('--seed', type=int, help="Seed for sampled runs")
common.add_argument('--shots', type=int, help="Number of sampled runs")
common.add_argument('--format', dest='output_format', choices=["csv", "json"], help="Output format")
common.add_argument('--prune-tol', type=float, help="Relative coefficient cutoff after each step")
common.add_argument('--gamma-tau', type=float, help="Decoherence strength gamma*tau")
common.add_argument('--ideal-corrections', action='store_const', const=True, help="Apply Pauli corrections as ideal maps")
common.add_argument('--sigma-z-transmission', type=float, help="Drive the Z correction through a beam splitter of this transmission")
common.add_argument('--output', help="Write the report to this path instead of stdout")
common.add_argument('-v', '--verbose', action='store_const', const=True, help="Verbose logging")

parser = argparse.ArgumentParser(prog="catsim", description="Coherent-state qubit simulator")
subparsers = parser.add_subparsers(dest="command", required=True)
subparsers.add_parser('reference-numbers', parents=[common], help="Error estimates at the working point")
readout_parser = subparsers.add_parser('readout', parents=[common], help="Readout outcome distribution")
readout_parser.add_argument('--qubit', default="1,0", help="Logical amplitudes a,b (complex allowed, e.g. 1,1j)")
teleport_parser = subparsers.add_parser('teleport', parents=[common], help="Teleportation branches")
teleport_parser.add_argument('--qubit', default="1,0", help="Logical amplitudes a,b")
teleport_parser.add_argument('--circuit-resources', action='store_true', help="Build the channel from gates")
teleport_parser.add_argument('--trace', help="Write the run traces as JSON lines to this path")
cnot_parser = subparsers.add_parser('cnot', parents=[common], help="Gate-teleported CNOT")
cnot_parser.add_argument('--control', help="Control amplitudes a,b; truth table when omitted")
cnot_parser.add_argument('--target', help="Target amplitudes a,b; truth table when omitted")
cnot_parser.add_argument('--circuit-resources', action='store_true', help="Build the four-mode resource from gates")
cnot_parser.add_argument('--physical-corrections', action='store_true', help="Apply Z corrections as displacements")
cnot_parser.add_argument('--trace', help="Write the run traces as JSON lines to this path")
sweep_parser = subparsers.add_parser('sweep', parents=[common], help="Error budget over a parameter grid")
sweep_parser.add_argument('--alphas', type=_floats, help="Comma-separated alpha values")
sweep_parser.add_argument('--efficiencies', type=_floats, help="Comma-separated efficiencies")
sweep_parser.add_argument('--thresholds', type=_ints, help="Comma-separated thresholds")
sweep_parser.add_argument('--gamma-taus', type=_floats, help="Comma-separated gamma*tau values")
subparsers.add_parser('verify', parents=[common], help="Compare the coherent algebra with the Fock simulator")


def load_config(args) -> RunConfig:
    """Defaults, then CATSIM_TRUNCATION, then YAML files in order, then explicit flags."""
    values = {}
    if "CATSIM_TRUNCATION" in os.environ:
        values["truncation"] = int(os.environ["CATSIM_TRUNCATION"])
    for path in args.config:
        logging.info(f"Loading configuration {path}")
        with open(path, 'r') as f:
            conf = yaml.safe_load(f) or {}
        if "catsim" not in conf:
            raise ValueError(f"Section 'catsim' not found in config file: {path}")
        for key, value in (conf["catsim"] or {}).items():
            if key in values and values[key] != value:
                warnings.warn(f"Config value overwritten: {key}: {values[key]} with {value}")
            values[key] = value
    for field in RunConfig.model_fields:
        flag = getattr(args, field, None)
        if flag is not None:
            values[field] = flag
    return RunConfig(**values)


def parse_qubit(text: str, alpha: float) -> LogicalQubit:
    a, b = (complex(part.strip()) for part in text.split(","))
    return LogicalQubit.from_unnormalized(a, b, alpha)


def write_traces(path: str, traces: reports.RunTraces):
    with open(path, 'w') as f:
        reports.write_rows(reports.trace_rows(traces), reports.TRACE_COLUMNS, f, "jsonl")
    logging.info(f"Wrote {len(traces)} run traces to {path}")


def run(args, config: RunConfig, stream) -> int:
    det = config.detector()
    match args.command:
        case "reference-numbers":
            reports.write_rows(reports.reference_rows(config.alpha, config.efficiency),
                               reports.REFERENCE_COLUMNS, stream, config.output_format)
        case "readout":
            qubit = parse_qubit(args.qubit, config.alpha)
            rows = reports.readout_rows(qubit, det, config.shots, config.seed)
            reports.write_rows(rows, reports.READOUT_COLUMNS, stream, config.output_format)
        case "teleport":
            qubit = parse_qubit(args.qubit, config.alpha)
            channel = make_channel(config.alpha, exact=not args.circuit_resources, prune_tol=config.prune_tol)
            result = teleport(normalize(encode(qubit)), channel, det, config.alpha,
                              ideal_corrections=config.ideal_corrections,
                              sigma_z_transmission=config.sigma_z_transmission,
                              seed=config.seed, prune_tol=config.prune_tol)
            reports.write_rows(reports.branch_rows(result, config.shots, config.seed),
                               reports.BRANCH_COLUMNS, stream, config.output_format)
            if args.trace:
                write_traces(args.trace, reports.run_traces(result, teleport_trace, config.shots, config.seed))
        case "cnot":
            chi = None
            if args.circuit_resources:
                chi_result, _ = make_chi(config.alpha, det, exact_resources=False, seed=config.seed,
                                         prune_tol=config.prune_tol)
                chi = chi_result.require_output()
            if args.control or args.target:
                control = normalize(encode(parse_qubit(args.control or "1,0", config.alpha)))
                target = normalize(encode(parse_qubit(args.target or "1,0", config.alpha)))
                inputs = [(args.control or "1,0", control, args.target or "1,0", target)]
            else:
                inputs = reports.truth_table_inputs(config.alpha)
            rows, traces = reports.cnot_rows(inputs, config.alpha, det, config.prune_tol,
                                             ideal_corrections=not args.physical_corrections, chi=chi,
                                             shots=config.shots, seed=config.seed)
            reports.write_rows(rows, reports.CNOT_COLUMNS, stream, config.output_format)
            if args.trace:
                write_traces(args.trace, traces)
        case "sweep":
            grid = dict(alphas=args.alphas if args.alphas is not None else [config.alpha],
                        efficiencies=args.efficiencies if args.efficiencies is not None else [config.efficiency],
                        thresholds=args.thresholds if args.thresholds is not None else [config.threshold],
                        gamma_taus=args.gamma_taus if args.gamma_taus is not None else [config.gamma_tau])
            if not all(grid.values()):
                parser.error("sweep grid is empty")
            reports.write_rows(sweep(**grid), SWEEP_COLUMNS, stream, config.output_format)
        case "verify":
            results = run_checks(config.alpha, config.truncation, config.seed, efficiency=config.efficiency)
            reports.write_rows(reports.check_rows(results), reports.CHECK_COLUMNS, stream, config.output_format)
            return 0 if all(r.passed for r in results) else 1
    return 0


def main(argv=None) -> int:
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s"
    )

    try:
        config = load_config(args)
    except (ValidationError, ValueError, OSError) as e:
        parser.error(str(e))
    if config.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        for name in ("qubit", "control", "target"):
            if getattr(args, name, None):
                parse_qubit(getattr(args, name), config.alpha)
    except (ValidationError, ValueError) as e:
        parser.error(f"invalid qubit: {e}")

    logging.info(f"Running {args.command} with {config}")
    with contextlib.ExitStack() as stack:
        stream = stack.enter_context(open(args.output, 'w', newline='')) if args.output else sys.stdout
        try:
            status = run(args, config, stream)
        except (TruncationError, ValueError) as e:
            logging.error(str(e))
            return 1
    logging.info("Done")
    return status


if __name__=="__main__":
    sys.exit(main())
