"""Command line interface for SEQPT."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from . import __version__
from .channel_sim import QuantumChannel, chi_from_kraus, load_channel
from .circuit_synth import CIRCUIT_FORMATS, export_circuit
from .config import SeqptConfig, load_config, save_config
from .design import get_design
from .estimator import (
    average_fidelity_from_records,
    chernoff_samples,
    collect_scan,
    detect_large_coefficients,
    estimate_many_from_records,
    estimate_offdiag,
    samples_for_full_diag,
    simplified_samples_for_full_diag,
)
from .exceptions import DimensionMismatchError, InvalidInputError, InvariantViolation, SeqptError, SynthesisError
from .models.records import ExperimentRecord
from .mub import BasisId
from .pauli import PauliOperator, paulis_of_weight
from .reports import (
    chi_entry,
    detection_entry,
    diagonal_entry,
    offdiagonal_entry,
    read_record_seed,
    read_records,
    report_header,
    write_records,
    write_report,
)
from .utils import fresh_seed, track_performance, validate_bitstring

logger = logging.getLogger("seqpt")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INTERNAL = 3

ALL_WEIGHT_PREFIX = "all-weight-"


def _add_run_options(parser: argparse.ArgumentParser, channel_required: bool = True) -> None:
    parser.add_argument("--channel", required=channel_required, help="Path to the channel JSON file")
    parser.add_argument("--seed", type=int, help="Master seed (falls back to SEQPT_SEED)")
    parser.add_argument("--jobs", type=int, help="Parallel shot workers")
    parser.add_argument("--progress", action="store_true", help="Show a progress bar")
    parser.add_argument(
        "--trajectory", action="store_true", help="Sample Pauli errors per shot instead of dense simulation"
    )
    parser.add_argument("-o", "--output", help="Report path (default: stdout)")


def _add_budget_options(parser: argparse.ArgumentParser) -> None:
    budget = parser.add_argument_group(
        "sample budget",
        "Give either -M or budget parameters: --eps/--p for the Chernoff bound "
        "M >= ln[2/(1-p)]/(2 eps^2), or --delta/--bigp (with optional --eps) for "
        "M = 2(D + 1/eps)(D + 1)/(D^2 delta^2 (1 - P)).",
    )
    budget.add_argument("-M", "--samples", type=int, help="Number of experiments")
    budget.add_argument("--eps", type=float, help="Accuracy epsilon")
    budget.add_argument("--p", type=float, help="Confidence p of the Chernoff bound")
    budget.add_argument("--delta", type=float, help="Accuracy delta for estimating every coefficient")
    budget.add_argument("--bigp", type=float, help="Success probability P for estimating every coefficient")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqpt", description="Selective efficient quantum process tomography")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file with default option values")
    parser.add_argument(
        "--save-config", metavar="FILE", help="Write the resolved settings to FILE for later --config use"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    diag = sub.add_parser("estimate-diag", help="Estimate diagonal χ coefficients")
    _add_run_options(diag)
    _add_budget_options(diag)
    diag.add_argument("--targets", nargs="+", required=True, help="Pauli labels or all-weight-K")

    offdiag = sub.add_parser("estimate-offdiag", help="Estimate one off-diagonal χ coefficient")
    _add_run_options(offdiag)
    _add_budget_options(offdiag)
    offdiag.add_argument("--targets", nargs=2, required=True, metavar=("M", "M_PRIME"), help="Two Pauli labels")

    scan = sub.add_parser("scan", help="Record one set of transition experiments")
    _add_run_options(scan)
    _add_budget_options(scan)
    scan.add_argument("--records", help="Write record lines to this file")
    scan.add_argument("--targets", nargs="+", help="Pauli labels or all-weight-K to estimate from the scan")
    scan.add_argument("--detect", action="store_true", help="Detect large coefficients from the scan")

    detect = sub.add_parser("detect", help="Detect large diagonal coefficients")
    _add_run_options(detect, channel_required=False)
    _add_budget_options(detect)
    detect.add_argument(
        "--records", help="Replay this record file instead of scanning; its '# seed=' line (or --seed) is reported"
    )
    detect.add_argument("--n", type=int, help="Qubit count of the record file")

    synth = sub.add_parser("synth-basis", help="Export a change-of-basis circuit")
    synth.add_argument("--n", type=int, required=True, help="Number of qubits")
    synth.add_argument("--b", required=True, help="Basis bitstring (or Z for the computational basis)")
    synth.add_argument("--to", help="Target basis for the basis-change circuit")
    synth.add_argument("--format", choices=CIRCUIT_FORMATS, default="plain")
    synth.add_argument("-o", "--output", help="Circuit path (default: stdout)")

    oracle = sub.add_parser("chi-oracle", help="Dump the exact χ-matrix (n <= 3)")
    oracle.add_argument("--channel", required=True, help="Path to the channel JSON file")
    oracle.add_argument("-o", "--output", help="Report path (default: stdout)")
    return parser


def resolve_config(args: argparse.Namespace) -> SeqptConfig:
    """CLI flags > --config file > environment > defaults."""
    config = SeqptConfig.from_env()
    if args.config:
        if not Path(args.config).exists():
            raise FileNotFoundError(f"config file {args.config} does not exist")
        config = config.merged(load_config(args.config))
    return config.merged(
        {
            "seed": getattr(args, "seed", None),
            "jobs": getattr(args, "jobs", None),
            "progress": getattr(args, "progress", False) or None,
            "log_level": "DEBUG" if args.verbose else None,
        }
    )


def resolve_samples(args: argparse.Namespace, dimension: int) -> int:
    """Exactly one of -M or a complete set of budget parameters.

    Raises:
        InvalidInputError: on conflicting or incomplete budget flags.
    """
    budget = {name: getattr(args, name) for name in ("eps", "p", "delta", "bigp")}
    given = {name for name, value in budget.items() if value is not None}
    if args.samples is not None:
        if given:
            raise InvalidInputError(f"-M conflicts with budget parameters {sorted(given)}")
        if args.samples < 1:
            raise InvalidInputError(f"-M must be >= 1, got {args.samples}")
        return int(args.samples)
    if given == {"eps", "p"}:
        return chernoff_samples(budget["eps"], budget["p"])
    if given == {"eps", "delta", "bigp"}:
        return samples_for_full_diag(budget["eps"], budget["delta"], budget["bigp"], dimension)
    if given == {"delta", "bigp"}:
        return simplified_samples_for_full_diag(budget["delta"], budget["bigp"])
    if not given:
        raise InvalidInputError("give either -M or budget parameters (--eps/--p or --delta/--bigp)")
    raise InvalidInputError(f"incomplete or conflicting budget parameters {sorted(given)}")


def parse_targets(tokens: Sequence[str], n: int) -> List[PauliOperator]:
    """Pauli labels (comma or space separated) or ``all-weight-K``, deduplicated in order."""
    targets: List[PauliOperator] = []
    seen = set()
    for token in tokens:
        for item in filter(None, (part.strip() for part in token.split(","))):
            if item.startswith(ALL_WEIGHT_PREFIX):
                try:
                    weight = int(item[len(ALL_WEIGHT_PREFIX):])
                except ValueError:
                    raise InvalidInputError(f"invalid target {item!r}")
                found = paulis_of_weight(n, weight)
            else:
                op = PauliOperator.from_label(item)
                if op.num_qubits != n:
                    raise DimensionMismatchError(f"target {item!r} does not act on {n} qubits")
                found = [op.canonical()]
            for op in found:
                if op.key not in seen:
                    seen.add(op.key)
                    targets.append(op)
    if not targets:
        raise InvalidInputError("no targets given")
    return targets


def _seed(config: SeqptConfig) -> int:
    if config.seed is not None:
        return config.seed
    seed = fresh_seed()
    logger.info(f"Using fresh master seed {seed}")
    return seed


def _mode(args: argparse.Namespace) -> str:
    return "trajectory" if args.trajectory else "auto"


def _emit(report: Dict[str, Any], output: Optional[str]) -> None:
    text = write_report(report, output)
    if output is None:
        sys.stdout.write(text)


def _diag_section(records: Sequence[ExperimentRecord], targets: Sequence[PauliOperator], seed: int) -> Dict[str, Any]:
    design = get_design(records[0].n)
    estimates = estimate_many_from_records(records, targets, design)
    section: Dict[str, Any] = {
        "estimates": [diagonal_entry(t, e, seed) for t, e in zip(targets, estimates)],
    }
    if any(t.is_identity() for t in targets):
        section["average_fidelity"] = average_fidelity_from_records(records).to_dict()
    return section


def _scan(args: argparse.Namespace, config: SeqptConfig) -> Tuple[QuantumChannel, str, int, List[ExperimentRecord]]:
    channel, digest = load_channel(args.channel)
    samples = resolve_samples(args, channel.dimension)
    seed = _seed(config)
    records = collect_scan(
        channel, samples, seed, get_design(channel.n), _mode(args), config.jobs, config.progress
    )
    return channel, digest, seed, records


def cmd_estimate_diag(args: argparse.Namespace, config: SeqptConfig) -> int:
    channel, digest = load_channel(args.channel)
    targets = parse_targets(args.targets, channel.n)
    samples = resolve_samples(args, channel.dimension)
    seed = _seed(config)
    records = collect_scan(channel, samples, seed, get_design(channel.n), _mode(args), config.jobs, config.progress)
    report: Dict[str, Any] = dict(report_header("estimate-diag", seed, digest, channel.n))
    report.update(_diag_section(records, targets, seed))
    _emit(report, args.output)
    return EXIT_OK


def cmd_estimate_offdiag(args: argparse.Namespace, config: SeqptConfig) -> int:
    channel, digest = load_channel(args.channel)
    m, m_prime = (parse_targets([label], channel.n)[0] for label in args.targets)
    samples = resolve_samples(args, channel.dimension)
    seed = _seed(config)
    estimate = estimate_offdiag(
        channel, m, m_prime, samples, seed, get_design(channel.n), config.jobs, config.progress
    )
    report: Dict[str, Any] = dict(report_header("estimate-offdiag", seed, digest, channel.n))
    report["estimate"] = offdiagonal_entry(m, m_prime, estimate, seed)
    _emit(report, args.output)
    return EXIT_OK


def cmd_scan(args: argparse.Namespace, config: SeqptConfig) -> int:
    channel, digest, seed, records = _scan(args, config)
    if args.records:
        write_records(records, args.records, seed)
    report: Dict[str, Any] = dict(report_header("scan", seed, digest, channel.n))
    report["n_records"] = len(records)
    if args.targets:
        report.update(_diag_section(records, parse_targets(args.targets, channel.n), seed))
    if args.detect:
        report["detection"] = detection_entry(detect_large_coefficients(records, get_design(channel.n)))
    _emit(report, args.output)
    return EXIT_OK


def cmd_detect(args: argparse.Namespace, config: SeqptConfig) -> int:
    if args.records:
        if args.channel:
            raise InvalidInputError("--records replays stored data; do not combine it with --channel")
        records = read_records(args.records, args.n)
        if not records:
            raise InvalidInputError(f"record file {args.records} is empty")
        seed: Optional[int] = read_record_seed(args.records)
        if seed is None:
            seed = config.seed
        if seed is None:
            logger.warning(f"{args.records} carries no seed line; pass --seed to record the scan seed")
        digest: Optional[str] = None
    elif args.channel:
        _, digest, seed, records = _scan(args, config)
    else:
        raise InvalidInputError("detect needs --channel or --records")

    n = records[0].n
    report: Dict[str, Any] = dict(report_header("detect", seed, digest, n))
    report["n_records"] = len(records)
    report["detection"] = detection_entry(detect_large_coefficients(records, get_design(n)))
    _emit(report, args.output)
    return EXIT_OK


def _parse_basis(label: str, n: int) -> BasisId:
    if label != "Z":
        check = validate_bitstring(label, n)
        if not check["valid"]:
            raise InvalidInputError(check["error"])
    return BasisId.from_label(label, n)


def cmd_synth_basis(args: argparse.Namespace, config: SeqptConfig) -> int:
    design = get_design(args.n)
    source = _parse_basis(args.b, args.n)
    if args.to:
        circuit = design.basis_change_circuit(source, _parse_basis(args.to, args.n))
    else:
        circuit = design.measurement_circuit(source)
    text = export_circuit(circuit, args.format)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_chi_oracle(args: argparse.Namespace, config: SeqptConfig) -> int:
    channel, digest = load_channel(args.channel)
    report: Dict[str, Any] = dict(report_header("chi-oracle", None, digest, channel.n))
    report.update(chi_entry(chi_from_kraus(channel), channel.n))
    _emit(report, args.output)
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace, SeqptConfig], int]] = {
    "estimate-diag": cmd_estimate_diag,
    "estimate-offdiag": cmd_estimate_offdiag,
    "scan": cmd_scan,
    "detect": cmd_detect,
    "synth-basis": cmd_synth_basis,
    "chi-oracle": cmd_chi_oracle,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the CLI."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = resolve_config(args)
        if args.save_config:
            save_config(config.to_dict(), args.save_config)
        logging.basicConfig(level=config.log_level, format="%(levelname)s - %(message)s")
        run = track_performance(f"Command {args.command}")(COMMANDS[args.command])
        return run(args, config)
    except (InvariantViolation, SynthesisError) as e:
        print(f"Internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except (SeqptError, OSError, json.JSONDecodeError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
