"""Command-line front end.

Exit codes: 0 evidence of finite completability, 2 evidence against,
3 inconclusive, 64 usage or input-format error, 65 data error (degenerate or
inconsistent numerics), 70 internal fault.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .certificates import (
    DEFAULT_BUDGET,
    certificate_to_json,
    check_necessary_condition,
    check_relaxed_slmf,
    find_finite_certificate,
    find_unique_certificate,
)
from .numerics import (
    DegenerateProjectionError,
    InconsistentObservationError,
    ObservedMatrixFormatError,
    SectionTestError,
    complete_matrix,
    export_plucker_system,
    grassmann_section_rank_test,
    jacobian_rank_test,
    observed_from_csv,
)
from .patterns import (
    ObservationPattern,
    PatternFormatError,
    load_pattern,
    minimum_size_check,
    pattern_to_grid,
    random_pattern,
)
from .plucker import NotABasisError, SubspaceBasis
from .slmf import check_slmf_combinatorial, check_slmf_randomized, slmf_from_grid

EXIT_EVIDENCE = 0
EXIT_AGAINST = 2
EXIT_INCONCLUSIVE = 3
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_FAULT = 70

SCHEMA_VERSION = 1


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise _UsageError(message)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc}") from exc


def _load_pattern_file(path: str) -> ObservationPattern:
    try:
        return load_pattern(_read_text(path))
    except PatternFormatError as exc:
        raise _UsageError(f"{path}: {exc}") from exc


def _rank_report_payload(report, verdict: str) -> dict:
    return {
        "verdict": verdict,
        "tested_rank": report.tested_rank,
        "target": report.target,
        "trials": report.trials,
        "pass_count": report.pass_count,
        "indeterminate_trials": report.indeterminate,
        "tolerance": report.tolerance,
    }


def _rank_verdict(report) -> str:
    if not report.determinate:
        return "inconclusive"
    if report.passed:
        return "pass"
    if report.indeterminate == 0:
        return "fail"
    return "inconclusive"


def build_analysis_report(
    pattern: ObservationPattern, r: int, seed: int, budget: int
) -> dict:
    """Run every analysis on the pattern and assemble the JSON-ready report."""
    supports = pattern.column_supports()
    size_check = minimum_size_check(pattern, r)

    finite = find_finite_certificate(pattern, r, budget=budget)
    unique = find_unique_certificate(pattern, r, budget=budget)
    relaxed = check_relaxed_slmf(pattern, r)
    necessary = check_necessary_condition(pattern, r, budget=budget)
    jacobian = jacobian_rank_test(pattern, r, seed=seed)

    section_payload: dict
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            section = grassmann_section_rank_test(pattern, r, seed=seed)
        section_payload = _rank_report_payload(section, _rank_verdict(section))
    except SectionTestError as exc:
        section_payload = {"verdict": "inconclusive", "error": str(exc)}

    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "completable", "version": __version__},
        "seed": seed,
        "rank": r,
        "pattern": {
            "m": pattern.m,
            "n": pattern.n,
            "observed": pattern.size,
            "column_support_sizes": [len(w) for w in supports],
            "empty_columns": [j + 1 for j in pattern.empty_columns()],
        },
        "minimum_size": {
            "verdict": "pass" if size_check.passed else "fail",
            "required": size_check.required,
            "actual": size_check.actual,
        },
        "finite_certificate": _certificate_payload(finite),
        "unique_certificate": _certificate_payload(unique),
        "relaxed_slmf": {
            "verdict": "pass" if relaxed.ok else "fail",
            "reason": relaxed.reason,
            "violating_rows": [i + 1 for i in relaxed.violating_rows]
            if relaxed.violating_rows
            else None,
            "required_size": relaxed.required_size,
            "actual_size": relaxed.actual_size,
        },
        "necessary_condition": {
            "verdict": {True: "pass", False: "fail", None: "inconclusive"}[
                necessary.contains_relaxed
            ],
            "witness_entries": [
                [i + 1, j + 1] for i, j in necessary.witness.sorted_entries()
            ]
            if necessary.witness
            else None,
            "nodes": necessary.nodes,
        },
        "jacobian_rank": _rank_report_payload(jacobian, _rank_verdict(jacobian)),
        "grassmann_section_rank": section_payload,
    }
    report["exit_code"] = _exit_code(report)
    return report


def _certificate_payload(outcome) -> dict:
    status = {"found": "present", "none": "absent", "inconclusive": "inconclusive"}[
        outcome.status
    ]
    payload = {"status": status, "nodes": outcome.nodes}
    if outcome.certificate is not None:
        payload["certificate"] = json.loads(certificate_to_json(outcome.certificate))
    return payload


def _exit_code(report: dict) -> int:
    if (
        report["finite_certificate"]["status"] == "present"
        or report["jacobian_rank"]["verdict"] == "pass"
    ):
        return EXIT_EVIDENCE
    if (
        report["minimum_size"]["verdict"] == "fail"
        or report["necessary_condition"]["verdict"] == "fail"
        or report["jacobian_rank"]["verdict"] == "fail"
    ):
        return EXIT_AGAINST
    return EXIT_INCONCLUSIVE


def _render_report(report: dict) -> str:
    p = report["pattern"]
    lines = [
        f"pattern: {p['m']} x {p['n']}, {p['observed']} observed entries",
        f"column support sizes: {' '.join(str(s) for s in p['column_support_sizes'])}",
    ]
    if p["empty_columns"]:
        lines.append(f"empty columns: {' '.join(str(j) for j in p['empty_columns'])}")
    ms = report["minimum_size"]
    lines.append(f"rank: {report['rank']}")
    lines.append(
        f"minimum size: {ms['verdict']} ({ms['actual']} observed, {ms['required']} required)"
    )
    for key, label in (
        ("finite_certificate", "finite certificate"),
        ("unique_certificate", "unique certificate"),
    ):
        entry = report[key]
        line = f"{label}: {entry['status']}"
        if entry.get("certificate"):
            groups = " / ".join(
                "{" + ",".join(str(c) for c in grp) + "}"
                for grp in entry["certificate"]["partition"]
            )
            line += f" (partition {groups})"
        lines.append(line)
    rel = report["relaxed_slmf"]
    line = f"relaxed SLMF: {rel['verdict']}"
    if rel["reason"]:
        line += f" ({rel['reason']}"
        if rel["violating_rows"]:
            line += f", rows {{{','.join(str(i) for i in rel['violating_rows'])}}}"
        line += ")"
    lines.append(line)
    nec = report["necessary_condition"]
    lines.append(f"necessary condition: {nec['verdict']}")
    for key, label in (
        ("jacobian_rank", "jacobian rank"),
        ("grassmann_section_rank", "section jacobian rank"),
    ):
        entry = report[key]
        if "tested_rank" in entry:
            lines.append(
                f"{label}: {entry['verdict']} ({entry['tested_rank']}/{entry['target']}, "
                f"{entry['pass_count']}/{entry['trials']} trials)"
            )
        else:
            lines.append(f"{label}: {entry['verdict']} ({entry.get('error', '')})")
    meaning = {
        EXIT_EVIDENCE: "finite-completability evidence found",
        EXIT_AGAINST: "evidence against",
        EXIT_INCONCLUSIVE: "inconclusive",
    }[report["exit_code"]]
    lines.append(f"exit status: {report['exit_code']} ({meaning})")
    return "\n".join(lines)


def _cmd_analyze(args) -> int:
    pattern = _load_pattern_file(args.pattern_file)
    if args.rank < 1:
        raise _UsageError("--rank must be at least 1")
    if args.rank > min(pattern.m, pattern.n):
        raise _UsageError(
            f"--rank {args.rank} exceeds min(m, n) = {min(pattern.m, pattern.n)}"
        )
    report = build_analysis_report(pattern, args.rank, args.seed, args.budget)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(_render_report(report))
    return report["exit_code"]


def _cmd_slmf_check(args) -> int:
    text = _read_text(args.phi_file)
    try:
        phi = slmf_from_grid(text, args.rank)
    except (PatternFormatError, ValueError) as exc:
        raise _UsageError(f"{args.phi_file}: {exc}") from exc
    verdicts = {}
    if args.method in ("combinatorial", "both"):
        verdicts["combinatorial"] = check_slmf_combinatorial(phi)
    if args.method in ("randomized", "both"):
        verdicts["randomized"] = check_slmf_randomized(phi, seed=args.seed)
    answers = {v.is_slmf for v in verdicts.values()}
    if len(answers) > 1:
        print("tool fault: combinatorial and randomized methods disagree", file=sys.stderr)
        return EXIT_FAULT
    verdict = next(iter(verdicts.values()))
    is_slmf = verdict.is_slmf
    print(f"slmf: {'yes' if is_slmf else 'no'}")
    for name, v in verdicts.items():
        if v.witness is not None:
            print(f"violating columns ({name}): {{{','.join(str(t + 1) for t in v.witness)}}}")
    return EXIT_EVIDENCE if is_slmf else EXIT_AGAINST


def _cmd_complete(args) -> int:
    try:
        obs = observed_from_csv(_read_text(args.values_file))
    except ObservedMatrixFormatError as exc:
        raise _UsageError(f"{args.values_file}: {exc}") from exc
    try:
        basis_rows = np.loadtxt(args.basis, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise _UsageError(f"{args.basis}: {exc}") from exc
    try:
        basis = SubspaceBasis(basis_rows)
        if basis.r != args.rank:
            raise NotABasisError(
                f"basis has {basis.r} columns, expected rank {args.rank}"
            )
        completed = complete_matrix(obs, basis)
    except (NotABasisError, DegenerateProjectionError, InconsistentObservationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    residual = max(
        abs(completed[i, j] - v) for (i, j), v in obs.values.items()
    )
    out = Path(args.out)
    out.write_text(
        "\n".join(",".join(repr(float(v)) for v in row) for row in completed) + "\n"
    )
    print(f"wrote {out}")
    print(f"max observed-entry residual: {residual:.3e}")
    return EXIT_EVIDENCE


def _cmd_gen(args) -> int:
    if args.count < 1:
        raise _UsageError("--count must be at least 1")
    if args.per_column > args.m:
        raise _UsageError(f"--per-column {args.per_column} exceeds m={args.m}")
    if args.rank < 1 or args.rank > min(args.m, args.n):
        raise _UsageError("--rank out of range")
    children = np.random.SeedSequence(args.seed).spawn(args.count)
    cert_hits = 0
    cert_known = 0
    rank_hits = 0
    for idx, child in enumerate(children):
        pattern = random_pattern(args.m, args.n, args.per_column, seed=child)
        name = Path(f"pattern_{idx:03d}.txt")
        name.write_text(pattern_to_grid(pattern))
        print(f"wrote {name}")
        if args.emit_stats:
            outcome = find_finite_certificate(pattern, args.rank)
            if outcome.status != "inconclusive":
                cert_known += 1
                cert_hits += outcome.status == "found"
            report = jacobian_rank_test(pattern, args.rank, trials=3, seed=child)
            rank_hits += report.passed
    if args.emit_stats:
        frac_cert = cert_hits / cert_known if cert_known else float("nan")
        print(f"finite-certificate fraction: {frac_cert:.3f} ({cert_hits}/{cert_known} decided)")
        print(f"full-jacobian-rank fraction: {rank_hits / args.count:.3f}")
    return EXIT_EVIDENCE


def _cmd_export_system(args) -> int:
    try:
        obs = observed_from_csv(_read_text(args.values_file))
    except ObservedMatrixFormatError as exc:
        raise _UsageError(f"{args.values_file}: {exc}") from exc
    if args.rank < 1 or args.rank > obs.pattern.m:
        raise _UsageError("--rank out of range")
    system = export_plucker_system(obs, args.rank)
    csv_path = Path(args.out + ".csv")
    json_path = Path(args.out + ".json")
    csv_path.write_text(system.to_csv())
    json_path.write_text(system.index_map_json() + "\n")
    print(f"wrote {csv_path} and {json_path}")
    print(
        f"system: {system.matrix.shape[0]} linear sections over "
        f"{system.matrix.shape[1]} coordinates (linear part only)"
    )
    return EXIT_EVIDENCE


def _build_parser() -> _Parser:
    parser = _Parser(prog="completable", description=__doc__)
    parser.add_argument("--version", action="version", version=f"completable {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="run every completability test on a pattern")
    analyze.add_argument("pattern_file")
    analyze.add_argument("--rank", type=int, required=True)
    analyze.add_argument("--seed", type=int, default=0)
    analyze.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    analyze.add_argument("--json", action="store_true")
    analyze.set_defaults(func=_cmd_analyze)

    slmf_check = sub.add_parser("slmf-check", help="test the linkage-support property")
    slmf_check.add_argument("phi_file")
    slmf_check.add_argument("--rank", type=int, required=True)
    slmf_check.add_argument(
        "--method", choices=["both", "combinatorial", "randomized"], default="both"
    )
    slmf_check.add_argument("--seed", type=int, default=0)
    slmf_check.set_defaults(func=_cmd_slmf_check)

    complete = sub.add_parser("complete", help="complete a matrix from a known column space")
    complete.add_argument("values_file")
    complete.add_argument("--rank", type=int, required=True)
    complete.add_argument("--basis", required=True)
    complete.add_argument("--out", required=True)
    complete.set_defaults(func=_cmd_complete)

    gen = sub.add_parser("gen", help="generate random patterns, optionally with statistics")
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--rank", type=int, required=True)
    gen.add_argument("--per-column", type=int, required=True, dest="per_column")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--emit-stats", action="store_true", dest="emit_stats")
    gen.set_defaults(func=_cmd_gen)

    export = sub.add_parser("export-system", help="export the linear section system")
    export.add_argument("values_file")
    export.add_argument("--rank", type=int, required=True)
    export.add_argument("--out", required=True)
    export.set_defaults(func=_cmd_export_system)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
