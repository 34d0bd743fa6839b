"""
Width-2 Balance Constants
Exact balance constants of width-2 posets: grid path counting, the T_n family,
case-by-case lower bounds and an exhaustive search over small posets.
"""

import argparse
import json
import logging
from pathlib import Path
from typing import NoReturn, Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from balance import __version__
from balance.core.config import settings
from balance.core.errors import LPError, PosetError, VerificationError
from balance.core.exact import format_decimal, format_exact
from balance.core.grid import build_grid, delta_grid, path_tables, probability_matrix, render_grid, s_region
from balance.core.poset import Poset, count_extensions_oracle, delta_oracle, parse_poset, width_and_decompose
from balance.models.schemas import BalanceReport, TwoChainDecomposition
from balance.services.cases import LAMBDA, bounds_exceed_lambda, verify_cases
from balance.services.family import build_tn, tn_delta, verify_appendix
from balance.services.search import gap_report, iter_all_grids

logger = logging.getLogger(__name__)

# diagnostics and progress on stderr, results on stdout
console = Console(stderr=True)
output = Console(highlight=False, soft_wrap=True)


def emit(text: str) -> None:
    """Print a machine-readable line verbatim."""
    output.print(text, markup=False, highlight=False, emoji=False, soft_wrap=True)


def setup_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else settings.log_level.upper()
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=console, rich_tracebacks=True, show_time=False)],
        force=True,
    )


def decimal(value) -> str:
    return format_decimal(value, settings.decimal_digits)


def load_poset(path: str) -> Poset:
    return parse_poset(Path(path).read_text(encoding="utf-8"))


def two_chain_grid(poset: Poset):
    width, decomposition = width_and_decompose(poset)
    if decomposition is None:
        raise PosetError(f"poset has width {width}; the grid method needs width at most 2")
    return build_grid(poset, decomposition)


def element_label(decomposition: Optional[TwoChainDecomposition], element: int) -> str:
    if decomposition is not None:
        if element in decomposition.chain_a:
            return f"a{decomposition.chain_a.index(element) + 1}"
        if element in decomposition.chain_b:
            return f"b{decomposition.chain_b.index(element) + 1}"
    return str(element)


def delta_line(report: BalanceReport, decomposition: Optional[TwoChainDecomposition]) -> str:
    text = f"delta = {format_exact(report.delta)} ({decimal(report.delta)})"
    if report.witness is None:
        return f"{text}, no incomparable pair"
    if report.witness_cell is not None:
        i, j = report.witness_cell
        return f"{text}, witness (a{i}, b{j})"
    x, y = report.witness
    return f"{text}, witness ({element_label(decomposition, x)}, {element_label(decomposition, y)})"


# -- subcommands ------------------------------------------------------------------------


def cmd_delta(args: argparse.Namespace) -> int:
    poset = load_poset(args.file)
    _, decomposition = width_and_decompose(poset)
    reports = {}
    if args.method in ("grid", "both"):
        grid = two_chain_grid(poset)
        reports["grid"] = delta_grid(grid)
    if args.method in ("oracle", "both"):
        reports["oracle"] = delta_oracle(poset)
    if args.method == "both" and reports["grid"].delta != reports["oracle"].delta:
        raise VerificationError(
            f"grid and oracle disagree: {reports['grid'].delta} vs {reports['oracle'].delta}"
        )
    if args.json:
        emit(json.dumps({name: json.loads(r.model_dump_json()) for name, r in reports.items()}, sort_keys=True))
        return 0
    report = reports.get("grid") or reports["oracle"]
    emit(delta_line(report, decomposition))
    if args.method == "both":
        console.print("[green]✓[/green] Grid and oracle agree")
    return 0


def cmd_probabilities(args: argparse.Namespace) -> int:
    grid = two_chain_grid(load_poset(args.file))
    matrix = probability_matrix(grid)
    if args.json:
        emit(json.dumps([[str(value) for value in row] for row in matrix]))
        return 0
    table = Table(title="P(a_i < b_j)", show_header=True, header_style="bold magenta")
    table.add_column("", style="dim")
    for j in range(1, grid.n + 1):
        table.add_column(f"b{j}", justify="right")
    for i, row in enumerate(matrix, 1):
        table.add_row(f"a{i}", *(str(value) for value in row))
    output.print(table)
    return 0


def cmd_grid(args: argparse.Namespace) -> int:
    grid = two_chain_grid(load_poset(args.file))
    tables = path_tables(grid)
    region = s_region(grid, tables)
    if args.json:
        emit(json.dumps({"grid": json.loads(grid.model_dump_json()), "s_region": json.loads(region.model_dump_json())}))
        return 0
    emit(render_grid(grid, region))
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    count = count_extensions_oracle(load_poset(args.file))
    emit(json.dumps({"extension_count": count}) if args.json else f"e(P) = {count}")
    return 0


def print_checks(report) -> None:
    for check in report.checks:
        emit(check.line())
        if not check.passed:
            console.print(f"[red]✗ {escape(check.name)}[/red] {escape(check.lhs)} vs {escape(check.rhs)} {escape(check.detail)}")


def cmd_tn(args: argparse.Namespace) -> int:
    with Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"), console=console) as progress:
        task = progress.add_task(f"Building T_{args.n}...", total=None)
        geometry, state = build_tn(args.n)
        delta = tn_delta(args.n, geometry)
        progress.remove_task(task)
    if args.json:
        payload = {"n": args.n, "delta": str(delta), "extension_count": str(state.p)}
        if args.verify:
            payload["appendix"] = json.loads(verify_appendix(args.n).model_dump_json())
        emit(json.dumps(payload))
        return 0
    emit(f"delta(T_{args.n}) = {delta} ({decimal(delta)})")
    console.print(Panel.fit(
        f"[bold cyan]T_{args.n}[/bold cyan]: {geometry.rows} x {geometry.cols} grid\n"
        f"[dim]e(T_{args.n}) has {len(str(state.p))} digits; f_{args.n + 1} = {decimal(state.f[-1])}[/dim]",
        border_style="cyan",
    ))
    if args.verify:
        return run_appendix(args.n)
    return 0


def run_appendix(n: int) -> int:
    report = verify_appendix(n)
    print_checks(report)
    if not report.passed:
        raise VerificationError(f"{len(report.failures)} appendix checks failed for T_{n}")
    console.print(f"[green]✓[/green] {len(report.checks)} checks passed; {escape('t[2m+9][2m+10]')} = {report.interior_form}")
    return 0


def cmd_verify_appendix(args: argparse.Namespace) -> int:
    if args.json:
        report = verify_appendix(args.n)
        emit(report.model_dump_json())
        return 0 if report.passed else 2
    return run_appendix(args.n)


def cmd_verify_cases(args: argparse.Namespace) -> int:
    reports = verify_cases()
    above = bounds_exceed_lambda(reports)
    if args.json:
        emit(json.dumps({"cases": [json.loads(r.model_dump_json()) for r in reports], "exceed_lambda": above}))
    else:
        for report in reports:
            emit(report.line())
        table = Table(title="Case bounds", show_header=True, header_style="bold magenta")
        table.add_column("Case", style="dim", width=4)
        table.add_column("Bound", style="cyan")
        table.add_column("Needed", style="green")
        table.add_column("Method", style="yellow")
        for report in reports:
            table.add_row(str(report.case), format_exact(report.bound), format_exact(report.stated_bound), report.method)
        console.print(table)
    failed = [report.case for report in reports if not report.passed]
    if failed or not above:
        raise VerificationError(f"cases {failed} failed" if failed else "a case bound falls below lambda")
    console.print(f"[green]✓[/green] Every case bound reaches lambda = {format_exact(LAMBDA)} ({decimal(LAMBDA)})")
    return 0


def cmd_search(args: argparse.Namespace) -> int:
    max_size = args.max_size if args.max_size is not None else settings.search_max_size
    jobs = args.jobs if args.jobs is not None else settings.search_jobs
    cache = args.cache or settings.search_cache_path
    total = sum(1 for _ in iter_all_grids(max_size))
    with Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"), console=console) as progress:
        task = progress.add_task(f"Scanning {total} grid shapes...", total=total)

        def advance(done: int) -> None:
            progress.update(task, completed=done)

        report = gap_report(max_size, jobs=jobs, cache_path=Path(cache) if cache else None, progress=advance)
        progress.remove_task(task)
    if args.json:
        emit(report.model_dump_json())
        return 0
    for record in report.records:
        emit(record.line())
    summary = Table(title="Balance constants of width-2 posets", show_header=False)
    summary.add_column("Item", style="cyan")
    summary.add_column("Value", style="green")
    summary.add_row("max size", str(report.max_size))
    summary.add_row("posets", str(len(report.records)))
    summary.add_row("distinct deltas", str(len(report.distinct_deltas)))
    summary.add_row("cached", str(report.cached))
    if report.min_non_aigner_delta is not None:
        summary.add_row(
            "min delta outside the family",
            f"{report.min_non_aigner_delta} ({decimal(report.min_non_aigner_delta)})",
        )
        summary.add_row("attained by", report.min_non_aigner_key or "")
    output.print(summary)
    return 0


# -- entry point --------------------------------------------------------------------------


class CliParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit 1; exit 2 is kept for failed checks."""

    def error(self, message: str) -> NoReturn:
        console.print(escape(self.format_usage().rstrip()))
        console.print(f"[red]✗ {escape(message)}[/red]")
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    # also accepted after the subcommand; SUPPRESS keeps a subcommand from resetting them
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--verbose", "-v", action="store_true", default=argparse.SUPPRESS, help="Enable verbose logging")
    shared.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="Emit one JSON object per report")

    parser = CliParser(
        description="⚖️ Width-2 Balance Constants - exact path counting on grid diagrams",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")
    parser.add_argument("--json", action="store_true", help="Emit one JSON object per report")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    delta = sub.add_parser("delta", parents=[shared], help="Balance constant of a poset file")
    delta.add_argument("file", help="Poset file ('poset <size>' then 'rel <u> <v>' lines)")
    delta.add_argument(
        "--method", choices=("grid", "oracle", "both"), default="grid",
        help="Grid path counting, brute-force oracle, or both cross-checked (default: grid)",
    )
    delta.set_defaults(handler=cmd_delta)

    probabilities = sub.add_parser("probabilities", parents=[shared], help="Matrix of P(a_i < b_j)")
    probabilities.add_argument("file")
    probabilities.set_defaults(handler=cmd_probabilities)

    grid = sub.add_parser("grid", parents=[shared], help="ASCII grid diagram with the S border")
    grid.add_argument("file")
    grid.set_defaults(handler=cmd_grid)

    tn = sub.add_parser("tn", parents=[shared], help="Balance constant of T_n")
    tn.add_argument("--n", type=int, required=True, help="Family index (n >= 1)")
    tn.add_argument("--verify", action="store_true", help="Also run every appendix check")
    tn.set_defaults(handler=cmd_tn)

    appendix = sub.add_parser("verify-appendix", parents=[shared], help="Exact checks of the T_n construction")
    appendix.add_argument("--n", type=int, required=True)
    appendix.set_defaults(handler=cmd_verify_appendix)

    cases = sub.add_parser("verify-cases", parents=[shared], help="Lower bounds of the nine structural cases")
    cases.set_defaults(handler=cmd_verify_cases)

    search = sub.add_parser("search", parents=[shared], help="delta of every width-2 poset up to a size")
    search.add_argument("--max-size", type=int, help=f"Largest poset size (default: {settings.search_max_size})")
    search.add_argument("--jobs", type=int, help=f"Worker processes (default: {settings.search_jobs})")
    search.add_argument("--cache", help="Append-only cache file of computed records")
    search.set_defaults(handler=cmd_search)

    oracle = sub.add_parser("oracle", parents=[shared], help="Count linear extensions by brute force")
    oracle.add_argument("file")
    oracle.set_defaults(handler=cmd_oracle)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv`` and run one subcommand; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.handler(args)
    except KeyboardInterrupt:
        console.print("\n[yellow]Aborted by user[/yellow]")
        return 130
    except (VerificationError, LPError) as exc:
        console.print(f"[red]✗ {escape(str(exc))}[/red]")
        return 2
    except (PosetError, ValueError, OSError) as exc:
        console.print(f"[red]✗ {escape(str(exc))}[/red]")
        return 1
    except Exception as exc:
        console.print(f"\n[red]Fatal error: {escape(str(exc))}[/red]")
        logger.exception("Unexpected error occurred")
        return 1


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
