"""Command-line front end.

Exit codes: 0 all checks passed and every tower stabilized; 2 computation
fine but some tower only heuristically stable; 1 assertion failure or bad
input.  Reports (CSV tables, JSON certificates) are deterministic for a
given job and seed; timings only go to stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

from . import __version__
from .cohomology import WindowSchedule, hax
from .complexes import ALTERNATING, DEGREE_CAP, ORDERED
from .complexes import WindowTooSmall as ComplexWindowTooSmall
from .pairing import PairingAuditError, fundamental_chain, pair_classes
from .rips import BudgetExceeded, DEFAULT_BUDGET, q_shadow
from .snf import AbelianGroup
from .specfile import LoadedSpace, SpecError, load_space_file
from . import suites

EXIT_OK, EXIT_FAIL, EXIT_HEURISTIC = 0, 1, 2

VERIFY_SUITES: dict[str, tuple[str, ...]] = {
    "prism": ("prism",),
    "mv": ("excision",),
    "flasque": ("flasque",),
    "additivity": ("additivity",),
    "pairing": ("pairing",),
    "extension": ("extension",),
    "axioms": tuple(suites.ACCEPTANCE),
}

SEEDED = {"flasque", "prism", "pairing", "extension"}


class UsageError(ValueError):
    pass


def parse_range(text: str, what: str) -> list[int]:
    """'A..B' (inclusive) or a single integer."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"--{what}: expected A..B or an integer, got {text!r}") from None
    if hi < lo:
        raise UsageError(f"--{what}: empty range {text!r}")
    return list(range(lo, hi + 1))


def parse_cores(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"--cores: expected a comma-separated list of integers, got {text!r}") from None


def threads() -> int:
    raw = os.environ.get("ROE_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"ROE_LAB_THREADS must be an integer, got {raw!r}") from None


def pmap(fn: Callable, items: Sequence) -> list:
    """Map in item order, over a process pool when ROE_LAB_THREADS > 1."""
    n = min(threads(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def default_cores(core_radius: int, margin: int) -> tuple[int, ...]:
    """Evenly spaced core radii ending at core_radius, with enough entries for the margin."""
    count = margin + 3
    cores = sorted({max(1, core_radius * i // count) for i in range(1, count + 1)})
    if len(cores) <= margin:
        cores = list(range(1, margin + 3))
    return tuple(cores)


def backends(choice: str) -> list[str]:
    return {"alternating": [ALTERNATING], "ordered": [ORDERED], "both": [ALTERNATING, ORDERED]}[choice]


def torsion_text(g: AbelianGroup | None) -> str:
    return "" if g is None else ";".join(str(t) for t in g.torsion)


def write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", newline="") as fh:
        fh.write(text)


def csv_text(rows: list[list]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["degree", "scale", "window", "rank", "torsion", "stabilized"])
    wr.writerows(rows)
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# cohomology


@dataclass
class Job:
    space: LoadedSpace
    scales: list[int]
    degrees: list[int]
    cores: tuple[int, ...]
    padding: int
    margin: int


def make_job(args) -> Job:
    space = load_space_file(args.space)
    scales, degrees = parse_range(args.scales, "scales"), parse_range(args.degrees, "degrees")
    if min(scales) < 1:
        raise UsageError("--scales must be positive")
    if min(degrees) < 0:
        raise UsageError("--degrees must be nonnegative")
    margin = args.margin
    if args.cores:
        cores = parse_cores(args.cores)
    else:
        core = space.core_radius if space.core_radius is not None else 12
        cores = default_cores(core, margin)
    required = max(scales) * (DEGREE_CAP + 2)
    padding = args.padding if args.padding is not None else space.padding
    if padding is None:
        padding = required
    return Job(space, scales, degrees, cores, padding, margin)


@dataclass
class _HaxTask:
    job: Job
    degree: int
    backend: str


def _run_hax(task: _HaxTask):
    j = task.job
    sch = WindowSchedule(j.cores, j.padding, j.margin)
    return hax(j.space.spec, [task.degree], j.scales, sch, task.backend).degrees[task.degree]


def cmd_cohomology(args) -> int:
    job = make_job(args)
    sch = WindowSchedule(job.cores, job.padding, job.margin)
    sch.validate(max(job.scales))
    bes = backends(args.backend)
    tasks = [_HaxTask(job, n, be) for be in bes for n in job.degrees]
    results = pmap(_run_hax, tasks)
    by = {(t.backend, t.degree): r for t, r in zip(tasks, results)}
    status = EXIT_OK
    if len(bes) == 2:
        for n in job.degrees:
            a, o = by[(ALTERNATING, n)], by[(ORDERED, n)]
            if a.group != o.group or a.per_scale != o.per_scale:
                print(f"FAIL backends disagree in degree {n}: {a.group} vs {o.group}", file=sys.stderr)
                status = EXIT_FAIL
    rows = []
    for n in job.degrees:
        d = by[(bes[0], n)]
        if d.group is None:
            rows += [[n, k, "", "", "", "false"] for k in job.scales]
            continue
        for k, g in zip(job.scales, d.per_scale):
            rows.append([n, k, d.core_radius, g.rank, torsion_text(g), "true" if d.stabilized else "false"])
        if not d.stabilized and status == EXIT_OK:
            status = EXIT_HEURISTIC
    write_output(csv_text(rows), args.out)
    for n in job.degrees:
        d = by[(bes[0], n)]
        print(f"H^{n} = {d.group if d.group is not None else '?'} ({d.confidence}, lim1 {d.lim1})", file=sys.stderr)
    return status


def cmd_rips(args) -> int:
    job = make_job(args)
    radii = list(parse_cores(args.cores)) if args.cores else list(default_cores(
        job.space.core_radius if job.space.core_radius is not None else 3, 1))
    pad = args.padding if args.padding is not None else (job.space.padding or max(job.scales))
    rep = q_shadow(job.space.spec, job.degrees, job.scales, radii, padding=pad, budget=args.budget)
    rows, status = [], EXIT_OK
    for n in job.degrees:
        d = rep.degrees[n]
        if d.group is None:
            rows += [[n, k, "", "", "", "false"] for k in job.scales]
            status = EXIT_HEURISTIC
            continue
        for k, g in zip(job.scales, d.per_scale):
            rows.append([n, k, d.B_radius, g.rank, torsion_text(g), "true" if d.stabilized else "false"])
        if not d.stabilized:
            status = EXIT_HEURISTIC
    write_output(csv_text(rows), args.out)
    return status


# ---------------------------------------------------------------------------
# verify and pair


def _run_suite(item: tuple[str, int]) -> suites.SuiteResult:
    name, seed = item
    fn = suites.ACCEPTANCE[name]
    return fn(seed=seed) if name in SEEDED else fn()


def cmd_verify(args) -> int:
    names = VERIFY_SUITES[args.suite]
    results = pmap(_run_suite, [(n, args.seed) for n in names])
    for r in results:
        print(r.line())
    report = {"command": "verify", "suite": args.suite, "seed": args.seed, "version": __version__,
              "results": [{"name": r.name, "passed": r.passed, "details": r.details} for r in results]}
    if args.out:
        write_output(json_text(report), args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_pair(args) -> int:
    space = load_space_file(args.space)
    spec = space.spec
    if spec.kind != "grid" or spec.params[0] > 2:
        raise UsageError(f"no fundamental class is available for {spec.describe()}; use grid dim 1 or 2")
    d = spec.params[0]
    k = parse_range(args.scales, "scales")[0]
    be = backends(args.backend)
    out = {"command": "pair", "space": spec.describe(), "degree": d, "scale": k, "seed": args.seed, "values": {}}
    cores = parse_cores(args.cores) if args.cores else ((4, 6, 8, 10, 12) if d == 1 else (2, 3, 4, 5))
    sch = WindowSchedule.for_scale(k, cores)
    status = EXIT_OK
    for b in be:
        rep = hax(spec, [d], [k], sch, b)
        deg = rep.degrees[d]
        if deg.group != AbelianGroup(1):
            raise UsageError(f"H^{d} at scale {k} is {deg.group}, expected Z")
        entry = rep.towers[d].colimit_towers[0].entries[deg.window_index]
        w = entry.basis.window
        phi = entry.rep_cochains()[0]
        audit = pair_classes(w, phi, fundamental_chain(d, k, b), trials=args.trials, seed=args.seed)
        out["values"][b] = audit.value
        print(f"{'PASS' if abs(audit.value) == 1 else 'FAIL'} <generator, fundamental class> = {audit.value} ({b})")
        if abs(audit.value) != 1:
            status = EXIT_FAIL
    if args.out:
        write_output(json_text(out), args.out)
    return status


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roelab", description="Windowed coarse cohomology and its verification suites.")
    p.add_argument("--version", action="version", version=f"roelab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scales="1..2", degrees="0..2"):
        sp.add_argument("--space", required=True, help="JSON space spec")
        sp.add_argument("--scales", default=scales, help="scale range A..B")
        sp.add_argument("--degrees", default=degrees, help="degree range A..B")
        sp.add_argument("--cores", help="comma-separated core radii (B radii for rips-shadow)")
        sp.add_argument("--padding", type=int)
        sp.add_argument("--margin", type=int, default=2)
        sp.add_argument("--out", help="output path (default: stdout)")

    c = sub.add_parser("cohomology", help="hax groups as CSV")
    common(c)
    c.add_argument("--backend", choices=["ordered", "alternating", "both"], default="alternating")
    c.set_defaults(func=cmd_cohomology)

    r = sub.add_parser("rips-shadow", help="relative Rips cohomology shadow as CSV")
    common(r)
    r.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    r.set_defaults(func=cmd_rips)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=sorted(VERIFY_SUITES))
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", help="JSON report path")
    v.set_defaults(func=cmd_verify)

    q = sub.add_parser("pair", help="pair the top cohomology generator of Z or Z^2 with the fundamental class")
    q.add_argument("--space", required=True)
    q.add_argument("--scales", default="1..1")
    q.add_argument("--cores")
    q.add_argument("--backend", choices=["ordered", "alternating", "both"], default="alternating")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--trials", type=int, default=10)
    q.add_argument("--out")
    q.set_defaults(func=cmd_pair)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, UsageError, ValueError, ComplexWindowTooSmall, BudgetExceeded, PairingAuditError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
