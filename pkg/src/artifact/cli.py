"""Command-line front end.

Commands: ``compute`` (integral cohomology per quantum grading),
``steenrod`` (adds ``Sq^1``/``Sq^2`` and wedge decompositions), ``classify``
(decompositions as a text table), ``selfcheck`` (oracle suite) and
``dump-category`` (TSV listing of a flow category).

Exit codes: 0 success, 1 usage error, 2 validation error (bad diagram,
incompatible options, resource limits), 3 self-check failure.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import click

from .classify import BucketReport, ClassifyError, bucket_report, classify
from .diagram import (DiagramError, GluedDiagram, gen_pretzel, gen_torus_braid, jones_polynomial,
                      parse_diagram)
from .flowcat import LEFT, RIGHT, FlowCategory, FlowCategoryError
from .homalg import Group, HomologyError, Mod2Cohomology, build_complex
from .resolution import KH, SLN, ResolutionError
from .sockcell import SignFrame, check_coboundaries, product_cells
from .steenrod import SteenrodError, invariance_trials

VERSION = "0.1.0"
EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_SELFCHECK = 0, 1, 2, 3
JONES_MAX_BOXES = 18


class ValidationError(Exception):
    """Invalid input or configuration (exit code 2)."""


class SelfCheckFailure(Exception):
    """An oracle disagreed with the computation (exit code 3)."""


@dataclass
class RunConfig:
    source: str
    n: int = 2
    mode: str = KH
    qs: tuple[int, ...] | None = None
    ladybug: str = RIGHT
    eliminate: bool = True
    trials: int = 0
    seed: int = 0
    threads: int = 1
    cache: str | None = None
    max_objects: int = 3_000_000
    diagram_text: str = field(default="", repr=False)

    def key(self, q: int, steenrod: bool) -> str:
        """Cache key covering every flag that can change a bucket result."""
        payload = {
            "version": VERSION, "diagram": json.loads(self.diagram_text), "n": self.n, "mode": self.mode,
            "ladybug": self.ladybug, "eliminate": self.eliminate, "q": q, "steenrod": steenrod,
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


# ------------------------------------------------------------------ setup
def load_diagram(pretzel: str | None, torus: tuple[int, int] | None, diagram_file: str | None) -> tuple[str, GluedDiagram]:
    given = [x for x in (pretzel, torus, diagram_file) if x]
    if len(given) != 1:
        raise click.UsageError("give exactly one of --pretzel, --torus, --diagram")
    try:
        if pretzel:
            indices = [int(x) for x in pretzel.replace(" ", "").split(",") if x]
            return f"pretzel {pretzel}", gen_pretzel(indices)
        if torus:
            a, b = torus
            return f"torus {a} {b}", gen_torus_braid(a, b)
        return f"file {diagram_file}", parse_diagram(Path(diagram_file).read_text())
    except ValueError as exc:  # includes DiagramError
        raise ValidationError(str(exc)) from exc
    except OSError as exc:
        raise ValidationError(f"cannot read diagram file: {exc}") from exc


def parse_qs(text: str | None) -> tuple[int, ...] | None:
    if not text:
        return None
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise click.UsageError(f"--q expects comma-separated integers, got {text!r}")


def make_category(diagram: GluedDiagram, n: int, mode: str | None, ladybug: str) -> FlowCategory:
    mode = mode or (KH if n == 2 else SLN)
    try:
        return FlowCategory(diagram, n, mode, ladybug)
    except (ResolutionError, ValueError) as exc:
        raise ValidationError(str(exc)) from exc


def guard(fc: FlowCategory, qs: list[int], limit: int) -> dict[int, int]:
    counts = {q: fc.cube.count_objects(q) for q in qs}
    worst = max(counts.values(), default=0)
    if worst > limit:
        q = max(counts, key=counts.get)
        raise ValidationError(f"quantum grading {q} has {worst} objects, above the limit of {limit} "
                              "(raise --max-objects to proceed)")
    return counts


# ------------------------------------------------------------------ buckets
def _state(report: BucketReport) -> dict:
    return {
        "q": report.q, "objects": report.objects,
        "groups": {str(d): [g.free, list(g.torsion)] for d, g in report.groups.items()},
        "dims": {str(d): v for d, v in report.dims.items()},
        "sq1": {str(t): r for t, r in report.sq1.items()},
        "sq2": {str(t): r for t, r in report.sq2.items()},
    }


def _from_state(st: dict) -> BucketReport:
    groups = {int(d): Group(int(d), f, tuple(ts)) for d, (f, ts) in st["groups"].items()}
    return BucketReport(st["q"], groups, {int(d): v for d, v in st["dims"].items()},
                        {int(t): r for t, r in st["sq1"].items()}, {int(t): r for t, r in st["sq2"].items()},
                        st["objects"])


_WORKER: dict = {}


def _init_worker(diagram_text: str, n: int, mode: str, ladybug: str) -> None:
    _WORKER["fc"] = FlowCategory(parse_diagram(diagram_text), n, mode, ladybug)


def _run_bucket(args: tuple[int, bool, bool]) -> dict:
    q, eliminate, steenrod = args
    fc = _WORKER["fc"]
    rep = bucket_report(fc, q, eliminate=eliminate, steenrod=steenrod)
    fc.clear_cache()
    return _state(rep)


def compute_buckets(cfg: RunConfig, fc: FlowCategory, steenrod: bool, log) -> list[BucketReport]:
    qs = list(cfg.qs) if cfg.qs is not None else fc.cube.quantum_gradings()
    counts = guard(fc, qs, cfg.max_objects)
    results: dict[int, BucketReport] = {}
    todo = []
    cache = Path(cfg.cache) if cfg.cache else None
    for q in qs:
        if cache is not None:
            path = cache / f"{cfg.key(q, steenrod)}.json"
            if path.exists():
                results[q] = _from_state(json.loads(path.read_text()))
                log(f"q={q}: cached")
                continue
        todo.append(q)
    todo.sort(key=lambda q: -counts[q])
    if cfg.threads > 1 and len(todo) > 1:
        with ProcessPoolExecutor(cfg.threads, initializer=_init_worker,
                                 initargs=(cfg.diagram_text, fc.n, fc.mode, fc.ladybug)) as pool:
            for q, st in zip(todo, pool.map(_run_bucket, [(q, cfg.eliminate, steenrod) for q in todo])):
                results[q] = _from_state(st)
                log(f"q={q}: {counts[q]} objects")
    else:
        for q in todo:
            start = time.perf_counter()
            results[q] = bucket_report(fc, q, eliminate=cfg.eliminate, steenrod=steenrod)
            fc.clear_cache()
            log(f"q={q}: {counts[q]} objects, {time.perf_counter() - start:.1f}s")
    if cache is not None:
        cache.mkdir(parents=True, exist_ok=True)
        for q in todo:
            path = cache / f"{cfg.key(q, steenrod)}.json"
            path.write_text(json.dumps(_state(results[q]), sort_keys=True))
    return [results[q] for q in sorted(results)]


def euler_check(fc: FlowCategory, reports: list[BucketReport]) -> dict | None:
    """Compare the graded Euler characteristic with the Jones oracle (n = 2)."""
    if fc.n != 2 or fc.mode != KH or fc.diagram.m > JONES_MAX_BOXES:
        return None
    jones = jones_polynomial(fc.diagram)
    chi = {}
    for rep in reports:
        val = sum((-1) ** d * g.free for d, g in rep.groups.items())
        if val:
            chi[rep.q] = val
    if {r.q for r in reports} != set(fc.cube.quantum_gradings()):
        jones = {q: v for q, v in jones.items() if q in {r.q for r in reports}}
    return {"euler": {str(k): v for k, v in sorted(chi.items())},
            "jones": {str(k): v for k, v in sorted(jones.items())},
            "match": chi == jones}


def diagram_info(D: GluedDiagram) -> dict:
    st = D.stats()
    return {"name": D.name, "tangles": D.m, "crossings": sum(abs(r) for r in D.indices),
            "indices": list(D.indices), "writhe": st.writhe, "R": st.R, "matched": st.matched,
            "components": st.component_count}


def result_json(cfg: RunConfig, fc: FlowCategory, reports: list[BucketReport], steenrod: bool) -> dict:
    buckets = []
    for rep in reports:
        entry = rep.to_dict()
        if not steenrod:
            for k in ("mod2_dims", "sq1", "sq2"):
                entry.pop(k, None)
        else:
            entry["sq2_ranks"] = {str(t): r for t, r in rep.sq2_ranks().items()}
            try:
                entry["decomposition"] = classify(rep).to_dict()
            except ClassifyError as exc:
                entry["decomposition"] = {"status": "ERROR", "reason": str(exc)}
        buckets.append(entry)
    out = {
        "artifact_version": VERSION,
        "config": {"source": cfg.source, "n": fc.n, "mode": fc.mode, "ladybug": fc.ladybug,
                   "eliminate": cfg.eliminate, "q": list(cfg.qs) if cfg.qs else None},
        "diagram": diagram_info(fc.diagram),
        "buckets": buckets,
    }
    if steenrod:
        out["sq2_nontrivial"] = [rep.q for rep in reports if rep.sq2_ranks()]
    ec = euler_check(fc, reports)
    if ec is not None:
        out["euler_check"] = ec
    return out


def text_table(result: dict) -> str:
    lines = [f"# {result['diagram']['name']}  n={result['config']['n']}  mode={result['config']['mode']}"]
    for b in result["buckets"]:
        groups = " ".join(f"H^{d}={_group_text(g)}" for d, g in b["groups"].items()) or "0"
        line = f"q={b['q']:>4}  {groups}"
        if "sq2_ranks" in b:
            sq = ", ".join(f"{t}->{int(t) + 2}:{r}" for t, r in b["sq2_ranks"].items())
            line += f"  Sq2[{sq}]"
        if "decomposition" in b:
            dec = b["decomposition"]
            line += "  " + (dec.get("text") or f"{dec['status']} ({dec['reason']})")
        lines.append(line)
    return "\n".join(lines)


def _group_text(g: dict) -> str:
    parts = []
    if g["free"]:
        parts.append("Z" if g["free"] == 1 else f"Z^{g['free']}")
    parts += [f"Z/{m}" for m in g["torsion"]]
    return "+".join(parts)


def emit(result: dict, out: str | None, text: bool) -> None:
    payload = json.dumps(result, indent=1, sort_keys=True, ensure_ascii=False) + "\n"
    if out:
        Path(out).write_text(payload)
    if text or out:
        click.echo(text_table(result))
    else:
        click.echo(payload, nl=False)


# ------------------------------------------------------------------ self-check
@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def oracle_vectors(indices: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Index vectors for the sign/frame oracle.

    Small diagrams are checked on their full vector.  Otherwise every triple
    of indices is checked behind a unit coordinate that carries the parity
    of the coordinates in front of it (the identities are local).
    """
    if len(indices) <= 5:
        return [tuple(indices)]
    vecs = set()
    m = len(indices)
    for a in range(m):
        for b in range(a + 1, m):
            for c in range(b + 1, m):
                vecs.add((1, indices[a], indices[b], indices[c]))
    return sorted(vecs)


def run_selfcheck(fc: FlowCategory, qs: list[int] | None, trials: int, seed: int,
                  mutate_frame: bool, log) -> list[CheckResult]:
    results: list[CheckResult] = []
    # sign and frame cochains
    failures = []
    cells = 0
    for vec in oracle_vectors(fc.cube.indices):
        sf = SignFrame(vec)
        if mutate_frame:
            sf = SignFrame(vec, frame_flip=product_cells(vec, fc.n, 2)[0])
        rep = check_coboundaries(vec, fc.n, sf)
        cells += rep.checked_2cells + rep.checked_3cells
        failures += [f"r={list(vec)}: {f}" for f in rep.failures or []]
    results.append(CheckResult("sign/frame coboundary oracle", not failures,
                               f"{cells} cells" if not failures else failures[0]))
    qs = qs if qs is not None else fc.cube.quantum_gradings()
    other = FlowCategory(fc.diagram, fc.n, fc.mode, LEFT if fc.ladybug == RIGHT else RIGHT)
    reports = []
    for q in qs:
        cx = build_complex(fc, q)
        try:
            cx.check_d_squared()
            results.append(CheckResult(f"q={q} d^2=0", True, f"{len(cx.objects)} objects"))
        except HomologyError as exc:
            results.append(CheckResult(f"q={q} d^2=0", False, str(exc)))
        bad = [(o, e.target) for o in cx.objects for e in fc.up(o) if e.target.q != o.q]
        results.append(CheckResult(f"q={q} quantum grading preserved", not bad,
                                   "" if not bad else f"{bad[0][0]} -> {bad[0][1]}"))
        h2 = Mod2Cohomology(cx)
        for t in cx.degrees:
            if h2.dim(t) and h2.dim(t + 2):
                tr = invariance_trials(fc, cx, h2, t, trials, seed + 1000 * q + t, other)
                results.append(CheckResult(f"q={q} t={t} Sq2 choice invariance ({trials} trials)", tr.ok,
                                           "" if tr.ok else tr.mismatches[0]))
        rep = bucket_report(fc, q)
        reports.append(rep)
        try:
            dec = classify(rep)
            results.append(CheckResult(f"q={q} decomposition reassembles", True, str(dec)))
        except ClassifyError as exc:
            results.append(CheckResult(f"q={q} decomposition reassembles", False, str(exc)))
        fc.clear_cache()
        other.clear_cache()
        log(f"q={q} checked")
    ec = euler_check(fc, reports)
    if ec is not None:
        results.append(CheckResult("graded Euler characteristic = Jones oracle", ec["match"],
                                   "" if ec["match"] else f"{ec['euler']} != {ec['jones']}"))
    return results


# ------------------------------------------------------------------ commands
def common_options(func):
    opts = [
        click.option("--n", "n", type=int, default=2, show_default=True, help="sl_n rank (2 = Khovanov)."),
        click.option("--pretzel", type=str, default=None, help="Pretzel indices, e.g. \"-2,3,3\"."),
        click.option("--torus", type=(int, int), default=None, help="Torus link T(A,B) as a braid closure."),
        click.option("--diagram", "diagram_file", type=str, default=None, help="Glued-diagram JSON file."),
        click.option("--q", "q_text", type=str, default=None, help="Quantum gradings, comma-separated."),
        click.option("--mode", type=click.Choice([KH, SLN]), default=None,
                     help="Grading convention (default: kh for n=2, sln otherwise)."),
        click.option("--ladybug", type=click.Choice([RIGHT, LEFT]), default=RIGHT, show_default=True),
        click.option("--no-eliminate", is_flag=True, help="Skip Gaussian elimination."),
        click.option("--trials", type=int, default=0, show_default=True, help="Randomised-choice trials."),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--threads", type=int, default=1, show_default=True, help="Worker processes."),
        click.option("--cache", type=str, default=None, help="Directory for cached bucket results."),
        click.option("--out", type=str, default=None, help="Write the JSON result here."),
        click.option("--max-objects", type=int, default=3_000_000, show_default=True,
                     help="Refuse quantum gradings with more objects."),
        click.option("--verbose", "-v", is_flag=True, help="Progress on stderr."),
    ]
    for opt in reversed(opts):
        func = opt(func)
    return func


def setup(n, pretzel, torus, diagram_file, q_text, mode, ladybug, no_eliminate, trials, seed, threads,
          cache, max_objects) -> tuple[RunConfig, FlowCategory]:
    if n < 2:
        raise click.UsageError("--n must be at least 2")
    if trials < 0 or threads < 1:
        raise click.UsageError("--trials must be >= 0 and --threads >= 1")
    source, D = load_diagram(pretzel, torus, diagram_file)
    fc = make_category(D, n, mode, ladybug)
    cfg = RunConfig(source, n, fc.mode, parse_qs(q_text), ladybug, not no_eliminate, trials, seed, threads,
                    cache, max_objects, D.to_json())
    return cfg, fc


def _logger(verbose: bool):
    def log(msg: str) -> None:
        if verbose:
            click.echo(msg, err=True)
    return log


@click.group()
@click.version_option(VERSION)
def cli() -> None:
    """Flow categories, Steenrod squares and stable homotopy types of link diagrams."""


@cli.command()
@common_options
def compute(verbose, out, **kw) -> None:
    """Integral cohomology per quantum grading."""
    cfg, fc = setup(**kw)
    reports = compute_buckets(cfg, fc, False, _logger(verbose))
    result = result_json(cfg, fc, reports, False)
    emit(result, out, False)
    if "euler_check" in result and not result["euler_check"]["match"]:
        raise SelfCheckFailure("graded Euler characteristic differs from the Jones oracle")


@cli.command()
@common_options
def steenrod(verbose, out, **kw) -> None:
    """Cohomology, Sq^1, Sq^2 and wedge decompositions."""
    cfg, fc = setup(**kw)
    log = _logger(verbose)
    reports = compute_buckets(cfg, fc, True, log)
    result = result_json(cfg, fc, reports, True)
    if cfg.trials:
        result["trials"] = _trials(cfg, fc, reports, log)
    emit(result, out, False)
    if "trials" in result and not all(t["ok"] for t in result["trials"]):
        raise SelfCheckFailure("Sq^2 changed under a randomised choice")


def _trials(cfg: RunConfig, fc: FlowCategory, reports: list[BucketReport], log) -> list[dict]:
    other = FlowCategory(fc.diagram, fc.n, fc.mode, LEFT if fc.ladybug == RIGHT else RIGHT)
    out = []
    for rep in reports:
        if not rep.sq2_ranks():
            continue
        cx = build_complex(fc, rep.q)
        h2 = Mod2Cohomology(cx, cfg.eliminate)
        off = fc.cube.i_offset
        for t in rep.sq2_ranks():
            tr = invariance_trials(fc, cx, h2, t - off, cfg.trials, cfg.seed, other)
            out.append({"q": rep.q, "t": t, "ok": tr.ok, "mismatches": tr.mismatches[:3]})
            log(f"q={rep.q} t={t} trials {'ok' if tr.ok else 'FAILED'}")
        fc.clear_cache()
        other.clear_cache()
    return out


@cli.command("classify")
@common_options
def classify_cmd(verbose, out, **kw) -> None:
    """Wedge decompositions as a text table (JSON with --out)."""
    cfg, fc = setup(**kw)
    reports = compute_buckets(cfg, fc, True, _logger(verbose))
    result = result_json(cfg, fc, reports, True)
    emit(result, out, True)


@cli.command()
@common_options
@click.option("--mutate-frame", is_flag=True, help="Corrupt one frame bit (the oracle must fail).")
def selfcheck(verbose, out, mutate_frame, **kw) -> None:
    """Run the oracle suite (default diagram: P(-2,3,3), n=2)."""
    if not (kw["pretzel"] or kw["torus"] or kw["diagram_file"]):
        kw["pretzel"] = "-2,3,3"
    kw["trials"] = kw["trials"] or 8
    cfg, fc = setup(**kw)
    results = run_selfcheck(fc, list(cfg.qs) if cfg.qs else None, cfg.trials, cfg.seed, mutate_frame,
                            _logger(verbose))
    for r in results:
        click.echo(f"{'PASS' if r.ok else 'FAIL'}  {r.name}" + (f"  [{r.detail}]" if r.detail else ""))
    if out:
        Path(out).write_text(json.dumps([asdict(r) for r in results], indent=1, ensure_ascii=False) + "\n")
    failed = [r for r in results if not r.ok]
    if failed:
        raise SelfCheckFailure(f"{len(failed)} check(s) failed; first: {failed[0].name}: {failed[0].detail}")


@cli.command("dump-category")
@common_options
def dump_category(verbose, out, **kw) -> None:
    """TSV listing of objects, moduli points and intervals at one quantum grading."""
    cfg, fc = setup(**kw)
    if not cfg.qs or len(cfg.qs) != 1:
        raise click.UsageError("dump-category needs exactly one --q")
    guard(fc, list(cfg.qs), cfg.max_objects)
    text = fc.dump(cfg.qs[0])
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, prog_name="artifact", standalone_mode=False)
    except click.exceptions.NoArgsIsHelpError as exc:
        click.echo(exc.ctx.get_help() if exc.ctx else str(exc))
        return EXIT_USAGE
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    except ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    except (DiagramError, ResolutionError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    except SelfCheckFailure as exc:
        click.echo(f"self-check failed: {exc}", err=True)
        return EXIT_SELFCHECK
    except (FlowCategoryError, SteenrodError, HomologyError) as exc:
        click.echo(f"self-check failed: {exc}", err=True)
        return EXIT_SELFCHECK
    return EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
