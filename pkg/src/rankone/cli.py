"""Command-line front end.

    rankone analyze FILE.fp ...
    rankone vsa FILE.fp ...
    rankone hnn {build,periodic,primitive,witness} FILE.endo ...
    rankone gbs FILE.gbs ...
    rankone classify FILE.fp ...

Exit codes: 0 success, 2 parse error, 3 precondition violated, 4 certification
failure (including non-injective endomorphisms), 5 budget exhausted under --strict.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

from .classify import (
    GBS_EXCEPTION,
    Budgets,
    bounded_generation_verdict,
    classify_presentation,
    vsa_scan,
)
from .gbs import (
    H2B_INFINITE,
    SMALL_BS,
    SMALL_KLEIN,
    SMALL_Z,
    GbsSyntaxError,
    circle_criterion,
    classify_gbs,
    parse_gbs,
    quotient_relation,
    two_generator_reduction,
)
from .hnn import (
    EndoSyntaxError,
    NotInjective,
    PreconditionError,
    TheoremViolation,
    find_periodic_conjugacy,
    hnn_presentation,
    is_surjective,
    normalize,
    parse_endomorphism,
    prove_primitive,
    vsa_witness_strict,
)
from .homology import homology_report
from .presentation import PresentationSyntaxError, parse_presentation

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_CERTIFICATION = 4
EXIT_BUDGET = 5

HNN_ACTIONS = ("build", "periodic", "primitive", "witness")

# classification label for each reduced-GBS class; coprime circles override
_GBS_TO_LABEL = {
    SMALL_Z: "cyclic",
    SMALL_KLEIN: "soluble-BS(1,n)",
    SMALL_BS: "soluble-BS(1,n)",
    H2B_INFINITE: "H2b-infinite-by-theorem",
}


@dataclass
class RunConfig:
    command: str
    paths: list
    action: str | None = None
    max_index: int = 12
    primes: tuple | None = None
    budget_ms: int = 60000
    periodic_max_i: int = 4
    periodic_max_len: int = 10
    format: str = "text"
    jobs: int = 1
    seed: int = 0
    strict: bool = False

    def __post_init__(self):
        if self.budget_ms <= 0 or self.max_index <= 0 or self.jobs <= 0:
            raise ValueError("budgets, --max-index and --jobs must be positive")

    def budgets(self) -> Budgets:
        return Budgets(
            max_index=self.max_index,
            primes=self.primes,
            periodic_max_i=self.periodic_max_i,
            periodic_max_len=self.periodic_max_len,
            budget_ms=self.budget_ms,
        )


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# commands; each returns a JSON-ready dict


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_fp(path):
    try:
        return parse_presentation(_read(path))
    except PresentationSyntaxError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None


def _load_endo(path):
    try:
        return parse_endomorphism(_read(path))
    except EndoSyntaxError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None
    except NotInjective as exc:
        raise CliError(EXIT_CERTIFICATION, f"{path}: {exc}") from None


def _load_gbs(path):
    try:
        return parse_gbs(_read(path))
    except GbsSyntaxError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None


def cmd_analyze(path, cfg: RunConfig) -> dict:
    p = _load_fp(path)
    rep = homology_report(p, list(cfg.primes) if cfg.primes else None)
    return {"presentation": str(p), "generators": p.num_generators,
            "relators": len(p.relators), "deficiency": p.deficiency, **rep}


def cmd_vsa(path, cfg: RunConfig) -> dict:
    p = _load_fp(path)
    scan = vsa_scan(p, cfg.max_index, cfg.primes, cfg.budget_ms)
    return {"presentation": str(p), **scan.to_dict()}


def cmd_hnn(action, path, cfg: RunConfig) -> dict:
    theta = _load_endo(path)
    out = {"endomorphism": theta.to_dict(), "vertex_rank": theta.rank}
    if action == "build":
        out["presentation"] = str(hnn_presentation(theta))
        out["surjective"] = is_surjective(theta)
        return out
    wit = find_periodic_conjugacy(theta, cfg.periodic_max_i, cfg.periodic_max_len)
    bounds = {"max_i": cfg.periodic_max_i, "max_len": cfg.periodic_max_len}
    if wit is None:
        out.update(status="none-within-bounds", bounds=bounds)
        return out
    out["periodic"] = wit.to_dict(theta.alphabet)
    if action == "periodic":
        out["status"] = "found"
        return out
    if action == "primitive":
        cert = prove_primitive(normalize(theta, wit))
        out.update(status="primitive", certificate=cert.to_dict(theta.alphabet))
        return out
    rep = vsa_witness_strict(theta, wit, budget_ms=cfg.budget_ms)
    out.update(rep.to_dict())
    out["budget_exhausted"] = rep.status == "budget-exhausted"
    return out


def cmd_gbs(path, cfg: RunConfig) -> dict:
    g = _load_gbs(path)
    verdict = classify_gbs(g)
    out = {"graph": g.format().splitlines(), "reduction": verdict.to_dict()}
    label = _GBS_TO_LABEL[verdict.label]
    circle = circle_criterion(verdict.reduced)
    if circle is not None:
        out["circle"] = circle.to_dict()
        if circle.coprime and verdict.label == H2B_INFINITE:
            label = GBS_EXCEPTION
            q = quotient_relation(circle)
            out["quotient_relation"] = q.to_dict()
            out["two_generator_reduction"] = two_generator_reduction(circle).to_dict()
    out["label"] = label
    return out


def cmd_classify(path, cfg: RunConfig) -> dict:
    p = _load_fp(path)
    v = classify_presentation(p, cfg.budgets())
    return {"presentation": str(p), **v.to_dict(), **bounded_generation_verdict(v)}


def _dispatch(cfg: RunConfig, path: str) -> dict:
    if cfg.command == "analyze":
        return cmd_analyze(path, cfg)
    if cfg.command == "vsa":
        return cmd_vsa(path, cfg)
    if cfg.command == "hnn":
        return cmd_hnn(cfg.action, path, cfg)
    if cfg.command == "gbs":
        return cmd_gbs(path, cfg)
    return cmd_classify(path, cfg)


def _budget_exhausted(obj) -> bool:
    if isinstance(obj, dict):
        if obj.get("budget_exhausted") is True:
            return True
        return any(_budget_exhausted(v) for v in obj.values())
    if isinstance(obj, list):
        return any(_budget_exhausted(v) for v in obj)
    return False


def run_one(cfg: RunConfig, path: str) -> tuple[int, dict]:
    """Process a single input file; never raises for expected failures."""
    random.seed(cfg.seed)
    head = {"command": cfg.command if not cfg.action else f"{cfg.command} {cfg.action}",
            "input": path, "seed": cfg.seed}
    try:
        body = _dispatch(cfg, path)
    except CliError as exc:
        return exc.code, {**head, "error": str(exc), "exit_code": exc.code}
    except OSError as exc:
        return EXIT_PARSE, {**head, "error": f"{path}: {exc.strerror}", "exit_code": EXIT_PARSE}
    except PreconditionError as exc:
        return EXIT_PRECONDITION, {**head, "error": f"{path}: {exc}", "exit_code": EXIT_PRECONDITION}
    except (TheoremViolation, NotInjective) as exc:
        return EXIT_CERTIFICATION, {**head, "error": f"{path}: {exc}", "exit_code": EXIT_CERTIFICATION}
    code = EXIT_OK
    if cfg.strict and _budget_exhausted(body):
        code = EXIT_BUDGET
    return code, {**head, **body}


def run(cfg: RunConfig) -> tuple[int, list]:
    if cfg.jobs > 1 and len(cfg.paths) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(run_one, [cfg] * len(cfg.paths), cfg.paths))
    else:
        results = [run_one(cfg, path) for path in cfg.paths]
    codes = [c for c, _ in results if c]
    return (codes[0] if codes else EXIT_OK), [r for _, r in results]


# ---------------------------------------------------------------------------
# text rendering


def _is_table(v):
    return (isinstance(v, list) and v and all(isinstance(x, dict) for x in v)
            and all(x.keys() == v[0].keys() for x in v)
            and all(not isinstance(y, (dict, list)) for x in v for y in x.values()))


def _render(obj, indent=0) -> list[str]:
    pad = "  " * indent
    lines = []
    for key, v in obj.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{key}:")
            lines += _render(v, indent + 1)
        elif _is_table(v):
            cols = list(v[0])
            lines.append(f"{pad}{key}:")
            lines.append(pad + "  " + "\t".join(cols))
            lines += [pad + "  " + "\t".join(str(row[c]) for c in cols) for row in v]
        elif isinstance(v, list) and any(isinstance(x, (dict, list)) for x in v):
            lines.append(f"{pad}{key}:")
            for item in v:
                if isinstance(item, dict):
                    sub = _render(item, indent + 2)
                    lines.append(pad + "  - " + sub[0].strip())
                    lines += sub[1:]
                else:
                    lines.append(f"{pad}  - {json.dumps(item)}")
        elif isinstance(v, list):
            lines.append(f"{pad}{key}: " + ", ".join(str(x) for x in v))
        else:
            lines.append(f"{pad}{key}: {v}")
    return lines


def render_text(reports: list) -> str:
    blocks = []
    for rep in reports:
        lines = [f"== {rep['input']} =="]
        if "quotient_relation" in rep:
            lines.append(rep["quotient_relation"]["conclusion"])
        if "bounded_generation" in rep:
            lines.append(f"bounded generation: {rep['bounded_generation']}")
        lines += _render({k: v for k, v in rep.items() if k != "input"})
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


# ---------------------------------------------------------------------------
# argument parsing


def _primes(text):
    try:
        vals = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad prime list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty prime list")
    return vals


def _positive(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-index", type=_positive, default=12)
    common.add_argument("--primes", type=_primes, default=None, help="comma separated, e.g. 2,3,5")
    common.add_argument("--budget-ms", type=_positive, default=60000)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--jobs", type=_positive, default=1, help="worker processes across input files")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--strict", action="store_true", help="exit 5 when a budget runs out")
    common.add_argument("--periodic-max-i", type=_positive, default=4)
    common.add_argument("--periodic-max-len", type=_positive, default=10)

    parser = argparse.ArgumentParser(prog="rankone", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [("analyze", "homology and Golod-Shafarevich table"),
                        ("vsa", "search for a finite-index subgroup with dim H1(H; F_p) >= 3"),
                        ("gbs", "reduce and classify a GBS graph"),
                        ("classify", "classify a deficiency-one presentation")]:
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("paths", nargs="+")
    sp = sub.add_parser("hnn", parents=[common], help="ascending HNN extensions of free groups")
    sp.add_argument("action", choices=HNN_ACTIONS)
    sp.add_argument("paths", nargs="+")
    return parser


def config_from_args(argv=None) -> RunConfig:
    a = build_parser().parse_args(argv)
    return RunConfig(
        command=a.command,
        paths=a.paths,
        action=getattr(a, "action", None),
        max_index=a.max_index,
        primes=a.primes,
        budget_ms=a.budget_ms,
        periodic_max_i=a.periodic_max_i,
        periodic_max_len=a.periodic_max_len,
        format=a.format,
        jobs=a.jobs,
        seed=a.seed,
        strict=a.strict,
    )


def main(argv=None) -> int:
    cfg = config_from_args(argv)
    code, reports = run(cfg)
    for rep in reports:
        if "error" in rep:
            print(rep["error"], file=sys.stderr)
    if cfg.format == "json":
        doc = {"config": {k: v for k, v in asdict(cfg).items() if k != "paths"}, "reports": reports}
        json.dump(doc, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(render_text(reports))
    return code


if __name__ == "__main__":
    sys.exit(main())
