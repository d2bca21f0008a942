"""Command-line entry point: ``cdfkit analyze FILE`` and ``cdfkit batch DIR``.

Settings are resolved from, lowest precedence first: built-in defaults, a
TOML config file (``--config`` or ``$CDFKIT_CONFIG``), ``# @key value``
directives inside the analysed file, and command-line flags.

Exit status: 0 on success, 1 on parse/config/I-O errors, 2 when ``--strict``
is set and an analysis budget was exhausted.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .classify import ClassifyConfig, classify
from .dsl import INTEGER, REAL, ParseError, looks_like_rewrite_system, parse_function, parse_rewrite_system
from .evaluator import Budget, DepthExceeded, StepsExceeded
from .mappings import ComponentMissing, build_rewrite_space, build_space, check_commutativity
from .report import build_document, dumps_canonical, to_dot, to_json, to_text
from .semantic import ExplicitList, IntRange, RealGrid
from .structural import BUDGET_EXHAUSTED, EVAL_FAILED, NO_CAP

CONFIG_ENV = "CDFKIT_CONFIG"

EXIT_OK, EXIT_ERROR, EXIT_BUDGET = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    kind: str = "auto"            # auto | function | rewrite
    domain: str = "auto"          # auto | int | real
    basepoint: str = "0"
    max_steps: int = 10_000
    float_eps: float = 1e-9
    depth_cap: int = 50
    node_cap: int = 100_000
    max_call_depth: int = 10_000
    max_eval_steps: int = 1_000_000
    magnitude_bound: float = 1e12
    lyapunov_threshold: float = 0.01
    n_transient: int = 1000
    n_sample: int = 10_000
    fd_step: float = 1e-7
    probes: str = "1..10"
    growth_gap: float = 0.10
    sample: str = ""              # empty: derived from the orbit / call chain
    detail: bool = False
    # output only; never affect the analysis
    format: str = "json"
    dot: str = ""
    tree: int = -1
    strict: bool = False
    timestamps: bool = True
    out: str = ""

    OUTPUT_KEYS = ("format", "dot", "tree", "strict", "timestamps", "out")

    def validate(self):
        for name in ("max_steps", "depth_cap", "node_cap", "max_call_depth", "max_eval_steps",
                     "n_sample"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.n_transient < 0:
            raise ConfigError("n_transient must be non-negative")
        for name in ("float_eps", "magnitude_bound", "fd_step"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.kind not in ("auto", "function", "rewrite"):
            raise ConfigError(f"unknown kind {self.kind!r}")
        if self.domain not in ("auto", "int", "real"):
            raise ConfigError(f"unknown domain {self.domain!r}")
        if self.format not in ("json", "dot", "text"):
            raise ConfigError(f"unknown format {self.format!r}")
        return self

    def budget(self):
        return Budget(self.max_call_depth, self.max_eval_steps, self.magnitude_bound)

    def classify_config(self):
        return ClassifyConfig(
            lyapunov_threshold=self.lyapunov_threshold,
            n_transient=self.n_transient,
            n_sample=self.n_sample,
            fd_step=self.fd_step,
            probes=tuple(parse_number_list(self.probes, integer=False)),
            growth_gap=self.growth_gap,
        )

    def echo(self, kind):
        """Every tunable that can influence the analysis of this kind of input."""
        d = {k: v for k, v in dataclasses.asdict(self).items() if k not in self.OUTPUT_KEYS}
        if kind == "rewrite_system":
            keep = ("kind", "depth_cap", "node_cap")
            return {k: d[k] for k in keep}
        d.pop("depth_cap")
        d.pop("node_cap")
        return d


FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def coerce_setting(key, value):
    if key not in FIELD_TYPES:
        raise ConfigError(f"unknown setting {key!r}")
    kind = FIELD_TYPES[key]
    try:
        if kind == "bool":
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if kind == "int":
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if kind == "float":
            return float(value)
        if isinstance(value, list):
            return ",".join(str(v) for v in value)
        return str(value).strip()
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {value!r}") from None


def parse_scalar(text):
    text = text.strip()
    if re.fullmatch(r"[+-]?\d+", text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}") from None


def parse_number_list(text, integer=False):
    """``"1..10"``, ``"1..20:2"`` or ``"1,2,5"``."""
    text = str(text).strip()
    m = re.fullmatch(r"([+-]?\d+)\.\.([+-]?\d+)(?::(\d+))?", text)
    if m:
        lo, hi, step = int(m[1]), int(m[2]), int(m[3] or 1)
        if step <= 0:
            raise ConfigError("range step must be positive")
        return list(range(lo, hi + 1, step))
    return [parse_scalar(t) for t in text.split(",") if t.strip()]


def parse_sample(text):
    text = text.strip()
    m = re.fullmatch(r"([+-]?\d+)\.\.([+-]?\d+)(?::(\d+))?", text)
    if m:
        return IntRange(int(m[1]), int(m[2]), int(m[3] or 1))
    m = re.fullmatch(r"([^/]+)\.\.([^/]+)/(\d+)", text)
    if m:
        return RealGrid(float(m[1]), float(m[2]), int(m[3]))
    values = parse_number_list(text)
    if not values:
        raise ConfigError("empty sample")
    return ExplicitList(tuple(values))


def load_config_file(path):
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad config {path}: {exc}") from None
    data = data.get("cdfkit", data)
    return {k.replace("-", "_"): coerce_setting(k.replace("-", "_"), v) for k, v in data.items()}


_DIRECTIVE_RE = re.compile(r"^\s*#\s*@([A-Za-z_-]+)\s+(.+?)\s*$", re.MULTILINE)


def file_directives(text):
    """``# @basepoint 3`` style settings embedded in an input file."""
    out = {}
    for key, value in _DIRECTIVE_RE.findall(text):
        key = key.replace("-", "_")
        if key in RunConfig.OUTPUT_KEYS:
            continue
        out[key] = coerce_setting(key, value)
    return out


def effective_config(base, text, flags):
    values = dataclasses.asdict(base)
    values.update(file_directives(text))
    values.update(flags)
    return RunConfig(**values).validate()


# ---------------------------------------------------------------------------
# Analysis
# ---------------------------------------------------------------------------

@dataclass
class Analysis:
    document: object
    space: object
    budget_exhausted: bool
    extra: dict = field(default_factory=dict)


def _domain_override(cfg):
    return {"int": INTEGER, "real": REAL}.get(cfg.domain)


def analyze_text(text, cfg):
    """Parse and analyse one source text; raises ParseError / ConfigError."""
    kind = cfg.kind
    if kind == "auto":
        kind = "rewrite" if looks_like_rewrite_system(text) else "function"
    if kind == "rewrite":
        g = parse_rewrite_system(text)
        space = build_rewrite_space(g, depth_cap=cfg.depth_cap, node_cap=cfg.node_cap)
        exhausted = space.expansion.caps_hit != NO_CAP
    else:
        f = parse_function(text, domain=_domain_override(cfg))
        if f.arity != 1:
            raise ConfigError(f"{f.name} has {f.arity} parameters; analysis needs a unary function")
        x0 = parse_scalar(cfg.basepoint)
        if f.domain_tag == INTEGER and not isinstance(x0, int):
            raise ConfigError(f"basepoint {cfg.basepoint!r} is not an integer")
        domain_spec = parse_sample(cfg.sample) if cfg.sample else None
        space = build_space(f, x0, max_steps=cfg.max_steps, float_eps=cfg.float_eps,
                            budget=cfg.budget(), domain_spec=domain_spec, detail=cfg.detail)
        o = space.orbit
        exhausted = o.status == BUDGET_EXHAUSTED or (
            o.status == EVAL_FAILED and isinstance(o.error, (DepthExceeded, StepsExceeded)))
    report = classify(space, cfg.classify_config())
    comm = check_commutativity(space)
    doc_kind = "rewrite_system" if space.is_rewrite else "function"
    doc = build_document(space, report, comm, cfg.echo(doc_kind), text, timestamps=cfg.timestamps)
    return Analysis(doc, space, exhausted)


def render(analysis, cfg):
    if cfg.format == "json":
        return to_json(analysis.document, include_timestamps=cfg.timestamps)
    if cfg.format == "text":
        return to_text(analysis.document)
    space = analysis.space
    which = cfg.dot
    if not which:
        if space.is_rewrite:
            which = "expansion"
        elif cfg.tree >= 0:
            which = "deriv_tree"
        else:
            which = "orbit"
    return to_dot(space, which, max(cfg.tree, 0))


def read_source(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    return raw.decode("utf-8").replace("\r\n", "\n")


def _write(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run_analyze(path, base, flags):
    try:
        text = read_source(path)
        cfg = effective_config(base, text, flags)
        analysis = analyze_text(text, cfg)
        _write(render(analysis, cfg), cfg.out)
    except ParseError as exc:
        print(f"{path}:{exc.line}:{exc.col}: {exc.kind}: {exc.message}", file=sys.stderr)
        return EXIT_ERROR
    except (ConfigError, ComponentMissing, TypeError) as exc:
        print(f"{path}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, UnicodeDecodeError) as exc:
        print(f"{path}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if cfg.strict and analysis.budget_exhausted:
        print(f"{path}: analysis budget exhausted (--strict)", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def _batch_one(args):
    path, name, base, flags = args
    try:
        text = read_source(path)
        cfg = effective_config(base, text, flags)
        cfg.timestamps = False
        analysis = analyze_text(text, cfg)
    except ParseError as exc:
        return {"path": name, "status": "parse_error",
                "error": f"{exc.line}:{exc.col}: {exc.kind}: {exc.message}"}, None
    except (ConfigError, TypeError, OSError, UnicodeDecodeError) as exc:
        return {"path": name, "status": "error", "error": str(exc)}, None
    r = analysis.document.report
    entry = {
        "path": name,
        "status": "ok",
        "shape": r["shape"],
        "expandability": r["expandability"],
        "hierarchy_level": r["hierarchy_level"],
        "budget_exhausted": analysis.budget_exhausted,
    }
    return entry, to_json(analysis.document, include_timestamps=False)


def run_batch(directory, base, flags, jobs=1):
    root = Path(directory)
    if not root.is_dir():
        print(f"{directory}: not a directory", file=sys.stderr)
        return EXIT_ERROR
    files = sorted(p for p in root.iterdir() if p.is_file() and not p.name.startswith("."))
    if not files:
        print(f"{directory}: no files to analyse", file=sys.stderr)
        return EXIT_ERROR
    out_dir = flags.get("out") or base.out
    work = [(str(p), p.name, base, {k: v for k, v in flags.items() if k != "out"}) for p in files]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_batch_one, work))
    else:
        results = [_batch_one(w) for w in work]
    index = {"tool_version": __version__, "files": [entry for entry, _ in results]}
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        for (entry, doc_json) in results:
            if doc_json is not None:
                with open(os.path.join(out_dir, entry["path"] + ".json"), "w",
                          encoding="utf-8", newline="\n") as fh:
                    fh.write(doc_json)
        with open(os.path.join(out_dir, "index.json"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps_canonical(index))
    sys.stdout.write(dumps_canonical(index))
    strict = flags.get("strict", base.strict)
    if strict and any(e.get("budget_exhausted") for e in index["files"]):
        return EXIT_BUDGET
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_common(p):
    a = p.add_argument
    a("--config", help="TOML config file (default: $CDFKIT_CONFIG)")
    a("--kind", choices=["auto", "function", "rewrite"])
    a("--domain", choices=["auto", "int", "real"])
    a("--basepoint", help="orbit start x0")
    a("--max-steps", type=int)
    a("--float-eps", type=float, help="relative tolerance for real-domain cycles")
    a("--depth-cap", type=int)
    a("--node-cap", type=int)
    a("--max-call-depth", type=int)
    a("--max-eval-steps", type=int)
    a("--magnitude-bound", type=float)
    a("--lyapunov-threshold", type=float)
    a("--n-transient", type=int)
    a("--n-sample", type=int)
    a("--fd-step", type=float)
    a("--probes", help='growth probes, e.g. "1..10" or "1,2,4,8"')
    a("--growth-gap", type=float)
    a("--sample", help='semantic sample: "0..5[:step]", "0.0..1.0/11" or "1,2,3"')
    a("--detail", action="store_true", default=None, help="record operator nodes in traces")
    a("--format", choices=["json", "dot", "text"])
    a("--dot", choices=["orbit", "deriv_tree", "call_tree", "expansion"])
    a("--tree", type=int, help="derivation tree index for --format dot")
    a("--strict", action="store_true", default=None)
    a("--no-timestamps", dest="timestamps", action="store_false", default=None)
    a("--out", "-o", help="output file (analyze) or directory (batch)")


def build_parser():
    parser = argparse.ArgumentParser(prog="cdfkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cdfkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    pa = sub.add_parser("analyze", help="analyse one function or rewrite-system file")
    pa.add_argument("path")
    _add_common(pa)
    pb = sub.add_parser("batch", help="analyse every file in a directory")
    pb.add_argument("path")
    pb.add_argument("--jobs", "-j", type=int, default=1)
    _add_common(pb)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {k: v for k, v in vars(args).items()
             if k in FIELD_TYPES and v is not None}
    try:
        flags = {k: coerce_setting(k, v) for k, v in flags.items()}
        base = RunConfig()
        config_path = args.config or os.environ.get(CONFIG_ENV)
        if config_path:
            base = RunConfig(**{**dataclasses.asdict(base), **load_config_file(config_path)})
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.command == "analyze":
        return run_analyze(args.path, base, flags)
    return run_batch(args.path, base, flags, jobs=max(1, args.jobs))


if __name__ == "__main__":
    raise SystemExit(main())
