"""Command-line entry point.

Every subcommand resolves its settings as defaults < config file < flags,
runs with an explicit seed, and writes CSV or JSON that embeds the resolved
settings so the run can be repeated with ``--config <artifact>``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import sys
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import __version__
from .classes import class_table, distance_matrix, enumerate_classes
from .exceptions import SbmCouplingError
from .graph import format_edge_list, read_edge_list
from .inference import detection_accuracy, detection_sweep, efron_stein_check
from .models import ModelSpec, exact_distribution, sample_kernel_graph, sample_sbm
from .montecarlo import default_workers
from .stats import BISECTION_EXACT_CAP, _check_k, cycle_report, min_bisection
from .transport import lb_cycle_gap, lb_formula, solve_dual, solve_primal

SEED_ENV = "SBMCOUPLING_SEED"

COMMANDS = ("sample", "stats", "ot-exact", "lb-sweep", "detect", "detect-sweep",
            "bisect", "variance-check", "enumerate")

_MODEL = {"n": 1000, "c": 2.0, "delta": 0.0, "flavor": "uniform"}
DEFAULTS = {
    "sample": {**_MODEL, "sampler": "kernel", "format": "edgelist"},
    "stats": {"graph": None, "k": [3], "bisection": "auto", "format": "csv"},
    "ot-exact": {"n": 4, "c": 1.0, "delta": 0.5, "flavor": "planted-assortative",
                 "allow_n7": False, "format": "json"},
    "lb-sweep": {"n": 10000, "c": 2.0, "deltas": [0.0, 1.0, 2.0], "k": [3],
                 "flavor": "planted-assortative", "samples": 1000, "format": "csv"},
    "detect": {"n": 10000, "c": 4.0, "delta": 3.0, "flavor": "planted-assortative",
               "witness": "packing:3", "trials": 200, "means": "pilot", "pilot": 200,
               "adversary_k": None, "format": "json"},
    "detect-sweep": {"ns": [10000], "c": 4.0, "deltas": [0.0, 1.0, 2.0, 3.0],
                     "flavor": "planted-assortative", "witness": "packing:3", "trials": 200,
                     "means": "pilot", "pilot": 200, "format": "csv"},
    "bisect": {**_MODEL, "graph": None, "mode": "auto", "restarts": 8, "format": "json"},
    "variance-check": {"ns": [250, 500, 1000], "c": 2.0, "delta": 1.0,
                       "flavor": "planted-assortative", "witness": "packing:3",
                       "samples": 1000, "format": "csv"},
    "enumerate": {"n": 4, "c": None, "delta": 0.0, "flavor": "uniform", "format": "csv"},
}
# keys that never change results and stay out of the embedded config
_NOT_EMBEDDED = {"output", "config", "workers"}


class ConfigError(SbmCouplingError, ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    settings: dict
    seed: int
    workers: int = 1
    output: str | None = None
    extra: dict = field(default_factory=dict)

    def get(self, key):
        return self.settings.get(key)

    def embedded(self) -> dict:
        out = {"command": self.command, "seed": self.seed}
        out.update({k: v for k, v in self.settings.items() if k not in _NOT_EMBEDDED})
        return out

    def model(self, delta=None, n=None) -> ModelSpec:
        return ModelSpec(int(n if n is not None else self.get("n")), float(self.get("c")),
                         float(delta if delta is not None else self.get("delta")),
                         self.get("flavor"))


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return json.dumps(str(v))


def config_lines(cfg: dict) -> list[str]:
    return [f"{k} = {_toml_value(v)}" for k, v in cfg.items() if v is not None]


def _parse_toml(text: str) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad config file: {exc}") from None


def load_config_file(path: str) -> dict:
    """Settings from a TOML-style file or from a previous CSV/JSON artifact."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        obj = json.loads(text)
        if "config" not in obj:
            raise ConfigError(f"{path}: JSON artifact has no embedded config")
        return dict(obj["config"])
    try:
        return _parse_toml(text)
    except ConfigError:
        if not stripped.startswith("#"):
            raise
    # a CSV artifact: the settings are its leading comment lines
    lines = [ln[1:].strip() for ln in text.splitlines() if ln.startswith("#")]
    return _parse_toml("\n".join(lines))


def _seed_default() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def resolve(command: str | None, cli: dict) -> RunConfig:
    """Merge defaults, the optional config file and command-line values."""
    file_cfg = load_config_file(cli["config"]) if cli.get("config") else {}
    file_cmd = file_cfg.pop("command", None)
    command = command or file_cmd
    if command is None:
        raise ConfigError("no subcommand given and the config file names none")
    if file_cmd is not None and file_cmd != command:
        raise ConfigError(f"config file is for '{file_cmd}', not '{command}'")
    if command not in DEFAULTS:
        raise ConfigError(f"unknown command {command!r}")
    settings = dict(DEFAULTS[command])
    seed = _seed_default()
    unknown = set(file_cfg) - set(settings) - {"seed", "workers"}
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
    for src in (file_cfg, {k: v for k, v in cli.items() if v is not None}):
        for k, v in src.items():
            if k == "seed":
                seed = int(v)
            elif k in settings:
                settings[k] = v
    workers = cli.get("workers") or file_cfg.get("workers") or default_workers()
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    cfg = RunConfig(command, settings, seed, int(workers), cli.get("output"))
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    s = cfg.settings
    for key in ("trials", "samples", "pilot", "restarts"):
        if key in s and s[key] is not None and int(s[key]) < 1:
            raise ConfigError(f"{key} must be a positive integer")
    if "k" in s:
        s["k"] = [int(x) for x in (s["k"] if isinstance(s["k"], list) else [s["k"]])]
        if any(k < 3 for k in s["k"]):
            raise ConfigError("cycle lengths must be at least 3")
    for key in ("deltas", "ns"):
        if key in s:
            vals = s[key] if isinstance(s[key], list) else [s[key]]
            if not vals:
                raise ConfigError(f"{key} must be nonempty")
            s[key] = [int(v) for v in vals] if key == "ns" else [float(v) for v in vals]
    c = s.get("c")
    if c is not None:
        deltas = s.get("deltas") or ([s["delta"]] if "delta" in s else [])
        for d in deltas:
            if not 0 <= float(d) <= float(c):
                raise ConfigError(f"need 0 <= delta <= c (delta={d}, c={c})")
    if cfg.command == "ot-exact" and int(s["n"]) > (7 if s.get("allow_n7") else 6):
        raise ConfigError("ot-exact supports n <= 6 (n = 7 with --allow-n7)")
    if cfg.command in ("stats",) and not s.get("graph"):
        raise ConfigError("stats needs --graph <edge-list file>")


# ----------------------------------------------------------------- output


def emit_rows(cfg: RunConfig, header: list[str], rows: list[list]) -> str:
    if cfg.get("format") == "json":
        return emit_json(cfg, {"rows": [dict(zip(header, r)) for r in rows]})
    buf = io.StringIO()
    for line in config_lines(cfg.embedded()):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_csv_cell(x) for x in r])
    return buf.getvalue()


def _csv_cell(x):
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    if x is None:
        return ""
    return x


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialise {type(x).__name__}")


def emit_json(cfg: RunConfig, payload: dict) -> str:
    if cfg.get("format") == "csv" and "rows" not in payload:
        header = list(payload)
        return emit_rows(cfg.__class__(**{**cfg.__dict__, "settings": {**cfg.settings, "format": "csv"}}),
                         header, [[payload[h] for h in header]])
    body = dict(payload)
    body["config"] = cfg.embedded()
    return json.dumps(body, indent=2, default=_jsonable) + "\n"


# --------------------------------------------------------------- commands


def _cmd_sample(cfg: RunConfig) -> str:
    spec = cfg.model()
    if cfg.get("sampler") == "sbm":
        sample = sample_sbm(spec, cfg.seed)
    else:
        sample = sample_kernel_graph(spec, cfg.seed)
    if cfg.get("format") == "edgelist":
        return format_edge_list(sample.graph)
    return emit_json(cfg, {"n": sample.graph.n, "edges": sample.graph.edge_array,
                           "blocks": sample.blocks})


def _load_graph(cfg: RunConfig):
    path = cfg.get("graph")
    if path == "bundled:triangle":
        return read_edge_list(resources.files("sbmcoupling").joinpath("data/triangle.txt"))
    return read_edge_list(path)


def _bisection(g, mode, seed, restarts=8):
    if mode == "auto":
        mode = "exact" if g.n <= BISECTION_EXACT_CAP else "heuristic"
    return min_bisection(g, mode=mode, seed=seed, restarts=restarts)


def _cmd_stats(cfg: RunConfig) -> str:
    g = _load_graph(cfg)
    bis = _bisection(g, cfg.get("bisection"), cfg.seed)
    rows = []
    for k in cfg.get("k"):
        r = cycle_report(g, k, seed=cfg.seed)
        rows.append([k, r.x_k, r.y_k, r.y_k_exactness == "exact", r.z_k, bis.value,
                     bis.exactness == "exact"])
    header = ["k", "x_k", "y_k", "y_exact", "z_k", "bisection", "bisection_exact"]
    return emit_rows(cfg, header, rows)


def _cmd_ot_exact(cfg: RunConfig) -> str:
    spec = cfg.model()
    if not spec.planted:
        raise ConfigError("ot-exact compares a planted flavor against the uniform model")
    allow7 = bool(cfg.get("allow_n7"))
    classes = enumerate_classes(spec.n)
    d = distance_matrix(classes)
    p = exact_distribution(spec, classes, allow_n7=allow7)
    q = exact_distribution(spec.uniform_twin(), classes, allow_n7=allow7)
    primal = solve_primal(p, q, d)
    dual = solve_dual(p, q, d)
    return emit_json(cfg, {
        "primal_cost": primal.cost,
        "dual_objective": dual.objective,
        "gap": abs(primal.cost - dual.objective),
        "classes": len(classes),
    })


def _cmd_lb_sweep(cfg: RunConfig) -> str:
    from .montecarlo import spawn_seeds

    rows = []
    grid = [(d, k) for d in cfg.get("deltas") for k in cfg.get("k")]
    for (delta, k), ss in zip(grid, spawn_seeds(cfg.seed, len(grid))):
        _check_k(k)
        sp = cfg.model(delta=delta)
        est = lb_cycle_gap(sp, sp.uniform_twin(), k, int(cfg.get("samples")), ss, cfg.workers)
        rows.append([delta, k, est.mean, est.se, lb_formula(k, sp.c, delta)])
    return emit_rows(cfg, ["delta", "k", "estimate", "se", "lb_formula"], rows)


def _means_setting(cfg):
    return cfg.get("means") or "pilot"


def _cmd_detect(cfg: RunConfig) -> str:
    sp = cfg.model()
    adv = cfg.get("adversary_k")
    res = detection_accuracy(sp, sp.uniform_twin(), cfg.get("witness"), int(cfg.get("trials")),
                             cfg.seed, means=_means_setting(cfg), pilot=int(cfg.get("pilot")),
                             adversary_k=int(adv) if adv is not None else None,
                             workers=cfg.workers)
    return emit_json(cfg, res.to_dict())


def _cmd_detect_sweep(cfg: RunConfig) -> str:
    rows = detection_sweep(float(cfg.get("c")), cfg.get("deltas"), cfg.get("ns"),
                           cfg.get("witness"), int(cfg.get("trials")), cfg.seed,
                           flavor=cfg.get("flavor"), means=_means_setting(cfg),
                           pilot=int(cfg.get("pilot")), workers=cfg.workers)
    return emit_rows(cfg, ["delta", "n", "accuracy", "se"],
                     [[r.delta, r.n, r.accuracy, r.se] for r in rows])


def _cmd_bisect(cfg: RunConfig) -> str:
    if cfg.get("graph"):
        g = _load_graph(cfg)
    else:
        g = sample_kernel_graph(cfg.model(), cfg.seed).graph
    rep = _bisection(g, cfg.get("mode"), cfg.seed, int(cfg.get("restarts")))
    return emit_json(cfg, {"n": g.n, "edges": g.num_edges, "value": rep.value,
                           "exactness": rep.exactness, "partition": rep.partition})


def _cmd_variance_check(cfg: RunConfig) -> str:
    sp = ModelSpec(int(cfg.get("ns")[0]), float(cfg.get("c")), float(cfg.get("delta")),
                   cfg.get("flavor"))
    rep = efron_stein_check(cfg.get("witness"), sp, cfg.get("ns"), int(cfg.get("samples")),
                            cfg.seed, workers=cfg.workers)
    rows = [[n, v, b, n in rep.flagged]
            for n, v, b in zip(rep.n_grid, rep.empirical_variance, rep.bound)]
    return emit_rows(cfg, ["n", "variance", "bound", "flagged"], rows)


def _cmd_enumerate(cfg: RunConfig) -> str:
    n = int(cfg.get("n"))
    table = class_table(n)
    if cfg.get("c") is None:
        rows = [[c.index, c.class_size, c.representative.num_edges,
                 " ".join(f"{i}-{j}" for i, j in c.representative.edge_array.tolist())]
                for c in table.classes]
        return emit_rows(cfg, ["class_index", "class_size", "edges", "representative"], rows)
    dist = exact_distribution(cfg.model())
    rows = [[c.index, c.class_size, float(p)] for c, p in zip(dist.classes, dist.probabilities)]
    return emit_rows(cfg, ["class_index", "class_size", "probability"], rows)


HANDLERS = {
    "sample": _cmd_sample,
    "stats": _cmd_stats,
    "ot-exact": _cmd_ot_exact,
    "lb-sweep": _cmd_lb_sweep,
    "detect": _cmd_detect,
    "detect-sweep": _cmd_detect_sweep,
    "bisect": _cmd_bisect,
    "variance-check": _cmd_variance_check,
    "enumerate": _cmd_enumerate,
}


def run(cfg: RunConfig) -> str:
    """Execute a resolved config and return the artifact text."""
    return HANDLERS[cfg.command](cfg)


# ---------------------------------------------------------------- parsing


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in str(text).split(",") if x.strip()]


def _add_common(p):
    p.add_argument("--config", help="TOML-style settings file or a previous artifact")
    p.add_argument("--seed", type=int, help=f"64-bit seed (default ${SEED_ENV} or 0)")
    p.add_argument("--workers", type=int, help="worker processes (default: all cores)")
    p.add_argument("--output", "-o", help="write the artifact here instead of stdout")
    p.add_argument("--format", choices=["csv", "json", "edgelist"])


def _add_model(p, delta=True):
    p.add_argument("--n", type=int)
    p.add_argument("--c", type=float)
    if delta:
        p.add_argument("--delta", type=float)
    p.add_argument("--flavor", choices=["uniform", "planted-assortative", "planted-disassortative"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbmcoupling",
        description="Couplings of sparse planted-bisection and uniform random graphs.",
    )
    parser.add_argument("--version", action="version", version=_version_string())
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("run", help="run whatever command a config file names")
    _add_common(p)

    p = sub.add_parser("sample", help="draw one graph and print it as an edge list")
    _add_common(p)
    _add_model(p)
    p.add_argument("--sampler", choices=["kernel", "sbm"])

    p = sub.add_parser("stats", help="cycle and bisection statistics of an edge-list file")
    _add_common(p)
    p.add_argument("--graph", help="edge-list file ('bundled:triangle' for the demo graph)")
    p.add_argument("--k", type=_ints, help="comma-separated cycle lengths")
    p.add_argument("--bisection", choices=["auto", "exact", "heuristic"])

    p = sub.add_parser("ot-exact", help="exact optimal transport cost on tiny n")
    _add_common(p)
    _add_model(p)
    p.add_argument("--allow-n7", dest="allow_n7", action="store_true", default=None)

    p = sub.add_parser("lb-sweep", help="packing-witness lower bounds over a delta grid")
    _add_common(p)
    _add_model(p, delta=False)
    p.add_argument("--deltas", type=_floats)
    p.add_argument("--k", type=_ints)
    p.add_argument("--samples", type=int)

    for name, helptext in (("detect", "threshold detector accuracy"),
                           ("detect-sweep", "detector accuracy over delta and n grids")):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        if name == "detect":
            _add_model(p)
            p.add_argument("--adversary-k", dest="adversary_k", type=int,
                           help="remove cycles up to this length before detecting")
        else:
            p.add_argument("--c", type=float)
            p.add_argument("--deltas", type=_floats)
            p.add_argument("--ns", type=_ints)
            p.add_argument("--flavor", choices=["planted-assortative", "planted-disassortative"])
        p.add_argument("--witness", help="edges | cycles:k | packing:k | bisection")
        p.add_argument("--trials", type=int)
        p.add_argument("--means", choices=["pilot", "closed-form"])
        p.add_argument("--pilot", type=int, help="pilot samples per model for the means")

    p = sub.add_parser("bisect", help="minimum bisection of a file or a fresh sample")
    _add_common(p)
    _add_model(p)
    p.add_argument("--graph")
    p.add_argument("--mode", choices=["auto", "exact", "heuristic"])
    p.add_argument("--restarts", type=int)

    p = sub.add_parser("variance-check", help="empirical variance against d*n")
    _add_common(p)
    p.add_argument("--c", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--flavor", choices=["uniform", "planted-assortative", "planted-disassortative"])
    p.add_argument("--ns", type=_ints)
    p.add_argument("--witness")
    p.add_argument("--samples", type=int)

    p = sub.add_parser("enumerate", help="isomorphism classes, optionally with probabilities")
    _add_common(p)
    _add_model(p)
    return parser


def _version_string() -> str:
    import numba
    import scipy

    return (f"sbmcoupling {__version__} (python {platform.python_version()}, "
            f"numpy {np.__version__}, scipy {scipy.__version__}, numba {numba.__version__})")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    cli = {k: v for k, v in vars(args).items() if k != "command"}
    command = None if args.command == "run" else args.command
    try:
        cfg = resolve(command, cli)
        text = run(cfg)
    except (SbmCouplingError, ValueError, OSError) as exc:
        print(f"sbmcoupling: error: {exc}", file=sys.stderr)
        return 1
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        if cfg.command == "sample" and cfg.get("format") == "edgelist":
            # the edge-list format has no room for metadata; keep it alongside
            with open(cfg.output + ".config.toml", "w", encoding="utf-8", newline="\n") as fh:
                fh.write("\n".join(config_lines(cfg.embedded())) + "\n")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
