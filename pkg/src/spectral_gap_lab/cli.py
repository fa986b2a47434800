"""Command-line front end: ``sgl gap``, ``sgl reduce`` and ``sgl verify``.

Exit codes: 0 when every check passes, 1 when any check fails, 2 on bad input.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, chains, octopus, structure
from .errors import InputError, VertexOutOfRange, ZeroNotSimple
from .graph import WeightedGraph, random_graph, read_graph, reduce_at, serialize_graph, write_graph
from .report import CheckResult, render_json, render_text, summarize
from .spectra import DEFAULT_TOL, Tolerances, spectral_gap

CHAIN_NAMES = {"rw": chains.RW, "ip": chains.IP, "ep": chains.EP, "cep": chains.CEP,
               "cycle": chains.CP, "cp": chains.CP, "matching": chains.MP, "mp": chains.MP}


@dataclass
class RunConfig:
    command: str
    graph: str | None = None
    random_n: int | None = None
    trials: int = 1
    density: float = 0.6
    seed: int = 0
    chain: str | None = None
    tol: Tolerances = DEFAULT_TOL
    fmt: str = "json"
    max_n: int | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {"command": self.command, "graph": self.graph, "random_n": self.random_n,
             "trials": self.trials, "density": self.density, "seed": self.seed,
             "chain": self.chain, "tolerances": self.tol.as_dict(), "format": self.fmt,
             "max_n": self.max_n}
        d.update(self.extra)
        return d


def parse_chain(text: str) -> tuple[str, tuple[int, ...]]:
    """``rw``, ``ip``, ``ep:2``, ``cep:2,1,1``, ``cycle``, ``matching``."""
    name, _, rest = text.strip().lower().partition(":")
    if name not in CHAIN_NAMES:
        raise InputError(f"unknown chain {text!r}; expected one of rw, ip, ep:k, cep:n1,..,nr, cycle, matching")
    try:
        params = tuple(int(t) for t in rest.split(",")) if rest else ()
    except ValueError:
        raise InputError(f"bad chain parameters in {text!r}") from None
    kind = CHAIN_NAMES[name]
    if kind in (chains.EP, chains.CEP) and not params:
        raise InputError(f"chain {name} needs parameters, e.g. {name}:2")
    return kind, params


def _trial_seeds(seed: int, trials: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(c.generate_state(1)[0]) for c in children]


def _graphs(cfg: RunConfig) -> list[tuple[str, WeightedGraph]]:
    if cfg.graph is not None:
        return [("", read_graph(cfg.graph))]
    seeds = _trial_seeds(cfg.seed, cfg.trials)
    return [(f"trial[{i}].", random_graph(cfg.random_n, cfg.density, s)) for i, s in enumerate(seeds)]


def _prefixed(prefix: str, checks) -> list[CheckResult]:
    if not prefix:
        return list(checks)
    return [CheckResult(prefix + c.name, c.status, c.metric, c.tolerance, c.details, c.claim) for c in checks]


# -- commands -------------------------------------------------------------------


def cmd_gap(cfg: RunConfig) -> tuple[list[CheckResult], dict]:
    g = read_graph(cfg.graph)
    kind, params = parse_chain(cfg.chain)
    gen = chains.build(g, kind, params, cfg.max_n)
    spec = gen.spectrum(cfg.tol)
    result = {"kind": kind, "params": list(params), "states": gen.dim}
    try:
        lam = spectral_gap(gen, cfg.tol)
        result["gap"] = lam
        checks = [CheckResult.measure("gap.zero_simple", 0.0, 0.0, f"gap={lam!r}", "chain is irreducible")]
    except ZeroNotSimple as exc:
        result["gap"] = None
        checks = [CheckResult("gap.zero_simple", "fail", math.inf, 0.0, str(exc), "chain is irreducible")]
    if cfg.extra.get("spectrum"):
        result["spectrum"] = spec.as_dict()
    return checks, result


def cmd_reduce(cfg: RunConfig) -> tuple[list[CheckResult], dict]:
    g = read_graph(cfg.graph)
    vertex = cfg.extra["vertex"]
    if not 1 <= vertex <= g.n:
        raise VertexOutOfRange(f"vertex {vertex} not in 1..{g.n}")
    red = reduce_at(g, vertex - 1)
    base = red.base
    lam = spectral_gap(chains.build_rw(g), cfg.tol)
    lam_red = spectral_gap(chains.build_rw(base), cfg.tol)
    scale = max(1.0, lam)
    keep = red.index_map
    grow = float(np.max(np.maximum(0.0, g.weights[np.ix_(keep, keep)] - base.weights)))
    checks = [
        CheckResult.measure("reduce.weights_nondecreasing", grow, 0.0, "", "reduced weights dominate originals"),
        CheckResult.measure("reduce.gap_monotone", max(0.0, lam - lam_red), 1e-9 * scale,
                            f"gap(G)={lam!r} gap(G_x)={lam_red!r}", "reduction does not lower the RW gap"),
    ]
    result = {"vertex": vertex, "gap": lam, "reduced_gap": lam_red, "edges": serialize_graph(base)}
    if cfg.extra.get("out"):
        write_graph(base, cfg.extra["out"])
        result["out"] = cfg.extra["out"]
    return checks, result


def _verify_aldous(cfg: RunConfig) -> list[CheckResult]:
    out = []
    for prefix, g in _graphs(cfg):
        out += _prefixed(prefix, structure.verify_aldous(g, cfg.tol, cfg.max_n))
    return out


def _octopus_checks(r: octopus.RateSystem, tol: Tolerances, max_n) -> list[CheckResult]:
    mats = octopus.build_C(r, max_n)
    lo = octopus.c_min_eig(mats, tol)
    checks = [CheckResult.measure("C.psd", max(0.0, -lo), -tol.psd_floor(float(np.max(np.abs(mats.C)))),
                                  f"min_eig={lo!r}", "octopus matrix is positive semidefinite")]
    if r.n >= 4:
        scale = max(1.0, float(np.max(np.abs(mats.Cprime))))
        resid = float(np.max(np.abs(mats.Cprime - octopus.corr_decomposition_sum(r, max_n))))
        checks.append(CheckResult.measure("Cprime.decomposition", resid, 1e-8 * scale, "",
                                          "correction matrix expands over A^J"))
    if r.n >= 5:
        good, worst = octopus.verify_coefficient_bound(r)
        checks.append(CheckResult.measure("coefficients.bound", 0.0 if good else math.inf, 0.0,
                                          f"tightest J={worst}", "B^K coefficients dominate"))
    return checks


def _verify_octopus(cfg: RunConfig) -> list[CheckResult]:
    out = []
    if cfg.graph is not None:
        g = read_graph(cfg.graph)
        for x in range(g.n):
            out += _prefixed(f"x[{x + 1}].", _octopus_checks(octopus.RateSystem.from_graph(g, x), cfg.tol, cfg.max_n))
        return out
    n = cfg.extra.get("n") or 5
    rng = np.random.default_rng(cfg.seed)
    for i in range(cfg.trials):
        out += _prefixed(f"trial[{i}].", _octopus_checks(octopus.random_rates(rng, n), cfg.tol, cfg.max_n))
    return out


def _verify_matrices(cfg: RunConfig) -> list[CheckResult]:
    n = cfg.extra.get("n") or 5
    if n not in (4, 5):
        raise InputError("verify matrices needs --n 4 or --n 5")
    return octopus.verify_matrix_facts(n, cfg.tol)


def _structure_checks(g: WeightedGraph, tol: Tolerances, max_n) -> list[CheckResult]:
    checks = []
    res = structure.subset_sum_check(g, tol, max_n)
    note = "degenerate RW spectrum, count not enforced" if res.degenerate else f"expected {res.expected}"
    checks.append(CheckResult.measure("subset_sums.included", 0.0 if res.ok else len(res.unmatched) or 1, 0.0,
                                      f"matched {res.count}; {note}", "RW subset sums lie in the IP spectrum"))
    total = 2 * g.total_weight()
    ip = chains.build_ip(g, max_n).spectrum(tol)
    near = min(abs(v - total) for v in ip.values)
    checks.append(CheckResult.measure("alternating.eigenvalue", near, tol.match_tol(ip.radius),
                                      f"2 sum c={total!r}", "sign function eigenvalue"))
    checks.append(CheckResult.measure("sign.eigenfunction", structure.sign_eigen_residual(g, max_n),
                                      1e-10 * max(1.0, total), "", "sign function is an eigenfunction"))
    checks.append(CheckResult.measure("pairing.conjugate", structure.conjugate_pairing_defect(g, tol, max_n),
                                      tol.match_tol(total), "", "spectrum pairs to 2 sum c"))
    return checks


def _dimension_checks(n: int) -> list[CheckResult]:
    parts = structure.partitions(n)
    sq = sum(structure.hook_dimension(p) ** 2 for p in parts)
    hooks = max(abs(structure.hook_dimension(structure.Partition.hook(n, k)) - math.comb(n - 1, k))
                for k in range(n))
    return [CheckResult.measure("dims.sum_squares", abs(sq - math.factorial(n)), 0, f"{len(parts)} partitions",
                                "squared dimensions sum to n!"),
            CheckResult.measure("dims.hooks", hooks, 0, "", "L-shaped dimensions are binomials")]


def _verify_structure(cfg: RunConfig) -> list[CheckResult]:
    out = []
    graphs = _graphs(cfg)
    for prefix, g in graphs:
        out += _prefixed(prefix, _structure_checks(g, cfg.tol, cfg.max_n))
    out += _dimension_checks(graphs[0][1].n)
    return out


VERIFIERS = {"aldous": _verify_aldous, "octopus": _verify_octopus,
             "matrices": _verify_matrices, "structure": _verify_structure}


# -- argument handling ----------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--max-n", type=int, default=None, help="raise the size ceiling (at most 7)")
    p.add_argument("--eigen-rel", type=float, default=DEFAULT_TOL.eigen_rel)
    p.add_argument("--cluster-rel", type=float, default=DEFAULT_TOL.cluster_rel)
    p.add_argument("--psd-rel", type=float, default=DEFAULT_TOL.psd_rel)
    p.add_argument("--match-rel", type=float, default=DEFAULT_TOL.match_rel)
    p.add_argument("--no-timing", action="store_true", help="report wall_time_ms as 0 for reproducible output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgl", description="Spectral gap verifier for particle processes on weighted graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gap", help="spectral gap of one process on a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--chain", required=True, help="rw | ip | ep:k | cep:n1,...,nr | cycle | matching")
    p.add_argument("--spectrum", action="store_true", help="include the clustered spectrum")
    _add_common(p)

    p = sub.add_parser("reduce", help="network reduction at a vertex")
    p.add_argument("--graph", required=True)
    p.add_argument("--vertex", type=int, required=True, help="1-based vertex id")
    p.add_argument("--out", default=None, help="write the reduced edge list here")
    _add_common(p)

    p = sub.add_parser("verify", help="run a family of checks")
    p.add_argument("target", choices=sorted(VERIFIERS))
    src = p.add_mutually_exclusive_group()
    src.add_argument("--graph")
    src.add_argument("--random", type=int, metavar="N", help="sweep random graphs on N vertices")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--density", type=float, default=0.6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=None, help="size for matrices / random octopus rates")
    _add_common(p)
    return parser


def config_from_args(args) -> RunConfig:
    tol = Tolerances(args.eigen_rel, args.cluster_rel, args.psd_rel, args.match_rel)
    cfg = RunConfig(command=args.command, graph=getattr(args, "graph", None), tol=tol,
                    fmt=args.format, max_n=args.max_n)
    if args.command == "gap":
        cfg.chain = args.chain
        cfg.extra["spectrum"] = args.spectrum
    elif args.command == "reduce":
        cfg.extra["vertex"] = args.vertex
        cfg.extra["out"] = args.out
    else:
        cfg.command = f"verify {args.target}"
        cfg.random_n = args.random
        cfg.trials = args.trials
        cfg.density = args.density
        cfg.seed = args.seed
        cfg.extra["n"] = args.n
        if args.trials < 1:
            raise InputError("--trials must be positive")
        needs_graph = args.target in ("aldous", "structure")
        if needs_graph and args.graph is None and args.random is None:
            raise InputError(f"verify {args.target} needs --graph or --random N")
        if args.random is not None and args.random < 2:
            raise InputError("--random needs N >= 2")
    return cfg


def run(cfg: RunConfig) -> dict:
    start = time.perf_counter()
    result = None
    if cfg.command == "gap":
        checks, result = cmd_gap(cfg)
    elif cfg.command == "reduce":
        checks, result = cmd_reduce(cfg)
    else:
        checks = VERIFIERS[cfg.command.split()[1]](cfg)
    elapsed = (time.perf_counter() - start) * 1000.0
    doc = {"tool_version": __version__, "command": cfg.command, "config": cfg.as_dict(),
           "checks": [c.as_dict() for c in checks], "summary": summarize(checks),
           "wall_time_ms": 0 if cfg.extra.get("no_timing") else round(elapsed, 3)}
    if result is not None:
        doc["result"] = result
    return doc


def _text(doc: dict) -> str:
    checks = [CheckResult(**c) if isinstance(c["metric"], float) else
              CheckResult(**{**c, "metric": float(c["metric"])}) for c in doc["checks"]]
    lines = [f"sgl {doc['tool_version']}  {doc['command']}"]
    res = doc.get("result") or {}
    if "gap" in res and "reduced_gap" not in res:
        lines.append(f"gap: {res['gap']!r}  ({res['kind']}, {res['states']} states)")
        for cl in (res.get("spectrum") or {}).get("clusters", []):
            lines.append(f"  {cl['value']:.12g}  x{cl['multiplicity']}")
    if "reduced_gap" in res:
        lines.append(f"gap(G) = {res['gap']!r}   gap(G_x) = {res['reduced_gap']!r}")
        lines.append("reduced edges:")
        lines += ["  " + ln for ln in res["edges"].splitlines()]
    return "\n".join(lines) + "\n" + render_text(checks)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        cfg.extra["no_timing"] = args.no_timing
        doc = run(cfg)
    except (InputError, OSError, ValueError) as exc:
        print(f"sgl: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(render_json(doc) if cfg.fmt == "json" else _text(doc))
    return 1 if doc["summary"]["failed"] else 0


if __name__ == "__main__":
    sys.exit(main())
