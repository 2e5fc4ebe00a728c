"""Command-line entry point: ``adiabatic-ss <command> [options]``.

Exit codes: 0 all requested checks pass, 1 a check failed (the failing
invariant is named on stderr), 2 malformed input.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import adiabatic, io, models, spectral, towers
from .complex import betti_numbers, euler_characteristic, validate
from .errors import InternalCheckFailed, InvalidInput, PreconditionViolated
from .linalg import Tolerances

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2
COMMANDS = ("check", "pages", "sweep", "tower", "forman", "compare-nested", "theorem-a", "liouville", "model")


@dataclass
class RunConfig:
    command: str
    input: Optional[str] = None
    model: Optional[str] = None
    tol: Tolerances = field(default_factory=Tolerances)
    grid: tuple = (1e-1, 1e-4, 12)
    degrees: Optional[list] = None
    branches: Optional[int] = None
    k_max: Optional[int] = None
    out: Optional[str] = None
    csv: Optional[str] = None
    check: bool = False
    kind: str = "hodge"
    options: dict = field(default_factory=dict)
    timestamp: Optional[str] = None

    def describe(self) -> dict:
        return {
            "command": self.command, "input": self.input, "model": self.model,
            "tol": self.tol.__dict__, "grid": list(self.grid), "degrees": self.degrees,
            "branches": self.branches, "k_max": self.k_max, "kind": self.kind, "options": self.options,
        }


@dataclass
class ReportBundle:
    document: dict
    csv: Optional[str] = None
    failures: list = field(default_factory=list)


# -- inline model specs --------------------------------------------------------------


def build_model(kind: str, opts: dict):
    if kind == "kronecker":
        return models.kronecker_t2(alpha=opts.get("alpha", 0.0), N=int(opts.get("N", 4)))
    if kind == "product":
        N = opts.get("N")
        if N is not None:
            return models.product_bundle(N=int(N))
        return models.product_bundle(models.ProductSpec(int(opts.get("N_leaf", 4)), int(opts.get("N_base", 4))))
    if kind == "random":
        spec = models.RandomSpec(
            seed=int(opts.get("seed", 0)),
            q=None if opts.get("q") is None else int(opts["q"]),
            p=None if opts.get("p") is None else int(opts["p"]),
            max_dim=int(opts.get("dims", 8)),
            eps=float(opts.get("eps", 0.3)),
            gram_noise=float(opts.get("gram_noise", 0.0)),
        )
        return models.random_complex(spec)
    raise InvalidInput(f"unknown model {kind!r}")


def parse_model_spec(text: str):
    """'kronecker:alpha=golden,N=4' -> (kind, options)."""
    kind, _, rest = text.partition(":")
    opts = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise InvalidInput(f"model option {item!r} is not key=value")
        opts[key.strip()] = value.strip()
    return kind.strip(), opts


def _load_input(cfg: RunConfig):
    if cfg.model and cfg.input:
        raise InvalidInput("give either --model or --input, not both")
    if cfg.model:
        return build_model(*parse_model_spec(cfg.model))
    return io.load_complex(cfg.input or "-")


def _grid(cfg: RunConfig):
    h_max, h_min, n = cfg.grid
    return adiabatic.default_grid(h_max, h_min, int(n))


# -- commands ---------------------------------------------------------------------


def _cmd_check(cfg, C):
    rep = validate(C, cfg.tol)
    failures = sorted({name for name, _, _ in rep.failures()})
    result = rep.to_dict()
    result["betti"] = betti_numbers(C, cfg.tol)
    result["euler_characteristic"] = euler_characteristic(C)
    result["euler_matches_betti"] = sum((-1) ** r * b for r, b in enumerate(result["betti"])) == euler_characteristic(C)
    if not result["euler_matches_betti"]:
        failures.append("euler_characteristic")
    return result, failures


def page_invariants(C, all_pages, tol) -> list:
    """Names of spectral-sequence invariants that fail on ``all_pages``."""
    bad = []
    finite = sorted(k for k in all_pages if k != spectral.INF)
    for k in finite:
        pp = spectral.projected_page(C, k, tol)
        if not np.array_equal(pp.dims_table(C), all_pages[k].dims_table()):
            bad.append(f"projected_page_dims_k{k}")
        if k + 1 in all_pages and np.any(all_pages[k + 1].dims_table() > all_pages[k].dims_table()):
            bad.append(f"pages_shrink_k{k}")
        P = all_pages[k]
        for (u, v), M in P.dk.items():
            nxt = P.dk.get((u + k, v - k + 1))
            if nxt is not None and M.size and nxt.size:
                if np.linalg.norm(nxt @ M, 2) > tol.tol_eq * max(1.0, P.ref ** 2):
                    bad.append(f"dk_squared_k{k}")
                    break
    dec = spectral.decompose(C, tol)
    for k in finite + [spectral.INF]:
        for u, v in C.bidegrees():
            if dec.Ek_dim(k, u, v) != all_pages[k].dim(u, v):
                bad.append(f"decomposition_dims_k{spectral._page_key(k)}")
                break
    if all_pages[spectral.INF].degree_dims() != betti_numbers(C, tol):
        bad.append("e_infinity_equals_betti")
    stable = [k for k in finite if k >= C.q + 1]
    for k in stable:
        if not np.array_equal(all_pages[k].dims_table(), all_pages[spectral.INF].dims_table()):
            bad.append(f"stabilization_k{k}")
    mc = spectral.m_counts(C, all_pages, tol, dec)
    if any(x != 0 for row in mc.corollary_residuals().values() for x in row):
        bad.append("corollary_m")
    return sorted(set(bad))


def _cmd_pages(cfg, C):
    all_pages = spectral.pages(C, cfg.k_max, cfg.tol)
    result = {
        "pages": {spectral._page_key(k): P.to_dict() for k, P in all_pages.items()},
        "betti": betti_numbers(C, cfg.tol),
    }
    failures = []
    if cfg.check:
        failures = page_invariants(C, all_pages, cfg.tol)
        result["checked"] = True
    return result, failures


def _cmd_sweep(cfg, C):
    sw = adiabatic.sweep(C, _grid(cfg), cfg.degrees, cfg.branches)
    k_max = cfg.k_max or C.q + 2
    result = {
        "h_grid": sw.h_grid.tolist(),
        "summary": sw.summary(k_max),
        "slope_tol": sw.slope_tol,
        "zero_tol": sw.zero_tol,
    }
    all_pages = spectral.pages(C, k_max, cfg.tol)
    h1 = adiabatic.leafwise_harmonic_dims(C, cfg.tol)
    for r in sw.degrees:
        result["summary"][str(r)]["dims"] = {
            str(k): (h1[r] if k == 1 else all_pages[k].degree_dims()[r]) for k in range(1, k_max + 1)
        }
    return result, [], io.branches_csv(sw)


def _cmd_theorem_a(cfg, C):
    sw = adiabatic.sweep(C, _grid(cfg), cfg.degrees, cfg.branches)
    rep = adiabatic.theorem_a_report(C, sw, k_max=cfg.k_max, tol=cfg.tol)
    failures = [f"theorem_a_count_r{row['r']}_k{row['k']}" for row in rep.rows if not row["match"]]
    return rep.to_dict(), failures, io.branches_csv(sw)


def _cmd_tower(cfg, C):
    failures = []
    if cfg.kind == "hodge":
        T = towers.hodge_tower(C, cfg.k_max, cfg.tol)
        proj = towers.hodge_projectors(C, cfg.tol)
        result = T.to_dict()
        result["projector_sum_residual"] = proj.sum_residual()
        result["projector_cross_residual"] = proj.cross_residual()
        if proj.sum_residual() > cfg.tol.tol_eq * 1e3:
            failures.append("projector_sum")
        if proj.cross_residual() > cfg.tol.tol_eq * 1e3:
            failures.append("projector_orthogonality")
        if not all(proj.kernel_check.values()):
            failures.append("ker_laplacian_equals_ker_d0")
        if not all(T.page_agreement.values()):
            failures.append("hodge_tower_equals_projected_page")
    else:
        T = towers.jet_tower(C, cfg.kind, cfg.k_max, 0, cfg.tol)
        result = T.to_dict()
    return result, failures


def _cmd_forman(cfg, C):
    T = towers.jet_tower(C, towers.FORMAN, cfg.k_max, 0, cfg.tol)
    robust = towers.jet_length_robustness(C, towers.FORMAN, extra=3, tol=cfg.tol, base=T)
    H1 = towers.hodge_projectors(C, cfg.tol).H1
    from .linalg import span_equal

    level1 = all(span_equal(T.level(1)[key], H1[key], 1e-8) for key in C.bidegrees())
    result = T.to_dict()
    result["jet_length_robustness_residual"] = robust
    result["level1_equals_H1"] = level1
    failures = []
    if not robust <= 1e-8:
        failures.append("jet_length_robustness")
    if not level1:
        failures.append("forman_level1_equals_H1")
    return result, failures


def _cmd_compare(cfg, C):
    hodge = towers.hodge_tower(C, None, cfg.tol)
    kk = cfg.k_max or 2 * (C.q + 1)
    forman = towers.jet_tower(C, towers.FORMAN, kk, 0, cfg.tol)
    mm = towers.jet_tower(C, towers.MAZZEO_MELROSE, kk, 0, cfg.tol)
    rep = towers.inclusion_report(C, hodge, forman, mm)
    failures = sorted({row["relation"] for row in rep.rows if not row["ok"]})
    return rep.to_dict(), failures


def _cmd_liouville(cfg, _C):
    alpha = cfg.options.get("alpha", "liouville10")
    Ns = cfg.options.get("N_list", [4, 8, 16, 32, 64])
    rep = towers.liouville_diagnostic(alpha, Ns)
    failures = [f"rational_slope_N{row['N']}" for row in rep.rows if row["rational"]]
    return rep.to_dict(), failures


def run(cfg: RunConfig) -> tuple[int, ReportBundle]:
    """Dispatch one command.  Raises InvalidInput for malformed input."""
    if cfg.command not in COMMANDS:
        raise InvalidInput(f"unknown command {cfg.command!r}")
    if cfg.command == "model":
        C = build_model(cfg.options["model_kind"], cfg.options)
        return EXIT_OK, ReportBundle(document=io.complex_to_dict(C))
    C = None if cfg.command == "liouville" else _load_input(cfg)
    handler = {
        "check": _cmd_check, "pages": _cmd_pages, "sweep": _cmd_sweep, "tower": _cmd_tower,
        "forman": _cmd_forman, "compare-nested": _cmd_compare, "theorem-a": _cmd_theorem_a,
        "liouville": _cmd_liouville,
    }[cfg.command]
    try:
        out = handler(cfg, C)
    except InternalCheckFailed as exc:
        out = ({"error": str(exc)}, ["internal_check"])
    result, failures = out[0], out[1]
    csv_text = out[2] if len(out) > 2 else None
    doc = io.results_document(cfg.command, cfg.describe(), result, not failures, cfg.timestamp)
    doc["failures"] = failures
    return (EXIT_CHECK if failures else EXIT_OK), ReportBundle(doc, csv_text, failures)


# -- argument parsing ----------------------------------------------------------------


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _grid_arg(text):
    try:
        a, b, n = text.split(",")
        return float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError("grid must be h_max,h_min,points") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", help="complex.v1 file ('-' or omitted: stdin)")
    common.add_argument("--model", help="inline model instead of --input, e.g. 'kronecker:alpha=golden,N=4'")
    common.add_argument("--out", "-o", help="write the JSON report here (default stdout)")
    common.add_argument("--tol-rank", type=float, default=1e-10)
    common.add_argument("--tol-orth", type=float, default=1e-9)
    common.add_argument("--tol-eq", type=float, default=1e-9)
    common.add_argument("--tol-eig", type=float, default=1e-9)
    common.add_argument("--k-max", type=int)

    parser = argparse.ArgumentParser(prog="adiabatic-ss", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="validate the structure identities")
    p = sub.add_parser("pages", parents=[common], help="spectral-sequence page dimensions")
    p.add_argument("--check", action="store_true", help="re-verify all page invariants")
    for name in ("sweep", "theorem-a"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--grid", type=_grid_arg, default=(1e-1, 1e-4, 12), help="h_max,h_min,points")
        p.add_argument("--degrees", type=_int_list)
        p.add_argument("--branches", type=int)
        p.add_argument("--csv", help="write eigenvalue branches (r,i,h,lambda) here")
    p = sub.add_parser("tower", parents=[common])
    p.add_argument("--kind", choices=("hodge", towers.FORMAN, towers.MAZZEO_MELROSE), default="hodge")
    sub.add_parser("forman", parents=[common], help="Forman jet tower with jet-length check")
    sub.add_parser("compare-nested", parents=[common], help="inclusion chain between the towers")
    p = sub.add_parser("liouville", parents=[common])
    p.add_argument("--alpha", default="liouville10")
    p.add_argument("--N-list", type=_int_list, default=[4, 8, 16, 32, 64])

    p = sub.add_parser("model", help="emit a model complex as complex.v1")
    p.add_argument("--out", "-o")
    msub = p.add_subparsers(dest="model_kind", required=True)
    m = msub.add_parser("kronecker")
    m.add_argument("--alpha", default="0")
    m.add_argument("--N", type=int, default=4)
    m = msub.add_parser("product")
    m.add_argument("--N", type=int, default=4)
    m = msub.add_parser("random")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--q", type=int)
    m.add_argument("--p", type=int)
    m.add_argument("--dims", type=int, default=8, help="cap on each piece dimension")
    m.add_argument("--eps", type=float, default=0.3)
    m.add_argument("--gram-noise", type=float, default=0.0)
    return parser


def config_from_args(ns) -> RunConfig:
    if ns.command == "model":
        opts = {k: v for k, v in vars(ns).items() if k not in ("command", "out")}
        return RunConfig(command="model", out=ns.out, options=opts)
    tol = Tolerances(ns.tol_rank, ns.tol_orth, ns.tol_eq, ns.tol_eig)
    cfg = RunConfig(command=ns.command, input=ns.input, model=ns.model, tol=tol, out=ns.out, k_max=ns.k_max)
    if ns.command in ("sweep", "theorem-a"):
        cfg.grid, cfg.degrees, cfg.branches, cfg.csv = ns.grid, ns.degrees, ns.branches, ns.csv
    if ns.command == "pages":
        cfg.check = ns.check
    if ns.command == "tower":
        cfg.kind = ns.kind
    if ns.command == "liouville":
        cfg.options = {"alpha": ns.alpha, "N_list": ns.N_list}
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        status, bundle = run(cfg)
    except (InvalidInput, PreconditionViolated) as exc:
        print(f"adiabatic-ss: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    io.atomic_write(cfg.out, io.dumps(bundle.document))
    if bundle.csv is not None and cfg.csv:
        io.atomic_write(cfg.csv, bundle.csv)
    for name in bundle.failures:
        print(f"adiabatic-ss: check failed: {name}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
