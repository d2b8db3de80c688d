"""Command-line front end.

Every subcommand reads one JSON config, runs the pipeline up to the stage
it needs and writes its outputs into ``--out``. Exit status: 0 when every
enabled check passes, 1 when a check fails (outputs are still written),
2 on a configuration error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from . import io as vio
from .assembly import (
    assemble,
    choose_nj,
    discrete_growth,
    growth_constant_bound,
    lemma16_bounds_check,
    vanishing_density_check,
)
from .exceptions import MultiTrunk, VolGrowthError
from .geometry import (
    DoublingConfig,
    RcaConfig,
    doubling_bound_check,
    rca_nj_threshold,
    rca_theta,
    verify_rca,
    verify_rce,
)
from .graph import (
    BallProfile,
    build_gadget_graph,
    check_sandwich,
    distance_report,
    max_doubling_ratio,
    pointwise_doubling,
)
from .growth import (
    GrowthFunction,
    IncrementsDiverge,
    check_bgd,
    exponential_rate,
    growth_equivalent,
    limit_behavior,
    normalize,
)
from .pieces import PieceCatalog, default_catalog, synthesize_params
from .tree import (
    LevelSet,
    build_tree,
    kary_layout,
    layout_from_tree,
    line_layout,
    ray_layout,
    star_layout,
)

log = logging.getLogger("volgrowth")

DEMOS = ("two-ended-line", "one-ended-quadratic")
ALL_CHECKS = ("bgd", "lemma16", "certify", "distance", "sandwich", "rca", "rce", "doubling")


class ConfigError(Exception):
    pass


def load_config(path: Optional[str], demo: Optional[str]) -> tuple:
    if demo:
        text = resources.files("volgrowth").joinpath("demos", f"{demo}.json").read_text()
        import json

        return json.loads(text), Path.cwd()
    if not path:
        raise ConfigError("give --config PATH or --demo NAME")
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {p} not found")
    try:
        return vio.load_json(p), p.parent
    except ValueError as exc:
        raise ConfigError(f"config {p} is not valid JSON: {exc}") from exc


def _resolve(value: Any, base: Path, what: str) -> Any:
    """Inline objects pass through; strings are paths relative to the config."""
    if isinstance(value, str):
        p = (base / value) if not Path(value).is_absolute() else Path(value)
        if not p.is_file():
            raise ConfigError(f"{what} file {p} not found")
        return vio.load_json(p)
    return value


class Run:
    """Lazily evaluated pipeline stages for one config."""

    def __init__(self, cfg: dict, base: Path, args: argparse.Namespace):
        self.cfg = cfg
        self.base = base
        self.args = args
        self.out = {}
        self.checks = {}
        self._cache = {}
        try:
            g = _resolve(cfg["growth"], base, "growth")
        except KeyError as exc:
            raise ConfigError("config needs a 'growth' entry") from exc
        if args.horizon is not None:
            g = {**g, "horizon": args.horizon}
        try:
            vio.validate(g, "growth")
            self.v = GrowthFunction.from_dict(g)
        except Exception as exc:
            raise ConfigError(f"bad growth function: {exc}") from exc
        self.H = self.v.horizon
        self.catalog = self._catalog()
        self.enabled = set(args.check.split(",")) if args.check else set(cfg.get("checks", ALL_CHECKS))
        unknown = self.enabled - set(ALL_CHECKS)
        if unknown:
            raise ConfigError(f"unknown checks {sorted(unknown)}")

    def _catalog(self) -> Optional[PieceCatalog]:
        if "catalog" not in self.cfg:
            return None
        data = _resolve(self.cfg["catalog"], self.base, "catalog")
        try:
            return PieceCatalog.from_dict(data)
        except Exception as exc:
            raise ConfigError(f"bad catalog: {exc}") from exc

    def stage(self, name: str):
        if name not in self._cache:
            self._cache[name] = getattr(self, f"_{name.replace('-', '_')}")()
        return self._cache[name]

    def check(self, name: str, ok: bool) -> None:
        if name in self.enabled:
            self.checks[name] = bool(ok)

    # stages ----------------------------------------------------------------
    def _bgd(self):
        rep = check_bgd(self.v)
        self.out["bgd.json"] = vio.dumps(rep)
        self.check("bgd", rep.is_bgd)
        return rep

    def _normalized(self):
        if not self.cfg.get("normalize", True):
            w, cert = self.v, growth_equivalent(self.v, self.v)
        else:
            w, cert = normalize(self.v, dilation_max=self.cfg.get("dilation_max", 64))
        self.out["w.json"] = vio.dumps(w)
        self.out["normalize_certificate.json"] = vio.dumps(cert)
        return w, cert

    def _layout(self):
        spec = _resolve(self.cfg.get("layout", {"kind": "ray"}), self.base, "layout")
        H = self.H
        bounded = spec.get("degree_bounded", False) if isinstance(spec, dict) else False
        if "levels" in spec:
            lay = layout_from_tree(spec, record_degree_bound=bounded)
        else:
            kind = spec.get("kind", "ray")
            n_labels = spec.get("labels", 1)
            build = {
                "ray": lambda: ray_layout(H, n_labels),
                "line": lambda: line_layout(H, n_labels),
                "star": lambda: star_layout(spec.get("ends", 3), H, n_labels),
                "kary": lambda: kary_layout(spec.get("children", 2), H, n_labels),
            }
            if kind not in build:
                raise ConfigError(f"unknown layout kind {kind!r}")
            lay = layout_from_tree(build[kind]().to_dict(), record_degree_bound=bounded)
        return lay

    def _params(self):
        lay = self.stage("layout")
        if self.catalog is None:
            need = max(len(k) + 1 for j in range(lay.depth + 1) for k in lay.children(j))
            self.catalog = default_catalog(max_boundary=max(3, need), n_elements=max(1, _n_labels(lay)))
        return synthesize_params(self.catalog, lay)

    def _rca_pair(self):
        """(lambda, alphaO) with ``w(n) <= alphaO lambda^n`` over the horizon."""
        w, _ = self.stage("normalized")
        rc = self.cfg.get("rca", {})
        if "lambda" in rc:
            lam = Fraction(str(rc["lambda"]))
            alpha = max(Fraction(x) / lam**n for n, x in enumerate(w.values))
        else:
            alpha, lam = exponential_rate(w)
            lam = max(lam, Fraction(1001, 1000))
        return float(lam), max(1.0, float(alpha))

    def _S(self):
        w, _ = self.stage("normalized")
        P = self.stage("params")
        mode = dict(self.cfg.get("mode", {"kind": "auto"}))
        kind = mode.pop("kind", "auto")
        if kind == "auto":
            win = max(2, self.H // 4)
            kind = "factorial" if isinstance(limit_behavior(w, win), IncrementsDiverge) else "linear"
        if kind == "none":
            S = LevelSet()
        else:
            if kind == "factorial" and mode.get("base") == "rca":
                lam, alpha = self._rca_pair()
                th = rca_theta(lam, alpha, P.t[1] if P.depth else 1, self.args.theta_margin)
                mode["base"] = math.floor(rca_nj_threshold(lam, alpha, th.theta, max(P.t[1:] or (1,)))) + 1
            S = choose_nj(P, w, kind, self.H, **mode)
        dens = vanishing_density_check(S, [n - 1 for n in S.starts if n > 1] or [self.H])
        self.out["S.json"] = vio.dumps({"S": S, "mode": kind, "density": dens})
        self.mode = {"kind": kind, **mode}
        return S

    def _tree(self):
        w, _ = self.stage("normalized")
        tree = build_tree(w, self.stage("S"), self.H, layout=self.stage("layout"))
        self.out["tree.json"] = vio.dumps(tree)
        self.out["tree.dot"] = tree.to_dot()
        return tree

    def _plan(self):
        plan = assemble(self.stage("tree"), None, self.stage("params"), self.catalog, self.stage("layout"), self.mode)
        self.out["plan.json"] = vio.dumps(plan)
        return plan

    def _z(self):
        z = discrete_growth(self.stage("plan"))
        self.out["z.csv"] = vio.csv_text(["n", "z", "z_decimal"], ((n, *vio.exact_and_decimal(x)) for n, x in enumerate(z.z)))
        return z

    def _graph(self):
        g = build_gadget_graph(self.stage("plan"), self.stage("params"))
        self.out["graph_edges.csv"] = vio.csv_text(["a", "b", "length"], g.edges())
        self.out["graph.dot"] = g.to_dot()
        prof = BallProfile(g.distances(), g.weight)
        top = len(self.stage("z").z) - 1
        self.out["ball.csv"] = vio.csv_text(
            ["r", "vol", "vol_decimal"], ((r, *vio.exact_and_decimal(prof.volume(r))) for r in range(top + 1))
        )
        return g

    # commands ----------------------------------------------------------------
    def certify(self):
        w, _ = self.stage("normalized")
        z = self.stage("z")
        P = self.stage("params")
        band = lemma16_bounds_check(z, w, P, self.stage("S"))
        cert = growth_equivalent(z.z, w)
        bgd = self.stage("bgd")
        variant = self.args.exponent_variant
        bound = growth_constant_bound(bgd.minimal_L, P.l, P.u_R, P.h, P.H, variant) if bgd.is_bgd else None
        within = bool(bound is not None and not cert.failed and bound.admits(cert.A))
        self.out["lemma16.json"] = vio.dumps({"violations": band})
        self.out["certificate.json"] = vio.dumps({"certificate": cert, "bound": bound, "within_bound": within})
        self.check("lemma16", not band)
        self.check("certify", within)

    def simulate(self):
        g = self.stage("graph")
        P = self.stage("params")
        dist = distance_report(g, l=P.l)
        sand = check_sandwich(g, self.stage("z"))
        self.out["distance.json"] = vio.dumps(dist)
        self.out["sandwich.json"] = vio.dumps({"violations": sand})
        self.check("distance", not dist.violations)
        self.check("sandwich", not sand)

    def _rca_cfg(self):
        P = self.stage("params")
        lam, alpha = self._rca_pair()
        t0 = max(P.t[1:] or (1,))
        th = rca_theta(lam, alpha, t0, self.args.theta_margin)
        return th, RcaConfig(th.theta, t0, lam, alpha, P.l)

    def verify_rca(self):
        th, cfg = self._rca_cfg()
        s_from = self.cfg.get("rca", {}).get("s_from", "radius")
        rep = verify_rca(self.stage("tree"), self.stage("plan"), cfg, self.H, s_from=s_from)
        self.out["rca.json"] = vio.dumps({"theta": th, "config": cfg, "report": rep})
        self.check("rca", rep.passes)

    def verify_rce(self):
        th, cfg = self._rca_cfg()
        s_from = self.cfg.get("rca", {}).get("s_from", "radius")
        rep = verify_rce(self.stage("tree"), self.stage("plan"), cfg, self.H, s_from=s_from)
        self.out["rce.json"] = vio.dumps({"theta": th, "config": cfg, "report": rep})
        self.check("rce", rep.passes)

    def verify_doubling(self):
        w, _ = self.stage("normalized")
        g = self.stage("graph")
        P = self.stage("params")
        dc = self.cfg.get("doubling", {})
        A = Fraction(str(dc.get("A", 8)))
        r0 = Fraction(str(dc.get("r0", 3 * P.l)))
        cfg = DoublingConfig(Fraction(str(dc.get("K", 8))), Fraction(str(dc.get("alpha_poly", 0))), P.l, A, None, r0)
        bound = doubling_bound_check(w, cfg, g, self.H)
        sources = None
        cap = dc.get("max_sources", 500)
        if g.n_nodes > cap:
            # all-pairs is quadratic; use evenly spaced marked nodes
            marked = [x for x in range(g.n_nodes) if g.marked[x]]
            sources = [marked[i] for i in sorted({round(k * (len(marked) - 1) / max(1, cap - 1)) for k in range(min(cap, len(marked)))})]
        viol = pointwise_doubling(g, r0, A, sources, max_violations=dc.get("max_violations", 50))
        ratio = max_doubling_ratio(g, r0, sources) if not viol else None
        self.out["doubling.json"] = vio.dumps(
            {"pointwise_violations": viol, "max_ratio": ratio, "bound_check": bound, "config": cfg,
             "sources": "all" if sources is None else sources}
        )
        ok = not viol and bound.first_violation is None and bound.C_settled
        self.check("doubling", ok)

    def write(self, out_dir: Path, command: str) -> bool:
        passed = all(self.checks.values())
        summary = {"command": command, "horizon": self.H, "checks": self.checks, "passed": passed}
        vio.validate(summary, "summary")
        self.out["summary.json"] = vio.dumps(summary)
        for name in sorted(self.out):
            vio.atomic_write(out_dir / name, self.out[name])
        return passed


def _n_labels(layout) -> int:
    if layout.labels is None:
        return 1
    return max(max(r) for r in layout.labels) + 1


def _run_command(run: Run, command: str) -> None:
    stages = {
        "check-bgd": lambda: run.stage("bgd"),
        "normalize": lambda: run.stage("normalized"),
        "build-tree": lambda: run.stage("tree"),
        "choose-nj": lambda: run.stage("S"),
        "assemble": lambda: run.stage("plan"),
        "growth": lambda: run.stage("z"),
        "certify": run.certify,
        "simulate": run.simulate,
        "verify-rca": run.verify_rca,
        "verify-rce": run.verify_rce,
        "verify-doubling": run.verify_doubling,
    }
    if command != "pipeline":
        stages[command]()
        return
    run.stage("bgd")
    run.stage("z")
    if run.enabled & {"lemma16", "certify"}:
        run.certify()
    if run.enabled & {"distance", "sandwich"}:
        run.simulate()
    ends = run.stage("tree").n_ends
    if "rca" in run.enabled and ends == 1:
        run.verify_rca()
    if "rce" in run.enabled and ends > 1:
        run.verify_rce()
    if "doubling" in run.enabled:
        run.verify_doubling()


COMMANDS = (
    "pipeline", "check-bgd", "normalize", "build-tree", "choose-nj", "assemble", "growth",
    "certify", "simulate", "verify-rca", "verify-rce", "verify-doubling",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="volgrowth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--demo", choices=DEMOS, help="use a bundled configuration")
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument("--horizon", type=int, help="override the growth function horizon")
        p.add_argument("--check", help=f"comma-separated subset of {','.join(ALL_CHECKS)}")
        p.add_argument("--theta-margin", type=float, default=0.01, help="relative margin below the theta bound")
        p.add_argument("--exponent-variant", choices=("l", "L"), default="l")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.horizon is not None and args.horizon < 2:
            raise ConfigError("--horizon must be at least 2")
        cfg, base = load_config(args.config, args.demo)
        run = Run(cfg, base, args)
    except (ConfigError, VolGrowthError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        _run_command(run, args.command)
    except (ConfigError, MultiTrunk) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except VolGrowthError as exc:
        log.error("%s", exc)
        run.checks[args.command] = False
        run.out["error.json"] = vio.dumps({"error": type(exc).__name__, "message": str(exc)})
    passed = run.write(Path(args.out), args.command)
    for name, ok in sorted(run.checks.items()):
        print(f"{name}: {'pass' if ok else 'FAIL'}")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
