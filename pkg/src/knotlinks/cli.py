"""Command line front end: ``knotlinks {generate,link,phase,inertia,rotor,fit}``.

Results go to stdout as JSON, or to ``--out``.  Every file written gets a
``<file>.manifest.json`` next to it recording the subcommand, parameters,
seed and package version.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, curves, inertia, kernels, linking, phases, rotor, spectrum_fit
from .errors import InvalidParameterError, KnotLinksError

log = logging.getLogger("knotlinks")


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    seed: int | None = None
    versions: str = __version__
    outputs: list = field(default_factory=list)


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    # float repr round-trips every double exactly
    return json.dumps(_clean(obj), indent=2, allow_nan=False)


class _Run:
    def __init__(self, args):
        self.args = args
        params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
        self.manifest = RunManifest(args.command, _clean(params), seed=getattr(args, "seed", None))

    def write_file(self, path, text):
        path = Path(path)
        path.write_text(text)
        self.manifest.outputs.append(str(path))
        Path(str(path) + ".manifest.json").write_text(dumps(asdict(self.manifest)))

    def emit(self, record):
        text = dumps(record) + "\n"
        if getattr(self.args, "out", None):
            self.write_file(self.args.out, text)
        else:
            sys.stdout.write(text)


# -- subcommands -------------------------------------------------------------------------

def cmd_generate(run, args):
    kind = args.kind
    n = args.n_vertices
    if kind == "circle":
        comp = curves.make_circle(args.center, args.normal, args.radius, n)
        link = curves.Link((comp,), args.a, args.density)
    elif kind == "hopf":
        link = curves.make_tight_hopf(args.a, n, args.density)
    elif kind == "chain":
        link = curves.make_chain(args.k, args.a, n, args.density)
    elif kind == "borromean":
        link = curves.make_borromean(args.r1, args.r2, n, args.a, args.density)
    else:
        link = curves.make_torus_link(args.p, args.q, args.major, args.minor, args.a, n, args.density)
    if args.tori:
        if kind not in ("hopf", "chain"):
            raise InvalidParameterError("--tori is only available for hopf and chain")
        k = 2 if kind == "hopf" else args.k
        tori = inertia.chain_tori(k, args.a, args.density)
        run.write_file(args.tori, dumps({"tori": [t.to_dict() for t in tori]}) + "\n")
    run.emit(link.to_dict())


def cmd_link(run, args):
    link = curves.Link.load(args.curve_file)
    i, j = args.pair
    n = len(link.components)
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise InvalidParameterError(f"--pair needs two distinct indices in [0, {n})")
    res = linking.gauss_linking(link.components[i], link.components[j], args.backend)
    run.emit({"pair": [i, j], **res.to_dict()})


def cmd_phase(run, args):
    cfg = phases.FluxConfig(phi1=args.phi1, phi2=args.phi2, phi0=args.phi0, j0=args.j0,
                            kappa=args.kappa, topo_coeff=args.topo_coeff,
                            normalization=args.normalization)
    if args.kind == "ab":
        value = phases.ab_phase_first_order(cfg, args.linking)
        name = "phase"
    elif args.kind == "ab2":
        value = phases.ab_phase_second_order(cfg)
        name = "phase"
    else:
        value = phases.josephson_max_current(cfg)
        name = "j_max"
    run.emit({"kind": args.kind, name: value, "config": asdict(cfg),
              **({"linking": args.linking} if args.kind == "ab" else {})})


def _classification(res):
    if res.is_exact:
        return rotor.classify_top(res.principal_moments).kind
    err = inertia.moment_stderr(res)
    return rotor.classify_top(res.principal_moments, abs_tol=3 * math.sqrt(2) * float(err.max())).kind


def cmd_inertia(run, args):
    if args.exact == args.mc:
        raise InvalidParameterError("choose exactly one of --exact or --mc")
    if args.exact:
        if not args.config:
            raise InvalidParameterError("--exact needs --config <tori.json>")
        data = json.loads(Path(args.config).read_text())
        tori = [inertia.SolidTorusSpec.from_dict(d) for d in data["tori"]]
        res = inertia.composite_inertia(tori)
        radii = {t.minor_radius for t in tori}
        dens = {t.density for t in tori}
        a, rho = (radii.pop(), dens.pop()) if len(radii) == len(dens) == 1 else (None, None)
    else:
        if not args.curve_file:
            raise InvalidParameterError("--mc needs a curve file")
        link = curves.Link.load(args.curve_file)
        cfg = inertia.MCConfig(args.seed, args.samples, args.chunks)
        res = inertia.mc_inertia(link, cfg, threads=args.threads, backend=args.backend)
        a, rho = link.tube_radius, link.density
    record_kind = _classification(res)
    if args.normalize:
        if a is None:
            raise InvalidParameterError("normalization needs a common tube radius and density")
        res = res.normalized(a, rho)
    out = res.to_dict()
    out["top"] = record_kind
    out["backend"] = args.backend or kernels.BACKEND
    run.emit(out)


def cmd_rotor(run, args):
    cls = rotor.classify_top(args.moments, tol=args.tol, hbar=args.hbar)
    levels = rotor.symmetric_top_levels(cls, args.jmax)
    if args.format == "csv":
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["J", "K", "energy"])
        for lv in levels:
            wr.writerow([lv.J, lv.K, repr(lv.energy)])
        if args.out:
            run.write_file(args.out, buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
        return
    run.emit({"kind": cls.kind, "rotational_constants": list(cls.rotational_constants),
              "levels": [asdict(lv) for lv in levels]})


def cmd_fit(run, args):
    knots = spectrum_fit.read_knots(args.knots)
    states = spectrum_fit.read_states(args.states)
    mapping = json.loads(Path(args.assign).read_text()) if args.assign else None
    pairs = spectrum_fit.assign(knots, states, mapping)
    prop = spectrum_fit.fit_assigned(pairs)
    aff = spectrum_fit.fit_assigned(pairs, affine=True) if len(pairs) >= 3 else None
    chosen = aff if args.affine else prop
    if chosen is None:
        raise InvalidParameterError("affine fit needs at least 3 assigned states")
    if args.plot_csv:
        spectrum_fit.write_plot_csv(args.plot_csv, chosen, pairs)
        run.manifest.outputs.append(str(args.plot_csv))
        Path(str(args.plot_csv) + ".manifest.json").write_text(dumps(asdict(run.manifest)))
    run.emit({"selected": "affine" if args.affine else "proportional",
              "proportional": prop.to_dict(), "affine": aff.to_dict() if aff else None})


# -- parser -------------------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="knotlinks", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a curve file for a canonical configuration")
    g.add_argument("kind", choices=["circle", "hopf", "chain", "borromean", "torus-link"])
    g.add_argument("--a", type=float, default=1.0, help="tube radius")
    g.add_argument("--density", type=float, default=1.0)
    g.add_argument("--n-vertices", type=int, default=curves.DEFAULT_VERTICES)
    g.add_argument("--k", type=int, default=2, help="chain length")
    g.add_argument("--r1", type=float, default=2.0)
    g.add_argument("--r2", type=float, default=1.0)
    g.add_argument("--p", type=int, default=2)
    g.add_argument("--q", type=int, default=3)
    g.add_argument("--major", type=float, default=2.0)
    g.add_argument("--minor", type=float, default=1.0)
    g.add_argument("--center", type=float, nargs=3, default=[0.0, 0.0, 0.0])
    g.add_argument("--normal", type=float, nargs=3, default=[0.0, 0.0, 1.0])
    g.add_argument("--radius", type=float, default=1.0)
    g.add_argument("--tori", help="also write the solid-torus config (hopf, chain)")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    lk = sub.add_parser("link", help="Gauss linking number of two components")
    lk.add_argument("curve_file")
    lk.add_argument("--pair", type=int, nargs=2, default=[0, 1], metavar=("I", "J"))
    lk.add_argument("--backend", choices=kernels.available())
    lk.add_argument("--out")
    lk.set_defaults(func=cmd_link)

    ph = sub.add_parser("phase", help="Aharonov-Bohm phases and Josephson current")
    ph.add_argument("kind", choices=["ab", "ab2", "josephson"])
    ph.add_argument("--phi1", type=float, default=0.0)
    ph.add_argument("--phi2", type=float, default=0.0)
    ph.add_argument("--phi0", type=float, default=1.0)
    ph.add_argument("--j0", type=float, default=1.0)
    ph.add_argument("--kappa", type=float, default=1.0)
    ph.add_argument("--topo-coeff", type=int, default=1)
    ph.add_argument("--linking", type=int, default=1)
    ph.add_argument("--normalization", choices=[phases.PRINTED, phases.PHI0_SQUARED],
                    default=phases.PRINTED)
    ph.add_argument("--out")
    ph.set_defaults(func=cmd_phase)

    it = sub.add_parser("inertia", help="inertia tensor, exact (tori) or Monte Carlo (curve file)")
    it.add_argument("curve_file", nargs="?")
    it.add_argument("--mc", action="store_true")
    it.add_argument("--exact", action="store_true")
    it.add_argument("--config", help="solid-torus JSON for --exact")
    it.add_argument("--seed", type=int, default=0)
    it.add_argument("--samples", type=int, default=1_000_000)
    it.add_argument("--chunks", type=int, default=64)
    it.add_argument("--threads", type=int, default=None,
                    help="worker threads (default $KNOTLINKS_THREADS or 1); never changes results")
    it.add_argument("--normalize", choices=[inertia.PI2_RHO_A5])
    it.add_argument("--backend", choices=kernels.available())
    it.add_argument("--out")
    it.set_defaults(func=cmd_inertia)

    ro = sub.add_parser("rotor", help="rigid-rotor levels from principal moments")
    ro.add_argument("--moments", type=float, nargs=3, required=True)
    ro.add_argument("--jmax", type=int, default=3)
    ro.add_argument("--tol", type=float, default=1e-9)
    ro.add_argument("--hbar", type=float, default=1.0)
    ro.add_argument("--format", choices=["json", "csv"], default="json")
    ro.add_argument("--out")
    ro.set_defaults(func=cmd_rotor)

    ft = sub.add_parser("fit", help="fit state masses to knot lengths")
    ft.add_argument("--knots", required=True)
    ft.add_argument("--states", required=True)
    ft.add_argument("--affine", action="store_true")
    ft.add_argument("--assign", help="JSON map of state name to knot name")
    ft.add_argument("--plot-csv")
    ft.add_argument("--out")
    ft.set_defaults(func=cmd_fit)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(_Run(args), args)
    except (KnotLinksError, OSError, ValueError, KeyError) as exc:
        sys.stderr.write(dumps({"error": type(exc).__name__, "message": str(exc),
                                "subcommand": args.command}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
