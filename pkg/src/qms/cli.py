"""``qms`` command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numerical or convergence failure.
Errors go to stderr as ``ERR <code>: <message>``.
"""
import argparse
import itertools
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .errors import InvalidArgument, NumericalFailure, QmsError

UNITS = {"length": "lambda", "rate": "gamma", "wavevector": "k0"}
SCENARIOS = ("scatter", "eit-scan", "fidelity-size", "fidelity-defects", "mode-spectrum",
             "protocol")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidArgument(message)


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _common(p, default_out):
    p.add_argument("-o", "--output", default=default_out, help="output data file")
    p.add_argument("--config", help="JSON file with parameters (flags override it)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $QMS_THREADS or 1)")
    p.add_argument("--dry-run", action="store_true",
                   help="validate and print the resolved config without computing")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = _Parser(prog="qms", description="Quantum metasurface simulations.")
    sub = parser.add_subparsers(dest="scenario", required=True, parser_class=_Parser)

    p = sub.add_parser("scatter", help="reflection/transmission of a square array")
    p.add_argument("--nx", type=int, default=23)
    p.add_argument("--ny", type=int, default=23)
    p.add_argument("--spacing", type=float, default=0.2)
    p.add_argument("--drive", choices=("gaussian", "plane"), default="gaussian")
    p.add_argument("--waist", type=float, default=1.56)
    p.add_argument("--kperp", type=_floats, default=[0.0, 0.0], help="kx,ky in k0 units")
    p.add_argument("--detuning", type=_floats, default=None,
                   help="detunings in gamma (default: located resonance)")
    p.add_argument("--projector", choices=("auto", "kspace", "plane-sampling"), default="auto")
    _common(p, "scatter.csv")

    p = sub.add_parser("eit-scan", help="conditional EIT reflection amplitude")
    for name, default in (("delta", "0"), ("Delta", "0"), ("Gamma", "0"), ("deltar", "0"),
                          ("gammar", "0"), ("omegap", "1"), ("V", "0,10,100")):
        p.add_argument(f"--{name}", type=_floats, default=_floats(default),
                       help="value or comma-separated list")
    _common(p, "eit_scan.csv")

    p = sub.add_parser("fidelity-size", help="cat fidelity versus array size")
    p.add_argument("--sizes", type=_ints, default=[5, 9, 13, 17, 21, 23],
                   help="square array sides in atoms")
    p.add_argument("--spacing", type=float, default=0.2)
    p.add_argument("--waist", type=float, default=1.56)
    p.add_argument("--alpha2", type=float, default=9.0)
    p.add_argument("--projector", choices=("kspace", "plane-sampling"), default="kspace")
    _common(p, "fidelity_size.csv")

    p = sub.add_parser("fidelity-defects", help="light-state fidelity versus missing atoms")
    p.add_argument("--nx", type=int, default=23)
    p.add_argument("--ny", type=int, default=23)
    p.add_argument("--spacing", type=float, default=0.2)
    p.add_argument("--waist", type=float, default=1.56)
    p.add_argument("--alpha2", type=float, default=9.0)
    p.add_argument("--fractions", type=_floats, default=[0.0, 0.02, 0.05, 0.1])
    p.add_argument("--stderr-tol", type=float, default=0.002)
    p.add_argument("--min-real", type=int, default=50)
    p.add_argument("--max-real", type=int, default=10000)
    p.add_argument("--reference", choices=("defect-free", "ideal"), default="defect-free")
    p.add_argument("--projector", choices=("kspace", "plane-sampling"), default="kspace")
    _common(p, "fidelity_defects.csv")

    p = sub.add_parser("mode-spectrum", help="|r|^2 versus transverse momentum")
    p.add_argument("--nx", type=int, default=31)
    p.add_argument("--ny", type=int, default=31)
    p.add_argument("--spacing", type=float, default=0.2)
    p.add_argument("--Ka", type=float, default=0.4, help="modulation wavevector in k0")
    p.add_argument("--kmin", type=float, default=-0.8)
    p.add_argument("--kmax", type=float, default=0.8)
    p.add_argument("--num", type=int, default=17)
    p.add_argument("--method", choices=("real-space", "eigenmode", "both"), default="both")
    p.add_argument("--detuning", type=float, default=None,
                   help="default: detuning maximising |r(0)| for the profile")
    _common(p, "mode_spectrum.csv")

    p = sub.add_parser("protocol", help="stabilizer simulation of a preparation protocol")
    p.add_argument("--preset", choices=("ghz", "cluster1d", "tree-fig2b"), default="ghz")
    p.add_argument("--m", type=int, default=None, help="photon count for ghz / cluster1d")
    p.add_argument("--script", help="JSON protocol script (overrides --preset)")
    p.add_argument("--outcome", choices=("+", "-"), default="+")
    p.add_argument("--verify", action="store_true")
    _common(p, "protocol.json")
    return parser


def _load_config(path):
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArgument(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InvalidArgument("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = _load_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.scenario]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known - {"scenario"}
        if unknown:
            raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
        for a in sub._actions:
            if a.dest in cfg and a.type in (_floats, _ints) and not isinstance(cfg[a.dest], list):
                cfg[a.dest] = a.type(cfg[a.dest])
        sub.set_defaults(**{k: v for k, v in cfg.items() if k != "scenario"})
        args = parser.parse_args(argv)
    return args


def resolved_config(args):
    skip = {"output", "config", "dry_run", "verbose", "threads"}
    return {"scenario": args.scenario,
            **{k: v for k, v in sorted(vars(args).items()) if k not in skip and k != "scenario"}}


def _validate(args):
    for name in ("nx", "ny", "num", "min_real", "max_real"):
        if getattr(args, name, 1) is not None and getattr(args, name, 1) < 1:
            raise InvalidArgument(f"--{name.replace('_', '-')} must be positive")
    for name in ("spacing", "waist", "stderr_tol"):
        v = getattr(args, name, 1.0)
        if v is not None and not v > 0:
            raise InvalidArgument(f"--{name.replace('_', '-')} must be positive")
    if getattr(args, "fractions", None) is not None:
        if any(not 0.0 <= f <= 1.0 for f in args.fractions):
            raise InvalidArgument("--fractions must lie in [0, 1]")
    if getattr(args, "alpha2", 1.0) < 0:
        raise InvalidArgument("--alpha2 must be non-negative")
    if getattr(args, "kperp", None) is not None and len(args.kperp) != 2:
        raise InvalidArgument("--kperp takes two components")
    if args.threads is not None and args.threads < 1:
        raise InvalidArgument("--threads must be >= 1")
    if args.scenario == "mode-spectrum":
        if not -1.0 < args.kmin <= args.kmax < 1.0:
            raise InvalidArgument("need -1 < kmin <= kmax < 1")
        if not 0.0 <= args.Ka < 1.0:
            raise InvalidArgument("--Ka must lie in [0, 1)")
    if args.scenario == "fidelity-size" and not args.sizes:
        raise InvalidArgument("--sizes must be non-empty")


# scenario runners: each returns the list of files written ---------------------

def _run_scatter(args):
    from . import coupled_dipole as cd
    from .geometry import build_square_lattice
    from .green import green_matrix
    from .io import write_csv

    geom = build_square_lattice(args.nx, args.ny, args.spacing)
    drive = cd.DriveField(kind=args.drive, waist=args.waist, k_perp=tuple(args.kperp))
    if args.projector == "auto":
        proj = cd.default_projector(geom, drive)
    elif args.projector == "kspace":
        proj = cd.kspace_projector(geom, drive)
    else:
        proj = cd.plane_sampling_projector(geom, drive)
    G = green_matrix(geom).entries
    dets = args.detuning or [cd.locate_resonance(geom, drive, green=G, projector=proj)]
    rows = []
    for d in dets:
        dr = drive.with_detuning(d)
        P = cd.solve_polarizability(geom, cd.single_atom_polarizability(d), dr, green=G)
        res = cd.response_from_dipoles(P, proj, mask=geom.active, detuning=d)
        rows.append((d, res.r.real, res.r.imag, res.t.real, res.t.imag, abs(res.r) ** 2,
                     abs(res.t) ** 2, res.scattered_weight, P.condition))
    header = ["detuning", "r_re", "r_im", "t_re", "t_im", "|r|^2", "|t|^2",
              "scattered_weight", "condition"]
    return [write_csv(args.output, header, rows, units={"detuning": "gamma", **UNITS})]


def _run_eit(args):
    from .eit import EitParameters, reflection_coefficient
    from .io import write_csv

    rows = []
    for d, D, G, dr, gr, op, V in itertools.product(args.delta, args.Delta, args.Gamma,
                                                    args.deltar, args.gammar, args.omegap,
                                                    args.V):
        p = EitParameters(delta=d, Delta=D, Gamma=G, delta_r=dr, gamma_r=gr, omega_p=op, V=V)
        r = reflection_coefficient(p)
        rows.append((d, D, G, dr, gr, op, V, r.real, r.imag, abs(r) ** 2))
    header = ["delta", "Delta", "Gamma", "delta_r", "gamma_r", "omega_p", "V", "r_re", "r_im",
              "|r|^2"]
    return [write_csv(args.output, header, rows, units={"rates": "gamma"})]


def _run_fid_size(args):
    from .defects_mc import fidelity_vs_size

    res = fidelity_vs_size([(s, s) for s in args.sizes], spacing=args.spacing, waist=args.waist,
                           alpha=float(np.sqrt(args.alpha2)), projector=args.projector)
    return [res.to_csv(args.output, abscissa_unit="lambda (array side)")]


def _run_fid_defects(args):
    from .defects_mc import fidelity_vs_defects

    res = fidelity_vs_defects(nx=args.nx, ny=args.ny, spacing=args.spacing, waist=args.waist,
                              alpha=float(np.sqrt(args.alpha2)), fractions=args.fractions,
                              seed=args.seed, stderr_tol=args.stderr_tol,
                              min_real=args.min_real, max_real=args.max_real,
                              threads=args.threads, projector=args.projector,
                              reference=args.reference)
    return [res.to_csv(args.output, abscissa_unit="missing-atom fraction")]


def _run_mode(args):
    from . import mode_selective as ms
    from .coupled_dipole import single_atom_polarizability
    from .geometry import build_square_lattice
    from .green import green_matrix
    from .io import write_csv

    geom = build_square_lattice(args.nx, args.ny, args.spacing)
    G = green_matrix(geom).entries
    Ka = (args.Ka, 0.0)
    det = args.detuning
    if det is None:
        det = ms.resonant_detuning(geom, Ka, green=G)
    prof = ms.periodic_profile(geom, Ka, single_atom_polarizability(det))
    grid = np.linspace(args.kmin, args.kmax, args.num)
    spectra = []
    if args.method in ("real-space", "both"):
        spectra.append(ms.reflectivity_spectrum_realspace(geom, prof, grid, green=G))
    if args.method in ("eigenmode", "both"):
        spectra.append(ms.reflectivity_spectrum_eigenmode(geom, prof, grid, green=G))
    rows = [(float(k), float(r), s.method) for s in spectra for k, r in zip(s.k_perp_grid, s.r2)]
    return [write_csv(args.output, ["k_perp/k0", "|r|^2", "method"], rows,
                      units={"k_perp": "k0", "detuning": f"{det!r} gamma"})]


def _protocol_report(args):
    from .protocols import scripts as ps
    from .protocols.tableau import StabilizerTableau

    if args.script:
        try:
            text = Path(args.script).read_text()
        except OSError as exc:
            raise InvalidArgument(f"cannot read script {args.script}: {exc}") from exc
        script = ps.ProtocolScript.from_json(text)
        kind = "custom"
    else:
        script = ps.preset(args.preset, args.m)
        kind = args.preset
    t, rec = ps.run_protocol(script, outcome=args.outcome)
    report = {"script": json.loads(script.to_json()), "record": rec.to_record(),
              "photonic_stabilizers": t.generators()}
    lines = []
    if args.verify:
        checks = {}
        if kind == "ghz":
            joint = StabilizerTableau.from_labels(rec.joint_before_measurement)
            ok, bad = ps.verify_stabilizers(joint, ps.ghz_stabilizers(joint.n))
            checks["joint_ghz"] = {"passed": joint.n - len(bad), "total": joint.n, "violations": bad}
            lines.append(f"stabilizers: {joint.n - len(bad)}/{joint.n} {'OK' if ok else 'FAIL'}")
            fixed = ps.apply_byproduct(t, rec.byproduct)
            ok2, bad2 = ps.verify_stabilizers(fixed, ps.ghz_stabilizers(t.n))
            checks["photonic_ghz"] = {"passed": t.n - len(bad2), "total": t.n, "violations": bad2}
            lines.append(f"photonic: {t.n - len(bad2)}/{t.n} {'OK' if ok2 else 'FAIL'}")
        elif script.graph:
            fixed = ps.apply_byproduct(t, rec.byproduct)
            ok, bad = ps.verify_graph_state(ps.apply_frame(fixed, script.frame), script.graph)
            checks["graph"] = {"passed": t.n - len(bad), "total": t.n, "violations": bad}
            lines.append(f"stabilizers: {t.n - len(bad)}/{t.n} {'OK' if ok else 'FAIL'}")
        else:
            ok = t.is_valid()
            lines.append(f"stabilizers: tableau {'valid' if ok else 'INVALID'}")
        report["verification"] = checks
    return report, lines


def _run_protocol(args):
    report, lines = _protocol_report(args)
    for ln in lines:
        print(ln)
    Path(args.output).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    failed = any(ln.endswith("FAIL") or ln.endswith("INVALID") for ln in lines)
    return [Path(args.output)], failed


RUNNERS = {"scatter": _run_scatter, "eit-scan": _run_eit, "fidelity-size": _run_fid_size,
           "fidelity-defects": _run_fid_defects, "mode-spectrum": _run_mode,
           "protocol": _run_protocol}


def manifest_path(output):
    out = Path(output)
    return out.with_name(out.name + ".manifest.json")


def run(args):
    from .io import write_manifest

    config = resolved_config(args)
    if args.dry_run:
        print(json.dumps(config, indent=2, sort_keys=True))
        return 0
    t0 = time.perf_counter()
    result = RUNNERS[args.scenario](args)
    outputs, failed = result if isinstance(result, tuple) else (result, False)
    write_manifest(manifest_path(args.output), config, seed=args.seed,
                   wall_time=time.perf_counter() - t0, outputs=outputs)
    return 1 if failed else 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        _validate(args)
        return run(args)
    except InvalidArgument as exc:
        print(f"ERR 2: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"ERR 3: {exc}", file=sys.stderr)
        return 3
    except QmsError as exc:
        print(f"ERR 3: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
