"""``nhbloch`` command-line front end.

Every subcommand writes CSV or JSON to ``--out`` (stdout by default). Errors
go to stderr as one JSON object ``{"error": kind, "message": ...}`` with a
distinct exit code per kind.
"""

import argparse
import json
import re
import sys

import numpy as np

from . import _io
from .bands import (align_wavefunction, band_sweep, fd_band_oracle, participation_ratio,
                    reconstruct_wavefunction)
from .eig import EigenSolverError, eig, eig_values_only
from .ep import (EncircleError, circle, classify_ep, dispersion_exponent, encircle, ep_scan,
                 k_dispersion_exponent, riemann_sheet_grid, truncated_models, two_level_matrix)
from .figures import FIGURES, write_figure
from .gauge import (GaugeUndefinedError, NotSymmetrizableError, UnsupportedBandwidthError,
                    gauge_angle, gauge_vector, hermitian_equivalent)
from .model import build_bloch, parse_family, parse_potential

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_INELIGIBLE = 4
EXIT_NUMERICAL = 5

DEFAULTS = {
    "potential": "V1:1,0.8",
    "tau": None,
    "k": None,
    "M": 32,
    "bands": 3,
    "out": "-",
    "format": "csv",
    "fd_points": 1024,
    "threads": None,
    "ep_min_overlap": 0.999,
    "ep_max_rigidity": 0.02,
}


class CliError(Exception):
    def __init__(self, kind, message, code):
        super().__init__(message)
        self.kind = kind
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message, EXIT_USAGE)


def parse_grid(text):
    """``"a:b:n"`` (n points from a to b), ``"a,b,c"`` or a single value."""
    text = str(text)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} must be min:max:count")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise ValueError("grid count must be at least 1")
        return np.linspace(lo, hi, n)
    values = np.array([float(v) for v in text.split(",") if v.strip()])
    if values.size == 0:
        raise ValueError("empty grid")
    return values


def _pair(text):
    a, b = (int(v) for v in str(text).split(","))
    return a, b


def _range(text):
    a, b = (float(v) for v in str(text).replace(",", ":").split(":"))
    return a, b


def _common(p):
    p.add_argument("--potential")
    p.add_argument("--tau", type=float)
    p.add_argument("--k")
    p.add_argument("-M", type=int, dest="M")
    p.add_argument("--bands", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--fd-points", type=int, dest="fd_points")
    p.add_argument("--threads", type=int)
    p.add_argument("--config")


def build_parser():
    parser = _Parser(prog="nhbloch", description="Non-Hermitian Bloch band toolkit.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _common(p)
        return p

    add("bands", "band structure over a k-grid")
    add("fdcheck", "compare plane-wave bands with the finite-difference oracle")
    add("gauge", "gauge angle and Hermitian-equivalent potential")
    add("pr", "participation ratio before and after the gauge")
    p = add("wavefunction", "real-space Bloch function of one band")
    p.add_argument("--band", type=int, default=1)
    p.add_argument("--x-points", type=int, default=201, dest="x_points")
    p.add_argument("--gauge", action="store_true", help="apply the gauge to the amplitudes")
    p.add_argument("--equivalent", action="store_true", help="use the equivalent potential")
    for name in ("ep-scan", "ep-classify", "dispersion"):
        p = add(name, {"ep-scan": "locate and characterise an EP over tau",
                       "ep-classify": "classify an EP at a given tau",
                       "dispersion": "log-log exponent of a gap near an EP"}[name])
        p.add_argument("--band-pair", default="2,3", dest="band_pair")
        p.add_argument("--tau-window", default="0.9:1.1", dest="tau_window")
        p.add_argument("--side", type=int, choices=[-1, 1], default=1)
        p.add_argument("--measure", choices=["abs", "imag"], default="abs")
        p.add_argument("--vary", choices=["tau", "k"], default="tau")
    p = add("encircle", "state permutation around a closed loop")
    p.add_argument("--model", choices=["two-level", "bloch"], default="two-level")
    p.add_argument("--center", default="0,1")
    p.add_argument("--radius", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=256)
    p.add_argument("--coupling", type=float, default=1.0)
    p.add_argument("--band-pair", default="2,3", dest="band_pair")
    p = add("riemann", "Riemann-sheet mesh of the detuned two-level model")
    p.add_argument("--delta", default="-2:2")
    p.add_argument("--g", default="-2:2")
    p.add_argument("--coupling", type=float, default=1.0)
    p.add_argument("--resolution", type=int, default=65)
    p = add("truncated", "few-mode truncated models")
    p.add_argument("--model", choices=["H2", "H3", "H3_nnn", "H4"], default="H3")
    p.add_argument("--v0", type=float, default=1.0)
    p.add_argument("--omega", type=float)
    p.add_argument("--omega-prime", type=float, dest="omega_prime")
    p = add("figure", "write a figure data bundle")
    p.add_argument("name", choices=sorted(FIGURES))
    return parser


def resolve(args):
    """Merge flags over the config file over :data:`DEFAULTS`."""
    config = {}
    if args.config:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError("config", f"cannot read config {args.config!r}: {exc}", EXIT_CONFIG)
        if not isinstance(config, dict):
            raise CliError("config", "config must be a JSON object", EXIT_CONFIG)
        unknown = set(config) - set(DEFAULTS)
        if unknown:
            raise CliError("config", f"unknown config keys: {sorted(unknown)}", EXIT_CONFIG)
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, config.get(key, default))
    try:
        try:
            args.potential_spec = parse_potential(str(args.potential))
        except ValueError:
            # family shorthand such as "V1:1" for the tau-scanning commands
            args.potential_spec = parse_family(str(args.potential))(
                1.0 if args.tau is None else args.tau)
        args.M = int(args.M)
        args.bands = int(args.bands)
        if args.M < max(1, args.potential_spec.bandwidth):
            raise ValueError(f"M={args.M} is below the potential bandwidth")
    except (ValueError, TypeError, OSError) as exc:
        raise CliError("config", str(exc), EXIT_CONFIG)
    return args


def _k_grid(args, default):
    try:
        return parse_grid(args.k if args.k is not None else default)
    except ValueError as exc:
        raise CliError("config", str(exc), EXIT_CONFIG)


def _family(args):
    try:
        return parse_family(str(args.potential))
    except ValueError as exc:
        raise CliError("config", str(exc), EXIT_CONFIG)


def _table(args, header, rows):
    rows = list(rows)
    if args.format == "json":
        return _io.json_text([dict(zip(header, r)) for r in rows])
    return _io.csv_text(header, rows)


def cmd_bands(args):
    bs = band_sweep(args.potential_spec, _k_grid(args, "-0.5:0.5:101"), args.M, args.bands,
                    args.threads)
    return _table(args, ["k", "band", "re_omega", "im_omega"], bs.rows())


def cmd_fdcheck(args):
    rows = []
    for k in _k_grid(args, "0,0.25,0.5"):
        pw = band_sweep(args.potential_spec, [k], args.M, args.bands, 1).energies[0]
        fd = fd_band_oracle(args.potential_spec, k, args.fd_points, args.bands)
        for n in range(args.bands):
            rows.append((k, n + 1, pw[n].real, pw[n].imag, fd[n].real, fd[n].imag,
                         abs(pw[n] - fd[n])))
    return _table(args, ["k", "band", "re_pw", "im_pw", "re_fd", "im_fd", "abs_dev"], rows)


def cmd_gauge(args):
    try:
        res = hermitian_equivalent(args.potential_spec, strict=True)
    except (NotSymmetrizableError, UnsupportedBandwidthError, GaugeUndefinedError) as exc:
        raise CliError("ineligible", str(exc), EXIT_INELIGIBLE)
    except ValueError as exc:
        raise CliError("ineligible", str(exc), EXIT_INELIGIBLE)
    return _io.json_text(res.to_dict())


def _band_vector(potential, k, M, band):
    dec = eig(build_bloch(potential, k, M).matrix)
    return dec.eigenvalues[band - 1], dec.vectors[:, band - 1]


def cmd_pr(args):
    pot = args.potential_spec
    k = float(_k_grid(args, "0")[0])
    angle = gauge_angle(pot[-1], pot[1]) if pot[1] != 0 else None
    out = []
    for band in range(1, args.bands + 1):
        w, a = _band_vector(pot, k, args.M, band)
        row = {"band": band, "k": k, "omega": w, "participation_ratio": participation_ratio(a)}
        if angle is not None and angle.defined:
            row["participation_ratio_gauge"] = participation_ratio(gauge_vector(a, angle))
        out.append(row)
    return _io.json_text(out)


def cmd_wavefunction(args):
    pot = args.potential_spec
    k = float(_k_grid(args, "0")[0])
    if args.equivalent:
        try:
            pot = hermitian_equivalent(pot).transformed_potential
        except ValueError as exc:
            raise CliError("ineligible", str(exc), EXIT_INELIGIBLE)
    _, a = _band_vector(pot, k, args.M, args.band)
    if args.gauge:
        angle = gauge_angle(pot[-1], pot[1])
        if not angle.defined:
            raise CliError("ineligible", "gauge angle undefined", EXIT_INELIGIBLE)
        a = gauge_vector(a, angle)
    x = np.linspace(0.0, pot.period, args.x_points)
    psi = align_wavefunction(reconstruct_wavefunction(a, k, x, pot.period))
    return _table(args, ["x", "re_psi", "im_psi", "abs_psi"],
                  zip(x, psi.real, psi.imag, np.abs(psi)))


def cmd_ep_scan(args):
    k = float(_k_grid(args, "0")[0])
    rep = ep_scan(_family(args), k, _pair(args.band_pair), _range(args.tau_window),
                  M=_ep_M(args), min_overlap=float(args.ep_min_overlap),
                  max_rigidity=float(args.ep_max_rigidity))
    return _io.json_text(rep.to_dict())


def _ep_M(args):
    return 16 if args.M == DEFAULTS["M"] else args.M


def cmd_ep_classify(args):
    k = float(_k_grid(args, "0")[0])
    tau = 1.0 if args.tau is None else args.tau
    cls, diag = classify_ep(_family(args), k, _pair(args.band_pair), tau, M=_ep_M(args),
                            return_diagnostics=True)
    return _io.json_text({"k": k, "tau": tau, "band_pair": list(_pair(args.band_pair)),
                          "classification": cls.value, "diagnostics": diag})


def cmd_dispersion(args):
    k = float(_k_grid(args, "0")[0])
    tau = 1.0 if args.tau is None else args.tau
    pair = _pair(args.band_pair)
    if args.vary == "k":
        fit = k_dispersion_exponent(_family(args)(tau), pair, k, side=args.side, M=_ep_M(args))
    else:
        fit = dispersion_exponent(_family(args), k, pair, tau, side=args.side,
                                  measure=args.measure, M=_ep_M(args))
    return _io.json_text({"exponent": fit.exponent, "stderr": fit.stderr,
                          "offsets": fit.offsets, "gaps": fit.gaps, "vary": args.vary})


def cmd_encircle(args):
    cx, cy = (float(v) for v in args.center.split(","))
    loop = circle((cx, cy), args.radius)
    if args.model == "two-level":
        t = args.coupling
        res = encircle(lambda d, g: two_level_matrix(d, g, t), loop, steps=args.steps)
    else:
        family = _family(args)
        M = 8 if args.M == DEFAULTS["M"] else args.M
        n1, n2 = _pair(args.band_pair)
        res = encircle(lambda k, tau: build_bloch(family(tau), k, M).matrix, loop,
                       steps=args.steps, tracked=[n1 - 1, n2 - 1])
    out = res.to_dict()
    out.update({"model": args.model, "center": [cx, cy], "radius": args.radius})
    return _io.json_text(out)


def cmd_riemann(args):
    mesh = riemann_sheet_grid(_range(args.delta), _range(args.g), args.coupling,
                              args.resolution)
    return _table(args, mesh.COLUMNS, mesh.rows())


def cmd_truncated(args):
    tau = 0.5 if args.tau is None else args.tau
    model = truncated_models(args.model, args.v0, tau, args.omega, args.omega_prime)
    numeric = eig_values_only(model.matrix)
    out = {"model": model.name, "params": model.params, "matrix": model.matrix,
           "eigenvalues": numeric}
    if model.closed_form is not None:
        out["closed_form"] = model.closed_form
    return _io.json_text(out)


def cmd_figure(args):
    out = "figures" if args.out in (None, "-") else args.out
    files = write_figure(args.name, out, M=args.M, threads=args.threads)
    return _io.json_text({"figure": args.name, "files": files})


COMMANDS = {
    "bands": cmd_bands, "fdcheck": cmd_fdcheck, "gauge": cmd_gauge, "pr": cmd_pr,
    "wavefunction": cmd_wavefunction, "ep-scan": cmd_ep_scan, "ep-classify": cmd_ep_classify,
    "dispersion": cmd_dispersion, "encircle": cmd_encircle, "riemann": cmd_riemann,
    "truncated": cmd_truncated, "figure": cmd_figure,
}


def _fail(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code},
                                sort_keys=True) + "\n")
    return code


def _join_negative(argv):
    """``--k -0.5:0.5:11`` -> ``--k=-0.5:0.5:11``; argparse would otherwise
    read a negative grid or range as an option."""
    out = []
    for tok in argv:
        if (out and out[-1].startswith("-") and "=" not in out[-1]
                and re.match(r"^-[\d.]", tok) and not re.match(r"^-[\d.]", out[-1])):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run(argv=None):
    """Run one command; returns the process exit code."""
    parser = build_parser()
    argv = _join_negative(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise CliError("usage", "a subcommand is required", EXIT_USAGE)
        args = resolve(args)
        text = COMMANDS[args.command](args)
        if args.command == "figure":
            sys.stdout.write(text)
        else:
            _io.emit(text, args.out)
    except CliError as exc:
        return _fail(exc.kind, str(exc), exc.code)
    except (EigenSolverError, EncircleError, FloatingPointError) as exc:
        return _fail("numerical", str(exc), EXIT_NUMERICAL)
    except (ValueError, OSError) as exc:
        return _fail("invalid", str(exc), EXIT_FAILURE)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
