"""Command-line front end.

Subcommands: tables, sweep, protocol, gate, oracle, erf-selftest.

Exit codes: 0 success, 2 bad arguments, 3 domain error, 4 I/O error,
5 internal-consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cerf, metrics, protocol, qcore
from .bathsim import CentralSpinModel, exact_channel, structure_report
from .decoherence import channel_params, cp_check, make_channel, zero_field_params
from .errors import ConsistencyError, DomainError
from .units import PhysicalConfig, lambda_from_field

EXIT_OK, EXIT_ARGS, EXIT_DOMAIN, EXIT_IO, EXIT_INTERNAL = 0, 2, 3, 4, 5

TABLES = ("I", "III", "IV", "V", "VI")
CONFIG_KEYS = {
    "b0_list", "N", "A_eV", "mu_B_eV_per_T", "hbar_eV_s", "format", "output_path",
    "strict_paper_ey", "joint_phi_opt", "which",
}


class ArgumentError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    B0_list: list = field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    N: int = 10**6
    A_eV: float = 1e-10
    mu_B_eV_per_T: float = 5.788e-5
    hbar_eV_s: float = 6.582119569e-16
    output: str = "csv"
    strict_paper_ey: bool = False
    joint_phi_opt: bool = False
    output_path: str | None = None
    which: list = field(default_factory=lambda: list(TABLES))

    def physical(self, B0_mT=0.0):
        return PhysicalConfig(B0_mT=B0_mT, N=self.N, A_eV=self.A_eV,
                              mu_B_eV_per_T=self.mu_B_eV_per_T, hbar_eV_s=self.hbar_eV_s)


# --- formatting ---------------------------------------------------------------


def sig2(x):
    """Two significant figures, positional notation, trailing zero kept (4.0, 0.90)."""
    s = f"{x:#.2g}"
    if "e" in s:
        return np.format_float_positional(x, precision=2, unique=False, fractional=False, trim="-")
    return s.rstrip(".")


def _fmt_b0(b):
    return f"{b:g}"


def table_columns(which):
    cols = ["B0_mT", "value", "value_paper"]
    if which == "V":
        cols += ["value_alt", "value_alt_paper"]
    cols += ["duration_ns", "duration_paper"]
    if which == "V":
        cols += ["duration_alt_ns", "duration_alt_paper"]
    return cols + ["cp_region_ok"]


def format_row(which, row):
    out = {
        "B0_mT": _fmt_b0(row.B0_mT),
        "value": f"{row.value:.4f}",
        "value_paper": sig2(row.value),
        "duration_ns": f"{row.duration_ns:.1f}",
        "duration_paper": sig2(row.duration_ns),
        "cp_region_ok": "true" if row.cp_region_ok else "false",
    }
    if which == "V":
        out.update(
            value_alt=f"{row.value_alt:.4f}",
            value_alt_paper=sig2(row.value_alt),
            duration_alt_ns=f"{row.duration_alt_ns:.1f}",
            duration_alt_paper=sig2(row.duration_alt_ns),
        )
    return out


def json_row(which, row):
    """Formatted row with numbers as JSON numbers; rounded columns stay strings."""
    out = {}
    for k, v in format_row(which, row).items():
        if k == "cp_region_ok":
            out[k] = v == "true"
        elif k.endswith("_paper"):
            out[k] = v
        else:
            out[k] = float(v)
    return out


def render_csv(which, rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=table_columns(which), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(format_row(which, row))
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return {"re": x.real.tolist(), "im": x.imag.tolist()}
        return x.tolist()
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def render_json(config, rows, diagnostics):
    doc = {"config_echo": _jsonable(dataclasses.asdict(config)), "rows": _jsonable(rows),
           "diagnostics": _jsonable(diagnostics)}
    return json.dumps(doc, indent=2) + "\n"


def emit(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8", newline="\n")


# --- argument handling -----------------------------------------------------------


def _add_common(p):
    p.add_argument("--config", help="JSON file of flat key/value settings; flags override it")
    p.add_argument("--N", type=int, help="bath size (default 1e6)")
    p.add_argument("--A-eV", dest="A_eV", type=float, help="hyperfine constant in eV")
    p.add_argument("--mu-B", dest="mu_B_eV_per_T", type=float, help="Bohr magneton in eV/T")
    p.add_argument("--hbar", dest="hbar_eV_s", type=float, help="hbar in eV s")
    p.add_argument("--format", dest="output", choices=("csv", "json"))
    p.add_argument("--output", dest="output_path", help="output file (directory for tables)")
    p.add_argument("--strict-paper-ey", action="store_const", const=True, default=None,
                   help="use the y-field map exactly as printed (with its R2 misprint)")


def build_parser():
    parser = argparse.ArgumentParser(prog="qdteleport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tables", help="reproduce the fidelity/duration tables")
    _add_common(p)
    p.add_argument("--which", nargs="+", choices=TABLES)
    p.add_argument("--b0", dest="b0_list", nargs="+", type=float, help="fields in mT")
    p.add_argument("--joint-phi", dest="joint_phi_opt", action="store_const", const=True,
                   default=None, help="jointly refine both durations for table VI")

    p = sub.add_parser("sweep", help="fidelity versus duration for one metric")
    _add_common(p)
    p.add_argument("--metric", required=True, choices=metrics.KINDS)
    p.add_argument("--b0", type=float, required=True)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--t-max-ns", type=float, help="upper end of the scan (default: 2x nominal)")

    p = sub.add_parser("protocol", help="dump every intermediate state of one run as JSON")
    _add_common(p)
    p.add_argument("--theta", type=float, default=np.pi / 3)
    p.add_argument("--phi", type=float, default=np.pi / 4)
    p.add_argument("--b0", type=float, default=6.0)
    p.add_argument("--t1-ns", type=float, help="rotation duration (default: optimum of F)")
    p.add_argument("--t2-ns", type=float, help="recovery pulse duration (default: optimum of Phi)")
    p.add_argument("--ideal", action="store_true", help="ideal unitaries instead of channels")

    p = sub.add_parser("gate", help="one decoherence map: parameters, transfer matrix, CP check")
    _add_common(p)
    p.add_argument("--axis", choices=("x", "y", "z"), default="x")
    p.add_argument("--sign", choices=("+", "-"), default="+")
    p.add_argument("--b0", type=float, default=1.0)
    p.add_argument("--t-ns", type=float, help="duration (default: optimal pulse, 0.18 ns for z)")

    p = sub.add_parser("oracle", help="exact small-bath channel and structure report")
    _add_common(p)
    p.add_argument("--n-bath", type=int, default=8)
    p.add_argument("--lam", type=float, default=0.0, help="dimensionless field")
    p.add_argument("--t", type=float, default=0.5, help="dimensionless time")
    p.add_argument("--axis", choices=("x", "y", "z"), default="z")
    p.add_argument("--method", choices=("spin", "dense"), default="spin")

    p = sub.add_parser("erf-selftest", help="check complex erf against embedded reference values")
    _add_common(p)
    return parser


def load_config(args) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text())
        except OSError:
            raise
        except json.JSONDecodeError as exc:
            raise ArgumentError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ArgumentError("config file must hold a JSON object")
        unknown = set(raw) - CONFIG_KEYS
        if unknown:
            raise ArgumentError(f"unknown config keys: {sorted(unknown)}")
        for k, v in raw.items():
            if isinstance(v, (dict, list)) and k not in ("b0_list", "which"):
                raise ArgumentError(f"config key {k!r} must be a scalar")
        values.update(raw)
    for key in ("N", "A_eV", "mu_B_eV_per_T", "hbar_eV_s", "output", "output_path",
                "strict_paper_ey", "joint_phi_opt", "b0_list", "which"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if "format" in values:
        values.setdefault("output", values.pop("format"))
    which = values.pop("which", None)
    cfg = RunConfig(command=args.command)
    if "b0_list" in values:
        cfg.B0_list = [float(b) for b in values.pop("b0_list")]
    for k, v in values.items():
        setattr(cfg, k, v)
    if cfg.output not in ("csv", "json"):
        raise ArgumentError(f"output format must be csv or json, got {cfg.output!r}")
    cfg.which = list(which) if which else list(TABLES)
    bad = [w for w in cfg.which if w not in TABLES]
    if bad:
        raise ArgumentError(f"unknown tables {bad}")
    return cfg


# --- commands ---------------------------------------------------------------------


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


def cmd_tables(cfg, args):
    for b in cfg.B0_list:
        if not b > 0:
            raise DomainError(f"B0 must be positive (zero field has no pulse time), got {b} mT")
    base = cfg.physical()
    outputs = {}
    for which in cfg.which:
        rows = metrics.make_table(which, cfg.B0_list, cfg.N, base, cfg.strict_paper_ey,
                                  cfg.joint_phi_opt)
        for r in rows:
            if not r.cp_region_ok:
                _warn(f"table {which}, B0={r.B0_mT:g} mT: optimum lies outside the CP region")
        if cfg.output == "csv":
            outputs[which] = render_csv(which, rows)
        else:
            formatted = [dict(json_row(which, r), extra=r.extra) for r in rows]
            diagnostics = {"table": which,
                           "raw": [dataclasses.asdict(r) for r in rows]}
            outputs[which] = render_json(cfg, formatted, diagnostics)
    ext = cfg.output
    if cfg.output_path is None:
        for which, text in outputs.items():
            if len(outputs) > 1:
                sys.stdout.write(f"# table {which}\n")
            sys.stdout.write(text)
    else:
        out = Path(cfg.output_path)
        out.mkdir(parents=True, exist_ok=True)
        for which, text in outputs.items():
            emit(text, out / f"table_{which}.{ext}")
    return EXIT_OK


def sweep_curve(kind, B0, cfg, points=400, t_max_ns=None):
    """(t_ns, value) arrays; t_ns is the metric's total duration."""
    if not B0 > 0:
        raise DomainError(f"B0 must be positive, got {B0} mT")
    phys = cfg.physical(B0)
    lam = lambda_from_field(phys)
    unit = phys.ns_per_unit
    if t_max_ns is not None:
        t_max = t_max_ns / unit
    elif kind == "idle":
        t_max = 20.0 / unit
    else:
        t_max = 2 * metrics.nominal_pulse_time(kind, lam)
    ts = np.linspace(t_max / points, t_max, points)
    if kind == "Phi":
        t1 = metrics.maximize("F_measured", lam, cfg.N, cfg=phys).t_star
        vals = metrics.PhiObjective(t1, lam, cfg.N, cfg.strict_paper_ey)(ts)
        return (t1 + 3 * ts) * unit, vals
    vals = metrics.closed_form(kind, ts, lam, cfg.N)
    scale = 3 if kind in metrics.U_KINDS else 1
    return scale * ts * unit, vals


def cmd_sweep(cfg, args):
    t_ns, vals = sweep_curve(args.metric, args.b0, cfg, args.points, args.t_max_ns)
    if args.points < 2:
        raise DomainError("need at least two sweep points")
    if cfg.output == "csv":
        lines = ["t_ns,value"] + [f"{a:.6f},{v:.8f}" for a, v in zip(t_ns, vals)]
        emit("\n".join(lines) + "\n", cfg.output_path)
    else:
        rows = [{"t_ns": float(a), "value": float(v)} for a, v in zip(t_ns, vals)]
        i = int(np.argmax(vals))
        emit(render_json(cfg, rows, {"metric": args.metric, "B0_mT": args.b0,
                                     "max": {"t_ns": float(t_ns[i]), "value": float(vals[i])}}),
             cfg.output_path)
    return EXIT_OK


def protocol_dump(cfg, theta, phi, B0, t1_ns=None, t2_ns=None, ideal=False):
    phys = cfg.physical(B0)
    lam = lambda_from_field(phys)
    unit = phys.ns_per_unit
    if t1_ns is None:
        t1 = metrics.maximize("F_measured", lam, cfg.N, cfg=phys).t_star
    else:
        t1 = t1_ns / unit
    if t2_ns is None:
        t2 = metrics.teleport_fidelity(lam, cfg.N, phys, strict_paper_ey=cfg.strict_paper_ey).t_star
    else:
        t2 = t2_ns / unit
    psi = qcore.bloch_state(theta, phi)
    run = protocol.run_noisy(theta, phi, t1, lam, cfg.N, ideal=ideal)
    outcomes, phi_value = [], 0.0
    for o in run.record:
        rho = protocol.recover(o.sigma, o.jk, t2, lam, cfg.N, ideal=ideal,
                               strict_paper_ey=cfg.strict_paper_ey)
        f = qcore.fidelity(psi, rho)
        phi_value += o.p * f
        outcomes.append({"jk": f"{o.jk[0]}{o.jk[1]}", "p": o.p, "sigma": o.sigma,
                         "degenerate": o.degenerate, "recovered": rho, "fidelity": f})
    return {
        "input": {"theta": theta, "phi": phi, "psi": psi},
        "B0_mT": B0, "lam": lam, "ideal": ideal,
        "t1": t1, "t1_ns": t1 * unit, "t2": t2, "t2_ns": t2 * unit,
        "tau_tot_ns": (t1 + 3 * t2) * unit,
        "gamma1": run.gamma1, "gamma2": run.gamma2, "gamma3": run.gamma3,
        "outcomes": outcomes, "teleport_fidelity": phi_value,
    }


def cmd_protocol(cfg, args):
    if not args.b0 > 0:
        raise DomainError(f"B0 must be positive, got {args.b0} mT")
    dump = protocol_dump(cfg, args.theta, args.phi, args.b0, args.t1_ns, args.t2_ns, args.ideal)
    emit(json.dumps(_jsonable({"config_echo": dataclasses.asdict(cfg), "run": dump}), indent=2)
         + "\n", cfg.output_path)
    return EXIT_OK


def gate_report(cfg, axis, B0, sign="+", t_ns=None):
    phys = cfg.physical(B0)
    unit = phys.ns_per_unit
    N = cfg.N
    if axis == "z":
        t = (0.18 if t_ns is None else t_ns) / unit
        params = zero_field_params(t, N)
        ch = make_channel("z", params)
        fids = {"idle": float(metrics.closed_form("idle", t, 1.0, N))}
    else:
        if not B0 > 0:
            raise DomainError(f"B0 must be positive for the {axis} map, got {B0} mT")
        lam = lambda_from_field(phys)
        if t_ns is None:
            kind = "Gx_pi" if axis == "x" else "G_half_pi"
            t = metrics.maximize(kind, lam, N, cfg=phys).t_star
        else:
            t = t_ns / unit
        params = channel_params(t, lam, N)
        ch = make_channel(axis, params, sign, strict_paper=cfg.strict_paper_ey)
        fids = {k: float(metrics.closed_form(k, t, lam, N)) for k in ("Gx_pi", "G_half_pi")}
    cp = cp_check(ch)
    if not cp.is_cp:
        _warn(f"{axis} map at t = {t * unit:.3f} ns is not completely positive")
    return {"axis": axis, "sign": sign, "B0_mT": B0, "t": t, "t_ns": t * unit,
            "params": dataclasses.asdict(params), "transfer": ch.transfer,
            "cp_check": dataclasses.asdict(cp), "fidelities": fids}


def cmd_gate(cfg, args):
    report = gate_report(cfg, args.axis, args.b0, args.sign, args.t_ns)
    emit(json.dumps(_jsonable({"config_echo": dataclasses.asdict(cfg), "gate": report}),
                    indent=2) + "\n", cfg.output_path)
    return EXIT_OK


def oracle_report(n_bath, lam, t, axis, method="spin"):
    model = CentralSpinModel(n_bath, lam, t, axis)
    exact = exact_channel(model, method)
    partner = None
    if axis == "x":
        partner = exact_channel(CentralSpinModel(n_bath, lam, t, "y"), method)
    report = structure_report(exact, axis, partner)
    report.update(n_bath=n_bath, lam=lam, t=t, method=method, transfer=exact.transfer)
    if axis == "z" and lam == 0:
        zf = zero_field_params(t, max(n_bath, 1))
        report["large_N_formula"] = {"gamma": zf.gamma, "Z": zf.Z}
    elif lam > 0 and n_bath > 0:
        p = channel_params(t, lam, n_bath)
        report["large_N_formula"] = {"R1": p.R1, "R2": p.R2, "W": p.W}
    return report


def cmd_oracle(cfg, args):
    report = oracle_report(args.n_bath, args.lam, args.t, args.axis, args.method)
    emit(json.dumps(_jsonable({"config_echo": dataclasses.asdict(cfg), "oracle": report}),
                    indent=2) + "\n", cfg.output_path)
    return EXIT_OK


def cmd_erf_selftest(cfg, args):
    report = cerf.selftest()
    lines = [f"{name}: {r['points']} points, max relative error {r['max_rel_error']:.3e}"
             for name, r in report.items() if name != "passed"]
    lines.append("PASS" if report["passed"] else "FAIL (tolerance 1e-10)")
    emit("\n".join(lines) + "\n", cfg.output_path)
    return EXIT_OK if report["passed"] else EXIT_INTERNAL


COMMANDS = {
    "tables": cmd_tables,
    "sweep": cmd_sweep,
    "protocol": cmd_protocol,
    "gate": cmd_gate,
    "oracle": cmd_oracle,
    "erf-selftest": cmd_erf_selftest,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg, args)
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
