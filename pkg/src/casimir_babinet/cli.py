"""Command-line entry point: one reproducible scenario run per invocation.

Exit codes: 0 success, 1 configuration error, 2 convergence failure,
3 invariant violation (diagnostics are dumped to stderr as JSON).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, replace

import numpy as np

from . import __version__
from .babinet import EmBlockSet, babinet_residual, scalar_babinet_residual
from .config import (
    file_extras,
    load_file,
    parse_float_list,
    parse_sweep,
    resolve,
)
from .dipole import CAVEATS, LatticeSpec, lattice_sum
from .energy import (
    ALPHA_AREA,
    PLATE_FIRST_EM,
    QuadratureSpec,
    casimir_energy,
    edge_scan,
    fit_edge_coefficients,
    plate_energy,
)
from .errors import CasimirError, ConfigError, DomainError, InvariantViolation
from .feasibility import thickness_window
from .grating import SolverParams, StripScreen, em_blocks_from_scalar, solve_scalar, suggest_params
from .interchange import read_matrices
from .wavemodes import Channel, ReflectionBlock, TransmissionBlock

ENERGY_UNITS = "coefficient of hbar*c*A/d^3"

# Default output format per scenario: tables go to CSV, single results to JSON.
DEFAULT_FORMAT = {
    "verify-babinet": "csv",
    "energy": "json",
    "edge-fit": "json",
    "lateral-force": "csv",
    "feasibility": "json",
    "convergence-sweep": "csv",
}


class Report:
    """Scenario output: an optional table plus a summary mapping."""

    def __init__(self, columns=None, rows=None, summary=None, units=None, single=False):
        self.single = single
        self.columns = list(columns or [])
        self.rows = list(rows or [])
        self.summary = summary or {}
        self.units = units or {}


# ---------------------------------------------------------------------------
# building validated objects from a resolved config


def _validated(factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except (DomainError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def make_screen(geom: dict) -> StripScreen:
    kind = geom.get("kind", "strips")
    period = geom["period"]
    if kind == "plates":
        return _validated(StripScreen, period, period)
    if kind == "strips":
        return _validated(StripScreen.from_fill, period, geom["fill"], geom.get("offset", 0.0))
    raise ConfigError(f"geometry.kind must be 'plates' or 'strips', got {kind!r}")


def make_params(solver: dict, screen: StripScreen, d: float) -> SolverParams:
    base = _validated(suggest_params, screen, d, solver["truncation_tol"], solver["tol"])
    explicit = {k: solver[k] for k in ("n_basis", "orders", "n_kernel") if solver.get(k) is not None}
    return _validated(replace, base, **explicit)


def make_quad(q: dict) -> QuadratureSpec:
    return _validated(QuadratureSpec, **q)


def _positive(value, name):
    if not isinstance(value, (int, float)) or not value > 0:
        raise ConfigError(f"{name} must be a positive number, got {value!r}")
    return float(value)


def _choice(value, name, options):
    if value not in options:
        raise ConfigError(f"{name} must be one of {options}, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# scenarios


def _energy_summary(res, channel, d):
    out = {}
    for order in ("first", "full"):
        r = res[order]
        ref = plate_energy(channel, order)
        out[order] = {
            "value": r.value,
            "quad_error": r.quad_error,
            "plate_value": ref,
            "ratio_to_plate": r.value / ref,
            "energy_per_area": r.energy_per_area(d),
            "per_channel": r.metadata["per_channel"],
        }
    out["first_over_full"] = res["first"].value / res["full"].value
    out["truncation"] = {k: res["full"].metadata[k] for k in ("orders", "n_basis", "nodes")}
    return out


def plan_energy(cfg):
    screen = make_screen(cfg["geometry"])
    d = _positive(cfg["d"], "d")
    _choice(str(cfg["channel"]), "channel", ("em", "D", "N", "E", "M"))
    _choice(cfg["order"], "order", ("first", "full", "both"))
    params = make_params(cfg["solver"], screen, d)
    quad = make_quad(cfg["quadrature"])
    return screen, d, params, quad


def run_energy(cfg, workers):
    screen, d, params, quad = plan_energy(cfg)
    res = casimir_energy(screen, d, cfg["channel"], quad, params, workers)
    summary = _energy_summary(res, cfg["channel"], d)
    if cfg["order"] != "both":
        summary = {k: v for k, v in summary.items() if k in (cfg["order"], "truncation")}
    orders = ("first", "full") if cfg["order"] == "both" else (cfg["order"],)
    rows = [
        {"order": o, "value": res[o].value, "quad_error": res[o].quad_error, "plate_value": plate_energy(cfg["channel"], o)}
        for o in orders
    ]
    return Report(
        ["order", "value", "quad_error", "plate_value"],
        rows,
        summary,
        {"value": ENERGY_UNITS, "energy_per_area": "hbar*c/length^3"},
    )


_EM_NAMES = ("R_EE", "R_EM", "R_ME", "R_MM", "T_EE", "T_EM", "T_ME", "T_MM")


def _external_residual(cfg):
    b1, m1 = read_matrices(cfg["matrices"]["screen"])
    b2, m2 = read_matrices(cfg["matrices"]["complement"])
    if all(n in m1 for n in _EM_NAMES) and all(n in m2 for n in _EM_NAMES):
        s1 = EmBlockSet.from_matrices(b1, **{n: m1[n] for n in _EM_NAMES})
        s2 = EmBlockSet.from_matrices(b2, **{n: m2[n] for n in _EM_NAMES})
        return {"constraint": "em", "residual": babinet_residual(s1, s2)}
    for name, dname in (("D", "N"), ("N", "D")):
        if f"R_{name}" in m1 and f"R_{dname}" in m2:
            ch, dual = Channel.parse(name), Channel.parse(dname)
            R = ReflectionBlock(ch, ch, m1[f"R_{name}"], b1)
            Rc = ReflectionBlock(dual, dual, m2[f"R_{dname}"], b2)
            T = TransmissionBlock(ch, ch, m1[f"T_{name}"], b1) if f"T_{name}" in m1 else None
            Tc = TransmissionBlock(dual, dual, m2[f"T_{dname}"], b2) if f"T_{dname}" in m2 else None
            return {"constraint": f"{name}->{dname}", "residual": scalar_babinet_residual(R, T, Rc, Tc)}
    raise ConfigError("matrix files need the eight EM blocks or R_D/R_N (with optional T_D/T_N)")


def run_verify_babinet(cfg, workers):
    mats = cfg["matrices"]
    limit = _positive(cfg["max_residual"], "max_residual")
    if mats.get("screen") or mats.get("complement"):
        if not (mats.get("screen") and mats.get("complement")):
            raise ConfigError("matrices.screen and matrices.complement go together")
        row = _external_residual(cfg)
        rows = [row]
        columns = ["constraint", "residual"]
        final = row["residual"]
    else:
        screen = make_screen(cfg["geometry"])
        comp = screen.complement()
        kappa = float(cfg["kappa"])
        kt = (float(cfg["kx"]), float(cfg["ky"]))
        n_values = [int(n) for n in parse_float_list(cfg["n_basis"])]
        if not n_values or min(n_values) < 1:
            raise ConfigError("n_basis must list positive integers")
        orders = int(cfg["orders"])
        _validated(SolverParams, n_basis=max(n_values), orders=orders)
        rows = []
        for nb in n_values:
            p = SolverParams(n_basis=nb, orders=orders, tol=1e-8)
            (Rd, Td), (Rn_c, Tn_c) = solve_scalar(screen, "D", kappa, kt, p), solve_scalar(comp, "N", kappa, kt, p)
            (Rn, Tn), (Rd_c, Td_c) = solve_scalar(screen, "N", kappa, kt, p), solve_scalar(comp, "D", kappa, kt, p)
            em = babinet_residual(em_blocks_from_scalar(screen, kappa, kt, p), em_blocks_from_scalar(comp, kappa, kt, p))
            rows.append(
                {
                    "n_basis": nb,
                    "residual_D_to_N": scalar_babinet_residual(Rd, Td, Rn_c, Tn_c),
                    "residual_N_to_D": scalar_babinet_residual(Rn, Tn, Rd_c, Td_c),
                    "residual_em": em,
                }
            )
        columns = ["n_basis", "residual_D_to_N", "residual_N_to_D", "residual_em"]
        final = max(rows[-1][c] for c in columns[1:])
    summary = {"max_residual": final, "limit": limit}
    if len(rows) > 1:
        seq = [max(r[c] for c in columns[1:]) for r in rows]
        summary["monotone_decrease"] = all(b < a for a, b in zip(seq, seq[1:]))
    if not final < limit:
        raise InvariantViolation(
            f"Babinet residual {final:.3e} exceeds {limit:.1e}",
            diagnostics={"rows": rows, "config": cfg},
        )
    return Report(columns, rows, summary, {"residual": "dimensionless (max abs matrix entry)"})


def run_edge_fit(cfg, workers):
    screen = make_screen(cfg["geometry"])
    if screen.is_full or screen.is_empty:
        raise ConfigError("edge fit needs a strip screen with 0 < fill < 1")
    d_values = parse_float_list(cfg["d_values"])
    for d in d_values:
        _positive(d, "d_values entry")
    order = _choice(cfg["order"], "order", ("first", "full", "both"))
    tol = _positive(cfg["truncation_tol"], "truncation_tol")
    quad = make_quad(cfg["quadrature"])
    scan = edge_scan(screen, d_values, quad, tol, workers)
    orders = ("first", "full") if order == "both" else (order,)
    fits = {}
    rows = []
    for o in orders:
        fits[o] = {ch: asdict(fit_edge_coefficients(scan[o][ch], screen)) for ch in ("D", "N", "em")}
        for ch in ("D", "N", "em"):
            for d, r in scan[o][ch]:
                rows.append({"order": o, "channel": ch, "d": d, "value": r.value, "quad_error": r.quad_error})
    summary = {
        "fits": fits,
        "reference": {"alpha_A_full": ALPHA_AREA, "alpha_A_first": -PLATE_FIRST_EM},
        "perimeter_per_area": screen.perimeter_per_area(),
    }
    return Report(
        ["order", "channel", "d", "value", "quad_error"],
        rows,
        summary,
        {"value": ENERGY_UNITS, "alpha_A": "coefficient of hbar*c*A/d^3", "alpha_P": "coefficient of hbar*c*L/d^2"},
    )


def run_lateral_force(cfg, workers):
    lat = cfg["lattice"]
    spacing = _positive(lat["spacing"], "lattice.spacing")
    radius = float(lat["radius"])
    d = _positive(lat["d_over_spacing"], "lattice.d_over_spacing") * spacing
    rtol = _positive(lat["rtol"], "lattice.rtol")
    start, stop, n = parse_sweep(cfg["delta_sweep"])
    _validated(LatticeSpec, spacing, radius, d, 0.0, lat["n_cut"])
    rows = []
    n_cut = None
    for x in np.linspace(start, stop, n + 1):
        res = lattice_sum(LatticeSpec(spacing, radius, d, float(x) * spacing, lat["n_cut"]), rtol)
        n_cut = res.n_cut
        rows.append({"delta_over_spacing": float(x), "lateral_force_per_area": res.force, "energy_per_cell": res.energy})
    small = [r for r in rows if 0 < r["delta_over_spacing"] < 0.25]
    summary = {
        "n_cut": n_cut,
        "restoring_near_zero": bool(small) and all(r["lateral_force_per_area"] < 0 for r in small),
        "caveats": list(CAVEATS),
    }
    return Report(
        ["delta_over_spacing", "lateral_force_per_area", "energy_per_cell"],
        rows,
        summary,
        {"lateral_force_per_area": "hbar*c/length^4", "energy_per_cell": "hbar*c/length", "delta_over_spacing": "1"},
    )


def run_feasibility(cfg, workers):
    c = cfg["conductor"]
    sigma = c["sigma"]
    if isinstance(sigma, str) and sigma.lower() in ("inf", "infinity"):
        sigma = math.inf
    sigma = _positive(sigma, "conductor.sigma")
    d = _positive(c["d"], "conductor.d")
    t = None if c.get("thickness") is None else _positive(c["thickness"], "conductor.thickness")
    win = _validated(thickness_window, sigma, d, float(cfg["margin"]), t)
    summary = win.to_dict()
    return Report(list(summary), [summary], summary, {"all lengths": "m", "sigma": "S/m"}, single=True)


def richardson(values):
    """Error estimates for a sequence of results at doubling resolution.

    With successive changes ``c_k`` and ratio ``rho = c_k / c_{k-1}``, the
    remaining error after step k is ``|c_k| rho / (1 - rho)`` when
    ``0 < rho < 1`` (geometric convergence) and ``|c_k|`` otherwise.
    """
    est = [math.nan]
    for k in range(1, len(values)):
        ck = values[k] - values[k - 1]
        if k >= 2:
            prev = values[k - 1] - values[k - 2]
            rho = ck / prev if prev != 0 else math.nan
            est.append(abs(ck) * rho / (1 - rho) if 0 < rho < 1 else abs(ck))
        else:
            est.append(abs(ck))
    return est


def _digits(value, err):
    if not math.isfinite(err):
        return 0
    if err == 0:
        return 16
    return max(0, int(math.floor(-math.log10(abs(err / value))))) if value else 0


def run_convergence_sweep(cfg, workers):
    base = _choice(cfg["base"], "base", ("energy", "babinet"))
    axis = _choice(cfg["axis"], "axis", ("nodes", "n_basis", "orders"))
    values = [int(v) for v in parse_float_list(cfg["values"])]
    if not values or min(values) < 1:
        raise ConfigError("values must be positive integers")
    rows = []
    if base == "babinet":
        if axis != "n_basis":
            raise ConfigError("the babinet sweep runs along n_basis")
        orders = cfg["solver"]["orders"] if cfg["solver"]["orders"] is not None else 4
        sub = dict(cfg, n_basis=values, orders=orders, max_residual=math.inf, matrices={"screen": None, "complement": None})
        rep = run_verify_babinet(sub, workers)
        for r in rep.rows:
            rows.append({"resolution": r["n_basis"], "residual": max(r[c] for c in rep.columns[1:])})
        seq = [r["residual"] for r in rows]
        summary = {"monotone_decrease": all(b < a for a, b in zip(seq, seq[1:]))}
        return Report(["resolution", "residual"], rows, summary, {"residual": "dimensionless"})

    screen = make_screen(cfg["geometry"])
    d = _positive(cfg["d"], "d")
    params = make_params(cfg["solver"], screen, d)
    quad = make_quad(cfg["quadrature"])
    for v in values:
        if axis == "nodes":
            q, p = replace(quad, n_radial=max(2, v), n_bloch=max(2, v)), params
        elif axis == "n_basis":
            q, p = quad, replace(params, n_basis=v)
        else:
            q, p = quad, replace(params, orders=v)
        res = casimir_energy(screen, d, cfg["channel"], q, p, workers)
        rows.append(
            {
                "resolution": v,
                "first": res["first"].value,
                "full": res["full"].value,
                "first_over_full": res["first"].value / res["full"].value,
            }
        )
    full = [r["full"] for r in rows]
    errs = richardson(full)
    for r, e, prev in zip(rows, errs, [None] + full[:-1]):
        r["change"] = math.nan if prev is None else r["full"] - prev
        r["error_estimate"] = e
    changes = [abs(r["change"]) for r in rows[1:]]
    summary = {
        "converged_digits": _digits(full[-1], errs[-1]) if len(rows) > 1 else 0,
        "monotone_changes": all(b <= a for a, b in zip(changes, changes[1:])),
        "plate_first_over_full": 90.0 / math.pi**4,
    }
    return Report(
        ["resolution", "first", "full", "first_over_full", "change", "error_estimate"],
        rows,
        summary,
        {"first": ENERGY_UNITS, "full": ENERGY_UNITS},
    )


RUNNERS = {
    "verify-babinet": run_verify_babinet,
    "energy": run_energy,
    "edge-fit": run_edge_fit,
    "lateral-force": run_lateral_force,
    "feasibility": run_feasibility,
    "convergence-sweep": run_convergence_sweep,
}


# ---------------------------------------------------------------------------
# output


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def render(report: Report, cfg: dict, fmt: str) -> str:
    header = {"tool": "casimir-babinet", "version": __version__, "scenario": cfg["scenario"], "config": cfg}
    if fmt == "json":
        doc = dict(header, units=report.units, summary=report.summary)
        if report.rows and not report.single:
            doc["table"] = report.rows
        return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# casimir-babinet {__version__} scenario={cfg['scenario']}\n")
    buf.write("# config: " + json.dumps(_jsonable(cfg), sort_keys=True) + "\n")
    buf.write("# units: " + json.dumps(report.units, sort_keys=True) + "\n")
    writer = csv.DictWriter(buf, fieldnames=report.columns, lineterminator="\n")
    writer.writeheader()
    for row in report.rows:
        writer.writerow({k: repr(float(v)) if isinstance(v, (float, np.floating)) else v for k, v in row.items()})
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument parsing


def _add_geometry(p):
    p.add_argument("--geometry", dest="geometry.kind", choices=["plates", "strips"])
    p.add_argument("--period", dest="geometry.period", type=float)
    p.add_argument("--fill", dest="geometry.fill", type=float)
    p.add_argument("--offset", dest="geometry.offset", type=float)


def _add_momentum(p):
    p.add_argument("--kappa", type=float)
    p.add_argument("--kx", type=float)
    p.add_argument("--ky", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casimir-babinet",
        description="Casimir energies of perforated mirrors and Babinet checks of strip-grating solvers.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML scenario file (see docs/config.md)")
    common.add_argument("--workers", type=int, default=None, help="process count; results do not depend on it")
    common.add_argument("--output", "-o", help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], help="output format")
    sub = parser.add_subparsers(dest="scenario", required=True)

    p = sub.add_parser("verify-babinet", parents=[common], help="residuals of the Babinet relations")
    _add_geometry(p)
    _add_momentum(p)
    p.add_argument("--orders", type=int)
    p.add_argument("--n-basis", dest="n_basis", help="comma-separated basis sizes")
    p.add_argument("--max-residual", dest="max_residual", type=float)
    p.add_argument("--screen-matrices", dest="matrices.screen", help="interchange file for the screen")
    p.add_argument("--complement-matrices", dest="matrices.complement", help="interchange file for the complement")

    p = sub.add_parser("energy", parents=[common], help="screen-mirror Casimir energy")
    _add_geometry(p)
    p.add_argument("--d", type=float, help="screen-mirror separation")
    p.add_argument("--channel", choices=["em", "D", "N", "E", "M"])
    p.add_argument("--order", choices=["first", "full", "both"])
    p.add_argument("--n-radial", dest="quadrature.n_radial", type=int)
    p.add_argument("--n-bloch", dest="quadrature.n_bloch", type=int)
    p.add_argument("--n-basis", dest="solver.n_basis", type=int)
    p.add_argument("--orders", dest="solver.orders", type=int)

    p = sub.add_parser("edge-fit", parents=[common], help="area/perimeter coefficients from a small-d scan")
    _add_geometry(p)
    p.add_argument("--d-values", dest="d_values", help="comma-separated separations")
    p.add_argument("--order", choices=["first", "full", "both"])
    p.add_argument("--truncation-tol", dest="truncation_tol", type=float)

    p = sub.add_parser("lateral-force", parents=[common], help="lateral force between perforated plates")
    p.add_argument("--delta-sweep", dest="delta_sweep", help="start:stop:n in units of the spacing (n intervals)")
    p.add_argument("--d-over-spacing", dest="lattice.d_over_spacing", type=float)
    p.add_argument("--spacing", dest="lattice.spacing", type=float)
    p.add_argument("--radius", dest="lattice.radius", type=float)
    p.add_argument("--n-cut", dest="lattice.n_cut", type=int)

    p = sub.add_parser("feasibility", parents=[common], help="thickness window of a real metal film")
    p.add_argument("--sigma", dest="conductor.sigma", type=float, help="conductivity, S/m")
    p.add_argument("--d", dest="conductor.d", type=float, help="separation, m")
    p.add_argument("--thickness", dest="conductor.thickness", type=float, help="film thickness, m")
    p.add_argument("--margin", type=float)

    p = sub.add_parser("convergence-sweep", parents=[common], help="results against resolution")
    _add_geometry(p)
    _add_momentum(p)
    p.add_argument("--base", choices=["energy", "babinet"])
    p.add_argument("--axis", choices=["nodes", "n_basis", "orders"])
    p.add_argument("--values", help="comma-separated resolutions")
    p.add_argument("--d", type=float)
    p.add_argument("--channel", choices=["em", "D", "N", "E", "M"])
    return parser


_COMMON = ("config", "workers", "output", "format", "scenario")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    scenario = args.scenario
    try:
        file_data = load_file(args.config) if args.config else {}
        extras = file_extras(file_data)
        overrides = {k: v for k, v in vars(args).items() if k not in _COMMON}
        for key, kind in (("n_basis", int), ("d_values", float), ("values", int)):
            if overrides.get(key) is not None:
                overrides[key] = [kind(x) for x in parse_float_list(overrides[key])]
        cfg = resolve(scenario, file_data, overrides)
        workers = args.workers if args.workers is not None else int(extras.get("workers", 1))
        if workers < 1:
            raise ConfigError("--workers must be >= 1")
        fmt = args.format or extras.get("format") or DEFAULT_FORMAT[scenario]
        if fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {fmt!r}")
        output = args.output or extras.get("path")
        report = RUNNERS[scenario](cfg, workers)
        text = render(report, cfg, fmt)
        if output:
            with open(output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    except InvariantViolation as exc:
        sys.stderr.write(f"invariant violation: {exc}\n")
        sys.stderr.write(json.dumps(_jsonable(exc.diagnostics), indent=2, default=str) + "\n")
        return exc.exit_code
    except CasimirError as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
