"""Command-line interface and file formats.

Exit codes: 0 success, 1 a check suite failed, 2 invalid input, 3 numerical
guard (complex-shift overflow, RK4 stability bound, non-finite values).
Errors are reported on stderr as a one-line JSON object.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import tempfile
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__, checks, dynamics, grid as gridmod, moments, star, states, symbol, transform
from .grid import Grid, GridError, OverflowGuardError, WavefunctionGrid, make_grid, to_momentum
from .transform import PhaseSpaceFunction, format_complex

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_GUARD = 0, 1, 2, 3

CONSTANTS = {
    "noise_floor": transform.NOISE_FLOOR,
    "max_exponent": gridmod.DEFAULT_MAX_EXPONENT,
    "edge_tolerance": gridmod.EDGE_TOLERANCE,
    "density_floor": moments.DENSITY_FLOOR,
    "boundary_tolerance": moments.BOUNDARY_TOLERANCE,
    "max_phase_step": moments.MAX_PHASE_STEP,
    "rk4_stability": dynamics.RK4_STABILITY,
    "cross_tolerance": dynamics.CROSS_TOLERANCE,
}


class InputError(ValueError):
    """Malformed flags, specs or files."""


# ---- parsing helpers ---------------------------------------------------------

def parse_complex(text: str) -> complex:
    """``a+bi`` (no spaces), ``a``, ``bi``; ``j`` is accepted for ``i``."""
    t = text.strip()
    if not t or " " in t:
        raise InputError(f"bad complex number {text!r}")
    try:
        return complex(t.replace("i", "j"))
    except ValueError:
        raise InputError(f"bad complex number {text!r}") from None


def parse_grid(text: str, hbar: float) -> Grid:
    parts = text.split(",")
    if len(parts) != 3:
        raise InputError("--grid expects N,qmin,qmax")
    try:
        n, lo, hi = int(parts[0]), float(parts[1]), float(parts[2])
    except ValueError:
        raise InputError(f"bad grid {text!r}") from None
    return make_grid(n, lo, hi, hbar)


def _kv(body: str, allowed: Sequence[str], what: str) -> Dict[str, float]:
    out: Dict[str, float] = {}
    if not body:
        return out
    for item in body.split(","):
        if "=" not in item:
            raise InputError(f"{what}: expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        k = k.strip()
        if k not in allowed:
            raise InputError(f"{what}: unknown key {k!r}; allowed {list(allowed)}")
        try:
            out[k] = float(v)
        except ValueError:
            raise InputError(f"{what}: {k} must be a number") from None
    return out


def parse_wkb_fields(body: str) -> states.WkbFields:
    """``p0,a,w,q0,dsdt,m``: rho Gaussian (q0, w), S = p0 q + a q^2, constant dS/dt."""
    kv = _kv(body, ("p0", "a", "w", "q0", "dsdt", "m"), "wkb")
    p0, a = kv.get("p0", 0.0), kv.get("a", 0.0)
    mass = kv.get("m", 1.0)
    # default dS/dt makes the plane-wave part an exact free solution
    dsdt = kv.get("dsdt", -p0**2 / (2 * mass))
    return states.WkbFields(
        rho_fn=states.gaussian_density(kv.get("q0", 0.0), kv.get("w", 1.0)),
        s_action_fn=lambda q: p0 * q + a * q**2,
        dS_dt_fn=lambda q: np.full_like(q, dsdt),
        mass=mass,
    )


def parse_state(spec: str, g: Grid) -> WavefunctionGrid:
    kind, _, body = spec.partition(":")
    if kind == "gaussian":
        kv = _kv(body, ("q0", "p0", "w"), "gaussian")
        return states.gaussian_state(g, kv.get("q0", 0.0), kv.get("p0", 0.0), kv.get("w", 1.0))
    if kind == "ho":
        kv = _kv(body, ("n",), "ho")
        n = kv.get("n", 0.0)
        if n != int(n):
            raise InputError("ho: n must be an integer")
        return states.ho_eigenstate(g, int(n))
    if kind == "wkb":
        return states.wkb_state(g, parse_wkb_fields(body))
    if kind == "file":
        return read_wavefunction(Path(body), g)
    raise InputError(f"unknown state kind {kind!r}; use gaussian:, ho:, wkb: or file:")


def parse_hamiltonian(spec: str) -> dynamics.HamiltonianSpec:
    kind, _, body = spec.partition(":")
    if kind not in ("free", "harmonic"):
        raise InputError("hamiltonian must be free[:m=..] or harmonic[:m=..,omega=..]")
    kv = _kv(body, ("m", "omega"), kind)
    return dynamics.HamiltonianSpec(kind, kv.get("m", 1.0), kv.get("omega", 1.0))


# ---- file formats ------------------------------------------------------------

def _g(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _grid_header(g: Grid) -> str:
    return f"n={g.n_points},qmin={_g(g.q_min)},qmax={_g(g.q_max)},hbar={_g(g.hbar)}"


def psf_text(a: PhaseSpaceFunction) -> str:
    g = a.grid
    lines = ["# psf v1", f"# {_grid_header(g)},s={format_complex(a.s.value)}", f"# kind={a.kind}"]
    q, p = g.q_values, g.p_values
    z = a.samples
    for i in range(g.n_points):
        qi = _g(q[i])
        lines.extend(f"{qi},{_g(p[k])},{_g(z[i, k].real)},{_g(z[i, k].imag)}" for k in range(g.n_points))
    return "\n".join(lines) + "\n"


def _parse_header(line: str) -> Dict[str, str]:
    body = line.lstrip("#").strip()
    return dict(item.split("=", 1) for item in body.split(",") if "=" in item)


def _grid_from_header(h: Dict[str, str]) -> Grid:
    try:
        return make_grid(int(h["n"]), float(h["qmin"]), float(h["qmax"]), float(h["hbar"]))
    except KeyError as exc:
        raise InputError(f"header is missing {exc.args[0]}") from None


def read_psf(path: Path) -> PhaseSpaceFunction:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "# psf v1":
        raise InputError(f"{path}: not a psf v1 file")
    h = _parse_header(lines[1])
    g = _grid_from_header(h)
    kind = "state-symbol"
    start = 2
    if len(lines) > 2 and lines[2].startswith("# kind="):
        kind = lines[2].split("=", 1)[1].strip()
        start = 3
    data = np.loadtxt(lines[start:], delimiter=",", ndmin=2)
    n = g.n_points
    if data.shape != (n * n, 4):
        raise InputError(f"{path}: expected {n * n} rows of q,p,re,im")
    z = (data[:, 2] + 1j * data[:, 3]).reshape(n, n)
    return PhaseSpaceFunction(g, z, parse_complex(h.get("s", "0")), kind)


def opm_text(a: symbol.OperatorMatrix) -> str:
    lines = ["# opm v1", f"# {_grid_header(a.grid)}"]
    e = a.entries
    n = a.grid.n_points
    for i in range(n):
        lines.extend(f"{i},{j},{_g(e[i, j].real)},{_g(e[i, j].imag)}" for j in range(n))
    return "\n".join(lines) + "\n"


def read_opm(path: Path) -> symbol.OperatorMatrix:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "# opm v1":
        raise InputError(f"{path}: not an opm v1 file")
    g = _grid_from_header(_parse_header(lines[1]))
    data = np.loadtxt(lines[2:], delimiter=",", ndmin=2)
    n = g.n_points
    e = np.zeros((n, n), dtype=complex)
    idx = data[:, :2].astype(int)
    if np.any(idx < 0) or np.any(idx >= n):
        raise InputError(f"{path}: index out of range")
    e[idx[:, 0], idx[:, 1]] = data[:, 2] + 1j * data[:, 3]
    return symbol.OperatorMatrix(g, e)


def wavefunction_text(psi: WavefunctionGrid) -> str:
    lines = ["# wf v1", f"# {_grid_header(psi.grid)}"]
    lines.extend(f"{_g(q)},{_g(z.real)},{_g(z.imag)}" for q, z in zip(psi.grid.q_values, psi.samples))
    return "\n".join(lines) + "\n"


def read_wavefunction(path: Path, g: Optional[Grid] = None) -> WavefunctionGrid:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "# wf v1":
        raise InputError(f"{path}: not a wf v1 file")
    fg = _grid_from_header(_parse_header(lines[1]))
    if g is not None and fg != g:
        raise InputError(f"{path}: grid {fg} does not match --grid {g}")
    data = np.loadtxt(lines[2:], delimiter=",", ndmin=2)
    if data.shape != (fg.n_points, 3):
        raise InputError(f"{path}: expected {fg.n_points} rows of q,re,im")
    return WavefunctionGrid(fg, data[:, 1] + 1j * data[:, 2])


def profile_text(p: moments.MomentProfile) -> str:
    lines = [f"# moment v1 order={p.order},s={format_complex(p.s.value)}", "q,re,im"]
    lines.extend(f"{_g(q)},{_g(v.real)},{_g(v.imag)}" for q, v in zip(p.q_values, p.values))
    return "\n".join(lines) + "\n"


def grid_dict(g: Grid) -> dict:
    return {"n": g.n_points, "qmin": g.q_min, "qmax": g.q_max, "hbar": g.hbar}


def write_manifest(path: Path, command: str, args: argparse.Namespace, outputs: List[str],
                   g: Optional[Grid] = None, extra: Optional[dict] = None) -> None:
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    doc = {"tool": "sweyl", "version": __version__, "command": command, "parameters": params,
           "grid": grid_dict(g) if g else None, "constants": CONSTANTS, "outputs": outputs}
    if extra:
        doc.update(extra)
    atomic_write(path, json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")


def _manifest_path(out: Path, given: Optional[str]) -> Path:
    return Path(given) if given else out.with_name(out.name + ".manifest.json")


# ---- subcommands -------------------------------------------------------------

WIGNER_ROUTES = ("position", "momentum", "kirkwood", "characteristic")


def cmd_wigner(args) -> int:
    g = parse_grid(args.grid, args.hbar)
    psi = parse_state(args.state, g)
    s = parse_complex(args.s)
    kw = {"max_exponent": args.max_exponent}
    if args.route == "position":
        a = transform.s_wigner(psi, s, **kw)
    elif args.route == "momentum":
        a = transform.s_wigner_momentum(to_momentum(psi), s, **kw)
    elif args.route == "kirkwood":
        a = transform.s_wigner_kirkwood(psi, s, **kw)
    else:
        a = transform.wigner_from_characteristic(transform.characteristic(psi, s, **kw))
    out = Path(args.out)
    atomic_write(out, psf_text(a))
    write_manifest(_manifest_path(out, args.manifest), "wigner", args, [str(out)], g,
                   {"max_abs_imag": float(np.abs(a.samples.imag).max())})
    return EXIT_OK


def _builtin_operator(spec: str, g: Grid) -> symbol.OperatorMatrix:
    if spec == "identity":
        return symbol.identity_operator(g)
    if spec == "position":
        return symbol.position_operator(g)
    if spec == "momentum":
        return symbol.momentum_operator(g)
    if spec.startswith("projector:"):
        return symbol.projector(parse_state(spec.split(":", 1)[1], g))
    if spec.startswith("file:"):
        a = read_opm(Path(spec.split(":", 1)[1]))
        if a.grid != g:
            raise InputError("operator file grid does not match --grid")
        return a
    raise InputError("operator must be identity, position, momentum, projector:STATE or file:PATH")


def cmd_symbol(args) -> int:
    out = Path(args.out)
    if args.inverse:
        w = read_psf(Path(args.inverse))
        a = symbol.symbol_to_operator(w)
        atomic_write(out, opm_text(a))
        write_manifest(_manifest_path(out, args.manifest), "symbol", args, [str(out)], w.grid)
        return EXIT_OK
    if not (args.operator and args.grid):
        raise InputError("symbol needs --operator and --grid (or --inverse PSF)")
    g = parse_grid(args.grid, args.hbar)
    a = _builtin_operator(args.operator, g)
    s = parse_complex(args.s)
    w = (symbol.state_symbol(a, s) if args.kind == "state-symbol"
         else symbol.operator_to_symbol(a, s, max_exponent=args.max_exponent))
    atomic_write(out, psf_text(w))
    write_manifest(_manifest_path(out, args.manifest), "symbol", args, [str(out)], g)
    return EXIT_OK


def cmd_star(args) -> int:
    a, b = read_psf(Path(args.a)), read_psf(Path(args.b))
    s = a.s if args.s is None else parse_complex(args.s)
    if args.commutator:
        c = star.commutator_symbol(a, b, s, route=args.route)
    else:
        c = star.star_product(a, b, s)
    out = Path(args.out)
    atomic_write(out, psf_text(c))
    write_manifest(_manifest_path(out, args.manifest), "star", args, [str(out)], a.grid)
    return EXIT_OK


def cmd_evolve(args) -> int:
    g = parse_grid(args.grid, args.hbar)
    psi = parse_state(args.state, g)
    h = parse_hamiltonian(args.hamiltonian)
    s = parse_complex(args.s)
    if args.dt <= 0:
        raise InputError("--dt must be positive")
    if args.t is not None:
        if args.t < 0:
            raise InputError("--t must be nonnegative")
        n_steps = math.ceil(args.t / args.dt - 1e-12) if args.t > 0 else 0
        dt = args.t / n_steps if n_steps else args.dt
    else:
        n_steps, dt = args.steps, args.dt
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: List[str] = []
    extra: dict = {}
    if args.method == "cross":
        rep = dynamics.cross_validate(psi, h, s, n_steps * dt, dt)
        extra["cross_validation"] = rep.to_dict()
        print(json.dumps(rep.to_dict(), sort_keys=True))
    else:
        if args.method == "moyal":
            res = dynamics.evolve_moyal(transform.s_wigner(psi, s), h, s, dt, n_steps, args.save_every)
            for i, snap in enumerate(res.snapshots):
                path = out_dir / f"snapshot_{i:05d}.csv"
                atomic_write(path, psf_text(snap))
                outputs.append(str(path))
            diag = {"total_mass": [[m.real, m.imag] for m in res.diagnostics["total_mass"]],
                    "max_mass_drift": res.diagnostics["max_mass_drift"],
                    "spectral_scale": res.diagnostics["spectral_scale"],
                    "growth_bound": res.diagnostics["growth_bound"]}
        else:
            res = dynamics.evolve_schrodinger(psi, h, dt, n_steps, args.save_every)
            for i, snap in enumerate(res.snapshots):
                path = out_dir / f"wavefunction_{i:05d}.csv"
                atomic_write(path, wavefunction_text(snap))
                outputs.append(str(path))
            diag = {"norm": res.diagnostics["norm"], "max_norm_drift": res.diagnostics["max_norm_drift"]}
        extra = {"times": res.times, "diagnostics": diag}
    write_manifest(out_dir / "manifest.json", "evolve", args, outputs, g,
                   dict(extra, dt_effective=dt, n_steps=n_steps))
    return EXIT_OK


def cmd_moments(args) -> int:
    if args.psf:
        a = read_psf(Path(args.psf))
        prof = moments.conditional_moment(a, args.order)
        g = a.grid
    else:
        if not (args.state and args.grid):
            raise InputError("moments needs --psf or --state with --grid")
        g = parse_grid(args.grid, args.hbar)
        psi = parse_state(args.state, g)
        s = parse_complex(args.s)
        if args.analytic:
            if args.order not in (1, 2):
                raise InputError("analytic moments exist for orders 1 and 2")
            fn = moments.analytic_first_moment if args.order == 1 else moments.analytic_second_moment
            prof = fn(psi, s)
        else:
            prof = moments.conditional_moment(transform.s_wigner(psi, s), args.order)
    out = Path(args.out)
    atomic_write(out, profile_text(prof))
    write_manifest(_manifest_path(out, args.manifest), "moments", args, [str(out)], g,
                   {"undefined_points": int((~prof.defined).sum())})
    return EXIT_OK


def _float_list(text: str, what: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise InputError(f"{what}: expected comma-separated numbers") from None


def cmd_scan(args) -> int:
    g = parse_grid(args.grid, 1.0)
    kind, _, body = args.fields.partition(":")
    if kind != "wkb":
        raise InputError("--fields must be wkb:p0=..,a=..,w=..,q0=..,dsdt=..,m=..")
    fields = parse_wkb_fields(body)
    s_samples = [parse_complex(x) for x in args.s_samples.split(",") if x]
    report = moments.classical_limit_scan(fields, s_samples, _float_list(args.hbar_samples, "--hbar-samples"),
                                          g, include_profiles=args.profiles)
    out = Path(args.out)
    doc = report.to_dict()
    atomic_write(out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    keys = ["hbar", "p1_s0_vs_gradS", "p1_s1_max", "p2_s0_vs_gradS2", "p2_s2_max", "p2_s2_vs_minus_mR"]
    rows = [",".join(keys)] + [",".join(_g(row[k]) for k in keys) for row in doc["per_hbar"]]
    csv_path = out.with_suffix(".csv")
    atomic_write(csv_path, "\n".join(rows) + "\n")
    write_manifest(_manifest_path(out, args.manifest), "scan", args, [str(out), str(csv_path)], g)
    return EXIT_OK


def cmd_check(args) -> int:
    names = checks.SUITE_NAMES if args.suite == "all" else [args.suite]
    if args.suite != "all" and args.suite not in checks.SUITE_NAMES:
        raise InputError(f"unknown suite {args.suite!r}; choose from {checks.SUITE_NAMES + ['all']}")
    results = []
    for name in names:
        r = checks.run_suite(name)
        print(r.line(), flush=True)
        results.append(r)
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} suites passed")
    if args.json:
        atomic_write(Path(args.json), json.dumps({"version": __version__, "constants": CONSTANTS,
                                                  "results": [r.to_dict() for r in results]},
                                                 indent=2, sort_keys=True) + "\n")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# ---- parser ------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sweyl", description="s-parameterized phase-space calculus on periodic grids")
    p.add_argument("--version", action="version", version=f"sweyl {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, state=True):
        sp.add_argument("--grid", help="N,qmin,qmax")
        sp.add_argument("--hbar", type=float, default=1.0)
        sp.add_argument("--s", default="0", help="ordering parameter, a+bi")
        sp.add_argument("--manifest", help="manifest path (default: OUT.manifest.json)")
        sp.add_argument("--max-exponent", type=float, default=gridmod.DEFAULT_MAX_EXPONENT)
        if state:
            sp.add_argument("--state", help="gaussian:q0=..,p0=..,w=.. | ho:n=.. | wkb:... | file:PATH")

    w = sub.add_parser("wigner", help="s-Wigner function of a state")
    common(w)
    w.add_argument("--route", choices=WIGNER_ROUTES, default="position")
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_wigner)

    sy = sub.add_parser("symbol", help="operator -> symbol, or symbol -> operator with --inverse")
    common(sy, state=False)
    sy.add_argument("--operator", help="identity | position | momentum | projector:STATE | file:OPM")
    sy.add_argument("--kind", choices=("operator-symbol", "state-symbol"), default="operator-symbol")
    sy.add_argument("--inverse", metavar="PSF")
    sy.add_argument("--out", required=True)
    sy.set_defaults(func=cmd_symbol)

    st = sub.add_parser("star", help="star product or commutator of two symbol files")
    st.add_argument("--a", required=True)
    st.add_argument("--b", required=True)
    st.add_argument("--s", default=None, help="defaults to the files' s")
    st.add_argument("--commutator", action="store_true")
    st.add_argument("--route", choices=("star", "sine"), default="star")
    st.add_argument("--manifest")
    st.add_argument("--out", required=True)
    st.set_defaults(func=cmd_star)

    ev = sub.add_parser("evolve", help="Moyal or Schrödinger time evolution")
    common(ev)
    ev.add_argument("--hamiltonian", default="harmonic", help="free[:m=..] | harmonic[:m=..,omega=..]")
    ev.add_argument("--method", choices=("moyal", "schrodinger", "cross"), default="moyal")
    ev.add_argument("--dt", type=float, default=dynamics.DEFAULT_DT)
    ev.add_argument("--steps", type=int, default=100)
    ev.add_argument("--t", type=float, default=None, help="total time; overrides --steps")
    ev.add_argument("--save-every", type=int, default=None)
    ev.add_argument("--out-dir", required=True)
    ev.set_defaults(func=cmd_evolve)

    mo = sub.add_parser("moments", help="space-conditional momentum moments")
    common(mo)
    mo.add_argument("--psf", help="state-symbol file instead of --state")
    mo.add_argument("--order", type=int, default=1)
    mo.add_argument("--analytic", action="store_true", help="log-derivative formulas instead of grid integrals")
    mo.add_argument("--out", required=True)
    mo.set_defaults(func=cmd_moments)

    sc = sub.add_parser("scan", help="classical-limit scan over s and hbar")
    sc.add_argument("--fields", required=True, help="wkb:p0=..,a=..,w=..,q0=..,dsdt=..,m=..")
    sc.add_argument("--grid", required=True)
    sc.add_argument("--s-samples", default="-0.5,0,0.5")
    sc.add_argument("--hbar-samples", default="0.4,0.2,0.1")
    sc.add_argument("--profiles", action="store_true", help="include per-q coefficient tables")
    sc.add_argument("--manifest")
    sc.add_argument("--out", required=True)
    sc.set_defaults(func=cmd_scan)

    ch = sub.add_parser("check", help="run invariant suites")
    ch.add_argument("--suite", default="all", help="all or one of: " + ", ".join(checks.SUITE_NAMES))
    ch.add_argument("--json", help="write results as JSON")
    ch.set_defaults(func=cmd_check)
    return p


def _fail(code: int, exc: BaseException, **extra) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    payload.update(extra)
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "state", None) and not getattr(args, "grid", None):
            raise InputError("--state needs --grid")
        return args.func(args)
    except OverflowGuardError as exc:
        extra = {"exponent": exc.exponent, "limit": exc.limit}
        if hasattr(exc, "max_imag_s"):
            extra["max_admissible_imag_s"] = exc.max_imag_s
        return _fail(EXIT_GUARD, exc, **extra)
    except dynamics.NonFiniteError as exc:
        return _fail(EXIT_GUARD, exc, step=exc.step)
    except (ArithmeticError, moments.UnderResolvedPhase) as exc:
        return _fail(EXIT_GUARD, exc)
    except (InputError, GridError, ValueError, KeyError, TypeError, OSError) as exc:
        return _fail(EXIT_INVALID, exc)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
