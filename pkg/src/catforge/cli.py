"""catforge command line: design working points, sweep curves, simulate,
cross-verify the engine against the number-basis integrator, and score
coherent-output discrimination.

Exit codes: 0 success, 2 usage error, 3 designer found no solution,
4 engine/integration failure, 5 verification failure.

All output is deterministic byte for byte for a given invocation: floats are
printed with 9 significant digits (negative zero normalized), JSON keys keep
a fixed order, and sweep columns are collected in flag order regardless of
thread scheduling.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from ._backend import thread_count
from .closedform import coherence_c, discrimination_efficiency
from .design import (
    UNIT_MODES,
    DesignSpec,
    design,
    design_table,
    sweep_curves,
)
from .engine import (
    Channel,
    ChannelConfig,
    XpmParams,
    evolve_sliced,
    qubit_coherence,
    run_asymmetric,
    run_double_xpm,
    xpm_input_state,
)
from .errors import CutoffError, EngineError, NoSolutionError, PoleError
from .fock import (
    dyad_to_fock,
    extract_coherence,
    integrate,
    trace_distance,
    xpm_input_density,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_SOLUTION = 3
EXIT_ENGINE = 4
EXIT_VERIFY = 5


def _fmt(x: float) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0
    return f"{x:.8e}"


def _to_json(value, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        body = ",\n".join(
            f'{pad}  "{key}": {_to_json(item, indent + 1)}'
            for key, item in value.items()
        )
        return "{\n" + body + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        body = ",\n".join(f"{pad}  {_to_json(item, indent + 1)}" for item in value)
        return "[\n" + body + "\n" + pad + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, complex):
        return _to_json({"re": value.real, "im": value.imag}, indent)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _fmt(value)
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _emit(ns, text: str) -> None:
    if getattr(ns, "output", None):
        Path(ns.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _err(message) -> None:
    print(f"catforge: error: {message}", file=sys.stderr)


def _complex_arg(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {text!r}")


def _ratio_phase_arg(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) == 2:
        try:
            ratio, phi = float(parts[0]), float(parts[1])
        except ValueError:
            ratio = math.nan
        if math.isfinite(ratio) and ratio > 0.0:
            return ratio, phi
    raise argparse.ArgumentTypeError(f"expected RATIO,PHI with RATIO > 0, got {text!r}")


# -- config files ------------------------------------------------------------

def _find_config(argv: list[str]) -> str | None:
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if token.startswith("--config="):
            return token.split("=", 1)[1]
    return None


def _load_config(path: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        pairs[key.strip().replace("-", "_")] = value.strip()
    return pairs


_TRUE_WORDS = ("1", "true", "yes", "on")
_FALSE_WORDS = ("0", "false", "no", "off")


def _apply_config(sub: argparse.ArgumentParser, pairs: dict[str, str], path: str) -> None:
    """Install config pairs as parser defaults, so explicit flags still win."""
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in pairs.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise ValueError(f"{path}: unknown key {key!r}")
        if action.const is True:
            word = raw.lower()
            if word in _TRUE_WORDS:
                defaults[key] = True
            elif word in _FALSE_WORDS:
                defaults[key] = False
            else:
                raise ValueError(f"{path}: {key} must be boolean, got {raw!r}")
        elif isinstance(action, argparse._AppendAction):
            defaults[key] = [action.type(part) for part in raw.split(",")]
        elif action.type is not None:
            try:
                defaults[key] = action.type(raw)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ValueError(f"{path}: bad value for {key}: {exc}")
        else:
            defaults[key] = raw
    sub.set_defaults(**defaults)


# -- output renderers --------------------------------------------------------

def _csv(rows) -> str:
    lines = ["tau,value,gamma_ratio"]
    for tau, value, big_gamma in rows:
        middle = _fmt(value) if value is not None else ""
        lines.append(f"{_fmt(tau)},{middle},{_fmt(big_gamma)}")
    return "\n".join(lines) + "\n"


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")


def _svg(rows, kind: str) -> str:
    width, height = 720, 480
    ml, mr, mt, mb = 70, 20, 20, 50
    groups: dict[float, list] = {}
    for tau, value, big_gamma in rows:
        groups.setdefault(big_gamma, []).append((tau, value))
    xs = [row[0] for row in rows]
    ys = [row[1] for row in rows if row[1] is not None and math.isfinite(row[1])]
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x1 = x0 + 1.0
    if ys:
        y0, y1 = min(ys), max(ys)
    else:
        y0, y1 = 0.0, 1.0
    pad = 0.05 * (y1 - y0) or 0.5
    y0 -= pad
    y1 += pad

    def sx(t: float) -> float:
        return ml + (t - x0) / (x1 - x0) * (width - ml - mr)

    def sy(v: float) -> float:
        return height - mb - (v - y0) / (y1 - y0) * (height - mt - mb)

    label = "coherence_c" if kind == "c" else "big_g"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" y2="{height - mb}" '
        'stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height - mb}" stroke="black"/>',
        f'<text x="{(ml + width - mr) / 2:.0f}" y="{height - 12}" '
        'text-anchor="middle">tau</text>',
        f'<text x="16" y="{(mt + height - mb) / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(mt + height - mb) / 2:.0f})">{label}</text>',
    ]
    for i in range(5):
        t = x0 + (x1 - x0) * i / 4
        parts.append(
            f'<line x1="{sx(t):.2f}" y1="{height - mb}" x2="{sx(t):.2f}" '
            f'y2="{height - mb + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{sx(t):.2f}" y="{height - mb + 18}" '
            f'text-anchor="middle">{t:.4g}</text>'
        )
    for i in range(5):
        v = y0 + (y1 - y0) * i / 4
        parts.append(
            f'<line x1="{ml - 5}" y1="{sy(v):.2f}" x2="{ml}" y2="{sy(v):.2f}" '
            'stroke="black"/>'
        )
        parts.append(
            f'<text x="{ml - 8}" y="{sy(v) + 4:.2f}" '
            f'text-anchor="end">{v:.4g}</text>'
        )
    for idx, (big_gamma, column) in enumerate(groups.items()):
        color = _PALETTE[idx % len(_PALETTE)]
        segment: list[str] = []
        segments: list[list[str]] = []
        for tau, value in column:
            if value is None or not math.isfinite(value):
                if segment:
                    segments.append(segment)
                segment = []
            else:
                segment.append(f"{sx(tau):.2f},{sy(value):.2f}")
        if segment:
            segments.append(segment)
        for seg in segments:
            if len(seg) == 1:
                x, y = seg[0].split(",")
                parts.append(f'<circle cx="{x}" cy="{y}" r="2" fill="{color}"/>')
            else:
                parts.append(
                    f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                    f'points="{" ".join(seg)}"/>'
                )
        parts.append(
            f'<text x="{width - mr - 8}" y="{mt + 16 + 16 * idx}" text-anchor="end" '
            f'fill="{color}">gamma_ratio={big_gamma:g}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# -- subcommand handlers -----------------------------------------------------

def _design_payload(result) -> dict:
    return {
        "gamma_ratio": result.big_gamma,
        "unit_mode": result.unit_mode,
        "fidelity": result.fidelity,
        "beta": result.beta_abs,
        "tau_int": result.tau_int,
        "alpha_sq": result.alpha_sq,
        "achieved_C": result.achieved_C,
        "achieved_F": result.achieved_F,
        "identity_residual": result.identity_residual,
        "t_int_seconds": result.t_int_seconds,
    }


def cmd_design(ns) -> int:
    if ns.table:
        results = design_table(
            fidelity=ns.fidelity,
            beta_abs=ns.beta,
            unit_mode=ns.unit_mode,
            gamma_s=ns.gamma_seconds,
        )
        payload = {
            "unit_mode": ns.unit_mode,
            "fidelity": ns.fidelity,
            "beta": ns.beta,
            "rows": [_design_payload(r) for r in results],
        }
    else:
        spec = DesignSpec(
            fidelity=ns.fidelity,
            beta_abs=ns.beta,
            big_gamma=ns.gamma_ratio,
            unit_mode=ns.unit_mode,
            gamma_s=ns.gamma_seconds,
        )
        payload = _design_payload(design(spec))
    _emit(ns, _to_json(payload) + "\n")
    return EXIT_OK


def cmd_curve(ns) -> int:
    alpha_sq = None
    if ns.kind == "c":
        if not (math.isfinite(ns.alpha) and ns.alpha > 0.0):
            raise ValueError(f"--alpha must be positive, got {ns.alpha!r}")
        alpha_sq = ns.alpha * ns.alpha
    gammas = tuple(ns.gamma_ratio) if ns.gamma_ratio else None
    rows = sweep_curves(
        ns.kind,
        big_gammas=gammas,
        alpha_sq=alpha_sq,
        points=ns.points,
        tau_max=ns.tau_max,
        max_workers=thread_count(),
    )
    text = _csv(rows) if ns.format == "csv" else _svg(rows, ns.kind)
    _emit(ns, text)
    return EXIT_OK


def cmd_simulate(ns) -> int:
    if ns.lossless:
        if ns.kerr_phase is None:
            _err("--lossless requires --kerr-phase")
            return EXIT_USAGE
        params = XpmParams.lossless(ns.kerr_phase)
    else:
        params = XpmParams.dimensionless(ns.gamma_ratio, ns.tau)
    if ns.asymmetry is not None:
        ratio, phi_e = ns.asymmetry
        output, fidelity = run_asymmetric(
            ns.alpha,
            params,
            t1=params.duration,
            t2=ratio * params.duration,
            phi_e=phi_e,
            n_slices=ns.slices,
            qubit_loss_mode=ns.loss_mode,
            detector=ns.detector,
        )
        asym_block = {
            "ratio": ratio,
            "phi_e": phi_e,
            "t1": params.duration,
            "t2": ratio * params.duration,
            "fidelity": fidelity,
        }
    else:
        output = run_double_xpm(
            ns.alpha,
            params,
            n_slices=ns.slices,
            qubit_loss_mode=ns.loss_mode,
            detector=ns.detector,
        )
        asym_block = None
    payload = {
        "alpha": ns.alpha,
        "gamma_ratio": params.big_gamma if math.isfinite(params.big_gamma) else None,
        "tau": params.tau,
        "kerr_phase": params.chi * params.duration,
        "n_slices": ns.slices,
        "qubit_loss_mode": ns.loss_mode,
        "detector": output.detector,
        "beta": output.beta,
        "gamma_out": output.gamma_out,
        "coherence_C": output.coherence_C,
        "cat_mixture": dict(output.cat_mixture),
        "herald_probability": output.herald_probability,
        "herald_probabilities": dict(output.herald_probabilities),
        "success_decay_factor": output.success_decay_factor,
    }
    if asym_block is not None:
        payload["asymmetry"] = asym_block
    _emit(ns, _to_json(payload) + "\n")
    return EXIT_OK


def cmd_verify(ns) -> int:
    if not (math.isfinite(ns.alpha) and 0.0 < ns.alpha <= 2.0):
        _err(f"--alpha must lie in (0, 2] for the number-basis oracle, got {ns.alpha!r}")
        return EXIT_USAGE
    if not (math.isfinite(ns.tau) and ns.tau > 0.0):
        _err(f"--tau must be positive, got {ns.tau!r}")
        return EXIT_USAGE
    if ns.cutoff < 2:
        _err(f"--cutoff must be at least 2, got {ns.cutoff!r}")
        return EXIT_USAGE

    alpha_sq = ns.alpha * ns.alpha
    config = ChannelConfig(
        channels=(
            Channel(mode=0, qubit="H", chi=ns.gamma_ratio, gamma=1.0, duration=ns.tau),
            Channel(mode=1, qubit="V", chi=ns.gamma_ratio, gamma=1.0, duration=ns.tau),
        )
    )
    closed = coherence_c(alpha_sq, ns.gamma_ratio, ns.tau)
    evolved = evolve_sliced(xpm_input_state(ns.alpha), config, ns.slices)
    c_engine = qubit_coherence(evolved)

    cutoffs = (ns.cutoff, ns.cutoff)
    try:
        rho_t = integrate(xpm_input_density(ns.alpha, cutoffs), config, ns.tau, dt=ns.dt)
        c_fock = extract_coherence(rho_t)
        engine_in_fock = dyad_to_fock(evolved, cutoffs)
        distance = trace_distance(rho_t, engine_in_fock)
    except CutoffError as exc:
        _emit(ns, _to_json({"error": str(exc), "pass": False}) + "\n")
        _err(f"verification failed: {exc}")
        return EXIT_VERIFY

    c_values = {
        "closed_form": closed,
        "dyad_engine": c_engine.real,
        "fock_oracle": c_fock.real,
    }
    spread = max(
        abs(a - b) for a in c_values.values() for b in c_values.values()
    )
    cases = [
        {
            "name": "coherence_agreement",
            **c_values,
            "engine_imag": abs(c_engine.imag),
            "fock_imag": abs(c_fock.imag),
            "value": spread,
            "tolerance": 1e-3,
            "pass": spread < 1e-3,
        },
        {
            "name": "state_trace_distance",
            "value": distance,
            "tolerance": 1e-5,
            "pass": distance < 1e-5,
        },
    ]
    worst = max(cases, key=lambda case: case["value"] / case["tolerance"])
    ok = all(case["pass"] for case in cases)
    payload = {
        "alpha": ns.alpha,
        "gamma_ratio": ns.gamma_ratio,
        "tau": ns.tau,
        "cutoff": ns.cutoff,
        "n_slices": ns.slices,
        "cases": cases,
        "worst": {
            "name": worst["name"],
            "value": worst["value"],
            "tolerance": worst["tolerance"],
        },
        "pass": ok,
    }
    _emit(ns, _to_json(payload) + "\n")
    if not ok:
        _err(
            f"verification failed: {worst['name']} = {_fmt(worst['value'])} "
            f"(tolerance {_fmt(worst['tolerance'])})"
        )
        return EXIT_VERIFY
    return EXIT_OK


def cmd_discriminate(ns) -> int:
    delta = ns.gamma_a - ns.gamma_b
    payload = {
        "gamma_a": ns.gamma_a,
        "gamma_b": ns.gamma_b,
        "separation_sq": delta.real * delta.real + delta.imag * delta.imag,
        "efficiency": discrimination_efficiency(ns.gamma_a, ns.gamma_b),
    }
    _emit(ns, _to_json(payload) + "\n")
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="catforge",
        description="Design and simulate the heralded dual-rail XPM cat source.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}

    def new_sub(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = subs.add_parser(name, help=help_text)
        sub.add_argument("--config", metavar="FILE",
                         help="key=value file of defaults; explicit flags win")
        sub.add_argument("--output", "-o", metavar="FILE",
                         help="write to FILE instead of stdout")
        registry[name] = sub
        return sub

    d = new_sub("design", "solve tau and input intensity for a target cat")
    d.add_argument("--fidelity", type=float, default=0.99)
    d.add_argument("--beta", type=float, default=1.6,
                   help="target cat amplitude |beta|")
    d.add_argument("--gamma-ratio", type=float, default=25.0,
                   help="Kerr rate over loss rate")
    d.add_argument("--unit-mode", choices=UNIT_MODES, default="radians")
    d.add_argument("--gamma-seconds", type=float, default=None,
                   help="dimensional loss rate (1/s); adds t_int_seconds")
    d.add_argument("--table", action="store_true",
                   help="solve the standard gamma-ratio table instead of one point")
    d.set_defaults(handler=cmd_design)

    c = new_sub("curve", "tabulate coherence or decoherence-exponent curves")
    c.add_argument("--kind", choices=("c", "g"), required=True)
    c.add_argument("--alpha", type=float, default=200.0,
                   help="input amplitude |alpha| (kind c only)")
    c.add_argument("--gamma-ratio", type=float, action="append", default=None,
                   help="repeatable; defaults depend on kind")
    c.add_argument("--tau-max", type=float, default=None)
    c.add_argument("--points", type=int, default=201)
    c.add_argument("--format", choices=("csv", "svg"), default="csv")
    c.set_defaults(handler=cmd_curve)

    s = new_sub("simulate", "run the sliced dyad engine at one setting")
    s.add_argument("--alpha", type=_complex_arg, default=complex(1.5, 0.0),
                   metavar="RE[,IM]")
    s.add_argument("--gamma-ratio", type=float, default=1.0)
    s.add_argument("--tau", type=float, default=0.2)
    s.add_argument("--slices", type=int, default=2000)
    s.add_argument("--loss-mode", choices=("neglect", "common-decay"),
                   default="neglect", help="qubit-carrier loss treatment")
    s.add_argument("--detector", choices=("D1", "D2"), default="D1")
    s.add_argument("--asymmetry", type=_ratio_phase_arg, default=None,
                   metavar="RATIO,PHI",
                   help="run with t2 = RATIO * t1 and extra qubit phase PHI")
    s.add_argument("--lossless", action="store_true",
                   help="pure Kerr run; needs --kerr-phase")
    s.add_argument("--kerr-phase", type=float, default=None,
                   help="total conditional phase for --lossless")
    s.set_defaults(handler=cmd_simulate)

    v = new_sub("verify", "cross-check engine vs number-basis integration")
    v.add_argument("--alpha", type=float, default=1.5, help="real amplitude, at most 2")
    v.add_argument("--gamma-ratio", type=float, default=1.0)
    v.add_argument("--tau", type=float, default=0.2)
    v.add_argument("--cutoff", type=int, default=20,
                   help="retained levels per mode (recommend 4|alpha|^2 + 10)")
    v.add_argument("--slices", type=int, default=2000)
    v.add_argument("--dt", type=float, default=None)
    v.set_defaults(handler=cmd_verify)

    x = new_sub("discriminate", "coherent-output discrimination efficiency")
    x.add_argument("--gamma-a", type=_complex_arg, required=True, metavar="RE[,IM]")
    x.add_argument("--gamma-b", type=_complex_arg, required=True, metavar="RE[,IM]")
    x.set_defaults(handler=cmd_discriminate)

    return parser, registry


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else [str(a) for a in argv]
    parser, registry = _build_parser()

    config_path = _find_config(argv)
    if config_path is not None:
        sub_name = next((a for a in argv if not a.startswith("-")), None)
        sub = registry.get(sub_name)
        if sub is not None:
            try:
                _apply_config(sub, _load_config(config_path), config_path)
            except (OSError, ValueError) as exc:
                _err(exc)
                return EXIT_USAGE

    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK

    try:
        return ns.handler(ns)
    except (NoSolutionError, PoleError) as exc:
        _err(exc)
        return EXIT_NO_SOLUTION
    except CutoffError as exc:
        _err(exc)
        return EXIT_VERIFY if ns.command == "verify" else EXIT_ENGINE
    except EngineError as exc:
        _err(exc)
        return EXIT_ENGINE
    except ValueError as exc:
        _err(exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
