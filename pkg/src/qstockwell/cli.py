"""``qsw`` command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import quat
from . import stockwell as sw
from ._parallel import worker_count
from .analytic import make_descriptor
from .grid import Axis, GridMismatchError, QField, canonical_axis, exact_sum, offset_axis, sample_analytic
from .io import FormatError, read_config, read_field, read_ppm, write_field, write_pgm
from .qft import OffLatticeError, SpectralField, dual_axis, iqft, qft, space_axis

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SIGNAL_KINDS = ("gaussian", "modulated-gaussian", "difference-of-gaussians", "rgb-image")
WINDOW_KINDS = ("gaussian_unit", "admissible_dog")


class UsageError(Exception):
    """Bad flags or configuration; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep argparse's exit code but route through one place
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    """Resolved run settings; command-line flags override config-file values."""

    extent: float = 8.0
    count: int = 64
    xi_extent: float = 4.0
    xi_count: int = 16
    xi_grid: str = "offset"
    b_extent: Optional[float] = None
    window: str = "admissible_dog:alpha=0.5,beta=2"
    threads: int = 1
    out_dir: str = "."
    formats: str = "qsw"

    def __post_init__(self):
        n = self.count
        if n < 16 or n > 256 or n & (n - 1):
            raise UsageError(f"N must be a power of two between 16 and 256, got {n}")
        if not self.extent > 0:
            raise UsageError(f"grid extent must be positive, got {self.extent}")
        if self.threads < 1:
            raise UsageError(f"thread count must be at least 1, got {self.threads}")
        if self.xi_grid not in ("offset", "dual"):
            raise UsageError(f"xi grid must be 'offset' or 'dual', got {self.xi_grid!r}")
        if self.formats not in ("qsw", "csv"):
            raise UsageError(f"output format must be qsw or csv, got {self.formats!r}")

    @property
    def axes(self) -> tuple[Axis, Axis]:
        ax = canonical_axis(self.extent, self.count)
        return (ax, ax)


_ALIASES = {"n": "count", "l": "extent", "output_dir": "out_dir", "format": "formats"}


def _coerce(name: str, value: str):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    kind = kinds[name]
    try:
        if "int" in str(kind):
            return int(value)
        if "float" in str(kind):
            return None if value.lower() in ("", "none") else float(value)
    except ValueError:
        raise UsageError(f"config value for {name} is not a number: {value!r}") from None
    return value


def build_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        try:
            raw = read_config(args.config)
        except (OSError, FormatError) as exc:
            raise UsageError(str(exc)) from None
        known = {f.name for f in fields(RunConfig)}
        for key, value in raw.items():
            key = _ALIASES.get(key.lower(), key.lower())
            if key not in known:
                raise UsageError(f"unknown config key {key!r}")
            values[key] = _coerce(key, value)
    for name in ("extent", "count", "xi_extent", "xi_count", "xi_grid", "b_extent", "window", "threads", "out_dir", "formats"):
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    try:
        values["threads"] = worker_count(values.get("threads", 1))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return RunConfig(**values)


def _parse_pair(text: str, name: str) -> tuple[float, float]:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise UsageError(f"--{name} expects two comma-separated numbers, got {text!r}") from None
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2:
        raise UsageError(f"--{name} expects two comma-separated numbers, got {text!r}")
    return (parts[0], parts[1])


def parse_window_spec(text: str) -> tuple[str, dict]:
    """``kind[:key=value,...]`` into a kind and float parameters."""
    kind, _, rest = text.partition(":")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise UsageError(f"window parameter {item!r} is not key=value")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"window parameter {key!r} is not a number") from None
    return kind.strip(), params


def _out_path(cfg: RunConfig, path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() else Path(cfg.out_dir) / p


def _write(cfg: RunConfig, path: str, obj) -> Path:
    out = _out_path(cfg, path)
    fmt = "csv" if out.suffix.lower() == ".csv" else cfg.formats
    write_field(out, obj, fmt)
    return out


def _load_field(path: str) -> QField:
    obj = read_field(path)
    if not isinstance(obj, QField):
        raise FormatError(f"{path}: expected a 2-D field, found a coefficient volume")
    return obj


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args, cfg: RunConfig) -> int:
    kind = args.kind
    if kind == "rgb-image":
        if not args.image:
            raise UsageError("rgb-image needs --image PATH")
        rgb = read_ppm(args.image)
        rows, cols = rgb.shape[:2]
        step = 2 * cfg.extent / cfg.count
        samples = np.zeros((rows, cols, 4))
        samples[..., 1:] = rgb
        field = QField(Axis(rows, -rows * step / 2, step), Axis(cols, -cols * step / 2, step), samples)
    elif kind in WINDOW_KINDS:
        params = {}
        if kind == "gaussian_unit":
            params = {"sigma1": args.sigma1 or args.sigma or 1.0, "sigma2": args.sigma2 or args.sigma1 or args.sigma or 1.0}
        else:
            params = {"alpha": args.alpha, "beta": args.beta}
        field = sw.make_window(kind, axes=cfg.axes, **params).field
    elif kind in SIGNAL_KINDS:
        params: dict = {}
        if kind in ("gaussian", "modulated-gaussian"):
            s1 = args.sigma1 or args.sigma or 1.0
            params = {"sigma1": s1, "sigma2": args.sigma2 or s1, "center": _parse_pair(args.center, "center"),
                      "amplitude": args.amplitude}
            if kind == "modulated-gaussian":
                params["omega"] = _parse_pair(args.omega, "omega")
        else:
            params = {"alpha": args.alpha, "beta": args.beta}
        field = sample_analytic(make_descriptor(kind, **params), cfg.axes)
    else:
        raise UsageError(f"unknown kind {kind!r}; choose from {', '.join(SIGNAL_KINDS + WINDOW_KINDS)}")
    out = _write(cfg, args.output, QField(field.axis_x, field.axis_y, field.samples))
    print(f"wrote {out} ({field.shape[0]}x{field.shape[1]})")
    return EXIT_OK


def cmd_qft(args, cfg: RunConfig) -> int:
    f = _load_field(args.input)
    method = "direct" if args.direct else "fast"
    if args.inverse:
        if args.direct:
            raise UsageError("--direct applies to the forward transform only")
        src = SpectralField(f.axis_x, f.axis_y, f.samples)
        dst = (space_axis(f.axis_x), space_axis(f.axis_y))
        result = iqft(src, dst)
    else:
        result = qft(f, method=method)
    out = _write(cfg, args.output, QField(result.axis_x, result.axis_y, result.samples))
    print(f"wrote {out}")
    return EXIT_OK


def _resolve_window(spec: str, axes) -> sw.WindowSpec:
    if Path(spec).is_file():
        return sw.make_window("from_field", field=_load_field(spec))
    kind, params = parse_window_spec(spec)
    if kind not in WINDOW_KINDS:
        raise UsageError(f"unknown window {kind!r}; use {' or '.join(WINDOW_KINDS)} or a field file")
    try:
        return sw.make_window(kind, axes=axes, **params)
    except TypeError as exc:
        raise UsageError(str(exc)) from None


def _xi_axes(cfg: RunConfig, f: QField):
    if cfg.xi_grid == "dual":
        return (dual_axis(f.axis_x), dual_axis(f.axis_y))
    ax = offset_axis(cfg.xi_extent, cfg.xi_count)
    return (ax, ax)


def _b_axes(cfg: RunConfig, f: QField):
    if cfg.b_extent is None:
        return f.axes
    out = []
    for a in f.axes:
        n = int(round(2 * cfg.b_extent / a.step))
        out.append(Axis(n, -n * a.step / 2, a.step))
    return tuple(out)


def cmd_stockwell(args, cfg: RunConfig) -> int:
    f = _load_field(args.input)
    phi = _resolve_window(args.window or cfg.window, f.axes)
    xi, b = _xi_axes(cfg, f), _b_axes(cfg, f)
    use_fast = args.fast or (not args.direct and phi.conv_hypothesis)
    if use_fast and not phi.conv_hypothesis:
        raise UsageError(
            "the fast path needs a window that passes the convolution hypothesis "
            "(zero i and k parts and even in x1); rerun with --direct"
        )
    try:
        S = (sw.forward_fast if use_fast else sw.forward)(f, phi, xi, b, cfg.threads)
    except sw.ConfigurationError as exc:
        if args.fast:
            raise
        print(f"note: fast path unavailable ({exc}); using the direct sum", file=sys.stderr)
        S = sw.forward(f, phi, xi, b, cfg.threads)
    out = _write(cfg, args.output, S)
    print(f"wrote {out} ({'x'.join(map(str, S.coeffs.shape[:4]))}, {'fast' if use_fast else 'direct'})")
    if args.energy_map:
        n1, n2 = S.coeffs.shape[:2]
        if args.map_slice:
            try:
                i, j = (int(t) for t in args.map_slice.split(","))
            except ValueError:
                raise UsageError("--map-slice expects two integers i,j") from None
        else:
            i, j = n1 // 2, n2 // 2
        if not (0 <= i < n1 and 0 <= j < n2):
            raise UsageError(f"--map-slice {i},{j} outside the {n1}x{n2} xi-grid")
        energy = quat.modulus2(S.coeffs[i, j])
        path = _out_path(cfg, args.energy_map)
        lo, hi = write_pgm(path, energy)
        xi1, xi2 = S.xi_axes[0].points[i], S.xi_axes[1].points[j]
        print(f"energy map at xi=({xi1:g}, {xi2:g}) -> {path} [min {lo:.6g}, max {hi:.6g}]")
    return EXIT_OK


def cmd_istockwell(args, cfg: RunConfig) -> int:
    S = read_field(args.input)
    if not isinstance(S, sw.StockwellField):
        raise FormatError(f"{args.input}: expected a coefficient volume")
    ref = _load_field(args.reference) if args.reference else None
    space = ref.axes if ref is not None else (cfg.axes if args.grid_from_config else None)
    rec = sw.invert(S, space)
    out = _write(cfg, args.output, rec)
    print(f"wrote {out}")
    if ref is not None:
        num = exact_sum(quat.modulus2(rec.samples - ref.samples))
        den = exact_sum(quat.modulus2(ref.samples))
        err = math.sqrt(num / den) if den > 0 else math.sqrt(num)
        print(f"relative L2 error: {err:.6e}")
    else:
        print(f"reconstruction energy: {exact_sum(quat.modulus2(rec.samples)) * rec.weight:.6e}")
    return EXIT_OK


def cmd_admissibility(args, cfg: RunConfig) -> int:
    axes = cfg.axes
    phi = _resolve_window(args.window or cfg.window, axes)
    rep = sw.admissibility_constant(phi)
    est = ", ".join(f"{e:.6g}" for e in rep.estimates)
    print(f"C_phi = {rep.c_phi:.10g}  verdict: {rep.verdict}  refinement error: {rep.refinement_error:.3e}")
    print(f"estimates by resolution: {est}")
    return EXIT_OK if rep.verdict == "admissible" else EXIT_FAIL


def _fmt(x: float) -> str:
    return f"{x: .6e}" if math.isfinite(x) else f"{x!s:>13}"


def cmd_verify(args, cfg: RunConfig) -> int:
    from .verify import VerifyConfig, run_suite

    kind, params = parse_window_spec(cfg.window)
    try:
        vcfg = VerifyConfig(
            extent=cfg.extent, count=cfg.count, xi_extent=cfg.xi_extent, xi_count=cfg.xi_count,
            b_extent=cfg.b_extent, window=kind, alpha=params.get("alpha", 0.5), beta=params.get("beta", 2.0),
            threads=cfg.threads,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    t0 = time.perf_counter()
    records = run_suite(args.suite, vcfg)
    elapsed = time.perf_counter() - t0
    failed = [r for r in records if not r.passed]
    for r in records:
        tag = "PASS" if r.passed else "FAIL"
        extra = f"  [{r.label}]" if r.label else ""
        print(f"{tag}  {r.suite:<11} {r.name:<52} lhs={_fmt(r.lhs)} rhs={_fmt(r.rhs)} margin={_fmt(r.margin)}{extra}")
    print(f"{len(records) - len(failed)}/{len(records)} passed in {elapsed:.1f} s")
    if args.report:
        cfg_view = {k: v for k, v in vcfg.__dict__.items() if k != "threads"}
        doc = {
            "suite": args.suite,
            "config": cfg_view,
            "records": [r.as_dict() for r in records],
            "passed": not failed,
        }
        path = _out_path(cfg, args.report)
        path.write_text(json.dumps(doc, indent=2, allow_nan=True) + "\n")
        print(f"report: {path}")
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------


def _grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags override its entries")
    p.add_argument("-N", "--count", type=int, help="samples per axis (power of two, 16..256)")
    p.add_argument("-L", "--extent", type=float, help="half-width of the spatial grid")
    p.add_argument("--threads", type=int, help="worker count (QSW_THREADS overrides)")
    p.add_argument("--out-dir", dest="out_dir", help="directory for relative output paths")
    p.add_argument("--format", dest="formats", choices=("qsw", "csv"), help="output format when the suffix is not .csv")


def _xi_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--xi-extent", dest="xi_extent", type=float, help="half-width of the xi-grid")
    p.add_argument("--xi-count", dest="xi_count", type=int, help="xi samples per axis")
    p.add_argument("--xi-grid", dest="xi_grid", choices=("offset", "dual"),
                   help="offset: half-step grid on [-X, X]; dual: frequency grid of the signal")
    p.add_argument("--b-extent", dest="b_extent", type=float, help="half-width of the translation grid")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsw", description="Quaternion Fourier and Stockwell transforms on sampled 2-D fields.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="sample a signal or window onto a grid")
    g.add_argument("kind", help=", ".join(SIGNAL_KINDS + WINDOW_KINDS))
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--sigma", type=float)
    g.add_argument("--sigma1", type=float)
    g.add_argument("--sigma2", type=float)
    g.add_argument("--center", default="0,0")
    g.add_argument("--omega", default="0,0")
    g.add_argument("--amplitude", type=float, default=1.0)
    g.add_argument("--alpha", type=float, default=0.5)
    g.add_argument("--beta", type=float, default=2.0)
    g.add_argument("--image", help="P3/P6 raster for rgb-image")
    _grid_flags(g)
    g.set_defaults(run=cmd_gen)

    q = sub.add_parser("qft", help="two-sided quaternion Fourier transform of a field file")
    q.add_argument("input")
    q.add_argument("-o", "--output", required=True)
    q.add_argument("--inverse", action="store_true")
    m = q.add_mutually_exclusive_group()
    m.add_argument("--direct", action="store_true", help="explicit quaternion sums (oracle)")
    m.add_argument("--fast", action="store_true", help="FFT path (default)")
    _grid_flags(q)
    q.set_defaults(run=cmd_qft)

    s = sub.add_parser("stockwell", help="quaternion Stockwell coefficients of a field file")
    s.add_argument("input")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--window", help="kind:key=value,... or a window field file")
    m = s.add_mutually_exclusive_group()
    m.add_argument("--direct", action="store_true")
    m.add_argument("--fast", action="store_true")
    s.add_argument("--energy-map", dest="energy_map", help="write |S|^2 of one xi-slice as a 16-bit graymap")
    s.add_argument("--map-slice", dest="map_slice", help="xi indices i,j of the exported slice")
    _grid_flags(s)
    _xi_flags(s)
    s.set_defaults(run=cmd_stockwell)

    i = sub.add_parser("istockwell", help="reconstruct a field from coefficients")
    i.add_argument("input")
    i.add_argument("-o", "--output", required=True)
    i.add_argument("--reference", help="original field; prints the relative L2 error")
    i.add_argument("--grid-from-config", action="store_true", help="reconstruct on the -N/-L grid instead of the b-grid")
    _grid_flags(i)
    i.set_defaults(run=cmd_istockwell)

    a = sub.add_parser("admissibility", help="admissibility constant of a window")
    a.add_argument("--window", help="kind:key=value,... or a window field file")
    _grid_flags(a)
    a.set_defaults(run=cmd_admissibility)

    v = sub.add_parser("verify", help="run the verification suites")
    v.add_argument("--suite", default="all", choices=("all", "qft", "stockwell", "uncertainty"))
    v.add_argument("--report", help="write a JSON report here")
    v.add_argument("--window", help="admissible_dog:alpha=..,beta=..")
    _grid_flags(v)
    _xi_flags(v)
    v.set_defaults(run=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        cfg = build_config(args)
        if cfg.out_dir != ".":
            Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        return args.run(args, cfg)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"qsw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError, ValueError, GridMismatchError, OffLatticeError) as exc:
        print(f"qsw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
