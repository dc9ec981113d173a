"""Command-line front end: config parsing, sweeps, property checks, file output.

Output files are written with fixed 12-significant-digit formatting so runs
are byte-for-byte reproducible and diffable in regression tests.  The SVG
plot is emitted directly (no plotting library): it is a documentation aid,
not data.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

from . import dispersion, potentials
from .dispersion import BandStructure, SweepConfig, CHECK_NAMES
from .eigensolver import NonConvergence
from .fiber import FieldConfig, UnboundedBelow
from .potentials import Potential

__all__ = [
    "ParseError",
    "ValidationError",
    "RunConfig",
    "parse_config",
    "render_config",
    "run",
    "check",
    "main",
]


class ParseError(Exception):
    """Configuration text could not be parsed; the message carries the line number."""


class ValidationError(Exception):
    """Parsed configuration violates an invariant; the message names it."""


@dataclass(frozen=True)
class RunConfig:
    field: FieldConfig
    potential: Potential
    sweep: SweepConfig
    checks: Tuple[str, ...] = ()
    out_dir: str = "."
    svg: bool = True


_POTENTIAL_KINDS = {
    "lorentzian": ("lambda", "a"),
    "flatwell": ("lambda", "a", "b"),
    "sine": ("lambda", "a"),
    "linear": ("alpha",),
    "parabola": ("beta",),
    "tabulated": ("table", "clamp"),
}

_SECTION_KEYS = {
    "field": {"b"},
    "potential": {"kind", "lambda", "a", "b", "alpha", "beta", "table", "clamp"},
    "sweep": {
        "p_min", "p_max", "p_steps", "bands", "tol", "lambdas", "large_p", "checks",
    },
    "output": {"dir", "svg"},
}


def _parse_float(value: str, where: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise ParseError(f"{where}: expected a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ParseError(f"{where}: number must be finite, got {value!r}")
    return out


def _parse_int(value: str, where: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"{where}: expected an integer, got {value!r}") from None


def _parse_bool(value: str, where: str) -> bool:
    low = value.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ParseError(f"{where}: expected true/false, got {value!r}")


def _parse_table(value: str, where: str):
    pairs = []
    for chunk in value.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise ParseError(f"{where}: table entries are x:value pairs, got {chunk!r}")
        xs, vs = chunk.split(":", 1)
        pairs.append((_parse_float(xs.strip(), where), _parse_float(vs.strip(), where)))
    if len(pairs) < 2:
        raise ParseError(f"{where}: table needs at least two x:value pairs")
    return tuple(x for x, _ in pairs), tuple(v for _, v in pairs)


def parse_config(text: str) -> RunConfig:
    """Parse the key-value run configuration.

    Flat sections [field], [potential], [sweep], [output]; '#' and ';' start
    comments.  Defaults: bands=5, p_steps=121, tol=1e-6 and a momentum range
    of +-6*sqrt(B).

    Raises:
        ParseError: malformed text, unknown section/key, bad value.
        ValidationError: well-formed values violating a model invariant.
    """
    raw: dict = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].split(";", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ParseError(f"line {lineno}: malformed section header {stripped!r}")
            name = stripped[1:-1].strip().lower()
            if name not in _SECTION_KEYS:
                raise ParseError(f"line {lineno}: unknown section [{name}]")
            section = name
            continue
        if "=" not in stripped:
            raise ParseError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        if section is None:
            raise ParseError(f"line {lineno}: key outside of any section")
        key, _, value = stripped.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key not in _SECTION_KEYS[section]:
            raise ParseError(f"line {lineno}: unknown key {key!r} in [{section}]")
        if (section, key) in raw:
            raise ParseError(f"line {lineno}: duplicate key {key!r} in [{section}]")
        if not value:
            raise ParseError(f"line {lineno}: empty value for {key!r}")
        raw[(section, key)] = (value, lineno)

    def take(section: str, key: str):
        item = raw.pop((section, key), None)
        return item

    # field
    b_item = take("field", "b")
    B = _parse_float(*_loc(b_item, "[field] b")) if b_item else 1.0
    try:
        field = FieldConfig(B)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None

    # potential
    kind_item = take("potential", "kind")
    if kind_item is None:
        raise ParseError("missing [potential] kind")
    kind = kind_item[0].strip().lower()
    if kind not in _POTENTIAL_KINDS:
        raise ParseError(
            f"line {kind_item[1]}: unknown potential kind {kind!r}; "
            f"known: {', '.join(sorted(_POTENTIAL_KINDS))}"
        )
    params = {}
    for key in ("lambda", "a", "b", "alpha", "beta", "table", "clamp"):
        item = take("potential", key)
        if item is None:
            continue
        if key not in _POTENTIAL_KINDS[kind]:
            raise ParseError(
                f"line {item[1]}: key {key!r} is not used by kind {kind!r}"
            )
        where = f"line {item[1]}: [potential] {key}"
        if key == "table":
            params[key] = _parse_table(item[0], where)
        elif key == "clamp":
            params[key] = _parse_bool(item[0], where)
        else:
            params[key] = _parse_float(item[0], where)
    missing = [
        key for key in _POTENTIAL_KINDS[kind]
        if key not in params and key != "clamp"
    ]
    if missing:
        raise ParseError(f"potential kind {kind!r} requires keys: {', '.join(missing)}")
    try:
        spec = _build_potential(kind, params)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None

    # sweep
    sqrt_b = math.sqrt(field.B)
    values = {}
    for key, conv, default in (
        ("p_min", _parse_float, -6.0 * sqrt_b),
        ("p_max", _parse_float, 6.0 * sqrt_b),
        ("tol", _parse_float, 1e-6),
        ("large_p", _parse_float, None),
    ):
        item = take("sweep", key)
        values[key] = conv(*_loc(item, f"[sweep] {key}")) if item else default
    for key, default in (("p_steps", 121), ("bands", 5)):
        item = take("sweep", key)
        values[key] = (
            _parse_int(*_loc(item, f"[sweep] {key}")) if item else default
        )
    lam_item = take("sweep", "lambdas")
    lambdas = None
    if lam_item:
        where = f"line {lam_item[1]}: [sweep] lambdas"
        lambdas = tuple(
            _parse_float(chunk.strip(), where)
            for chunk in lam_item[0].split(",")
            if chunk.strip()
        )
        if not lambdas:
            raise ParseError(f"{where}: empty list")
    checks_item = take("sweep", "checks")
    checks: Tuple[str, ...] = ()
    if checks_item:
        checks = _parse_checks(checks_item[0], f"line {checks_item[1]}: [sweep] checks")
    try:
        sweep_cfg = SweepConfig(
            p_min=values["p_min"],
            p_max=values["p_max"],
            p_steps=values["p_steps"],
            bands=values["bands"],
            tol=values["tol"],
            lambdas=lambdas,
            large_p=values["large_p"],
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from None

    # output
    dir_item = take("output", "dir")
    out_dir = dir_item[0] if dir_item else "."
    svg_item = take("output", "svg")
    svg = _parse_bool(*_loc(svg_item, "[output] svg")) if svg_item else True

    assert not raw, f"unconsumed config entries: {sorted(raw)}"
    return RunConfig(
        field=field, potential=spec, sweep=sweep_cfg,
        checks=checks, out_dir=out_dir, svg=svg,
    )


def _loc(item, where: str):
    value, lineno = item
    return value, f"line {lineno}: {where}"


def _parse_checks(value: str, where: str) -> Tuple[str, ...]:
    names = tuple(
        chunk.strip().lower() for chunk in value.split(",") if chunk.strip()
    )
    if not names:
        raise ParseError(f"{where}: empty list")
    for name in names:
        if name not in CHECK_NAMES:
            raise ParseError(
                f"{where}: unknown check {name!r}; known: {', '.join(CHECK_NAMES)}"
            )
    return names


def _build_potential(kind: str, params: dict) -> Potential:
    if kind == "lorentzian":
        return potentials.Lorentzian(params["lambda"], params["a"])
    if kind == "flatwell":
        return potentials.FlatWell(params["lambda"], params["a"], params["b"])
    if kind == "sine":
        return potentials.SineObstacle(params["lambda"], params["a"])
    if kind == "linear":
        return potentials.Linear(params["alpha"])
    if kind == "parabola":
        return potentials.Parabola(params["beta"])
    if kind == "tabulated":
        xs, vals = params["table"]
        return potentials.Tabulated(xs, vals, clamp=params.get("clamp", False))
    raise AssertionError(kind)


def render_config(cfg: RunConfig) -> str:
    """Canonical config text; parse_config(render_config(cfg)) == cfg."""
    lines = ["[field]", f"b = {cfg.field.B!r}", "", "[potential]"]
    spec = cfg.potential
    if isinstance(spec, potentials.Lorentzian):
        lines += ["kind = lorentzian", f"lambda = {spec.lam!r}", f"a = {spec.a!r}"]
    elif isinstance(spec, potentials.FlatWell):
        lines += [
            "kind = flatwell", f"lambda = {spec.lam!r}",
            f"a = {spec.a!r}", f"b = {spec.b!r}",
        ]
    elif isinstance(spec, potentials.SineObstacle):
        lines += ["kind = sine", f"lambda = {spec.lam!r}", f"a = {spec.a!r}"]
    elif isinstance(spec, potentials.Linear):
        lines += ["kind = linear", f"alpha = {spec.alpha!r}"]
    elif isinstance(spec, potentials.Parabola):
        lines += ["kind = parabola", f"beta = {spec.beta!r}"]
    elif isinstance(spec, potentials.Tabulated):
        table = ", ".join(f"{x!r}:{v!r}" for x, v in zip(spec.xs, spec.values))
        lines += [
            "kind = tabulated", f"table = {table}",
            f"clamp = {'true' if spec.clamp else 'false'}",
        ]
    else:
        raise ValueError(
            f"{type(spec).__name__} specs are not expressible in the config format"
        )
    sw = cfg.sweep
    lines += [
        "", "[sweep]",
        f"p_min = {sw.p_min!r}", f"p_max = {sw.p_max!r}",
        f"p_steps = {sw.p_steps}", f"bands = {sw.bands}", f"tol = {sw.tol!r}",
    ]
    if sw.lambdas is not None:
        lines.append("lambdas = " + ", ".join(repr(v) for v in sw.lambdas))
    if sw.large_p is not None:
        lines.append(f"large_p = {sw.large_p!r}")
    if cfg.checks:
        lines.append("checks = " + ", ".join(cfg.checks))
    lines += [
        "", "[output]",
        f"dir = {cfg.out_dir}",
        f"svg = {'true' if cfg.svg else 'false'}",
        "",
    ]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# output writers
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.11e}"  # 12 significant digits


def _write_bands_csv(path: Path, bs: BandStructure) -> None:
    header = "p," + ",".join(f"eps_{n}" for n in range(bs.band_count))
    rows = [header]
    for j, p in enumerate(bs.p_grid):
        rows.append(",".join([_fmt(p)] + [_fmt(bs.energies[n, j]) for n in range(bs.band_count)]))
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def _write_gaps_csv(path: Path, bs: BandStructure) -> None:
    rows = ["n,lower,upper,open"]
    for n, gap in enumerate(dispersion.gaps(bs)):
        rows.append(
            f"{n},{_fmt(gap.lower)},{_fmt(gap.upper)},{'true' if gap.open else 'false'}"
        )
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


_SVG_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _write_svg(path: Path, bs: BandStructure, title: str) -> None:
    width, height = 720, 480
    ml, mr, mt, mb = 64, 18, 34, 46
    px0, px1 = float(bs.p_grid[0]), float(bs.p_grid[-1])
    ey0, ey1 = float(bs.energies.min()), float(bs.energies.max())
    pad = 0.06 * (ey1 - ey0) if ey1 > ey0 else 0.5
    ey0, ey1 = ey0 - pad, ey1 + pad

    def sx(p: float) -> float:
        return ml + (p - px0) / (px1 - px0) * (width - ml - mr)

    def sy(e: float) -> float:
        return height - mb - (e - ey0) / (ey1 - ey0) * (height - mt - mb)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{ml}" y="{mt - 14}" font-family="sans-serif" font-size="13">{title}</text>',
        f'<rect x="{ml}" y="{mt}" width="{width - ml - mr}" height="{height - mt - mb}" '
        f'fill="none" stroke="#444" stroke-width="1"/>',
    ]
    for i in range(5):
        p = px0 + (px1 - px0) * i / 4
        e = ey0 + (ey1 - ey0) * i / 4
        x = sx(p)
        y = sy(e)
        parts.append(
            f'<line x1="{x:.2f}" y1="{height - mb}" x2="{x:.2f}" y2="{height - mb + 5}" stroke="#444"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{height - mb + 18}" font-family="sans-serif" '
            f'font-size="11" text-anchor="middle">{p:.4g}</text>'
        )
        parts.append(
            f'<line x1="{ml - 5}" y1="{y:.2f}" x2="{ml}" y2="{y:.2f}" stroke="#444"/>'
        )
        parts.append(
            f'<text x="{ml - 8}" y="{y + 4:.2f}" font-family="sans-serif" '
            f'font-size="11" text-anchor="end">{e:.4g}</text>'
        )
    parts.append(
        f'<text x="{(ml + width - mr) / 2:.2f}" y="{height - 10}" font-family="sans-serif" '
        f'font-size="13" text-anchor="middle">p</text>'
    )
    parts.append(
        f'<text x="16" y="{(mt + height - mb) / 2:.2f}" font-family="sans-serif" '
        f'font-size="13">&#949;</text>'
    )
    for n in range(bs.band_count):
        color = _SVG_COLORS[n % len(_SVG_COLORS)]
        points = " ".join(
            f"{sx(float(p)):.2f},{sy(float(e)):.2f}"
            for p, e in zip(bs.p_grid, bs.energies[n])
        )
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")


_HYPOTHESIS_TEXT = {
    "v1": "positive part locally square-integrable, negative part bounded + square-integrable",
    "v2": "finite limits at x -> -+infinity",
    "v3": "square-integrable profile",
    "v4": "C1 profile with square-integrable derivative",
    "v5": "continuous one-signed bump fits under the profile",
}


def _criteria_rows(spec: Potential, field: FieldConfig, hyp: dict) -> list:
    sign = potentials.classify_sign(spec)
    definite = sign is not potentials.SignClass.INDEFINITE
    limits = potentials.asymptotic_limits(spec)
    sup = potentials.sup_norm(spec)
    return [
        ("fiber spectra are discrete and simple; bands analytic in p", hyp["v1"]),
        (
            "distinct far-side limits force non-constant bands",
            hyp["v1"] and hyp["v2"] and limits is not None and limits[0] != limits[1],
        ),
        ("weak coupling makes every low band non-constant", hyp["v3"]),
        (
            "Feynman-Hellmann momentum derivative applies",
            hyp["v3"] and hyp["v4"],
        ),
        (
            "sign-definite profile with a continuous bump: no band is constant",
            hyp["v3"] and definite and hyp["v5"],
        ),
        (
            "all spectral gaps stay open (sup-norm below the level spacing margin)",
            sup < field.B or (definite and sup < 2.0 * field.B),
        ),
        ("band widths strictly monotone in the coupling", definite),
    ]


def _write_report(
    path: Path,
    cfg: RunConfig,
    bs: BandStructure,
    results: list,
) -> None:
    spec = cfg.potential
    field = cfg.field
    hyp = potentials.hypotheses(spec)
    limits = potentials.asymptotic_limits(spec)
    sup = potentials.sup_norm(spec)
    widths = dispersion.band_widths(bs)
    lines = [
        "band structure report",
        "=====================",
        f"field: B = {field.B:g}",
        f"potential: {potentials.describe(spec)}",
        f"sign class: {potentials.classify_sign(spec).value}",
        f"sup norm: {'unbounded' if math.isinf(sup) else f'{sup:.6g}'}",
        (
            "asymptotic limits: none (unbounded profile)"
            if limits is None
            else f"asymptotic limits: v- = {limits[0]:g}, v+ = {limits[1]:g}"
        ),
        "",
        "hypotheses:",
    ]
    for key in ("v1", "v2", "v3", "v4", "v5"):
        state = "satisfied" if hyp[key] else "not satisfied"
        lines.append(f"  {key} ({_HYPOTHESIS_TEXT[key]}): {state}")
    lines += ["", "applicable criteria:"]
    for text, applies in _criteria_rows(spec, field, hyp):
        mark = "x" if applies else " "
        lines.append(f"  [{mark}] {text}")
    sw = cfg.sweep
    lines += [
        "",
        f"sweep: p in [{sw.p_min:g}, {sw.p_max:g}], {sw.p_steps} points, "
        f"{sw.bands} bands, tol {sw.tol:g}",
        "band ranges:",
    ]
    for n in range(bs.band_count):
        row = bs.energies[n]
        lines.append(
            f"  n={n}: [{row.min():.6g}, {row.max():.6g}]  width {widths[n]:.6g}"
        )
    lines += ["gaps:"]
    for n, gap in enumerate(dispersion.gaps(bs)):
        state = "open" if gap.open else "CLOSED"
        lines.append(f"  n={n}: {gap.lower:.6g} .. {gap.upper:.6g}  {state}")
    lines += ["", "checks:"]
    if not results:
        lines.append("  (none requested)")
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        lines.append(f"  {status} {res.name}: {res.detail}")
        if res.witness is not None:
            lines.append(f"       witness: {json.dumps(res.witness, sort_keys=True)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def check(cfg: RunConfig, band_structure: Optional[BandStructure] = None) -> dict:
    """Run the configured checks; returns {name: CheckResult}."""
    results = {}
    for name in cfg.checks:
        results[name] = dispersion.run_check(
            name, cfg.potential, cfg.field, cfg.sweep, band_structure=band_structure
        )
    return results


def run(cfg: RunConfig, out_dir: Optional[str] = None, quiet: bool = False) -> int:
    """Execute the sweep, write bands.csv / gaps.csv / report.txt (+ bands.svg).

    Returns 0 when every requested check passed, 1 otherwise; check failures
    are also printed as a one-line JSON object for machine consumption.
    """
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bs = dispersion.sweep(cfg.potential, cfg.field, cfg.sweep)
    _write_bands_csv(out / "bands.csv", bs)
    _write_gaps_csv(out / "gaps.csv", bs)
    results = list(check(cfg, band_structure=bs).values())
    _write_report(out / "report.txt", cfg, bs, results)
    if cfg.svg:
        _write_svg(out / "bands.svg", bs, potentials.describe(cfg.potential))
    if not quiet:
        for res in results:
            print(f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}")
        print(f"wrote {out / 'bands.csv'}")
    failures = [res for res in results if not res.passed]
    if failures:
        print(
            json.dumps(
                {
                    "failures": [
                        {"check": r.name, "detail": r.detail, "witness": r.witness}
                        for r in failures
                    ]
                },
                sort_keys=True,
            )
        )
        return 1
    return 0


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="magband",
        description=(
            "Compute dispersion curves of a charged 2D particle in a uniform "
            "magnetic field perturbed by a straight potential obstacle."
        ),
    )
    parser.add_argument("--config", required=True, help="run configuration file")
    parser.add_argument("--out-dir", default=None, help="output directory override")
    parser.add_argument(
        "--check",
        default=None,
        help="comma-separated checks to run (overrides the config): "
        + ", ".join(CHECK_NAMES),
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text)
        if args.check is not None:
            cfg = dataclasses.replace(
                cfg, checks=_parse_checks(args.check, "--check")
            )
        return run(cfg, out_dir=args.out_dir, quiet=args.quiet)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NonConvergence, UnboundedBelow) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
