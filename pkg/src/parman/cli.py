"""Command line driver: deterministic TSV emission for five subcommands.

    parman spectrum  --config run.ini [--out DIR]
    parman solve     --config run.ini [--out DIR]
    parman residual  --config run.ini [--out DIR]
    parman continue  --config run.ini [--out DIR]
    parman verify

Configs are INI files.  [model] names the equation family and its
parameters (comma-separated lists for gamma and C); [solve] holds order,
scale (a number or "auto"), branch ("slow" or an index), trialOrder;
[residual] holds zMin/zMax/zStep; [continue] holds parameter/start/stop/
steps; [output] holds dir and stem.  Every float in the output tables is
rendered with 17 significant digits, so parsing and re-rendering a table
reproduces it byte for byte, and identical configs produce byte-identical
files.  Exit codes: 0 success, 1 verify failure, 2 config error, 3
spectral or branch failure, 4 numerical failure.
"""

import argparse
import configparser
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import ConfigError, NumericsError, SpectralError
from .models import FrenkelKontorova, McMillan, RationalExample, from_config
from .series import TruncatedSeries, evaluate, mul, sin_cos
from .solver import (
    RESONANCE_GUARD,
    TOL_SOLVE_REL,
    SolveConfig,
    continuation,
    residual_sample,
    select_eigensolution,
    solve,
)
from .spectrum import TOL_RES, TOL_UNIT, TOL_ZERO, analyze, chebyshev_reduce

_SECTIONS = ("model", "solve", "residual", "continue", "output")
_LIST_KEYS = ("gamma", "C")

TABLE_ROWS = (
    ((1.0, 0.10, 0.00), 0.592583231399561),
    ((1.0, 0.14, 0.00), 0.609158827181520),
    ((1.0, 0.10, 0.01), 0.603202338024902),
    ((1.0, 0.10, 0.03), 0.621569001269222),
)


def fmt(x):
    """Round-trip-safe float rendering: 17 significant decimal digits."""
    return format(float(x), ".17g")


@dataclass
class RunConfig:
    model: object
    solve: SolveConfig
    residual: tuple | None  # (z_min, z_max, z_step)
    cont: tuple | None  # (parameter, start, stop, steps)
    out_dir: str
    stem: str
    echo: tuple  # "section.key = value" lines, file order


def _line_of(lines, section, key=None):
    """1-based line of a key within a section (or of the header itself)."""
    current = None
    for i, raw in enumerate(lines, start=1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
            if key is None and current == section:
                return i
        elif key is not None and current == section and "=" in s:
            if s.split("=", 1)[0].strip() == key:
                return i
    return None


class _SectionReader:
    """Typed key extraction with line-numbered errors and surplus detection."""

    def __init__(self, parser, lines, section):
        self.section = section
        self.lines = lines
        self.raw = dict(parser.items(section)) if parser.has_section(section) else {}

    def _fail(self, key, message):
        raise ConfigError(message, line=_line_of(self.lines, self.section, key))

    def take(self, key):
        return self.raw.pop(key, None)

    def take_float(self, key):
        raw = self.take(key)
        if raw is None:
            return None
        try:
            v = float(raw)
        except ValueError:
            self._fail(key, f"{self.section}.{key}: not a number: {raw!r}")
        if not math.isfinite(v):
            self._fail(key, f"{self.section}.{key}: must be finite, got {raw}")
        return v

    def take_float_list(self, key):
        raw = self.take(key)
        if raw is None:
            return None
        out = []
        for part in raw.split(","):
            part = part.strip()
            try:
                v = float(part)
            except ValueError:
                self._fail(key, f"{self.section}.{key}: not a number: {part!r}")
            if not math.isfinite(v):
                self._fail(key, f"{self.section}.{key}: must be finite, got {part}")
            out.append(v)
        return tuple(out)

    def take_int(self, key):
        raw = self.take(key)
        if raw is None:
            return None
        try:
            return int(raw)
        except ValueError:
            self._fail(key, f"{self.section}.{key}: not an integer: {raw!r}")

    def require(self, key, value):
        if value is None:
            raise ConfigError(
                f"[{self.section}] section requires key {key!r}",
                line=_line_of(self.lines, self.section),
            )
        return value

    def reject_surplus(self):
        if self.raw:
            key = next(iter(self.raw))
            self._fail(key, f"unknown key {key!r} in [{self.section}] section")


def parse_config(path):
    """Read and validate an INI run configuration."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}")
    lines = text.splitlines()

    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    parser.optionxform = str
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigError(
            f"malformed config: {exc.message.splitlines()[0]}",
            line=getattr(exc, "lineno", None),
        )

    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(
                f"unknown section [{section}]", line=_line_of(lines, section)
            )
    if not parser.has_section("model"):
        raise ConfigError("missing [model] section")

    echo = tuple(
        f"{section}.{key} = {value.strip()}"
        for section in parser.sections()
        for key, value in parser.items(section)
    )

    # [model]
    sec = _SectionReader(parser, lines, "model")
    family = sec.require("family", sec.take("family"))
    params = {}
    for key in list(sec.raw):
        if key in _LIST_KEYS:
            params[key] = sec.take_float_list(key)
        else:
            params[key] = sec.take_float(key)
    try:
        model = from_config(family, params)
    except ValueError as exc:
        raise ConfigError(str(exc), line=_line_of(lines, "model"))

    # [solve]
    sec = _SectionReader(parser, lines, "solve")
    fields = {}
    if (order := sec.take_int("order")) is not None:
        fields["order"] = order
    if (scale_raw := sec.take("scale")) is not None:
        fields["scale"] = "auto" if scale_raw == "auto" else None
        if fields["scale"] is None:
            try:
                fields["scale"] = float(scale_raw)
            except ValueError:
                raise ConfigError(
                    f'solve.scale: expected a number or "auto", got {scale_raw!r}',
                    line=_line_of(lines, "solve", "scale"),
                )
    if (branch_raw := sec.take("branch")) is not None:
        if branch_raw == "slow":
            fields["branch"] = "slow"
        else:
            try:
                fields["branch"] = int(branch_raw)
            except ValueError:
                raise ConfigError(
                    f'solve.branch: expected "slow" or an index, got {branch_raw!r}',
                    line=_line_of(lines, "solve", "branch"),
                )
    if (trial := sec.take_int("trialOrder")) is not None:
        fields["trial_order"] = trial
    sec.reject_surplus()
    try:
        solve_cfg = SolveConfig(**fields)
    except ValueError as exc:
        raise ConfigError(str(exc), line=_line_of(lines, "solve"))

    # [residual]
    residual = None
    if parser.has_section("residual"):
        sec = _SectionReader(parser, lines, "residual")
        z_min = sec.require("zMin", sec.take_float("zMin"))
        z_max = sec.require("zMax", sec.take_float("zMax"))
        z_step = sec.require("zStep", sec.take_float("zStep"))
        sec.reject_surplus()
        if not z_min < z_max:
            raise ConfigError(
                f"residual: zMin must be < zMax, got {z_min} >= {z_max}",
                line=_line_of(lines, "residual"),
            )
        if not z_step > 0:
            raise ConfigError(
                f"residual.zStep must be positive, got {z_step}",
                line=_line_of(lines, "residual", "zStep"),
            )
        residual = (z_min, z_max, z_step)

    # [continue]
    cont = None
    if parser.has_section("continue"):
        sec = _SectionReader(parser, lines, "continue")
        parameter = sec.require("parameter", sec.take("parameter"))
        start = sec.require("start", sec.take_float("start"))
        stop = sec.require("stop", sec.take_float("stop"))
        steps = sec.require("steps", sec.take_int("steps"))
        sec.reject_surplus()
        if steps < 2:
            raise ConfigError(
                f"continue.steps must be >= 2, got {steps}",
                line=_line_of(lines, "continue", "steps"),
            )
        names = [name for name, _ in model.params_items()]
        if parameter not in names:
            raise ConfigError(
                f"continue.parameter: {model.family} has no parameter "
                f"{parameter!r}; choose from {names}",
                line=_line_of(lines, "continue", "parameter"),
            )
        cont = (parameter, start, stop, steps)

    # [output]
    sec = _SectionReader(parser, lines, "output")
    out_dir = sec.take("dir") or "."
    stem = sec.take("stem") or os.path.splitext(os.path.basename(path))[0]
    sec.reject_surplus()

    return RunConfig(
        model=model,
        solve=solve_cfg,
        residual=residual,
        cont=cont,
        out_dir=out_dir,
        stem=stem,
        echo=echo,
    )


def _header(cfg, command, extra=()):
    lines = [f"# parman {__version__}", f"# command: {command}"]
    lines += [f"# config {entry}" for entry in cfg.echo]
    lines.append(
        "# tolerances"
        f" tolUnit={fmt(TOL_UNIT)} tolZero={fmt(TOL_ZERO)} tolRes={fmt(TOL_RES)}"
        f" tolSolveRel={fmt(TOL_SOLVE_REL)} resonanceGuard={fmt(RESONANCE_GUARD)}"
    )
    lines += list(extra)
    return lines


def _write_table(path, header_lines, columns, rows):
    lines = list(header_lines)
    lines.append("\t".join(columns))
    lines += ["\t".join(row) for row in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path}")


def _component_columns(d, base):
    if d == 1:
        return (base,)
    return tuple(f"{base}_{i + 1}" for i in range(d))


def cmd_spectrum(cfg, out_dir):
    rep = analyze(cfg.model.closed_linear_data())
    extra = [
        "# charPoly = " + ",".join(fmt(c) for c in rep.char_poly),
        f"# hyperbolic = {'true' if rep.hyperbolic else 'false'}",
        f"# exponent = {rep.exponent}",
    ]
    code = 0
    reason = None
    try:
        eig = select_eigensolution(cfg.model, cfg.solve.branch)
        extra.append(f"# branchLambda = {fmt(eig.lam)}")
        extra.append(f"# nonResonant = true nMax={eig.n_max}")
    except SpectralError as exc:
        extra.append("# branchLambda = none")
        extra.append(f"# nonResonant = unavailable ({exc})")
        code, reason = 3, exc
    rows = [
        (fmt(r.real), fmt(r.imag), fmt(abs(r)), label)
        for r, label in zip(rep.roots, rep.labels)
    ]
    _write_table(
        os.path.join(out_dir, f"{cfg.stem}.spectrum.tsv"),
        _header(cfg, "spectrum", extra),
        ("re", "im", "modulus", "class"),
        rows,
    )
    if reason is not None:
        print(f"spectral failure: {reason}", file=sys.stderr)
    return code


def _solved(cfg):
    eig = select_eigensolution(cfg.model, cfg.solve.branch)
    return eig, solve(cfg.model, eig, cfg.solve)


def cmd_solve(cfg, out_dir):
    eig, rep = _solved(cfg)
    d = cfg.model.d
    rows = [
        (str(k), *(fmt(v) for v in rep.series.coeffs[k]))
        for k in range(rep.series.order + 1)
    ]
    _write_table(
        os.path.join(out_dir, f"{cfg.stem}.coeffs.tsv"),
        _header(cfg, "solve"),
        ("k", *_component_columns(d, "P_k")),
        rows,
    )
    growth, _ = rep.coeff_growth
    _write_table(
        os.path.join(out_dir, f"{cfg.stem}.meta.tsv"),
        _header(cfg, "solve"),
        ("lambda", "tau", "residualSeriesMax", "coeffGrowth"),
        [(fmt(rep.lam), fmt(rep.scale), fmt(rep.residual_series_max), fmt(growth))],
    )
    return 0


def cmd_residual(cfg, out_dir):
    if cfg.residual is None:
        raise ConfigError("the residual command requires a [residual] section")
    eig, rep = _solved(cfg)
    z_min, z_max, z_step = cfg.residual
    count = int(math.floor((z_max - z_min) / z_step + 1e-9)) + 1
    grid = [z_min + i * z_step for i in range(count)]
    samples = residual_sample(cfg.model, rep.series, eig.lam, grid)
    rows = []
    for z, magnitude in samples:
        values = np.atleast_1d(evaluate(rep.series, z))
        rows.append((fmt(z), *(fmt(v) for v in values), fmt(magnitude)))
    _write_table(
        os.path.join(out_dir, f"{cfg.stem}.residual.tsv"),
        _header(cfg, "residual"),
        ("z", *_component_columns(cfg.model.d, "P"), "absPhi"),
        rows,
    )
    return 0


def _normalized_head(report, count=20):
    """P_k / tau^k for k = 1..count: scale-free coefficients for comparing
    consecutive continuation steps."""
    top = min(count, report.series.order)
    k = np.arange(1, top + 1)[:, None]
    return report.series.coeffs[1 : top + 1] / report.scale**k


def cmd_continue(cfg, out_dir):
    if cfg.cont is None:
        raise ConfigError("the continue command requires a [continue] section")
    parameter, start, stop, steps = cfg.cont
    values = [float(v) for v in np.linspace(start, stop, steps)]
    trace = continuation(cfg.model, parameter, values, cfg.solve)
    rows = []
    previous = None
    for step in trace:
        head = _normalized_head(step.report)
        delta = 0.0 if previous is None else float(np.max(np.abs(head - previous)))
        previous = head
        rows.append(
            (
                fmt(step.param),
                fmt(step.lam),
                str(step.exponent),
                fmt(step.report.residual_series_max),
                fmt(delta),
            )
        )
    _write_table(
        os.path.join(out_dir, f"{cfg.stem}.continue.tsv"),
        _header(cfg, "continue"),
        ("param", "lambda", "e", "residualSeriesMax", "deltaP"),
        rows,
    )
    return 0


def _check_table_regression():
    worst = 0.0
    for gammas, lam in TABLE_ROWS:
        fk = FrenkelKontorova(gammas=gammas, delta=0.4, C=(1.0,))
        worst = max(worst, abs(chebyshev_reduce(fk).slow - lam))
    if worst > 1e-12:
        raise AssertionError(f"slow eigenvalue off by {worst:.3e} (tol 1e-12)")
    return f"4 rows, max |dlambda| = {worst:.3e}"


def _check_rational_oracle():
    model = RationalExample()
    eig = select_eigensolution(model)
    rep = solve(model, eig, SolveConfig(order=60, scale=1.0))
    worst = float(np.max(np.abs(rep.series.coeffs[1:, 0] - 1.0)))
    if worst > 1e-10:
        raise AssertionError(f"coefficient error {worst:.3e} (tol 1e-10)")
    return f"60 coefficients, max |P_k - 1| = {worst:.3e}"


def _check_mcmillan_oracle():
    model = McMillan(eta=1.0)
    eig = select_eigensolution(model)
    amp = 2.0 * math.sinh(1.0)
    rep = solve(model, eig, SolveConfig(order=40, scale=amp))
    k = np.arange(41)
    oracle = np.where(k % 2 == 1, (-1.0) ** ((k - 1) // 2), 0.0) * amp
    worst = float(np.max(np.abs(rep.series.coeffs[:, 0] - oracle)))
    if worst > 1e-11 * amp:
        raise AssertionError(f"coefficient error {worst:.3e} (tol {1e-11 * amp:.1e})")
    return f"40 coefficients, max deviation = {worst:.3e}"


def _check_scale_covariance():
    fk = FrenkelKontorova(gammas=(1.0, 0.1, 0.0), delta=0.4, C=(1.0,))
    eig = select_eigensolution(fk)
    r1 = solve(fk, eig, SolveConfig(order=30, scale=10.0))
    r2 = solve(fk, eig, SolveConfig(order=30, scale=20.0))
    k = np.arange(31)[:, None]
    ref = 2.0**k * r1.series.coeffs
    scale = float(np.max(np.abs(ref)))
    worst = float(np.max(np.abs(r2.series.coeffs - ref)))
    if worst > 1e-12 * scale:
        raise AssertionError(f"covariance violation {worst:.3e} (tol {1e-12 * scale:.1e})")
    return f"order 30, max |P(2tau) - 2^k P(tau)| = {worst:.3e}"


def _check_pythagorean_identity():
    rng = np.random.default_rng(20260822)
    worst = 0.0
    for _ in range(100):
        order = int(rng.integers(1, 41))
        base = TruncatedSeries(rng.uniform(-1.0, 1.0, size=(order + 1, 1)))
        cache = sin_cos(base)
        total = (
            mul(cache.sin_series, cache.sin_series).coeffs
            + mul(cache.cos_series, cache.cos_series).coeffs
        )
        total[0, 0] -= 1.0
        worst = max(worst, float(np.max(np.abs(total))))
    if worst > 1e-12:
        raise AssertionError(f"sin^2+cos^2-1 deviation {worst:.3e} (tol 1e-12)")
    return f"100 random series, max |sin^2+cos^2-1| = {worst:.3e}"


VERIFY_CHECKS = (
    ("table_regression", _check_table_regression),
    ("rational_oracle", _check_rational_oracle),
    ("mcmillan_oracle", _check_mcmillan_oracle),
    ("scale_covariance", _check_scale_covariance),
    ("pythagorean_identity", _check_pythagorean_identity),
)


def cmd_verify():
    failed = []
    for name, check in VERIFY_CHECKS:
        try:
            detail = check()
        except Exception as exc:
            print(f"FAIL {name}: {type(exc).__name__}: {exc}")
            failed.append(name)
            continue
        print(f"PASS {name}: {detail}")
    if failed:
        print(f"{len(failed)} of {len(VERIFY_CHECKS)} checks failed: "
              + ", ".join(failed))
        return 1
    print(f"all {len(VERIFY_CHECKS)} checks passed")
    return 0


def build_arg_parser():
    parser = argparse.ArgumentParser(
        prog="parman",
        description="Taylor parameterization of invariant manifolds of "
        "implicit difference equations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_config in (
        ("spectrum", True),
        ("solve", True),
        ("residual", True),
        ("continue", True),
        ("verify", False),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=needs_config)
        p.add_argument("--out", default=None)
    return parser


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "solve": cmd_solve,
    "residual": cmd_residual,
    "continue": cmd_continue,
}


def main(argv=None):
    args = build_arg_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify()
        cfg = parse_config(args.config)
        out_dir = args.out if args.out is not None else cfg.out_dir
        os.makedirs(out_dir, exist_ok=True)
        return _COMMANDS[args.command](cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SpectralError as exc:
        print(f"spectral failure: {exc}", file=sys.stderr)
        return 3
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
