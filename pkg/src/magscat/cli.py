"""
Batch front end.

    magscat transform --config run.cfg [--output table.csv]
    magscat transport --config run.cfg [--output cascade.csv]
    magscat invert    --config run.cfg --data table.csv [--output report.txt]
    magscat verify    --config run.cfg [--output report.txt]

Exit codes: 0 success, 1 verification failure, 2 I/O or configuration
error, 3 computation failure, 4 data schema mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import fields, inversion, quadrature, sphere, transport, verification
from . import raytransform as rt
from .config import ConfigError, RunConfig, build_field, parse_config
from .errors import MagscatError

EXIT_OK, EXIT_VERIFY, EXIT_IO, EXIT_COMPUTE, EXIT_SCHEMA = 0, 1, 2, 3, 4


class SchemaError(MagscatError):
    """Input data does not follow the transform CSV schema."""


def fmt(x: float) -> str:
    """Round-trip decimal with 17 significant digits; -0 is written as 0."""
    return format(float(x) + 0.0, ".17g")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def transform_header(n: int) -> list[str]:
    return [f"omega_{i}" for i in range(1, n + 1)] + [f"tangent_{i}" for i in range(1, n + 1)] + ["k", "value"]


def run_transform(config: RunConfig) -> str:
    n, k = config.dimension, config.k
    B = fields.PotentialDifference(k, build_field(config))
    omegas = sphere.sample_directions(n, config.omegas)
    samples = rt.transform_grid(B, omegas, config.tangents, config.panels, config.points)
    rows = [
        [fmt(x) for x in smp.geodesic.omega] + [fmt(x) for x in smp.geodesic.tangent] + [str(k), fmt(smp.value)]
        for smp in samples
    ]
    return _csv_text(transform_header(n), rows)


def _transport_source(config: RunConfig, form):
    n, k = config.dimension, config.k
    omega = sphere.north_pole(n)
    if config.forcing == "constant":
        return lambda j, previous: transport.ForcingTerm.constant(j, config.forcing_value)
    D = fields.PotentialDifference(k, form)

    def source(j, previous):
        if j == k - 1:
            return transport.forcing_wk(D, config.lam, omega)
        # below the difference order the forcings of the two potentials coincide
        return transport.ForcingTerm.constant(j, 0.0)

    return source


def run_transport(config: RunConfig) -> str:
    n = config.dimension
    form = build_field(config)
    omega = sphere.north_pole(n)
    thetas = tuple(sphere.tangent_fan(omega, config.thetas))
    s = np.pi * np.arange(1, config.s_points + 1) / (config.s_points + 1)
    cfg = transport.CascadeConfig(config.lam, config.levels, omega, thetas, s)
    solutions = transport.cascade(cfg, _transport_source(config, form))
    rows = []
    for a in solutions:
        for ti, theta in enumerate(thetas):
            vals = a(s, theta)
            growth = fmt(a.measured_growth[ti])
            for si, v in zip(s, vals):
                rows.append([fmt(si), str(ti), str(a.level), fmt(v.real), fmt(v.imag), growth])
    return _csv_text(["s", "theta_index", "level", "re", "im", "growth_exponent"], rows)


def read_transform_csv(text: str, n: int, k: int):
    """Parse a transform table into (geodesics, values); raise SchemaError on any mismatch."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("data file is empty") from None
    expected = transform_header(n)
    if [h.strip() for h in header] != expected:
        raise SchemaError(f"header {header!r} does not match {expected!r}")
    geodesics, values = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(expected):
            raise SchemaError(f"line {lineno}: expected {len(expected)} columns, got {len(row)}")
        try:
            nums = [float(x) for x in row]
        except ValueError:
            raise SchemaError(f"line {lineno}: non-numeric cell") from None
        if int(nums[2 * n]) != nums[2 * n] or int(nums[2 * n]) != k:
            raise SchemaError(f"line {lineno}: k = {row[2 * n]} does not match configured k = {k}")
        try:
            geodesics.append(sphere.Geodesic(nums[:n], nums[n: 2 * n]))
        except MagscatError as exc:
            raise SchemaError(f"line {lineno}: invalid geodesic ({exc})") from None
        values.append(nums[-1])
    if not geodesics:
        raise SchemaError("data file has no rows")
    return geodesics, np.array(values)


def run_invert(config: RunConfig, data_text: str) -> str:
    n, k = config.dimension, config.k
    geodesics, data = read_transform_csv(data_text, n, k)
    basis = inversion.build_basis(n, k, config.max_degree)
    M = inversion.assemble(basis, geodesics, config.panels, config.points)
    result = inversion.solve(M, data, config.ridge)
    truth = build_field(config)
    lines = [f"basis_size: {len(basis)}", f"rows: {len(geodesics)}"]
    lines += [f"coefficient[{label}]: {fmt(c)}" for label, c in zip(basis.labels, result.coefficients)]
    lines += [
        f"residual_norm: {fmt(result.residual_norm)}",
        "singular_values: " + " ".join(fmt(v) for v in result.singular_values),
        f"condition: {fmt(result.condition)}",
        f"rank: {result.rank}",
        f"field_sup_error[{config.field_name}]: {fmt(inversion.field_sup_error(basis, result.coefficients, truth))}",
    ]
    return "\n".join(lines) + "\n"


def run_verify(config: RunConfig, corrupt: str | None = None) -> tuple[str, bool]:
    results = verification.run_checks(config, corrupt)
    return verification.report(results), all(r.passed for r in results)


def _write(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parser():
    p = argparse.ArgumentParser(prog="magscat", description=__doc__.split("\n\n")[0].strip())
    p.add_argument("command", choices=("transform", "transport", "invert", "verify"))
    p.add_argument("--config", required=True, help="run configuration file")
    p.add_argument("--data", help="transform CSV (invert only)")
    p.add_argument("--output", help="output path; overrides [run] output; default stdout")
    p.add_argument("--corrupt", metavar="CHECK", help=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            config = parse_config(fh.read())
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_IO
    output = args.output or config.output or None

    data_text = None
    if args.command == "invert":
        if not args.data:
            print("error: invert needs --data", file=sys.stderr)
            return EXIT_IO
        try:
            with open(args.data, encoding="utf-8") as fh:
                data_text = fh.read()
        except OSError as exc:
            print(f"error: cannot read data: {exc}", file=sys.stderr)
            return EXIT_IO

    status = EXIT_OK
    try:
        if args.command == "transform":
            text = run_transform(config)
        elif args.command == "transport":
            text = run_transport(config)
        elif args.command == "invert":
            text = run_invert(config, data_text)
        else:
            try:
                text, ok = run_verify(config, args.corrupt)
            except KeyError as exc:
                print(f"error: {exc.args[0]}", file=sys.stderr)
                return EXIT_IO
            status = EXIT_OK if ok else EXIT_VERIFY
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (MagscatError, ArithmeticError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE

    try:
        _write(text, output)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


if __name__ == "__main__":
    sys.exit(main())
