"""Command-line front end: run scenarios, compare against analytics, dump ladders."""

from __future__ import annotations

import os
import sys

import click

from .cascade import CascadeIntegrationError
from .config import ConfigError, RunConfig, parse_config
from .correlation import FitError
from .jc_core import ResonanceError, decay_rate_n
from .lindblad import EvolutionError
from .runner import MissingArtifactError, _fmt, _write_atomic, compare_report, run_scenario


def _fail(category: str, exc: BaseException):
    click.echo(f"error:{category}: {exc}", err=True)
    sys.exit(1)


def _load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        _fail("io", exc)
    try:
        return parse_config(text)
    except ConfigError as exc:
        _fail("config", exc)


@click.group()
def main():
    """Simulate and cross-check elastic photon scattering off a single atom."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=False), help="Path to a key/value config file.")
def run(config_path: str):
    """Run the configured scenario and write trajectory/correlator/spectrum CSVs."""
    cfg = _load_config(config_path)
    try:
        result = run_scenario(cfg)
    except (EvolutionError, CascadeIntegrationError) as exc:
        _fail("integration-failure", exc)
    except ResonanceError as exc:
        _fail("validation", exc)
    except OverflowError as exc:
        _fail("numeric-range", exc)
    except (ValueError,) as exc:
        _fail("validation", exc)
    except OSError as exc:
        _fail("io", exc)
    click.echo(f"wrote artifacts to {cfg.output_dir} "
               f"(anchor t={result.report['anchor_time']:.6g})")


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=False), help="Path to a key/value config file.")
def compare(config_path: str):
    """Tabulate analytic-vs-numeric deviations for an existing run."""
    cfg = _load_config(config_path)
    try:
        rows = compare_report(cfg)
    except MissingArtifactError as exc:
        _fail("missing-artifact", exc)
    except FitError as exc:
        _fail("fit-failure", exc)
    except OSError as exc:
        _fail("io", exc)
    width = max(len(r.quantity) for r in rows)
    for r in rows:
        status = "pass" if r.passed else "FAIL"
        click.echo(f"{r.quantity:<{width}}  analytic={r.analytic:.6g}  "
                   f"numeric={r.numeric:.6g}  rel_dev={r.rel_dev:.3g}  {status}")
    if not all(r.passed for r in rows):
        sys.exit(1)


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=False), help="Path to a key/value config file.")
def ladder(config_path: str):
    """Dump the dressed-level table (angles, frequencies, step rates) as CSV."""
    cfg = _load_config(config_path)
    from .jc_core import DressedBasis
    from .runner import _scenario_n_max

    try:
        basis = DressedBasis.build(cfg.params, _scenario_n_max(cfg))
        lines = ["n,phi_n,omega_plus,omega_minus,gamma_n"]
        for n in range(1, basis.n_max + 1):
            lines.append(",".join([
                str(n),
                _fmt(basis.phi_at(n)),
                _fmt(float(basis.omega_plus[n - 1])),
                _fmt(float(basis.omega_minus[n - 1])),
                _fmt(decay_rate_n(cfg.params, n)),
            ]))
        os.makedirs(cfg.output_dir, exist_ok=True)
        path = os.path.join(cfg.output_dir, "ladder.csv")
        _write_atomic(path, "\n".join(lines) + "\n")
    except ResonanceError as exc:
        _fail("validation", exc)
    except OSError as exc:
        _fail("io", exc)
    click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
