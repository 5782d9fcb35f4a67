#!/usr/bin/env python3
"""Regenerate every analysis CSV/JSON in one go.

Writes into ./data (or the directory given as the first argument) using
the same code paths as the CLI, so the files match what
`xypurify fig5|fig6|validate-cavity` would produce.
"""
import pathlib
import sys

from click.testing import CliRunner

from xypurify.cli import main


def run(args):
    result = CliRunner().invoke(main, args, catch_exceptions=False)
    if result.exit_code != 0:
        raise SystemExit(f"command {args} failed:\n{result.output}")


if __name__ == "__main__":
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data")
    out.mkdir(parents=True, exist_ok=True)

    run(["fig5", "--panel", "a", "--output", str(out / "fidelity_vs_time.csv")])
    run(["fig5", "--panel", "b", "--f-steps", "41",
         "--output", str(out / "scheme_comparison.csv")])
    run(["fig5", "--panel", "c", "--f-min", "0.5", "--f-max", "1.0",
         "--f-steps", "26", "--output", str(out / "round_map_surface.csv")])
    run(["fig6", "--f-steps", "41", "--n-max", "10",
         "--output", str(out / "pumping_saturation.csv")])
    run(["validate-cavity", "--delta", "50", "--ell", "1.0",
         "--output", str(out / "cavity_validation.json"),
         "--dump-trajectory", str(out / "cavity_trajectory.csv")])

    print(f"wrote {len(list(out.iterdir()))} files to {out}/")
