"""Command-line entry point: plotview --in <stem>[,<stem>...] --out fig.png."""

import argparse
import sys

from .render import PlotSpec, render


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="plotview",
        description="Render heatmaps of exported two-time correlation "
                    "matrices (reads <stem>.re.csv/.im.csv/.meta.json).")
    ap.add_argument("--in", dest="stems", required=True,
                    help="comma-separated list of input stems, one per panel")
    ap.add_argument("--part", choices=("re", "im"), default="re",
                    help="matrix part to display (default: re)")
    ap.add_argument("--power", type=float, default=1.0,
                    help="signed-power display exponent in (0, 1]; "
                         "1 is linear, 0.2 lifts weak structure (default: 1)")
    ap.add_argument("--out", required=True, help="output image path")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    stems = tuple(s for s in (p.strip() for p in args.stems.split(",")) if s)
    try:
        spec = PlotSpec(stems, part=args.part, power=args.power, out=args.out)
        render(spec)
    except (ValueError, OSError) as exc:
        print(f"plotview: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
