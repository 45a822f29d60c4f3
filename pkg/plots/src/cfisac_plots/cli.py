"""Command-line entry: cfisac-plot --csv results.csv --x P_dBm --out fig.png"""

import argparse
import sys

from .render import PlotSpec, SchemaError, render_curves


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cfisac-plot",
        description="Render a sweep CSV into a radar-SINR line chart")
    parser.add_argument("--csv", required=True, help="harness results CSV")
    parser.add_argument("--x", required=True, choices=["P_dBm", "Gamma_dB"],
                        help="sweep axis column")
    parser.add_argument("--out", required=True, help="output image (png or svg)")
    parser.add_argument("--title", default="Radar output SINR")
    args = parser.parse_args(argv)
    try:
        spec = PlotSpec(csv_path=args.csv, x_field=args.x,
                        output_path=args.out, title=args.title)
        curves = render_curves(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out} ({len(curves)} curves)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
