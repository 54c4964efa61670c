"""`render_figures --run-dir DIR --out DIR`: one overlay image per quantity."""

import argparse
import sys
from pathlib import Path

from .render import QUANTITIES, FigureError, PlotSpec, render


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="render_figures",
                     description="Render time-series figures from a stored run")
    parser.add_argument("--run-dir", required=True,
                        help="directory holding series.csv and manifest.json")
    parser.add_argument("--out", required=True, help="output directory for images")
    parser.add_argument("--stocks", default=None,
                        help="comma-separated 1-based stock indices (default: all)")
    parser.add_argument("--t-min", type=int, default=None)
    parser.add_argument("--t-max", type=int, default=None)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        run_dir = Path(args.run_dir)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        stocks = ()
        if args.stocks:
            stocks = tuple(int(s) for s in args.stocks.split(",") if s.strip())
        for quantity in QUANTITIES:
            path = render(PlotSpec(
                csv_path=run_dir / "series.csv",
                quantity=quantity,
                stocks=stocks,
                t_min=args.t_min,
                t_max=args.t_max,
                out_path=out_dir / f"{quantity}.png",
            ))
            print(f"wrote {path}")
        return 0
    except (_UsageError, FigureError, ValueError) as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
