import argparse
import sys

from . import serve
from .models import resolve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="boxserve",
        description="serve a stub classifier over stdin/stdout line JSON",
    )
    parser.add_argument("--model", default="fixed:0.7,0.3",
                        help="quadrant | meanlogit | fixed:p1,p2,...")
    args = parser.parse_args(argv)
    model, n_classes = resolve(args.model)
    serve(model, n_classes, input_kind="image")
    return 0


if __name__ == "__main__":
    sys.exit(main())
