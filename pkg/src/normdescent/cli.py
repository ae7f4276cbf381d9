"""Command-line entry point: run / sweep / verify / parse-mnist."""

import argparse
import json
import sys

from . import data, runner, verify


def main(argv=None):
    parser = argparse.ArgumentParser(prog="normdescent")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="train one optimizer config over its seeds")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help="override the output directory")

    p_sweep = sub.add_parser("sweep", help="run an optimizer sweep and aggregate margins")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--workers", type=int, default=None)

    p_verify = sub.add_parser("verify", help="run a named property suite")
    p_verify.add_argument("suite", choices=sorted(verify.SUITES))

    p_mnist = sub.add_parser("parse-mnist", help="parse an IDX pair into an .npz archive")
    p_mnist.add_argument("--images", required=True)
    p_mnist.add_argument("--labels", required=True)
    p_mnist.add_argument("--out", required=True)

    args = parser.parse_args(argv)

    if args.command == "run":
        config = runner.load_config(args.config)
        results = runner.run(config, out_override=args.out)
        for result in results:
            print(json.dumps({"seed": result.seed, "csv": result.csv_path,
                              "final_loss": result.summary["final_loss"],
                              "steps": result.summary["steps"]}))
        return 0

    if args.command == "sweep":
        config = runner.load_config(args.config)
        results, table, agg_path = runner.sweep(config, out_override=args.out, workers=args.workers)
        print(json.dumps({"runs": len(results), "aggregate": str(agg_path)}))
        return 0

    if args.command == "verify":
        checks = verify.run_suite(args.suite)
        ok = True
        for check in checks:
            print(json.dumps({"suite": args.suite, **check}))
            ok = ok and check["passed"]
        print(json.dumps({"suite": args.suite, "passed": ok, "checks": len(checks)}))
        return 0 if ok else 1

    if args.command == "parse-mnist":
        raw = data.parse_idx(args.images, args.labels)
        import numpy as np

        np.savez(args.out, images=raw.images, digits=raw.digits)
        print(json.dumps({"count": int(raw.digits.size), "out": args.out}))
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
