#!/usr/bin/env python3
"""Detection tuning run: sweeps the revocation threshold and the deviation
shift through `cogsec detect` and records detection and false-positive rates
per training-set size.

Usage: tools/tuning_run.py --cli build/cogsec --out docs/tuning_results.json
"""

import argparse
import copy
import json
import pathlib
import subprocess
import sys
import tempfile
import time


def run_detect(cli, config, sizes, workdir):
    cfg_file = workdir / "config.json"
    cfg_file.write_text(json.dumps(config))
    out_dir = workdir / "out"
    cmd = [cli, "detect", "--format", "structured", "-c", str(cfg_file), "-o", str(out_dir),
           "--training-set-sizes", *[str(s) for s in sizes]]
    subprocess.run(cmd, check=True, stdout=subprocess.DEVNULL)
    return json.loads((out_dir / "detect.json").read_text())


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cli", required=True, help="path to the cogsec executable")
    parser.add_argument("--config", default="config/default.json", help="base configuration")
    parser.add_argument("--out", required=True, help="JSON results file")
    parser.add_argument("--thetas", type=float, nargs="+", default=[0.05, 0.1, 0.2])
    parser.add_argument("--shifts", type=float, nargs="+", default=[2.0, 3.0, 5.0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[5, 50])
    parser.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    args = parser.parse_args()

    base = json.loads(pathlib.Path(args.config).read_text())
    base["experiments"]["seeds"] = args.seeds
    results = []
    with tempfile.TemporaryDirectory(prefix="cogsec-tuning-") as tmp:
        workdir = pathlib.Path(tmp)
        for shift in args.shifts:
            for theta in args.thetas:
                config = copy.deepcopy(base)
                config["csm"]["policy"]["theta"] = theta
                config["sim"]["deviation"]["shift"] = [shift] * len(config["sim"]["deviation"]["shift"])
                started = time.monotonic()
                report = run_detect(args.cli, config, args.sizes, workdir)
                elapsed = time.monotonic() - started
                for row in report["by_training_set_size"]:
                    results.append({
                        "shift_sigmas": shift,
                        "theta": theta,
                        "training_set_size": row["training_set_size"],
                        "mean_detection_rate": row["mean_detection_rate"],
                        "min_detection_rate": row["min_detection_rate"],
                        "mean_false_positive_rate": row["mean_false_positive_rate"],
                        "max_false_positive_rate": row["max_false_positive_rate"],
                    })
                print(f"shift {shift} theta {theta}: {elapsed:.0f} s", file=sys.stderr)

    doc = {"seeds": args.seeds, "base_config": args.config, "results": results}
    pathlib.Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")

    print("| shift (sigma) | theta | T | mean det | min det | mean FPR | max FPR |")
    print("|---|---|---|---|---|---|---|")
    for r in results:
        print(f"| {r['shift_sigmas']:g} | {r['theta']:g} | {r['training_set_size']} | "
              f"{r['mean_detection_rate']:.3f} | {r['min_detection_rate']:.3f} | "
              f"{r['mean_false_positive_rate']:.3f} | {r['max_false_positive_rate']:.3f} |")


if __name__ == "__main__":
    main()
