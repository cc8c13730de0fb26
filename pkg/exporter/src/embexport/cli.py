"""embexport: run an embedding network over a manifest, write an EMB1 file.

Exit codes: 0 success (gaps are reported but not fatal), 1 internal
error, 2 usage/precondition error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ExportError, InputError
from .export import ExportJob, run_export
from .segments import TARGET_RMS

log = logging.getLogger("embexport")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embexport",
        description="export SoundNet/VGGish-style embeddings per manifest segment",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="run one network over a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--net", required=True, choices=["soundnet", "vggish"])
    p.add_argument("--out", required=True, help="output EMB1 file")
    p.add_argument("--layer", default="conv5",
                   choices=["conv4", "conv5", "conv6", "conv7"],
                   help="soundnet tap (conv5 is the supported default)")
    p.add_argument("--weights", help="torch state-dict file with pretrained weights")
    p.add_argument("--random-weights", type=int, default=None, metavar="SEED",
                   help="explicit test mode: seeded random initialization")
    p.add_argument("--wav-root", help="base directory for manifest wav paths")
    p.add_argument("--target-rms", type=float, default=TARGET_RMS)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)

    job = ExportJob(
        manifest=Path(args.manifest),
        net=args.net,
        out=Path(args.out),
        layer=args.layer,
        weights=Path(args.weights) if args.weights else None,
        random_seed=args.random_weights,
        wav_root=Path(args.wav_root) if args.wav_root else None,
        target_rms=args.target_rms,
    )
    log.info("job: net=%s layer=%s manifest=%s out=%s weights=%s seed=%s",
             job.net, job.layer, job.manifest, job.out, job.weights,
             job.random_seed)
    try:
        summary = run_export(job)
    except InputError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 2
    except ExportError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 1

    print(f"written={summary.written}")
    print(f"gaps={len(summary.gaps)}")
    for key in summary.gaps:
        print(f"gap={key}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
