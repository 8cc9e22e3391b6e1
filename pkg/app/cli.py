"""
Command line for the coset sweep.

    derive         addresses of one key, one JSON object per line
    scan           sweep cosets against the corpus indices
    survey         subgroup catalog of a curve's scalar field
    build-index    build a chain's corpus index from dump files
    ingest-blocks  turn block documents into a corpus dump
    index-info     print an index's metadata
    verify-hits    re-derive every line of a hits file
    generators     print or write the coset generator fixture
    serve          run the HTTP API
"""
from pathlib import Path
from typing import Optional, Sequence
import argparse
import json
import logging
import sys

from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import SourceError, SweepError
from app.schemas.chains import ChainId, parse_chains, parse_kinds
from app.schemas.scan import ScanJob
from app.services import corpus, scanner, survey
from app.services.block_source import PagedBlockSource, RecordedBlockSource, RpcBlockSource
from app.services.curve import get_table
from app.services.derivation import derive_all
from app.services.scalar_group import (
    COSET_COUNT,
    H,
    check_generator_fixture,
    coset_generator,
    scalar_from_hex,
    write_generator_fixture,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_HITS = 2


def _chain(text: str) -> ChainId:
    try:
        return ChainId(text.strip().lower())
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown chain {text!r}") from None


def _cmd_derive(args: argparse.Namespace) -> int:
    k = scalar_from_hex(args.key)
    kinds = parse_kinds(args.kinds) if args.kinds else None
    for addr in derive_all(k, parse_chains(args.chains), get_table(settings.WINDOW_BITS), kinds):
        print(json.dumps(addr.to_dict()))
    return EXIT_OK


def _cmd_scan(args: argparse.Namespace) -> int:
    start = args.start
    end = H if args.count is None else start + args.count
    try:
        job = ScanJob(
            cosets=scanner.parse_cosets(args.cosets),
            chains=parse_chains(args.chains),
            kinds=sorted(parse_kinds(args.kinds)),
            start=start,
            end=end,
            corpus_dir=args.corpus_dir or settings.CORPUS_DIR,
            threads=args.threads or settings.THREADS,
            checkpoint=args.checkpoint,
            output=args.out,
            chunk_size=args.chunk_size or settings.CHUNK_SIZE,
            batch_size=args.batch_size or settings.BATCH_SIZE,
            engine=args.engine or settings.ENGINE,
        )
    except ValidationError as e:
        raise SweepError(f"invalid scan job: {e}") from e
    summary = scanner.run(job)
    print(summary.model_dump_json())
    return EXIT_HITS if summary.hits else EXIT_OK


def _cmd_survey(args: argparse.Namespace) -> int:
    catalog = survey.divisors_under(survey.get_profile(args.curve), args.budget)
    if args.json:
        print(json.dumps(survey.report_data(catalog, args.rate)))
    else:
        print(survey.report(catalog, args.rate, args.rows))
    return EXIT_OK


def _cmd_build_index(args: argparse.Namespace) -> int:
    stats = corpus.IngestStats()

    def records():
        for path in args.input:
            yield from corpus.ingest_file(path, args.chain, stats)

    index = corpus.build_index(
        records(),
        args.chain,
        fp_rate=args.fp_rate,
        directory=args.corpus_dir or settings.CORPUS_DIR,
        name=args.name,
    )
    info = corpus.index_info(index)
    info["skipped_lines"] = stats.skipped
    print(json.dumps(info))
    return EXIT_OK


def _block_source(args: argparse.Namespace):
    if args.recorded:
        return RecordedBlockSource(args.recorded)
    if args.paged:
        return PagedBlockSource(base_url=args.url)
    return RpcBlockSource(base_url=args.url)


def _cmd_ingest_blocks(args: argparse.Namespace) -> int:
    if args.to_height < args.from_height:
        raise SweepError("--to must not be below --from")
    stats = corpus.IngestStats()
    source = _block_source(args)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(out, "a", encoding="utf-8") as fh:
            heights = range(args.from_height, args.to_height + 1)
            for record in corpus.ingest_blocks(source, args.chain, heights, stats):
                fh.write(record.text + "\n")
    except SourceError as e:
        resume = args.from_height if e.last_completed is None else e.last_completed + 1
        print(f"error: {e}; resume with --from {resume}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        source.close()
    print(json.dumps({"records": stats.records, "skipped": stats.skipped, "last_height": stats.last_height}))
    return EXIT_OK


def _cmd_index_info(args: argparse.Namespace) -> int:
    index = corpus.open_index(args.corpus_dir or settings.CORPUS_DIR, args.chain, args.name)
    print(json.dumps(corpus.index_info(index)))
    return EXIT_OK


def _cmd_verify_hits(args: argparse.Namespace) -> int:
    result = scanner.verify_hits(args.path)
    print(json.dumps(result))
    return EXIT_ERROR if result["mismatches"] else EXIT_OK


def _cmd_generators(args: argparse.Namespace) -> int:
    if args.write:
        write_generator_fixture(args.path)
        return EXIT_OK
    if args.check:
        return EXIT_OK if check_generator_fixture(args.path) else EXIT_ERROR
    for i in range(COSET_COUNT):
        print(f"g_{i} {coset_generator(i).hex()}")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("main:app", host=args.host, port=args.port, reload=settings.DEBUG, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coset-sweep", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="logging level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="derive every address of one private key")
    p.add_argument("--key", required=True, help="private key, 64 hex characters")
    p.add_argument("--chains", default="all", help="comma-separated chains or 'all'")
    p.add_argument("--kinds", default=None, help="comma-separated address kinds or 'all'")
    p.set_defaults(func=_cmd_derive)

    p = sub.add_parser("scan", help="sweep cosets against the corpus indices")
    p.add_argument("--cosets", default="0", help="'0', '0-7', '1,3' or 'all'")
    p.add_argument("--chains", default="btc", help="comma-separated chains or 'all'")
    p.add_argument("--kinds", default="all", help="comma-separated address kinds or 'all'")
    p.add_argument("--corpus-dir", default=None, help="directory holding the chain indices")
    p.add_argument("--start", type=int, default=0, help="first exponent j")
    p.add_argument("--count", type=int, default=None, help="number of exponents (default: to the end of the coset)")
    p.add_argument("--threads", type=int, default=None, help="worker processes")
    p.add_argument("--out", default="hits.jsonl", help="hit file, appended to")
    p.add_argument("--checkpoint", default=None, help="checkpoint file for resume")
    p.add_argument("--chunk-size", type=int, default=None, help="exponents per chunk")
    p.add_argument("--batch-size", type=int, default=None, help="keys per normalization batch")
    p.add_argument("--engine", choices=("table", "coincurve"), default=None, help="point multiplication engine")
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("survey", help="list subgroup orders of a curve's scalar field")
    p.add_argument("--curve", default="secp256k1", choices=sorted(survey.PROFILES))
    p.add_argument("--budget", type=int, required=True, help="largest subgroup order to list")
    p.add_argument("--rate", type=float, default=50_000.0, help="keys per second for time estimates")
    p.add_argument("--rows", type=int, default=None, help="show only the largest N orders")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=_cmd_survey)

    p = sub.add_parser("build-index", help="build a corpus index from address dumps")
    p.add_argument("--chain", type=_chain, required=True)
    p.add_argument("--input", nargs="+", required=True, help="dump files, one address per line")
    p.add_argument("--fp-rate", type=float, default=None, help="prefilter false-positive rate")
    p.add_argument("--corpus-dir", default=None)
    p.add_argument("--name", default=None, help="index name (default: the chain id)")
    p.set_defaults(func=_cmd_build_index)

    p = sub.add_parser("ingest-blocks", help="extract addresses from block documents into a dump")
    p.add_argument("--chain", type=_chain, required=True)
    p.add_argument("--from", dest="from_height", type=int, required=True)
    p.add_argument("--to", dest="to_height", type=int, required=True)
    p.add_argument("--recorded", default=None, help="directory of <height>.json block documents")
    p.add_argument("--url", default=None, help="block source endpoint (default: SWEEP_RPC_URL)")
    p.add_argument("--paged", action="store_true", help="paged REST explorer instead of JSON-RPC")
    p.add_argument("--out", required=True, help="dump file, appended to")
    p.set_defaults(func=_cmd_ingest_blocks)

    p = sub.add_parser("index-info", help="show a corpus index's metadata")
    p.add_argument("--chain", type=_chain, required=True)
    p.add_argument("--corpus-dir", default=None)
    p.add_argument("--name", default=None)
    p.set_defaults(func=_cmd_index_info)

    p = sub.add_parser("verify-hits", help="re-derive every hit from its coset and exponent")
    p.add_argument("path", help="hits file")
    p.set_defaults(func=_cmd_verify_hits)

    p = sub.add_parser("generators", help="print, check or write the coset generators")
    p.add_argument("--path", default=settings.GENERATORS_FIXTURE)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--write", action="store_true")
    group.add_argument("--check", action="store_true")
    p.set_defaults(func=_cmd_generators)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="0.0.0.0")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    try:
        return args.func(args)
    except (SweepError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except KeyboardInterrupt:
        logger.warning("Interrupted; completed chunks are in the checkpoint")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
