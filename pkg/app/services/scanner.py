"""
Coset sweep orchestration.

The job's exponent ranges are cut into chunks; worker processes pull chunks from
the executor queue, each holding its own read-only PrecompTable and corpus
indices. The parent process is the only writer of the hit file and the
checkpoint, and records a chunk as completed only after its hits are on disk.
"""
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Optional, Set, Tuple, Union
import logging
import time

from app.core.config import settings
from app.core.errors import ConfigError, SweepError
from app.models.checkpoint import Checkpoint
from app.schemas.chains import ChainId
from app.schemas.scan import HitRecord, ScanJob, ScanSummary
from app.services.corpus import CorpusIndex, lookup_form, open_index
from app.services.curve import PrecompTable, get_table, scalar_mul_batch
from app.services.derivation import addresses_for_point, derive
from app.services.scalar_group import (
    check_generator_fixture,
    coset_element,
    coset_iter,
    coset_spec,
    is_trivial_key,
)

logger = logging.getLogger(__name__)


class Chunk(NamedTuple):
    coset: int
    start: int
    count: int


def plan_chunks(job: ScanJob, chunk_size: Optional[int] = None) -> List[Chunk]:
    """Cover [start, end) of every requested coset exactly once, in a fixed order."""
    size = chunk_size or job.chunk_size
    if size < 1:
        raise ConfigError("chunk size must be at least 1")
    chunks: List[Chunk] = []
    for coset in sorted(job.cosets):
        for start in range(job.start, job.end, size):
            chunks.append(Chunk(coset, start, min(size, job.end - start)))
    return chunks


def open_indices(job: ScanJob) -> Dict[ChainId, CorpusIndex]:
    return {chain: open_index(job.corpus_dir, chain) for chain in job.chains}


def scan_chunk(
    chunk: Chunk,
    job: ScanJob,
    table: PrecompTable,
    indices: Dict[ChainId, CorpusIndex],
) -> List[HitRecord]:
    """Derive every address of every key in the chunk and report corpus members."""
    combos = job.combos()
    spec = coset_spec(chunk.coset)
    hits: List[HitRecord] = []
    pairs = list(coset_iter(spec, chunk.start, chunk.count))
    for offset in range(0, len(pairs), job.batch_size):
        batch = pairs[offset:offset + job.batch_size]
        points = scalar_mul_batch((k for _, k in batch), table, job.batch_size, job.engine)
        if len(points) != len(batch):
            raise SweepError(f"chunk {chunk} lost keys during point multiplication")
        for (j, k), point in zip(batch, points):
            for addr in addresses_for_point(k, point, combos, chunk.coset, j):
                if indices[addr.chain].contains(lookup_form(addr.chain, addr.text)):
                    hits.append(
                        HitRecord(
                            chain=addr.chain,
                            kind=addr.kind,
                            address=addr.text,
                            key=addr.key_hex,
                            coset=chunk.coset,
                            exponent=j,
                            trivial=is_trivial_key(k),
                        )
                    )
    return hits


# Per-process worker state, set by _init_worker.
_worker: Optional[Tuple[ScanJob, PrecompTable, Dict[ChainId, CorpusIndex]]] = None


def _init_worker(job_json: str) -> None:
    global _worker
    job = ScanJob.model_validate_json(job_json)
    _worker = (job, get_table(job.window_bits), open_indices(job))


def _run_chunk(chunk_id: int, chunk: Chunk) -> Tuple[int, int, List[str]]:
    job, table, indices = _worker
    hits = scan_chunk(chunk, job, table, indices)
    return chunk_id, chunk.count, [hit.model_dump_json() for hit in hits]


def _existing_hits(path: Path) -> Set[tuple]:
    """Identities of hit lines already written by an earlier, interrupted run."""
    seen: Set[tuple] = set()
    if not path.exists():
        return seen
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                seen.add(HitRecord.model_validate_json(line).identity())
    return seen


class _Sinks:
    """Single owner of the hit file and the checkpoint."""

    def __init__(self, job: ScanJob, checkpoint: Checkpoint):
        self.job = job
        self.checkpoint = checkpoint
        self.output = Path(job.output)
        self.output.parent.mkdir(parents=True, exist_ok=True)
        self.seen = _existing_hits(self.output)
        self.fh = open(self.output, "a", encoding="utf-8", buffering=1)
        self.keys_this_run = 0

    def complete(self, chunk_id: int, keys: int, hit_lines: Iterable[str]) -> None:
        for line in hit_lines:
            hit = HitRecord.model_validate_json(line)
            # Completed chunks never rerun, so a seen line was written but not yet counted.
            self.checkpoint.hits += 1
            if hit.identity() in self.seen:
                continue
            self.seen.add(hit.identity())
            self.fh.write(line + "\n")
            logger.info(
                f"HIT {hit.chain.value} {hit.kind.value} {hit.address} "
                f"coset={hit.coset} exponent={hit.exponent} trivial={hit.trivial}"
            )
        self.fh.flush()
        self.checkpoint.completed.add(chunk_id)
        self.checkpoint.keys_scanned += keys
        self.keys_this_run += keys
        if self.job.checkpoint:
            self.checkpoint.save(self.job.checkpoint)

    def close(self) -> None:
        self.fh.close()


def run(job: ScanJob) -> ScanSummary:
    """Execute every pending chunk of the job; resumable through job.checkpoint."""
    started = time.monotonic()
    check_generator_fixture(settings.GENERATORS_FIXTURE)
    indices = open_indices(job)
    chunks = plan_chunks(job)
    checkpoint = Checkpoint.resume(job.checkpoint, job.fingerprint(), job.chunk_size)
    pending = [(cid, chunk) for cid, chunk in enumerate(chunks) if cid not in checkpoint.completed]
    logger.info(
        f"Scanning {len(job.cosets)} coset(s) x [{job.start}, {job.end}) over "
        f"{', '.join(c.value for c in job.chains)}: {len(pending)}/{len(chunks)} chunks pending, "
        f"{job.threads} worker(s)"
    )

    sinks = _Sinks(job, checkpoint)
    try:
        if job.threads == 1 or len(pending) <= 1:
            table = get_table(job.window_bits)
            for cid, chunk in pending:
                hits = scan_chunk(chunk, job, table, indices)
                sinks.complete(cid, chunk.count, [hit.model_dump_json() for hit in hits])
                logger.debug(f"Chunk {cid} done: coset {chunk.coset} [{chunk.start}, {chunk.start + chunk.count})")
        else:
            _run_pool(job, pending, sinks)
    finally:
        sinks.close()

    duration = time.monotonic() - started
    keys_this_run = sinks.keys_this_run
    summary = ScanSummary(
        keys=checkpoint.keys_scanned,
        keys_this_run=keys_this_run,
        addresses=keys_this_run * len(job.combos()),
        hits=checkpoint.hits,
        chunks=len(chunks),
        throughput=keys_this_run / duration if duration > 0 else 0.0,
        duration=duration,
    )
    logger.info(f"Scan finished: {summary.keys} keys, {summary.hits} hits, {summary.throughput:.0f} keys/s")
    return summary


def _run_pool(job: ScanJob, pending: List[Tuple[int, Chunk]], sinks: _Sinks) -> None:
    with ProcessPoolExecutor(
        max_workers=job.threads,
        initializer=_init_worker,
        initargs=(job.model_dump_json(),),
    ) as pool:
        queue = iter(pending)
        in_flight = set()
        # Keep a bounded number of chunks queued so completed work is checkpointed steadily.
        for cid, chunk in queue:
            in_flight.add(pool.submit(_run_chunk, cid, chunk))
            if len(in_flight) >= job.threads * 2:
                break
        while in_flight:
            done, in_flight = wait(in_flight, return_when=FIRST_COMPLETED)
            for future in done:
                cid, keys, lines = future.result()
                sinks.complete(cid, keys, lines)
                nxt = next(queue, None)
                if nxt is not None:
                    in_flight.add(pool.submit(_run_chunk, *nxt))


def verify_hits(path: Union[str, Path], table: Optional[PrecompTable] = None) -> Dict[str, object]:
    """Re-derive every hit line from (coset, exponent) and list the mismatches."""
    table = table or get_table(settings.WINDOW_BITS)
    checked = 0
    mismatches: List[Dict[str, object]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            hit = HitRecord.model_validate_json(line)
            checked += 1
            k = coset_element(coset_spec(hit.coset), hit.exponent)
            problems = []
            if k.hex() != hit.key:
                problems.append("key")
            if derive(k, hit.chain, hit.kind, table).text != hit.address:
                problems.append("address")
            if is_trivial_key(k) != hit.trivial:
                problems.append("trivial")
            if problems:
                mismatches.append({"line": lineno, "address": hit.address, "fields": problems})
    return {"checked": checked, "mismatches": mismatches}


def parse_cosets(text: str) -> List[int]:
    """'0', '0-7', '1,3,5' or 'all'."""
    text = text.strip().lower()
    if text == "all":
        return list(range(8))
    cosets: Set[int] = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = (int(x) for x in part.split("-", 1))
            cosets.update(range(lo, hi + 1))
        else:
            cosets.add(int(part))
    return sorted(cosets)

