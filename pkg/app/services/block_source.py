"""
Block document sources for corpus ingestion.

Every source returns the block at a height as a dict in the node-RPC shape
(block -> "tx" | "transactions" -> "vout" -> script descriptor). Credentials and
endpoints come from settings, never from code.
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Protocol, Union
import itertools
import json
import logging
import time

import httpx

from app.core.config import settings
from app.core.errors import SourceError

logger = logging.getLogger(__name__)


class BlockSource(Protocol):
    def get_block(self, height: int) -> Dict[str, Any]:
        ...

    def close(self) -> None:
        ...


class RecordedBlockSource:
    """Replays recorded block documents stored as <directory>/<height>.json."""

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)

    def get_block(self, height: int) -> Dict[str, Any]:
        path = self.directory / f"{height}.json"
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise SourceError(f"no recorded block at {path}", height) from None
        except (OSError, ValueError) as e:
            raise SourceError(f"unreadable block document {path}: {e}", height) from e

    def close(self) -> None:
        pass


class _HttpSource:
    def __init__(
        self,
        base_url: Optional[str] = None,
        token: Optional[str] = None,
        timeout: Optional[int] = None,
        max_retries: Optional[int] = None,
        pacing: Optional[float] = None,
        backoff: float = 1.0,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.base_url = (base_url or settings.RPC_URL).rstrip("/")
        self.max_retries = max_retries if max_retries is not None else settings.RPC_MAX_RETRIES
        self.pacing = pacing if pacing is not None else settings.RPC_PACING
        self.backoff = backoff
        token = token if token is not None else settings.RPC_TOKEN
        headers = {"Content-Type": "application/json"}
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self.client = httpx.Client(
            timeout=timeout if timeout is not None else settings.RPC_TIMEOUT,
            headers=headers,
            transport=transport,
        )
        self._last_request = 0.0

    def _pace(self) -> None:
        if self.pacing > 0:
            wait = self._last_request + self.pacing - time.monotonic()
            if wait > 0:
                time.sleep(wait)
        self._last_request = time.monotonic()

    def _request(self, method: str, url: str, height: int, **kwargs) -> Any:
        """Send with retry and exponential backoff; SourceError after the last attempt."""
        last_error = "no attempt made"
        for attempt in range(self.max_retries):
            self._pace()
            try:
                response = self.client.request(method, url, **kwargs)
                if response.status_code == 200:
                    return response.json()
                last_error = f"HTTP {response.status_code}: {response.text[:200]}"
                logger.error(f"Block source returned {response.status_code} at height {height}")
            except httpx.TimeoutException:
                last_error = "request timeout"
                logger.error(f"Timeout fetching height {height}, attempt {attempt + 1}")
            except (httpx.HTTPError, ValueError) as e:
                last_error = f"connection error: {e}"
                logger.error(f"Error fetching height {height}: {str(e)}")
            if attempt < self.max_retries - 1:
                time.sleep(self.backoff * 2 ** attempt)
        raise SourceError(last_error, height)

    def close(self) -> None:
        self.client.close()


class RpcBlockSource(_HttpSource):
    """Bitcoin-family JSON-RPC: getblockhash, then getblock <hash> 2."""

    _ids = itertools.count(1)

    def _call(self, method: str, params: List[Any], height: int) -> Any:
        body = {"jsonrpc": "1.0", "id": next(self._ids), "method": method, "params": params}
        reply = self._request("POST", self.base_url, height, json=body)
        if not isinstance(reply, dict):
            raise SourceError(f"malformed {method} reply", height)
        if reply.get("error"):
            raise SourceError(f"{method} failed: {reply['error']}", height)
        return reply.get("result")

    def get_block(self, height: int) -> Dict[str, Any]:
        block_hash = self._call("getblockhash", [height], height)
        block = self._call("getblock", [block_hash, 2], height)
        if not isinstance(block, dict):
            raise SourceError("getblock returned no block document", height)
        return block


class PagedBlockSource(_HttpSource):
    """REST explorers that page block transactions: GET /block/<height>?page=N."""

    def get_block(self, height: int) -> Dict[str, Any]:
        page, pages = 1, 1
        block: Dict[str, Any] = {}
        txs: List[Any] = []
        while page <= pages:
            doc = self._request("GET", f"{self.base_url}/block/{height}", height, params={"page": page})
            if not isinstance(doc, dict):
                raise SourceError("malformed block page", height)
            if not block:
                block = {k: v for k, v in doc.items() if k != "txs"}
            txs.extend(doc.get("txs") or [])
            pages = int(doc.get("totalPages") or 1)
            page += 1
        block["tx"] = txs
        return block
