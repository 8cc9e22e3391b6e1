from fastapi import APIRouter, HTTPException
from fastapi.concurrency import run_in_threadpool
from app.core.config import settings
from app.core.errors import SweepError
from app.schemas.requests import DeriveRequest
from app.schemas.responses import AddressOut, DeriveResponse
from app.services.curve import get_table
from app.services.derivation import derive_all, is_trivial
from app.services.scalar_group import locate_in_coset, scalar_from_hex
import logging

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/api", tags=["derive"])


@router.post("/derive", response_model=DeriveResponse)
async def derive_addresses(request: DeriveRequest):
    """
    Derive every address of a private key for the requested chains.

    Example Request:
    POST http://localhost:8000/api/derive
    {
        "key": "0000000000000000000000000000000000000000000000000000000000000001",
        "chains": ["btc", "eth"]
    }
    """
    try:
        k = scalar_from_hex(request.key)
        addresses = derive_all(k, request.chains, get_table(settings.WINDOW_BITS), request.kinds)
        located = await run_in_threadpool(locate_in_coset, k)
        return DeriveResponse(
            key=k.hex(),
            trivial=is_trivial(k),
            location={"coset": located[0], "exponent": located[1]} if located else None,
            addresses=[AddressOut(**a.to_dict()) for a in addresses],
        )

    except SweepError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error in derive endpoint: {str(e)}")
        raise HTTPException(
            status_code=500,
            detail=f"Error deriving addresses: {str(e)}"
        )
